#pragma once

#include <cstddef>
#include <vector>

#include "clonefuse/lexer.hpp"

namespace clonefuse {

// Flat def->use link between two identifier tokens of the same name.
struct DataFlowEdge {
    size_t def_index;
    size_t use_index;
};

// Single-pass def-use heuristic, no scoping: `name =` (but not `==` etc.)
// defines the name, any later occurrence of the same name is a use of the
// most recent definition. A definition only takes effect at the end of its
// statement (the next `;`), so in `x = x + 1;` the right-hand `x` still
// refers to the previous definition.
std::vector<DataFlowEdge> extract_dataflow(const TokenSequence& tokens);

}  // namespace clonefuse
