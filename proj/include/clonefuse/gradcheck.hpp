#pragma once

#include <cstdint>

#include "clonefuse/model.hpp"

namespace clonefuse {

struct GradCheckReport {
    double max_rel_err = 0.0;
    size_t probes = 0;
    size_t coords_checked = 0;
    bool pass = false;
};

// Compares reverse-mode gradients against central finite differences
// (h = 1e-5) on randomly drawn (parameters, input, feature, label) tuples,
// sampling at least 200 coordinates per probe. Dropout masks are frozen per
// probe so both sides differentiate the same function.
GradCheckReport gradient_check(const ModelConfig& cfg, uint64_t seed, size_t n_probes,
                               double tol);

}  // namespace clonefuse
