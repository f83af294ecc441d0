#include "clonefuse/dataflow.hpp"

#include <string>
#include <unordered_map>

namespace clonefuse {

std::vector<DataFlowEdge> extract_dataflow(const TokenSequence& tokens) {
    std::vector<DataFlowEdge> edges;
    std::unordered_map<std::string, size_t> current_def;
    std::vector<std::pair<std::string, size_t>> pending;

    for (size_t i = 0; i < tokens.size(); ++i) {
        const Token& t = tokens[i];

        if (t.kind == TokenKind::punctuation && t.text == ";") {
            for (auto& [name, idx] : pending) current_def[name] = idx;
            pending.clear();
            continue;
        }
        if (t.kind != TokenKind::identifier) continue;

        bool is_def = i + 1 < tokens.size() && tokens[i + 1].kind == TokenKind::op &&
                      tokens[i + 1].text == "=";
        if (is_def) {
            pending.emplace_back(t.text, i);
        } else if (auto it = current_def.find(t.text); it != current_def.end()) {
            edges.push_back({it->second, i});
        }
    }
    return edges;
}

}  // namespace clonefuse
