#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "clonefuse/lexer.hpp"

namespace clonefuse {

struct CorpusManifest;

// Token-id table. Special ids are fixed and never evicted.
struct Vocabulary {
    static constexpr int kCls = 0;
    static constexpr int kSep = 1;
    static constexpr int kPad = 2;
    static constexpr int kUnk = 3;
    static constexpr int kNumSpecials = 4;

    std::unordered_map<std::string, int> token_to_id;
    size_t max_size = 0;

    size_t size() const { return token_to_id.size() + kNumSpecials; }

    int id_of(const std::string& text) const {
        auto it = token_to_id.find(text);
        return it == token_to_id.end() ? kUnk : it->second;
    }

    std::string to_json() const;
    static Vocabulary from_json(const std::string& text);
};

// Model input for one code pair: [CLS] a.. [SEP] b.. [SEP] padded to max_len.
struct EncodedPair {
    std::vector<int> input_ids;
    std::vector<int> attention_mask;  // 1 on non-PAD positions
    // def->use positions remapped into the packed sequence; consumed by the
    // optional attention bias.
    std::vector<std::pair<int, int>> dataflow_edges;
};

// Specials first, then tokens by descending corpus frequency, ties broken
// lexicographically. max_size must leave room for the specials.
Vocabulary build_vocab(const CorpusManifest& manifest, size_t max_size);

struct DataFlowEdge;

EncodedPair encode_pair(const TokenSequence& seq_a, const TokenSequence& seq_b,
                        const Vocabulary& vocab, size_t max_len,
                        const std::vector<DataFlowEdge>& edges_a = {},
                        const std::vector<DataFlowEdge>& edges_b = {});

}  // namespace clonefuse
