#include "clonefuse/vocab.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "clonefuse/corpus.hpp"
#include "clonefuse/dataflow.hpp"

using nlohmann::json;

namespace clonefuse {

Vocabulary build_vocab(const CorpusManifest& manifest, size_t max_size) {
    if (max_size <= Vocabulary::kNumSpecials)
        throw std::runtime_error("vocabulary max_size must exceed the 4 special tokens");

    std::map<std::string, size_t> freq;  // ordered map fixes the tie order
    for (const auto& frag : manifest.fragments) {
        for (const auto& tok : lex(frag.source)) ++freq[tok.text];
    }

    std::vector<std::pair<std::string, size_t>> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    Vocabulary vocab;
    vocab.max_size = max_size;
    int next_id = Vocabulary::kNumSpecials;
    for (const auto& [text, count] : ranked) {
        if (static_cast<size_t>(next_id) >= max_size) break;
        vocab.token_to_id.emplace(text, next_id++);
    }
    return vocab;
}

EncodedPair encode_pair(const TokenSequence& seq_a, const TokenSequence& seq_b,
                        const Vocabulary& vocab, size_t max_len,
                        const std::vector<DataFlowEdge>& edges_a,
                        const std::vector<DataFlowEdge>& edges_b) {
    if (max_len < 5) throw std::runtime_error("max_len must be at least 5");

    size_t keep_a = seq_a.size();
    size_t keep_b = seq_b.size();
    const size_t budget = max_len - 3;  // CLS + two SEPs always survive

    if (keep_a + keep_b > budget) {
        const size_t total = keep_a + keep_b;
        size_t fa = keep_a * budget / total;
        size_t fb = keep_b * budget / total;
        // The two floors can leave one slot unused; the longer side gets it,
        // ties favor a.
        if (fa + fb < budget) {
            if (keep_b > keep_a)
                ++fb;
            else
                ++fa;
        }
        keep_a = fa;
        keep_b = fb;
    }

    EncodedPair enc;
    enc.input_ids.assign(max_len, Vocabulary::kPad);
    enc.attention_mask.assign(max_len, 0);

    size_t pos = 0;
    auto put = [&](int id) {
        enc.input_ids[pos] = id;
        enc.attention_mask[pos] = 1;
        ++pos;
    };

    put(Vocabulary::kCls);
    for (size_t i = 0; i < keep_a; ++i) put(vocab.id_of(seq_a[i].text));
    put(Vocabulary::kSep);
    const size_t b_offset = pos;
    for (size_t i = 0; i < keep_b; ++i) put(vocab.id_of(seq_b[i].text));
    put(Vocabulary::kSep);

    // Remap def->use edges into packed positions, dropping any edge with a
    // truncated endpoint.
    for (const auto& e : edges_a) {
        if (e.def_index < keep_a && e.use_index < keep_a)
            enc.dataflow_edges.emplace_back(static_cast<int>(1 + e.def_index),
                                            static_cast<int>(1 + e.use_index));
    }
    for (const auto& e : edges_b) {
        if (e.def_index < keep_b && e.use_index < keep_b)
            enc.dataflow_edges.emplace_back(static_cast<int>(b_offset + e.def_index),
                                            static_cast<int>(b_offset + e.use_index));
    }
    return enc;
}

std::string Vocabulary::to_json() const {
    json specials{{"CLS", kCls}, {"SEP", kSep}, {"PAD", kPad}, {"UNK", kUnk}};
    json tokens = json::object();
    for (const auto& [text, id] : token_to_id) tokens[text] = id;
    return json{{"specials", specials}, {"tokens", tokens}, {"max_size", max_size}}.dump(2);
}

Vocabulary Vocabulary::from_json(const std::string& text) {
    json doc = json::parse(text);
    Vocabulary vocab;
    vocab.max_size = doc.at("max_size").get<size_t>();
    for (const auto& [tok, id] : doc.at("tokens").items())
        vocab.token_to_id.emplace(tok, id.get<int>());
    return vocab;
}

}  // namespace clonefuse
