#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace clonefuse {

enum class FragmentKind { original, plagiarized, non_plagiarized };

const char* fragment_kind_name(FragmentKind kind);
FragmentKind fragment_kind_from_name(const std::string& name);

// One source file. `id` is the path relative to the dataset root with '/'
// separators (task/kind/...), stable across machines.
struct CodeFragment {
    std::string id;
    std::string path;
    std::string source;
    std::string task;
    FragmentKind kind = FragmentKind::original;
};

// A labeled (original, variant) pair plus the execution-output feature.
struct PairExample {
    std::string id_a;
    std::string id_b;
    int label = 0;  // 1 = clone/plagiarized
    std::vector<double> out_feature;
    bool feature_available = false;
};

struct CorpusStats {
    size_t total_tokens = 0;
    size_t unique_tokens = 0;
    size_t min_tokens = 0;
    size_t max_tokens = 0;
    double avg_tokens = 0.0;
};

struct CorpusManifest {
    std::vector<CodeFragment> fragments;
    std::vector<PairExample> pairs;
    CorpusStats stats;

    const CodeFragment& fragment(const std::string& id) const;
    bool has_fragment(const std::string& id) const;
};

struct SplitSpec {
    double train_frac = 0.7;
    double val_frac = 0.15;
    double test_frac = 0.15;
    uint64_t seed = 0;

    void validate() const;  // fractions > 0, summing to 1 within 1e-9
};

struct SplitResult {
    std::vector<PairExample> train;
    std::vector<PairExample> val;
    std::vector<PairExample> test;
};

class IngestError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Walk an IR-Plag style tree: per-task folders, each with an `original`
// directory plus `plagiarized` / `non-plagiarized` variant directories.
// Emits one fragment per file and one pair per (original, variant) within a
// task, label 1 for plagiarized variants. Stats are populated from the lexer.
CorpusManifest ingest_irplag(const std::filesystem::path& root);

// Generic corpus: CSV with columns path_a, path_b, label (optional header).
CorpusManifest ingest_pairs_csv(const std::filesystem::path& csv_path);

// Seeded shuffle then floor/floor/remainder partition. Deterministic per
// (manifest, spec.seed); needs at least 3 pairs.
SplitResult split_dataset(const CorpusManifest& manifest, const SplitSpec& spec);

// Token statistics over the lexed fragments (comments excluded by the lexer).
CorpusStats corpus_stats(const CorpusManifest& manifest);

std::string manifest_to_json(const CorpusManifest& manifest);
CorpusManifest manifest_from_json(const std::string& text);
void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);
CorpusManifest load_manifest(const std::filesystem::path& path);

}  // namespace clonefuse
