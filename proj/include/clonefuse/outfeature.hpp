#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "clonefuse/corpus.hpp"

namespace clonefuse {

enum class ExecStatus { ok, compile_error, runtime_error, timeout };

const char* exec_status_name(ExecStatus status);
ExecStatus exec_status_from_name(const std::string& name);

struct ExecutionResult {
    ExecStatus status = ExecStatus::ok;
    std::string stdout_text;
    double duration_sec = 0.0;
};

enum class ExecutorMode { scripted, subprocess };

struct FixtureOutput {
    std::string stdout_text;
    ExecStatus status = ExecStatus::ok;
};

struct ExecutorConfig {
    ExecutorMode mode = ExecutorMode::scripted;
    std::string command_template;  // subprocess mode; must contain {file}
    double timeout_sec = 10.0;
    std::map<std::string, FixtureOutput> fixtures;  // scripted mode, by fragment id
    size_t feature_dim = 1;
    double fallback_value = 0.5;

    void validate() const;
};

// Scripted mode replays the fixture output; subprocess mode runs the command
// on the fragment file with a wall-clock timeout and stdout capped at 1 MiB.
ExecutionResult execute_fragment(const CodeFragment& fragment, const ExecutorConfig& cfg);

// Cosine similarity over term-frequency vectors of the normalized outputs
// (trimmed, whitespace collapsed, lowercased). Both empty -> 1, one empty -> 0.
double output_similarity(const std::string& out_a, const std::string& out_b);

struct OutputFeature {
    std::vector<double> value;
    bool available = false;
};

using SimilarityScorer = std::function<double(const std::string&, const std::string&)>;

// Executes both fragments of a pair. value[0] is the output similarity when
// both runs succeed; otherwise the whole vector is the configured fallback
// and available is false. Components past index 0 are reserved.
OutputFeature compute_pair_feature(const PairExample& pair, const CorpusManifest& manifest,
                                   const ExecutorConfig& cfg,
                                   const SimilarityScorer& scorer = output_similarity);

// features.json cache: pair key -> {value, available}.
using FeatureMap = std::map<std::string, OutputFeature>;

std::string pair_key(const PairExample& pair);
FeatureMap compute_all_features(const CorpusManifest& manifest, const ExecutorConfig& cfg);

// Writes pair features back onto manifest.pairs (fallback for missing keys).
void attach_features(CorpusManifest& manifest, const FeatureMap& features,
                     const ExecutorConfig& cfg);

std::string features_to_json(const FeatureMap& features);
FeatureMap features_from_json(const std::string& text);
void save_features(const FeatureMap& features, const std::filesystem::path& path);
FeatureMap load_features(const std::filesystem::path& path);

}  // namespace clonefuse
