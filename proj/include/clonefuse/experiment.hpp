#pragma once

#include <filesystem>
#include <string>

#include "clonefuse/corpus.hpp"
#include "clonefuse/outfeature.hpp"
#include "clonefuse/train.hpp"

namespace clonefuse {

// One JSON document drives the whole pipeline; CLI flags override fields.
struct ExperimentConfig {
    std::string name = "fusion-transformer";
    std::filesystem::path dataset_root;  // IR-Plag tree or a pairs.csv file
    SplitSpec split;
    ExecutorConfig executor;
    ModelConfig model;
    TrainConfig train;
    std::filesystem::path output_dir = ".";

    void validate() const;
    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);
};

// Directory ingestion vs. pairs.csv is decided by the path.
CorpusManifest ingest_auto(const std::filesystem::path& root);

// results.json: config echo, per-run seed/history/test metrics, aggregate
// mean and population std. Stable key order, byte-identical across reruns.
std::string results_to_json(const ExperimentConfig& cfg, const ExperimentResult& result);

void save_results(const ExperimentConfig& cfg, const ExperimentResult& result,
                  const std::filesystem::path& path);

// Pulls (name, aggregate means) out of a results.json for the comparison table.
ComparisonRow results_row_from_json(const std::string& text);

}  // namespace clonefuse
