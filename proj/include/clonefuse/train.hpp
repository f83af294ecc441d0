#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "clonefuse/corpus.hpp"
#include "clonefuse/dataflow.hpp"
#include "clonefuse/metrics.hpp"
#include "clonefuse/model.hpp"
#include "clonefuse/outfeature.hpp"

namespace clonefuse {

struct TrainConfig {
    size_t epochs = 30;
    size_t batch_size = 16;
    double learning_rate = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 0.0;
    uint64_t seed = 0;
    size_t num_runs = 1;
    bool use_feature = true;  // false = ablation: constant feature input

    void validate() const;
};

struct EpochRecord {
    double train_loss = 0.0;
    Metrics val;
};

struct RunHistory {
    std::vector<EpochRecord> epochs;
    size_t selected_epoch = 0;  // maximizes validation f-measure, earliest on ties
    Metrics test;
};

// Lexes and encodes manifest pairs once; shared read-only across runs.
class PairEncoder {
public:
    PairEncoder(const CorpusManifest& manifest, const Vocabulary& vocab, const ModelConfig& cfg);

    struct Example {
        EncodedPair encoded;
        Eigen::VectorXd f_out;
        int label;
    };

    Example encode(const PairExample& pair) const;

private:
    const CorpusManifest& manifest_;
    const Vocabulary& vocab_;
    const ModelConfig& cfg_;
    struct FragmentCache {
        TokenSequence tokens;
        std::vector<DataFlowEdge> edges;
    };
    std::unordered_map<std::string, FragmentCache> cache_;
};

struct TrainOutput {
    Parameters params;  // from the best validation epoch
    RunHistory history;
};

// Adam over seeded-shuffled mini-batches with per-epoch reshuffling and
// validation-based model selection. Fully determined by the configs' seeds.
TrainOutput train_model(const SplitResult& splits, const PairEncoder& encoder,
                        const ModelConfig& model_cfg, const TrainConfig& train_cfg);

struct RunResult {
    uint64_t seed = 0;
    RunHistory history;
};

struct MetricSummary {
    double mean_precision = 0.0, std_precision = 0.0;
    double mean_recall = 0.0, std_recall = 0.0;
    double mean_f = 0.0, std_f = 0.0;  // population standard deviations
};

struct ExperimentResult {
    std::vector<RunResult> runs;
    MetricSummary aggregate;
    Parameters first_run_params;  // best-epoch parameters of the base-seed run
};

// Runs num_runs independent trainings; run i reseeds split, init, shuffling
// and dropout with base seed + i. Runs execute in parallel but aggregate in
// run order.
ExperimentResult run_experiment(const CorpusManifest& manifest, const FeatureMap& features,
                                const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                                const SplitSpec& split_spec);

MetricSummary summarize_runs(const std::vector<RunResult>& runs);

}  // namespace clonefuse
