#include "clonefuse/train.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

#include "clonefuse/dataflow.hpp"

namespace clonefuse {

namespace {

// Seed stream tags; one base seed fans out to independent substreams.
constexpr uint64_t kStreamInit = 101;
constexpr uint64_t kStreamDropout = 202;
constexpr uint64_t kStreamShuffle = 303;

struct AdamState {
    Parameters m;
    Parameters v;
    size_t step = 0;
};

void adam_update(Parameters& params, const Gradients& grads, AdamState& state,
                 const TrainConfig& cfg) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

    auto pv = tensor_views(params);
    auto gv = tensor_views(const_cast<Gradients&>(grads));
    auto mv = tensor_views(state.m);
    auto vv = tensor_views(state.v);

    for (size_t t = 0; t < pv.size(); ++t) {
        for (size_t i = 0; i < pv[t].size; ++i) {
            double g = gv[t].data[i] + cfg.weight_decay * pv[t].data[i];
            double& m = mv[t].data[i];
            double& v = vv[t].data[i];
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
            pv[t].data[i] -= cfg.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + cfg.adam_eps);
        }
    }
}

Metrics evaluate_split(const Parameters& params, const ModelConfig& cfg,
                       const std::vector<PairEncoder::Example>& examples) {
    if (examples.empty()) return Metrics{};
    std::vector<Prediction> predictions;
    predictions.reserve(examples.size());
    for (const auto& ex : examples) {
        PredictOutput p = predict(params, cfg, ex.encoded, ex.f_out);
        predictions.push_back({p.prob, ex.label});
    }
    return compute_metrics(predictions);
}

}  // namespace

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::runtime_error("batch_size must be at least 1");
    if (learning_rate <= 0) throw std::runtime_error("learning_rate must be positive");
    if (num_runs < 1) throw std::runtime_error("num_runs must be at least 1");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
        throw std::runtime_error("adam betas must lie in [0,1)");
    if (adam_eps <= 0) throw std::runtime_error("adam_eps must be positive");
    if (weight_decay < 0) throw std::runtime_error("weight_decay must be non-negative");
}

PairEncoder::PairEncoder(const CorpusManifest& manifest, const Vocabulary& vocab,
                         const ModelConfig& cfg)
    : manifest_(manifest), vocab_(vocab), cfg_(cfg) {
    for (const auto& frag : manifest.fragments) {
        FragmentCache entry;
        entry.tokens = lex(frag.source);
        if (cfg.dataflow_bias) entry.edges = extract_dataflow(entry.tokens);
        cache_.emplace(frag.id, std::move(entry));
    }
}

PairEncoder::Example PairEncoder::encode(const PairExample& pair) const {
    auto it_a = cache_.find(pair.id_a);
    auto it_b = cache_.find(pair.id_b);
    if (it_a == cache_.end() || it_b == cache_.end())
        throw std::runtime_error("pair references fragment missing from manifest: " +
                                 pair.id_a + " / " + pair.id_b);

    Example ex;
    ex.encoded = encode_pair(it_a->second.tokens, it_b->second.tokens, vocab_, cfg_.max_len,
                             it_a->second.edges, it_b->second.edges);
    ex.label = pair.label;

    ex.f_out = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(cfg_.feature_dim), 0.5);
    for (size_t i = 0; i < pair.out_feature.size() && i < cfg_.feature_dim; ++i)
        ex.f_out(static_cast<Eigen::Index>(i)) = pair.out_feature[i];
    return ex;
}

TrainOutput train_model(const SplitResult& splits, const PairEncoder& encoder,
                        const ModelConfig& model_cfg, const TrainConfig& train_cfg) {
    model_cfg.validate();
    train_cfg.validate();
    if (splits.train.empty()) throw std::runtime_error("training split is empty");

    auto encode_all = [&](const std::vector<PairExample>& pairs) {
        std::vector<PairEncoder::Example> out;
        out.reserve(pairs.size());
        for (const auto& p : pairs) out.push_back(encoder.encode(p));
        return out;
    };
    auto train_set = encode_all(splits.train);
    auto val_set = encode_all(splits.val);
    auto test_set = encode_all(splits.test);

    // Ablation: identical architecture, constant feature input.
    if (!train_cfg.use_feature) {
        const Eigen::VectorXd constant =
            Eigen::VectorXd::Constant(static_cast<Eigen::Index>(model_cfg.feature_dim), 0.5);
        for (auto* set : {&train_set, &val_set, &test_set})
            for (auto& ex : *set) ex.f_out = constant;
    }

    ModelConfig run_cfg = model_cfg;
    run_cfg.seed = derive_seed(train_cfg.seed, kStreamInit);
    Parameters params = init_params(run_cfg);

    AdamState adam{Parameters::zeros(run_cfg), Parameters::zeros(run_cfg), 0};
    Rng dropout_rng(derive_seed(train_cfg.seed, kStreamDropout));

    RunHistory history;
    Parameters best_params = params;
    double best_f = -1.0;

    std::vector<size_t> order(train_set.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (size_t epoch = 0; epoch < train_cfg.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(derive_seed(train_cfg.seed, kStreamShuffle), epoch));
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        for (size_t start = 0; start < order.size(); start += train_cfg.batch_size) {
            const size_t end = std::min(order.size(), start + train_cfg.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(end - start);

            Gradients grads = Parameters::zeros(run_cfg);
            for (size_t i = start; i < end; ++i) {
                const auto& ex = train_set[order[i]];
                ForwardOptions opts;
                opts.train = true;
                opts.want_trace = true;
                opts.dropout_rng = &dropout_rng;
                ForwardOutput out = forward(params, run_cfg, ex.encoded, ex.f_out, opts);
                double loss = cross_entropy(out.logits, ex.label);
                if (!std::isfinite(loss))
                    throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) +
                                             ", example " + std::to_string(order[i]));
                loss_sum += loss;
                accumulate_gradients(params, run_cfg, *out.trace, ex.label, grads, inv_batch);
            }
            adam_update(params, grads, adam, train_cfg);
        }

        EpochRecord record;
        record.train_loss = loss_sum / static_cast<double>(train_set.size());
        record.val = evaluate_split(params, run_cfg, val_set);
        history.epochs.push_back(record);

        if (record.val.f_measure > best_f) {
            best_f = record.val.f_measure;
            best_params = params;
            history.selected_epoch = epoch;
        }
    }

    if (train_cfg.epochs == 0) best_params = params;  // no updates happened

    history.test = evaluate_split(best_params, run_cfg, test_set);
    return {std::move(best_params), std::move(history)};
}

MetricSummary summarize_runs(const std::vector<RunResult>& runs) {
    MetricSummary s;
    if (runs.empty()) return s;
    const double n = static_cast<double>(runs.size());

    auto accumulate = [&](auto getter, double& mean, double& stddev) {
        double sum = 0.0;
        for (const auto& r : runs) sum += getter(r);
        mean = sum / n;
        double var = 0.0;
        for (const auto& r : runs) {
            double d = getter(r) - mean;
            var += d * d;
        }
        stddev = std::sqrt(var / n);
    };
    accumulate([](const RunResult& r) { return r.history.test.precision; }, s.mean_precision,
               s.std_precision);
    accumulate([](const RunResult& r) { return r.history.test.recall; }, s.mean_recall,
               s.std_recall);
    accumulate([](const RunResult& r) { return r.history.test.f_measure; }, s.mean_f, s.std_f);
    return s;
}

ExperimentResult run_experiment(const CorpusManifest& manifest, const FeatureMap& features,
                                const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                                const SplitSpec& split_spec) {
    train_cfg.validate();

    CorpusManifest featured = manifest;
    ExecutorConfig feature_defaults;
    feature_defaults.feature_dim = model_cfg.feature_dim;
    attach_features(featured, features, feature_defaults);

    Vocabulary vocab = build_vocab(featured, model_cfg.vocab_size);
    PairEncoder encoder(featured, vocab, model_cfg);

    struct RunOutput {
        RunResult result;
        Parameters params;
    };

    auto run_one = [&](size_t run_index) {
        const uint64_t run_seed = train_cfg.seed + run_index;
        SplitSpec spec = split_spec;
        spec.seed = run_seed;
        SplitResult splits = split_dataset(featured, spec);

        TrainConfig run_train = train_cfg;
        run_train.seed = run_seed;
        TrainOutput out = train_model(splits, encoder, model_cfg, run_train);

        RunOutput output;
        output.result.seed = run_seed;
        output.result.history = std::move(out.history);
        if (run_index == 0) output.params = std::move(out.params);
        return output;
    };

    std::vector<std::future<RunOutput>> futures;
    futures.reserve(train_cfg.num_runs);
    for (size_t i = 0; i < train_cfg.num_runs; ++i)
        futures.push_back(std::async(std::launch::async, run_one, i));

    ExperimentResult result;
    for (size_t i = 0; i < futures.size(); ++i) {
        RunOutput output = futures[i].get();
        result.runs.push_back(std::move(output.result));
        if (i == 0) result.first_run_params = std::move(output.params);
    }
    result.aggregate = summarize_runs(result.runs);
    return result;
}

}  // namespace clonefuse
