#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clonefuse/corpus.hpp"
#include "clonefuse/experiment.hpp"
#include "clonefuse/gradcheck.hpp"
#include "clonefuse/metrics.hpp"
#include "clonefuse/model.hpp"
#include "clonefuse/outfeature.hpp"
#include "clonefuse/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace clonefuse;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCheckFailed = 3;

void log_event(const std::string& level, const std::string& event, json fields = json::object()) {
    fields["level"] = level;
    fields["event"] = event;
    std::cerr << fields.dump() << "\n";
}

json metrics_json(const Metrics& m) {
    return json{{"tp", m.tp},           {"fp", m.fp},
                {"fn", m.fn},           {"tn", m.tn},
                {"precision", m.precision}, {"recall", m.recall},
                {"f_measure", m.f_measure}};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int cmd_ingest(const std::string& root, const std::string& output) {
    CorpusManifest manifest = ingest_auto(root);
    save_manifest(manifest, output);
    size_t positives = 0;
    for (const auto& p : manifest.pairs) positives += p.label;
    log_event("info", "ingest",
              {{"root", root},
               {"fragments", manifest.fragments.size()},
               {"pairs", manifest.pairs.size()},
               {"positive_pairs", positives},
               {"output", output}});
    return kExitOk;
}

int cmd_stats(const std::string& manifest_path) {
    CorpusManifest manifest = load_manifest(manifest_path);
    CorpusStats stats = corpus_stats(manifest);
    json out{{"fragments", manifest.fragments.size()},
             {"pairs", manifest.pairs.size()},
             {"total_tokens", stats.total_tokens},
             {"unique_tokens", stats.unique_tokens},
             {"min_tokens", stats.min_tokens},
             {"max_tokens", stats.max_tokens},
             {"avg_tokens", stats.avg_tokens}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_features(const std::string& manifest_path, const std::string& config_path,
                 const std::string& output) {
    ExperimentConfig cfg = ExperimentConfig::load(config_path);
    cfg.executor.validate();
    CorpusManifest manifest = load_manifest(manifest_path);
    FeatureMap features = compute_all_features(manifest, cfg.executor);
    save_features(features, output);
    size_t available = 0;
    for (const auto& [key, f] : features) available += f.available ? 1 : 0;
    log_event("info", "features",
              {{"pairs", features.size()}, {"available", available}, {"output", output}});
    return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& output, bool no_feature,
              const std::string& manifest_path, const std::string& features_path) {
    ExperimentConfig cfg = ExperimentConfig::load(config_path);
    if (no_feature) cfg.train.use_feature = false;
    cfg.validate();

    CorpusManifest manifest =
        manifest_path.empty() ? ingest_auto(cfg.dataset_root) : load_manifest(manifest_path);
    FeatureMap features = features_path.empty() ? compute_all_features(manifest, cfg.executor)
                                                : load_features(features_path);

    ExperimentResult result =
        run_experiment(manifest, features, cfg.model, cfg.train, cfg.split);
    save_results(cfg, result, output);

    fs::path ckpt = cfg.output_dir / "model.ckpt";
    fs::create_directories(cfg.output_dir);
    save_checkpoint(result.first_run_params, cfg.model, ckpt);

    log_event("info", "train",
              {{"runs", result.runs.size()},
               {"mean_f_measure", result.aggregate.mean_f},
               {"results", output},
               {"checkpoint", ckpt.string()}});
    return kExitOk;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& manifest_path,
             const std::string& features_path) {
    auto [params, model_cfg] = load_checkpoint(checkpoint_path);
    CorpusManifest manifest = load_manifest(manifest_path);
    FeatureMap features = load_features(features_path);

    ExecutorConfig defaults;
    defaults.feature_dim = model_cfg.feature_dim;
    attach_features(manifest, features, defaults);

    Vocabulary vocab = build_vocab(manifest, model_cfg.vocab_size);
    PairEncoder encoder(manifest, vocab, model_cfg);

    std::vector<Prediction> predictions;
    predictions.reserve(manifest.pairs.size());
    for (const auto& pair : manifest.pairs) {
        auto ex = encoder.encode(pair);
        PredictOutput p = predict(params, model_cfg, ex.encoded, ex.f_out);
        predictions.push_back({p.prob, ex.label});
    }
    Metrics metrics = compute_metrics(predictions);
    std::cout << metrics_json(metrics).dump(2) << "\n";
    return kExitOk;
}

int cmd_compare(const std::vector<std::string>& results_paths, const std::string& format) {
    std::vector<ComparisonRow> rows;
    for (const auto& path : results_paths) rows.push_back(results_row_from_json(slurp(path)));
    TableFormat fmt = format == "csv" ? TableFormat::csv : TableFormat::markdown;
    std::cout << compare_table(rows, fmt);
    return kExitOk;
}

int cmd_gradcheck(double tol, size_t probes, uint64_t seed) {
    ModelConfig cfg;
    cfg.vocab_size = 32;
    cfg.hidden_size = 8;
    cfg.num_layers = 1;
    cfg.num_heads = 2;
    cfg.ffn_size = 16;
    cfg.max_len = 16;
    cfg.feature_dim = 1;
    cfg.dropout_p = 0.0;

    GradCheckReport report = gradient_check(cfg, seed, probes, tol);
    json out{{"max_rel_err", report.max_rel_err},
             {"probes", report.probes},
             {"coords_checked", report.coords_checked},
             {"tol", tol},
             {"pass", report.pass}};
    std::cout << out.dump(2) << "\n";
    return report.pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clonefuse: transformer code-clone detection with an execution-output feature"};
    app.require_subcommand(1);

    // ingest
    std::string ingest_root, ingest_out = "manifest.json";
    auto* ingest = app.add_subcommand("ingest", "Scan a dataset tree (or pairs.csv) into manifest.json");
    ingest->add_option("root", ingest_root, "dataset root directory or pairs.csv")->required();
    ingest->add_option("-o,--output", ingest_out, "manifest output path");

    // stats
    std::string stats_manifest;
    auto* stats = app.add_subcommand("stats", "Print token statistics for a manifest");
    stats->add_option("manifest", stats_manifest, "manifest.json path")->required();

    // features
    std::string feat_manifest, feat_config, feat_out = "features.json";
    auto* features = app.add_subcommand("features", "Execute fragments and cache pair features");
    features->add_option("manifest", feat_manifest, "manifest.json path")->required();
    features->add_option("-c,--config", feat_config, "experiment config")->required();
    features->add_option("-o,--output", feat_out, "features output path");

    // train
    std::string train_config, train_out = "results.json", train_manifest, train_features;
    bool no_feature = false;
    auto* train = app.add_subcommand("train", "Run the training experiment");
    train->add_option("-c,--config", train_config, "experiment config")->required();
    train->add_option("-o,--output", train_out, "results output path");
    train->add_flag("--no-feature", no_feature, "ablation: constant feature input");
    train->add_option("--manifest", train_manifest, "reuse an existing manifest.json");
    train->add_option("--features", train_features, "reuse an existing features.json");

    // eval
    std::string eval_ckpt, eval_manifest, eval_features;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
    eval->add_option("checkpoint", eval_ckpt, "checkpoint path")->required();
    eval->add_option("manifest", eval_manifest, "manifest.json path")->required();
    eval->add_option("features", eval_features, "features.json path")->required();

    // compare
    std::vector<std::string> compare_inputs;
    std::string compare_format = "md";
    auto* compare = app.add_subcommand("compare", "Print the benchmark comparison table");
    compare->add_option("results", compare_inputs, "results.json files to append");
    compare->add_option("--format", compare_format, "md or csv")
        ->check(CLI::IsMember({"md", "csv"}));

    // gradcheck
    double gc_tol = 1e-4;
    size_t gc_probes = 20;
    uint64_t gc_seed = 7;
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
    gradcheck->add_option("--tol", gc_tol, "max relative error tolerance");
    gradcheck->add_option("--probes", gc_probes, "number of random probes");
    gradcheck->add_option("--seed", gc_seed, "probe seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*ingest) return cmd_ingest(ingest_root, ingest_out);
        if (*stats) return cmd_stats(stats_manifest);
        if (*features) return cmd_features(feat_manifest, feat_config, feat_out);
        if (*train) return cmd_train(train_config, train_out, no_feature, train_manifest,
                                     train_features);
        if (*eval) return cmd_eval(eval_ckpt, eval_manifest, eval_features);
        if (*compare) return cmd_compare(compare_inputs, compare_format);
        if (*gradcheck) return cmd_gradcheck(gc_tol, gc_probes, gc_seed);
    } catch (const std::exception& e) {
        log_event("error", "fatal", {{"message", e.what()}});
        return kExitData;
    }
    return kExitUsage;
}
