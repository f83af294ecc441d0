#include "clonefuse/experiment.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace clonefuse {

namespace {

json split_to_json(const SplitSpec& s) {
    return json{{"train_frac", s.train_frac},
                {"val_frac", s.val_frac},
                {"test_frac", s.test_frac},
                {"seed", s.seed}};
}

SplitSpec split_from_json(const json& j) {
    SplitSpec s;
    s.train_frac = j.value("train_frac", s.train_frac);
    s.val_frac = j.value("val_frac", s.val_frac);
    s.test_frac = j.value("test_frac", s.test_frac);
    s.seed = j.value("seed", s.seed);
    return s;
}

json executor_to_json(const ExecutorConfig& e) {
    json fixtures = json::object();
    for (const auto& [id, fx] : e.fixtures)
        fixtures[id] = json{{"stdout", fx.stdout_text}, {"status", exec_status_name(fx.status)}};
    return json{{"mode", e.mode == ExecutorMode::scripted ? "scripted" : "subprocess"},
                {"command_template", e.command_template},
                {"timeout_sec", e.timeout_sec},
                {"fixtures", std::move(fixtures)},
                {"feature_dim", e.feature_dim},
                {"fallback_value", e.fallback_value}};
}

ExecutorConfig executor_from_json(const json& j) {
    ExecutorConfig e;
    std::string mode = j.value("mode", "scripted");
    if (mode == "scripted")
        e.mode = ExecutorMode::scripted;
    else if (mode == "subprocess")
        e.mode = ExecutorMode::subprocess;
    else
        throw std::runtime_error("unknown executor mode: " + mode);
    e.command_template = j.value("command_template", "");
    e.timeout_sec = j.value("timeout_sec", e.timeout_sec);
    e.feature_dim = j.value("feature_dim", e.feature_dim);
    e.fallback_value = j.value("fallback_value", e.fallback_value);
    if (j.contains("fixtures")) {
        for (const auto& [id, fx] : j.at("fixtures").items()) {
            FixtureOutput out;
            if (fx.is_string()) {
                out.stdout_text = fx.get<std::string>();
            } else {
                out.stdout_text = fx.value("stdout", "");
                out.status = exec_status_from_name(fx.value("status", "ok"));
            }
            e.fixtures.emplace(id, std::move(out));
        }
    }
    return e;
}

json model_to_json(const ModelConfig& m) { return json::parse(m.to_json()); }

ModelConfig model_from_json(const json& j) {
    ModelConfig defaults;
    ModelConfig m;
    m.vocab_size = j.value("vocab_size", defaults.vocab_size);
    m.hidden_size = j.value("hidden_size", defaults.hidden_size);
    m.num_layers = j.value("num_layers", defaults.num_layers);
    m.num_heads = j.value("num_heads", defaults.num_heads);
    m.ffn_size = j.value("ffn_size", defaults.ffn_size);
    m.max_len = j.value("max_len", defaults.max_len);
    m.feature_dim = j.value("feature_dim", defaults.feature_dim);
    m.num_labels = j.value("num_labels", defaults.num_labels);
    m.dropout_p = j.value("dropout_p", defaults.dropout_p);
    m.dataflow_bias = j.value("dataflow_bias", defaults.dataflow_bias);
    m.seed = j.value("seed", defaults.seed);
    return m;
}

json train_to_json(const TrainConfig& t) {
    return json{{"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"learning_rate", t.learning_rate},
                {"beta1", t.beta1},
                {"beta2", t.beta2},
                {"adam_eps", t.adam_eps},
                {"weight_decay", t.weight_decay},
                {"seed", t.seed},
                {"num_runs", t.num_runs},
                {"use_feature", t.use_feature}};
}

TrainConfig train_from_json(const json& j) {
    TrainConfig t;
    t.epochs = j.value("epochs", t.epochs);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.beta1 = j.value("beta1", t.beta1);
    t.beta2 = j.value("beta2", t.beta2);
    t.adam_eps = j.value("adam_eps", t.adam_eps);
    t.weight_decay = j.value("weight_decay", t.weight_decay);
    t.seed = j.value("seed", t.seed);
    t.num_runs = j.value("num_runs", t.num_runs);
    t.use_feature = j.value("use_feature", t.use_feature);
    return t;
}

json metrics_to_json(const Metrics& m) {
    return json{{"tp", m.tp},
                {"fp", m.fp},
                {"fn", m.fn},
                {"tn", m.tn},
                {"precision", m.precision},
                {"recall", m.recall},
                {"f_measure", m.f_measure}};
}

json config_to_json(const ExperimentConfig& cfg) {
    return json{{"name", cfg.name},
                {"dataset_root", cfg.dataset_root.generic_string()},
                {"split", split_to_json(cfg.split)},
                {"executor", executor_to_json(cfg.executor)},
                {"model", model_to_json(cfg.model)},
                {"train", train_to_json(cfg.train)},
                {"output_dir", cfg.output_dir.generic_string()}};
}

}  // namespace

void ExperimentConfig::validate() const {
    split.validate();
    executor.validate();
    model.validate();
    train.validate();
}

std::string ExperimentConfig::to_json() const { return config_to_json(*this).dump(2); }

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    ExperimentConfig cfg;
    cfg.name = j.value("name", cfg.name);
    cfg.dataset_root = j.value("dataset_root", std::string());
    if (j.contains("split")) cfg.split = split_from_json(j.at("split"));
    if (j.contains("executor")) cfg.executor = executor_from_json(j.at("executor"));
    if (j.contains("model")) cfg.model = model_from_json(j.at("model"));
    if (j.contains("train")) cfg.train = train_from_json(j.at("train"));
    cfg.output_dir = j.value("output_dir", std::string("."));
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

CorpusManifest ingest_auto(const std::filesystem::path& root) {
    if (std::filesystem::is_regular_file(root) && root.extension() == ".csv")
        return ingest_pairs_csv(root);
    return ingest_irplag(root);
}

std::string results_to_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
    json runs = json::array();
    for (const auto& run : result.runs) {
        json epochs = json::array();
        for (const auto& e : run.history.epochs)
            epochs.push_back(
                json{{"train_loss", e.train_loss}, {"val", metrics_to_json(e.val)}});
        runs.push_back(json{{"seed", run.seed},
                            {"history", std::move(epochs)},
                            {"selected_epoch", run.history.selected_epoch},
                            {"test", metrics_to_json(run.history.test)}});
    }

    const MetricSummary& agg = result.aggregate;
    json doc{{"config", config_to_json(cfg)},
             {"runs", std::move(runs)},
             {"aggregate",
              json{{"mean", json{{"precision", agg.mean_precision},
                                 {"recall", agg.mean_recall},
                                 {"f_measure", agg.mean_f}}},
                   {"std", json{{"precision", agg.std_precision},
                                {"recall", agg.std_recall},
                                {"f_measure", agg.std_f}}}}}};
    return doc.dump(2);
}

void save_results(const ExperimentConfig& cfg, const ExperimentResult& result,
                  const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write results: " + path.string());
    out << results_to_json(cfg, result) << "\n";
}

ComparisonRow results_row_from_json(const std::string& text) {
    json doc = json::parse(text);
    ComparisonRow row;
    row.approach = doc.at("config").value("name", "this-artifact");
    if (!doc.at("config").at("train").value("use_feature", true)) row.approach += " (no-feature)";
    row.precision = doc.at("aggregate").at("mean").at("precision").get<double>();
    row.recall = doc.at("aggregate").at("mean").at("recall").get<double>();
    row.f_measure = doc.at("aggregate").at("mean").at("f_measure").get<double>();
    row.source = RowSource::artifact;
    return row;
}

}  // namespace clonefuse
