#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "clonefuse/corpus.hpp"
#include "clonefuse/dataflow.hpp"
#include "clonefuse/experiment.hpp"
#include "clonefuse/gradcheck.hpp"
#include "clonefuse/metrics.hpp"
#include "clonefuse/outfeature.hpp"
#include "clonefuse/train.hpp"

namespace py = pybind11;
using namespace clonefuse;

namespace {

py::dict metrics_dict(const Metrics& m) {
    py::dict d;
    d["tp"] = m.tp;
    d["fp"] = m.fp;
    d["fn"] = m.fn;
    d["tn"] = m.tn;
    d["precision"] = m.precision;
    d["recall"] = m.recall;
    d["f_measure"] = m.f_measure;
    return d;
}

py::dict stats_dict(const CorpusStats& s) {
    py::dict d;
    d["total_tokens"] = s.total_tokens;
    d["unique_tokens"] = s.unique_tokens;
    d["min_tokens"] = s.min_tokens;
    d["max_tokens"] = s.max_tokens;
    d["avg_tokens"] = s.avg_tokens;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "clonefuse core: lexing, execution-output features, the fusion "
              "transformer and its training/evaluation pipeline";

    m.def(
        "lex",
        [](const std::string& source) {
            py::list out;
            for (const auto& tok : lex(source))
                out.append(py::make_tuple(token_kind_name(tok.kind), tok.text));
            return out;
        },
        py::arg("source"), "Tokenize source text; returns (kind, text) tuples.");

    m.def(
        "extract_dataflow",
        [](const std::string& source) {
            py::list out;
            for (const auto& e : extract_dataflow(lex(source)))
                out.append(py::make_tuple(e.def_index, e.use_index));
            return out;
        },
        py::arg("source"), "Def->use token index pairs from the flat heuristic.");

    m.def("output_similarity", &output_similarity, py::arg("out_a"), py::arg("out_b"),
          "Cosine similarity of term-frequency vectors over normalized text.");

    m.def(
        "compute_metrics",
        [](const std::vector<std::pair<double, int>>& predictions) {
            std::vector<Prediction> preds;
            preds.reserve(predictions.size());
            for (auto [prob, label] : predictions) preds.push_back({prob, label});
            return metrics_dict(compute_metrics(preds));
        },
        py::arg("predictions"), "Precision/recall/f-measure from (prob, label) pairs.");

    m.def(
        "compare_table",
        [](const std::string& format) {
            return compare_table({}, format == "csv" ? TableFormat::csv : TableFormat::markdown);
        },
        py::arg("format") = "md", "The benchmark comparison table (cited rows).");

    m.def(
        "ingest",
        [](const std::string& root) {
            CorpusManifest manifest = ingest_auto(root);
            size_t positives = 0;
            for (const auto& p : manifest.pairs) positives += p.label;
            py::dict d;
            d["fragments"] = manifest.fragments.size();
            d["pairs"] = manifest.pairs.size();
            d["positive_pairs"] = positives;
            d["stats"] = stats_dict(manifest.stats);
            return d;
        },
        py::arg("root"), "Scan a dataset tree (or pairs.csv); returns summary counts.");

    m.def(
        "ingest_to_file",
        [](const std::string& root, const std::string& output) {
            save_manifest(ingest_auto(root), output);
        },
        py::arg("root"), py::arg("output"));

    m.def(
        "gradient_check",
        [](size_t hidden_size, size_t num_layers, size_t num_heads, size_t ffn_size,
           size_t max_len, size_t vocab_size, size_t feature_dim, double dropout_p,
           uint64_t seed, size_t probes, double tol) {
            ModelConfig cfg;
            cfg.hidden_size = hidden_size;
            cfg.num_layers = num_layers;
            cfg.num_heads = num_heads;
            cfg.ffn_size = ffn_size;
            cfg.max_len = max_len;
            cfg.vocab_size = vocab_size;
            cfg.feature_dim = feature_dim;
            cfg.dropout_p = dropout_p;
            GradCheckReport r = gradient_check(cfg, seed, probes, tol);
            py::dict d;
            d["max_rel_err"] = r.max_rel_err;
            d["probes"] = r.probes;
            d["coords_checked"] = r.coords_checked;
            d["pass"] = r.pass;
            return d;
        },
        py::arg("hidden_size") = 8, py::arg("num_layers") = 1, py::arg("num_heads") = 2,
        py::arg("ffn_size") = 16, py::arg("max_len") = 16, py::arg("vocab_size") = 32,
        py::arg("feature_dim") = 1, py::arg("dropout_p") = 0.0, py::arg("seed") = 7,
        py::arg("probes") = 20, py::arg("tol") = 1e-4,
        "Reverse-mode gradients vs central finite differences.");

    m.def(
        "run_experiment_json",
        [](const std::string& config_json) {
            ExperimentConfig cfg = ExperimentConfig::from_json(config_json);
            cfg.validate();
            CorpusManifest manifest = ingest_auto(cfg.dataset_root);
            FeatureMap features = compute_all_features(manifest, cfg.executor);
            ExperimentResult result =
                run_experiment(manifest, features, cfg.model, cfg.train, cfg.split);
            return results_to_json(cfg, result);
        },
        py::arg("config_json"),
        "Full pipeline from an experiment config JSON string; returns results JSON.");
}
