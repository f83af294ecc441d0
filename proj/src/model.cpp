#include "clonefuse/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

using nlohmann::json;

namespace clonefuse {

namespace {

constexpr double kLnEps = 1e-12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double gelu_grad(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)) + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

Eigen::Vector2d softmax2(const Eigen::Vector2d& logits) {
    double m = logits.maxCoeff();
    Eigen::Vector2d e = (logits.array() - m).exp().matrix();
    return e / e.sum();
}

// Row-wise layer norm; fills xhat and inv_std for the backward pass.
Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const Eigen::VectorXd& gain,
                           const Eigen::VectorXd& bias, Eigen::MatrixXd& xhat,
                           Eigen::VectorXd& inv_std) {
    const Eigen::Index rows = x.rows(), cols = x.cols();
    xhat.resize(rows, cols);
    inv_std.resize(rows);
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        double mean = x.row(i).mean();
        double var = (x.row(i).array() - mean).square().mean();
        double inv = 1.0 / std::sqrt(var + kLnEps);
        inv_std(i) = inv;
        xhat.row(i) = ((x.row(i).array() - mean) * inv).matrix();
        out.row(i) = xhat.row(i).cwiseProduct(gain.transpose()) + bias.transpose();
    }
    return out;
}

Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& xhat,
                                    const Eigen::VectorXd& inv_std, const Eigen::VectorXd& gain,
                                    Eigen::VectorXd& dgain, Eigen::VectorXd& dbias) {
    const Eigen::Index rows = dy.rows(), cols = dy.cols();
    Eigen::MatrixXd dx(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        Eigen::RowVectorXd dyr = dy.row(i);
        Eigen::RowVectorXd xh = xhat.row(i);
        dgain += dyr.cwiseProduct(xh).transpose();
        dbias += dyr.transpose();
        Eigen::RowVectorXd dxhat = dyr.cwiseProduct(gain.transpose());
        double m1 = dxhat.mean();
        double m2 = dxhat.cwiseProduct(xh).mean();
        dx.row(i) = (inv_std(i) * (dxhat.array() - m1 - xh.array() * m2)).matrix();
    }
    return dx;
}

// y = x * W^T + b, rows of x are positions.
Eigen::MatrixXd linear(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                       const Eigen::VectorXd& b) {
    Eigen::MatrixXd y = x * w.transpose();
    y.rowwise() += b.transpose();
    return y;
}

void require_finite(const Eigen::MatrixXd& x, const std::string& where) {
    if (!x.allFinite()) throw std::runtime_error("non-finite activation in " + where);
}

}  // namespace

void ModelConfig::validate() const {
    if (hidden_size == 0 || num_heads == 0 || hidden_size % num_heads != 0)
        throw std::runtime_error("hidden_size must be divisible by num_heads");
    if (max_len < 5) throw std::runtime_error("max_len must be at least 5");
    if (num_labels != 2) throw std::runtime_error("num_labels must be 2");
    if (dropout_p < 0.0 || dropout_p >= 1.0) throw std::runtime_error("dropout_p must be in [0,1)");
    if (vocab_size <= Vocabulary::kNumSpecials)
        throw std::runtime_error("vocab_size must exceed the special tokens");
    if (feature_dim == 0) throw std::runtime_error("feature_dim must be at least 1");
    if (num_layers == 0 || ffn_size == 0)
        throw std::runtime_error("num_layers and ffn_size must be positive");
}

std::string ModelConfig::to_json() const {
    return json{{"vocab_size", vocab_size},   {"hidden_size", hidden_size},
                {"num_layers", num_layers},   {"num_heads", num_heads},
                {"ffn_size", ffn_size},       {"max_len", max_len},
                {"feature_dim", feature_dim}, {"num_labels", num_labels},
                {"dropout_p", dropout_p},     {"dataflow_bias", dataflow_bias},
                {"seed", seed}}
        .dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    ModelConfig cfg;
    cfg.vocab_size = j.at("vocab_size").get<size_t>();
    cfg.hidden_size = j.at("hidden_size").get<size_t>();
    cfg.num_layers = j.at("num_layers").get<size_t>();
    cfg.num_heads = j.at("num_heads").get<size_t>();
    cfg.ffn_size = j.at("ffn_size").get<size_t>();
    cfg.max_len = j.at("max_len").get<size_t>();
    cfg.feature_dim = j.at("feature_dim").get<size_t>();
    cfg.num_labels = j.at("num_labels").get<size_t>();
    cfg.dropout_p = j.at("dropout_p").get<double>();
    cfg.dataflow_bias = j.at("dataflow_bias").get<bool>();
    cfg.seed = j.at("seed").get<uint64_t>();
    cfg.validate();
    return cfg;
}

Parameters Parameters::zeros(const ModelConfig& cfg) {
    cfg.validate();
    const auto H = static_cast<Eigen::Index>(cfg.hidden_size);
    const auto F = static_cast<Eigen::Index>(cfg.ffn_size);
    Parameters p;
    p.token_embedding = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cfg.vocab_size), H);
    p.position_embedding = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cfg.max_len), H);
    p.layers.resize(cfg.num_layers);
    for (auto& layer : p.layers) {
        layer.wq = layer.wk = layer.wv = layer.wo = Eigen::MatrixXd::Zero(H, H);
        layer.bq = layer.bk = layer.bv = layer.bo = Eigen::VectorXd::Zero(H);
        layer.ln1_gain = layer.ln1_bias = layer.ln2_gain = layer.ln2_bias =
            Eigen::VectorXd::Zero(H);
        layer.ffn_in = Eigen::MatrixXd::Zero(F, H);
        layer.ffn_in_bias = Eigen::VectorXd::Zero(F);
        layer.ffn_out = Eigen::MatrixXd::Zero(H, F);
        layer.ffn_out_bias = Eigen::VectorXd::Zero(H);
    }
    p.pooler_w = Eigen::MatrixXd::Zero(H, H);
    p.pooler_b = Eigen::VectorXd::Zero(H);
    p.feature_w = Eigen::MatrixXd::Zero(H, static_cast<Eigen::Index>(cfg.feature_dim));
    p.feature_b = Eigen::VectorXd::Zero(H);
    p.classifier_w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cfg.num_labels), 2 * H);
    p.classifier_b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.num_labels));
    p.dataflow_bias_scale = 0.0;
    return p;
}

std::vector<TensorView> tensor_views(Parameters& params) {
    std::vector<TensorView> views;
    auto add_m = [&](const std::string& name, Eigen::MatrixXd& m) {
        views.push_back({name, m.data(), static_cast<size_t>(m.size())});
    };
    auto add_v = [&](const std::string& name, Eigen::VectorXd& v) {
        views.push_back({name, v.data(), static_cast<size_t>(v.size())});
    };
    add_m("token_embedding", params.token_embedding);
    add_m("position_embedding", params.position_embedding);
    for (size_t l = 0; l < params.layers.size(); ++l) {
        auto& layer = params.layers[l];
        const std::string prefix = "layer" + std::to_string(l) + ".";
        add_m(prefix + "wq", layer.wq);
        add_v(prefix + "bq", layer.bq);
        add_m(prefix + "wk", layer.wk);
        add_v(prefix + "bk", layer.bk);
        add_m(prefix + "wv", layer.wv);
        add_v(prefix + "bv", layer.bv);
        add_m(prefix + "wo", layer.wo);
        add_v(prefix + "bo", layer.bo);
        add_v(prefix + "ln1_gain", layer.ln1_gain);
        add_v(prefix + "ln1_bias", layer.ln1_bias);
        add_v(prefix + "ln2_gain", layer.ln2_gain);
        add_v(prefix + "ln2_bias", layer.ln2_bias);
        add_m(prefix + "ffn_in", layer.ffn_in);
        add_v(prefix + "ffn_in_bias", layer.ffn_in_bias);
        add_m(prefix + "ffn_out", layer.ffn_out);
        add_v(prefix + "ffn_out_bias", layer.ffn_out_bias);
    }
    add_m("pooler_w", params.pooler_w);
    add_v("pooler_b", params.pooler_b);
    add_m("feature_w", params.feature_w);
    add_v("feature_b", params.feature_b);
    add_m("classifier_w", params.classifier_w);
    add_v("classifier_b", params.classifier_b);
    views.push_back({"dataflow_bias_scale", &params.dataflow_bias_scale, 1});
    return views;
}

Parameters init_params(const ModelConfig& cfg) {
    Parameters p = Parameters::zeros(cfg);
    Rng rng(cfg.seed);
    auto xavier = [&rng](Eigen::MatrixXd& m) {
        double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-a, a);
    };
    xavier(p.token_embedding);
    xavier(p.position_embedding);
    for (auto& layer : p.layers) {
        xavier(layer.wq);
        xavier(layer.wk);
        xavier(layer.wv);
        xavier(layer.wo);
        layer.ln1_gain.setOnes();
        layer.ln2_gain.setOnes();
        xavier(layer.ffn_in);
        xavier(layer.ffn_out);
    }
    xavier(p.pooler_w);
    xavier(p.feature_w);
    xavier(p.classifier_w);
    return p;
}

ForwardOutput forward(const Parameters& params, const ModelConfig& cfg,
                      const EncodedPair& encoded, const Eigen::VectorXd& f_out,
                      const ForwardOptions& opts) {
    cfg.validate();
    const size_t L = cfg.max_len;
    const auto H = static_cast<Eigen::Index>(cfg.hidden_size);
    const size_t heads = cfg.num_heads;
    const auto dh = static_cast<Eigen::Index>(cfg.head_dim());

    if (encoded.input_ids.size() != L || encoded.attention_mask.size() != L)
        throw std::runtime_error("encoded pair length does not match max_len");
    if (static_cast<size_t>(f_out.size()) != cfg.feature_dim)
        throw std::runtime_error("feature vector length does not match feature_dim");

    ForwardTrace trace;
    const bool want_trace = opts.want_trace;
    if (want_trace) {
        trace.input_ids = encoded.input_ids;
        trace.attention_mask = encoded.attention_mask;
        trace.dataflow_edges = encoded.dataflow_edges;
        trace.f_out = f_out;
        trace.layers.resize(cfg.num_layers);
    }

    Eigen::MatrixXd x(L, H);
    for (size_t i = 0; i < L; ++i) {
        int id = encoded.input_ids[i];
        if (id < 0 || static_cast<size_t>(id) >= cfg.vocab_size)
            throw std::runtime_error("token id out of vocabulary range");
        x.row(i) = params.token_embedding.row(id) + params.position_embedding.row(i);
    }
    require_finite(x, "embeddings");

    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    for (size_t l = 0; l < cfg.num_layers; ++l) {
        const LayerParams& lp = params.layers[l];
        LayerTrace scratch;
        LayerTrace& lt = want_trace ? trace.layers[l] : scratch;
        lt.input = x;

        lt.ln1_out = layer_norm(x, lp.ln1_gain, lp.ln1_bias, lt.ln1_xhat, lt.ln1_inv_std);
        lt.q = linear(lt.ln1_out, lp.wq, lp.bq);
        lt.k = linear(lt.ln1_out, lp.wk, lp.bk);
        lt.v = linear(lt.ln1_out, lp.wv, lp.bv);

        lt.attn_probs.assign(heads, Eigen::MatrixXd());
        lt.attn_ctx.resize(L, H);
        for (size_t h = 0; h < heads; ++h) {
            auto qh = lt.q.middleCols(static_cast<Eigen::Index>(h) * dh, dh);
            auto kh = lt.k.middleCols(static_cast<Eigen::Index>(h) * dh, dh);
            auto vh = lt.v.middleCols(static_cast<Eigen::Index>(h) * dh, dh);

            Eigen::MatrixXd scores = qh * kh.transpose() * scale;
            for (size_t kcol = 0; kcol < L; ++kcol) {
                if (encoded.attention_mask[kcol] == 0)
                    scores.col(static_cast<Eigen::Index>(kcol)).setConstant(kNegInf);
            }
            if (cfg.dataflow_bias) {
                for (const auto& [def_pos, use_pos] : encoded.dataflow_edges)
                    scores(def_pos, use_pos) += params.dataflow_bias_scale;
            }

            Eigen::MatrixXd probs(L, L);
            for (Eigen::Index row = 0; row < static_cast<Eigen::Index>(L); ++row) {
                double m = scores.row(row).maxCoeff();
                Eigen::RowVectorXd e = (scores.row(row).array() - m).exp().matrix();
                probs.row(row) = e / e.sum();
            }
            lt.attn_probs[h] = probs;
            lt.attn_ctx.middleCols(static_cast<Eigen::Index>(h) * dh, dh) = probs * vh;
        }

        Eigen::MatrixXd attn_out = linear(lt.attn_ctx, lp.wo, lp.bo);
        lt.after_attn = lt.input + attn_out;

        lt.ln2_out =
            layer_norm(lt.after_attn, lp.ln2_gain, lp.ln2_bias, lt.ln2_xhat, lt.ln2_inv_std);
        lt.ffn_pre = linear(lt.ln2_out, lp.ffn_in, lp.ffn_in_bias);
        lt.ffn_act = lt.ffn_pre.unaryExpr([](double v) { return gelu(v); });
        x = lt.after_attn + linear(lt.ffn_act, lp.ffn_out, lp.ffn_out_bias);
        require_finite(x, "transformer layer " + std::to_string(l));
    }

    Eigen::VectorXd cls_state = x.row(0).transpose();
    Eigen::VectorXd pooled = (params.pooler_w * cls_state + params.pooler_b).array().tanh().matrix();
    Eigen::VectorXd feature_processed = params.feature_w * f_out + params.feature_b;

    Eigen::VectorXd concat(2 * H);
    concat << pooled, feature_processed;

    std::vector<uint8_t> mask;
    Eigen::VectorXd concat_dropped = concat;
    if (opts.train && cfg.dropout_p > 0.0) {
        if (opts.fixed_dropout_mask) {
            mask = *opts.fixed_dropout_mask;
            if (mask.size() != static_cast<size_t>(2 * H))
                throw std::runtime_error("fixed dropout mask has wrong length");
        } else {
            if (!opts.dropout_rng)
                throw std::runtime_error("training forward with dropout requires an rng");
            mask.resize(static_cast<size_t>(2 * H));
            for (auto& m : mask) m = opts.dropout_rng->uniform() >= cfg.dropout_p ? 1 : 0;
        }
        const double keep_scale = 1.0 / (1.0 - cfg.dropout_p);
        for (Eigen::Index i = 0; i < concat.size(); ++i)
            concat_dropped(i) = mask[static_cast<size_t>(i)] ? concat(i) * keep_scale : 0.0;
    }

    Eigen::Vector2d logits = params.classifier_w * concat_dropped + params.classifier_b;
    require_finite(logits, "classifier logits");
    Eigen::Vector2d probs = softmax2(logits);

    ForwardOutput out;
    out.logits = logits;
    out.prob = probs(1);
    if (want_trace) {
        trace.cls_state = std::move(cls_state);
        trace.pooled = std::move(pooled);
        trace.feature_processed = std::move(feature_processed);
        trace.concat = std::move(concat);
        trace.dropout_mask = std::move(mask);
        trace.concat_dropped = std::move(concat_dropped);
        trace.logits = logits;
        trace.probs = probs;
        out.trace = std::move(trace);
    }
    return out;
}

double cross_entropy(const Eigen::Vector2d& logits, int label) {
    if (!logits.allFinite()) throw std::runtime_error("non-finite logits in loss");
    if (label != 0 && label != 1) throw std::runtime_error("label must be 0 or 1");
    double m = logits.maxCoeff();
    double lse = m + std::log(std::exp(logits(0) - m) + std::exp(logits(1) - m));
    return lse - logits(label);
}

void accumulate_gradients(const Parameters& params, const ModelConfig& cfg,
                          const ForwardTrace& trace, int label, Gradients& grads,
                          double scale) {
    if (trace.layers.size() != cfg.num_layers)
        throw std::runtime_error("forward trace is missing; run forward with want_trace");
    const size_t L = cfg.max_len;
    const auto H = static_cast<Eigen::Index>(cfg.hidden_size);
    const size_t heads = cfg.num_heads;
    const auto dh = static_cast<Eigen::Index>(cfg.head_dim());
    const double attn_scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Eigen::Vector2d dlogits = trace.probs * scale;
    dlogits(label) -= scale;

    grads.classifier_w += dlogits * trace.concat_dropped.transpose();
    grads.classifier_b += dlogits;
    Eigen::VectorXd dconcat = params.classifier_w.transpose() * dlogits;

    if (!trace.dropout_mask.empty()) {
        const double keep_scale = 1.0 / (1.0 - cfg.dropout_p);
        for (Eigen::Index i = 0; i < dconcat.size(); ++i)
            dconcat(i) = trace.dropout_mask[static_cast<size_t>(i)] ? dconcat(i) * keep_scale : 0.0;
    }

    Eigen::VectorXd dpooled = dconcat.head(H);
    Eigen::VectorXd dfeature = dconcat.tail(H);

    grads.feature_w += dfeature * trace.f_out.transpose();
    grads.feature_b += dfeature;

    Eigen::VectorXd dpool_pre =
        dpooled.cwiseProduct((1.0 - trace.pooled.array().square()).matrix());
    grads.pooler_w += dpool_pre * trace.cls_state.transpose();
    grads.pooler_b += dpool_pre;

    Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(L), H);
    dx.row(0) = (params.pooler_w.transpose() * dpool_pre).transpose();

    for (size_t l = cfg.num_layers; l-- > 0;) {
        const LayerParams& lp = params.layers[l];
        const LayerTrace& lt = trace.layers[l];
        LayerParams& gl = grads.layers[l];

        // x2 = x1 + ffn_out(gelu(ffn_in(LN2(x1))))
        const Eigen::MatrixXd& dffn_o = dx;
        gl.ffn_out += dffn_o.transpose() * lt.ffn_act;
        gl.ffn_out_bias += dffn_o.colwise().sum().transpose();
        Eigen::MatrixXd dact = dffn_o * lp.ffn_out;
        Eigen::MatrixXd dpre = dact.cwiseProduct(
            lt.ffn_pre.unaryExpr([](double v) { return gelu_grad(v); }));
        gl.ffn_in += dpre.transpose() * lt.ln2_out;
        gl.ffn_in_bias += dpre.colwise().sum().transpose();
        Eigen::MatrixXd dz2 = dpre * lp.ffn_in;

        Eigen::MatrixXd dx1 =
            dx + layer_norm_backward(dz2, lt.ln2_xhat, lt.ln2_inv_std, lp.ln2_gain, gl.ln2_gain,
                                     gl.ln2_bias);

        // x1 = x0 + wo(attention context) + bo
        const Eigen::MatrixXd& dattn_out = dx1;
        gl.wo += dattn_out.transpose() * lt.attn_ctx;
        gl.bo += dattn_out.colwise().sum().transpose();
        Eigen::MatrixXd dctx = dattn_out * lp.wo;

        Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(L), H);
        Eigen::MatrixXd dk = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(L), H);
        Eigen::MatrixXd dv = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(L), H);

        for (size_t h = 0; h < heads; ++h) {
            const Eigen::Index off = static_cast<Eigen::Index>(h) * dh;
            auto qh = lt.q.middleCols(off, dh);
            auto kh = lt.k.middleCols(off, dh);
            auto vh = lt.v.middleCols(off, dh);
            const Eigen::MatrixXd& probs = lt.attn_probs[h];
            auto dctx_h = dctx.middleCols(off, dh);

            Eigen::MatrixXd dprobs = dctx_h * vh.transpose();
            dv.middleCols(off, dh) = probs.transpose() * dctx_h;

            Eigen::MatrixXd dscores(L, L);
            for (Eigen::Index row = 0; row < static_cast<Eigen::Index>(L); ++row) {
                double dot = probs.row(row).cwiseProduct(dprobs.row(row)).sum();
                dscores.row(row) =
                    probs.row(row).cwiseProduct((dprobs.row(row).array() - dot).matrix());
            }
            if (cfg.dataflow_bias) {
                for (const auto& [def_pos, use_pos] : trace.dataflow_edges)
                    grads.dataflow_bias_scale += dscores(def_pos, use_pos);
            }
            dq.middleCols(off, dh) = attn_scale * dscores * kh;
            dk.middleCols(off, dh) = attn_scale * dscores.transpose() * qh;
        }

        gl.wq += dq.transpose() * lt.ln1_out;
        gl.bq += dq.colwise().sum().transpose();
        gl.wk += dk.transpose() * lt.ln1_out;
        gl.bk += dk.colwise().sum().transpose();
        gl.wv += dv.transpose() * lt.ln1_out;
        gl.bv += dv.colwise().sum().transpose();
        Eigen::MatrixXd dz1 = dq * lp.wq + dk * lp.wk + dv * lp.wv;

        dx = dx1 + layer_norm_backward(dz1, lt.ln1_xhat, lt.ln1_inv_std, lp.ln1_gain, gl.ln1_gain,
                                       gl.ln1_bias);
    }

    for (size_t i = 0; i < L; ++i) {
        grads.token_embedding.row(trace.input_ids[i]) += dx.row(static_cast<Eigen::Index>(i));
        grads.position_embedding.row(static_cast<Eigen::Index>(i)) +=
            dx.row(static_cast<Eigen::Index>(i));
    }
}

Gradients backward(const Parameters& params, const ModelConfig& cfg, const ForwardTrace& trace,
                   int label) {
    Gradients grads = Parameters::zeros(cfg);
    accumulate_gradients(params, cfg, trace, label, grads);
    return grads;
}

PredictOutput predict(const Parameters& params, const ModelConfig& cfg,
                      const EncodedPair& encoded, const Eigen::VectorXd& f_out) {
    ForwardOutput out = forward(params, cfg, encoded, f_out);
    return {out.prob, out.prob >= 0.5 ? 1 : 0};
}

namespace {

constexpr char kCheckpointMagic[8] = {'C', 'F', 'Z', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T read_raw(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof value);
    if (!in) throw std::runtime_error("truncated checkpoint");
    return value;
}

}  // namespace

void save_checkpoint(const Parameters& params, const ModelConfig& cfg,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());

    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    std::string header = cfg.to_json();
    write_raw(out, static_cast<uint32_t>(header.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    auto views = tensor_views(const_cast<Parameters&>(params));
    for (const auto& view : views) {
        write_raw(out, static_cast<uint32_t>(view.name.size()));
        out.write(view.name.data(), static_cast<std::streamsize>(view.name.size()));
        write_raw(out, static_cast<uint64_t>(view.size));
        out.write(reinterpret_cast<const char*>(view.data),
                  static_cast<std::streamsize>(view.size * sizeof(double)));
    }
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

std::pair<Parameters, ModelConfig> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());

    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
        throw std::runtime_error("not a checkpoint file: " + path.string());

    auto header_len = read_raw<uint32_t>(in);
    std::string header(header_len, '\0');
    in.read(header.data(), header_len);
    if (!in) throw std::runtime_error("truncated checkpoint header");
    ModelConfig cfg = ModelConfig::from_json(header);

    Parameters params = Parameters::zeros(cfg);
    for (auto& view : tensor_views(params)) {
        auto name_len = read_raw<uint32_t>(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        auto count = read_raw<uint64_t>(in);
        if (!in || name != view.name || count != view.size)
            throw std::runtime_error("checkpoint tensor mismatch at " + view.name);
        in.read(reinterpret_cast<char*>(view.data),
                static_cast<std::streamsize>(count * sizeof(double)));
        if (!in) throw std::runtime_error("truncated checkpoint tensor " + view.name);
    }
    return {std::move(params), cfg};
}

}  // namespace clonefuse
