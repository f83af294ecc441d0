#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "clonefuse/rng.hpp"
#include "clonefuse/vocab.hpp"

namespace clonefuse {

struct ModelConfig {
    size_t vocab_size = 1024;
    size_t hidden_size = 64;
    size_t num_layers = 2;
    size_t num_heads = 4;
    size_t ffn_size = 128;
    size_t max_len = 256;
    size_t feature_dim = 1;  // d_f
    size_t num_labels = 2;
    double dropout_p = 0.1;
    bool dataflow_bias = false;
    uint64_t seed = 0;

    size_t head_dim() const { return hidden_size / num_heads; }
    void validate() const;

    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
};

struct LayerParams {
    Eigen::MatrixXd wq, wk, wv, wo;  // H x H, applied as y = x * W^T
    Eigen::VectorXd bq, bk, bv, bo;
    Eigen::VectorXd ln1_gain, ln1_bias, ln2_gain, ln2_bias;
    Eigen::MatrixXd ffn_in;   // ffn x H
    Eigen::VectorXd ffn_in_bias;
    Eigen::MatrixXd ffn_out;  // H x ffn
    Eigen::VectorXd ffn_out_bias;
};

// Every trainable tensor. The same struct doubles as the gradient container.
struct Parameters {
    Eigen::MatrixXd token_embedding;     // vocab x H
    Eigen::MatrixXd position_embedding;  // max_len x H
    std::vector<LayerParams> layers;
    Eigen::MatrixXd pooler_w;  // H x H
    Eigen::VectorXd pooler_b;
    Eigen::MatrixXd feature_w;  // H x d_f   (the feature layer, W1)
    Eigen::VectorXd feature_b;
    Eigen::MatrixXd classifier_w;  // num_labels x 2H   (the classifier, W2)
    Eigen::VectorXd classifier_b;
    double dataflow_bias_scale = 0.0;  // learned attention bias on def->use pairs

    static Parameters zeros(const ModelConfig& cfg);
};

using Gradients = Parameters;

struct TensorView {
    std::string name;
    double* data;
    size_t size;
};

// Fixed-order flat views over every tensor; checkpoint layout, Adam state
// and gradient checking all iterate in this order.
std::vector<TensorView> tensor_views(Parameters& params);

struct LayerTrace {
    Eigen::MatrixXd input;  // block input x0
    Eigen::MatrixXd ln1_xhat;
    Eigen::VectorXd ln1_inv_std;
    Eigen::MatrixXd ln1_out;
    Eigen::MatrixXd q, k, v;
    std::vector<Eigen::MatrixXd> attn_probs;  // per head, L x L
    Eigen::MatrixXd attn_ctx;                 // concatenated heads, input to wo
    Eigen::MatrixXd after_attn;               // x1 = x0 + attention output
    Eigen::MatrixXd ln2_xhat;
    Eigen::VectorXd ln2_inv_std;
    Eigen::MatrixXd ln2_out;
    Eigen::MatrixXd ffn_pre;  // before GELU
    Eigen::MatrixXd ffn_act;  // after GELU
};

// Cached activations for reverse mode; produced only when requested.
struct ForwardTrace {
    std::vector<int> input_ids;
    std::vector<int> attention_mask;
    std::vector<std::pair<int, int>> dataflow_edges;
    Eigen::VectorXd f_out;
    std::vector<LayerTrace> layers;
    Eigen::VectorXd cls_state;
    Eigen::VectorXd pooled;
    Eigen::VectorXd feature_processed;
    Eigen::VectorXd concat;
    std::vector<uint8_t> dropout_mask;  // empty when dropout was not applied
    Eigen::VectorXd concat_dropped;
    Eigen::Vector2d logits;
    Eigen::Vector2d probs;
};

struct ForwardOptions {
    bool train = false;
    bool want_trace = false;
    Rng* dropout_rng = nullptr;                          // used when train and p > 0
    const std::vector<uint8_t>* fixed_dropout_mask = nullptr;  // overrides the rng
};

struct ForwardOutput {
    Eigen::Vector2d logits;
    double prob;  // softmax(logits)[1]
    std::optional<ForwardTrace> trace;
};

// Xavier-uniform weights, zero biases, unit layer-norm gains; deterministic
// per cfg.seed.
Parameters init_params(const ModelConfig& cfg);

ForwardOutput forward(const Parameters& params, const ModelConfig& cfg,
                      const EncodedPair& encoded, const Eigen::VectorXd& f_out,
                      const ForwardOptions& opts = {});

// Log-sum-exp stabilized softmax cross-entropy; for two classes this equals
// binary cross-entropy on softmax(logits)[1].
double cross_entropy(const Eigen::Vector2d& logits, int label);

// Exact reverse-mode gradients of cross_entropy(forward(...)) w.r.t. every
// parameter, honoring the dropout mask recorded in the trace. `scale`
// multiplies the contribution (batch averaging).
void accumulate_gradients(const Parameters& params, const ModelConfig& cfg,
                          const ForwardTrace& trace, int label, Gradients& grads,
                          double scale = 1.0);

Gradients backward(const Parameters& params, const ModelConfig& cfg, const ForwardTrace& trace,
                   int label);

struct PredictOutput {
    double prob;
    int label;  // 1 when prob >= 0.5
};

PredictOutput predict(const Parameters& params, const ModelConfig& cfg,
                      const EncodedPair& encoded, const Eigen::VectorXd& f_out);

void save_checkpoint(const Parameters& params, const ModelConfig& cfg,
                     const std::filesystem::path& path);
std::pair<Parameters, ModelConfig> load_checkpoint(const std::filesystem::path& path);

}  // namespace clonefuse
