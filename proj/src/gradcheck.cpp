#include "clonefuse/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace clonefuse {

namespace {

constexpr double kStep = 1e-5;
constexpr size_t kCoordsPerProbe = 200;

// Random but well-formed input: [CLS] a.. [SEP] b.. [SEP] then PAD.
EncodedPair random_input(const ModelConfig& cfg, Rng& rng) {
    EncodedPair enc;
    enc.input_ids.assign(cfg.max_len, Vocabulary::kPad);
    enc.attention_mask.assign(cfg.max_len, 0);

    const size_t budget = cfg.max_len - 3;
    const size_t len_a = 1 + rng.below(budget - 1);
    const size_t len_b = 1 + rng.below(budget - len_a);

    size_t pos = 0;
    auto put = [&](int id) {
        enc.input_ids[pos] = id;
        enc.attention_mask[pos] = 1;
        ++pos;
    };
    auto random_token = [&] {
        return Vocabulary::kNumSpecials +
               static_cast<int>(rng.below(cfg.vocab_size - Vocabulary::kNumSpecials));
    };

    put(Vocabulary::kCls);
    const size_t a_start = pos;
    for (size_t i = 0; i < len_a; ++i) put(random_token());
    put(Vocabulary::kSep);
    for (size_t i = 0; i < len_b; ++i) put(random_token());
    put(Vocabulary::kSep);

    if (cfg.dataflow_bias && len_a >= 2) {
        for (size_t e = 0; e < 1 + rng.below(3); ++e) {
            size_t d = a_start + rng.below(len_a - 1);
            size_t u = d + 1 + rng.below(a_start + len_a - d - 1);
            enc.dataflow_edges.emplace_back(static_cast<int>(d), static_cast<int>(u));
        }
    }
    return enc;
}

}  // namespace

GradCheckReport gradient_check(const ModelConfig& cfg, uint64_t seed, size_t n_probes,
                               double tol) {
    cfg.validate();
    GradCheckReport report;
    report.probes = n_probes;

    for (size_t probe = 0; probe < n_probes; ++probe) {
        Rng rng(derive_seed(seed, probe));

        ModelConfig probe_cfg = cfg;
        probe_cfg.seed = derive_seed(seed, probe * 7919 + 1);
        Parameters params = init_params(probe_cfg);

        EncodedPair input = random_input(probe_cfg, rng);
        Eigen::VectorXd f_out(static_cast<Eigen::Index>(probe_cfg.feature_dim));
        for (Eigen::Index i = 0; i < f_out.size(); ++i) f_out(i) = rng.uniform();
        int label = static_cast<int>(rng.below(2));

        const bool train_mode = probe_cfg.dropout_p > 0.0;
        ForwardOptions fwd_opts;
        fwd_opts.train = train_mode;
        fwd_opts.want_trace = true;
        fwd_opts.dropout_rng = &rng;
        ForwardOutput out = forward(params, probe_cfg, input, f_out, fwd_opts);
        const ForwardTrace& trace = *out.trace;
        Gradients analytic = backward(params, probe_cfg, trace, label);

        // Finite differences see the identical function: same input and the
        // dropout mask recorded in the trace.
        ForwardOptions fd_opts;
        fd_opts.train = train_mode;
        fd_opts.fixed_dropout_mask = trace.dropout_mask.empty() ? nullptr : &trace.dropout_mask;

        auto param_views = tensor_views(params);
        auto grad_views = tensor_views(analytic);
        size_t total = 0;
        for (const auto& v : param_views) total += v.size;

        std::unordered_set<size_t> coords;
        const size_t want = std::min(total, kCoordsPerProbe);
        while (coords.size() < want) coords.insert(rng.below(total));

        for (size_t coord : coords) {
            size_t t = 0, offset = coord;
            while (offset >= param_views[t].size) {
                offset -= param_views[t].size;
                ++t;
            }

            double* slot = param_views[t].data + offset;
            const double saved = *slot;

            *slot = saved + kStep;
            double loss_plus =
                cross_entropy(forward(params, probe_cfg, input, f_out, fd_opts).logits, label);
            *slot = saved - kStep;
            double loss_minus =
                cross_entropy(forward(params, probe_cfg, input, f_out, fd_opts).logits, label);
            *slot = saved;

            double numeric = (loss_plus - loss_minus) / (2.0 * kStep);
            double exact = grad_views[t].data[offset];
            double rel = std::abs(exact - numeric) /
                         std::max({std::abs(exact), std::abs(numeric), 1e-6});
            report.max_rel_err = std::max(report.max_rel_err, rel);
            ++report.coords_checked;
        }
    }

    report.pass = report.max_rel_err < tol;
    return report;
}

}  // namespace clonefuse
