#pragma once

#include <cstdint>

#include "topv/errors.hpp"

namespace topv {

struct ModelShape {
    int n_layers = 32;     // L
    int hidden = 4096;     // d_model
    int mlp_hidden = 11008;
    int n_visual = 576;
    int prune_layer = 2;   // L_i, layers that still see every token

    void validate() const {
        if (n_layers < 1) throw ConfigError("model.n_layers must be >= 1");
        if (hidden < 1) throw ConfigError("model.hidden must be >= 1");
        if (mlp_hidden < 1) throw ConfigError("model.mlp_hidden must be >= 1");
        if (n_visual < 1) throw ConfigError("model.n_visual must be >= 1");
        if (prune_layer < 0) throw ConfigError("model.prune_layer must be >= 0");
        if (prune_layer >= n_layers)
            throw ConfigError("model.prune_layer must be < model.n_layers");
    }
};

struct BudgetReport {
    double flops_ratio_layerweighted = 0.0;  // fraction of compute removed
    double flops_ratio_tokenfraction = 0.0;  // ditto, token-count accounting
    double kv_ratio = 0.0;                   // fraction of KV cache remaining
    int retained_tokens = 0;
};

// One transformer layer over n tokens:
//   4nd^2 (QKVO projections) + 2n^2 d (scores + mix) + 2ndm (MLP).
inline double layer_flops(std::int64_t n_tokens, const ModelShape& shape) {
    if (n_tokens < 1) throw ContractError("layer_flops: n_tokens must be >= 1");
    shape.validate();
    const std::int64_t d = shape.hidden;
    const std::int64_t m = shape.mlp_hidden;
    const std::int64_t proj = 4 * n_tokens * d * d;
    const std::int64_t attn = 2 * n_tokens * n_tokens * d;
    const std::int64_t mlp = 2 * n_tokens * d * m;
    return static_cast<double>(proj) + static_cast<double>(attn) + static_cast<double>(mlp);
}

// Savings under a schedule that runs the first prune_layer layers on all
// n_visual tokens and the rest on `retained`. Token-fraction mode counts
// tokens; layer-weighted mode counts FLOPs, so the quadratic attention term
// makes it slightly larger whenever tokens are dropped.
inline BudgetReport flops_ratio(int retained, const ModelShape& shape) {
    shape.validate();
    if (retained < 0 || retained > shape.n_visual)
        throw ContractError("flops_ratio: retained must be in [0, n_visual]");

    const double l = shape.n_layers;
    const double li = shape.prune_layer;
    const double n = shape.n_visual;

    BudgetReport report;
    report.retained_tokens = retained;
    report.flops_ratio_tokenfraction = (n - retained) / n * (l - li) / l;

    const double full = layer_flops(shape.n_visual, shape);
    const double reduced = retained > 0 ? layer_flops(retained, shape) : 0.0;
    report.flops_ratio_layerweighted = 1.0 - (li * full + (l - li) * reduced) / (l * full);

    report.kv_ratio = (li * n + (l - li) * retained) / (l * n);
    return report;
}

} // namespace topv
