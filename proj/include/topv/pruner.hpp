#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "topv/errors.hpp"
#include "topv/sinkhorn.hpp"
#include "topv/token_set.hpp"

namespace topv {

struct PruneConfig {
    double ratio = 0.5;         // fraction of tokens removed before recovery
    int recovery_interval = 4;  // r; every r-th pruned token comes back, 0 disables

    void validate() const {
        if (!(ratio >= 0.0) || !(ratio < 1.0))
            throw ConfigError("prune.ratio must be in [0, 1)");
        if (recovery_interval < 0)
            throw ConfigError("prune.recovery_interval must be >= 0");
    }
};

struct PruneDecision {
    std::vector<double> importance;  // I, length N
    std::vector<int> kept_topk;      // sorted ascending
    std::vector<int> recovered;      // sorted ascending, disjoint from kept_topk
    std::vector<int> retained;       // sorted union of the two
};

// Row sums of the transport plan.
inline std::vector<double> importance(const TransportPlan& plan) {
    const std::size_t n = plan.plan.rows();
    std::vector<double> imp(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = plan.plan.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < plan.plan.cols(); ++j) acc += row[j];
        imp[i] = acc;
    }
    return imp;
}

// Indices of the keep_count largest scores, ties broken toward the lower
// index, result sorted ascending.
inline std::vector<int> select_topk(const std::vector<double>& scores, int keep_count) {
    const int n = static_cast<int>(scores.size());
    if (keep_count < 1 || keep_count > n)
        throw ContractError("select_topk: keep_count out of range");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&scores](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    std::vector<int> kept(order.begin(), order.begin() + keep_count);
    std::sort(kept.begin(), kept.end());
    return kept;
}

// Every r-th element of the pruned list (positions 0, r, 2r, ...). The list
// is ordered by original token index, so recovery spreads uniformly over the
// image rather than over the importance ranking.
inline std::vector<int> recover(const std::vector<int>& pruned, int interval) {
    std::vector<int> out;
    if (interval <= 0 || pruned.empty()) return out;
    for (std::size_t pos = 0; pos < pruned.size(); pos += static_cast<std::size_t>(interval))
        out.push_back(pruned[pos]);
    return out;
}

struct RetainedCounts {
    int kept = 0;
    int pruned = 0;
    int recovered = 0;
    int retained = 0;
};

// Count arithmetic of a prune decision; independent of importance values.
inline RetainedCounts retained_counts(int n_tokens, const PruneConfig& cfg) {
    cfg.validate();
    RetainedCounts c;
    c.kept = static_cast<int>(std::floor(static_cast<double>(n_tokens) * (1.0 - cfg.ratio)));
    if (c.kept < 1) throw ContractError("prune: keep_count must be >= 1");
    c.pruned = n_tokens - c.kept;
    c.recovered = (cfg.recovery_interval > 0 && c.pruned > 0)
                      ? (c.pruned - 1) / cfg.recovery_interval + 1
                      : 0;
    c.retained = c.kept + c.recovered;
    return c;
}

inline PruneDecision prune(const TokenSet& source, const TransportPlan& plan,
                           const PruneConfig& cfg) {
    cfg.validate();
    if (plan.plan.rows() != source.size())
        throw ContractError("prune: plan dimension does not match token count");
    const int n = static_cast<int>(source.size());
    const RetainedCounts counts = retained_counts(n, cfg);

    PruneDecision decision;
    decision.importance = importance(plan);
    decision.kept_topk = select_topk(decision.importance, counts.kept);

    std::vector<int> pruned;
    pruned.reserve(static_cast<std::size_t>(counts.pruned));
    std::size_t k = 0;
    for (int i = 0; i < n; ++i) {
        if (k < decision.kept_topk.size() && decision.kept_topk[k] == i) {
            ++k;
        } else {
            pruned.push_back(i);
        }
    }
    decision.recovered = recover(pruned, cfg.recovery_interval);

    decision.retained.reserve(decision.kept_topk.size() + decision.recovered.size());
    std::merge(decision.kept_topk.begin(), decision.kept_topk.end(), decision.recovered.begin(),
               decision.recovered.end(), std::back_inserter(decision.retained));
    return decision;
}

} // namespace topv
