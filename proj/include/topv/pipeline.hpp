#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "topv/budget.hpp"
#include "topv/config.hpp"
#include "topv/cost.hpp"
#include "topv/errors.hpp"
#include "topv/layersim.hpp"
#include "topv/pgm.hpp"
#include "topv/pruner.hpp"
#include "topv/sinkhorn.hpp"
#include "topv/token_set.hpp"

namespace topv {

struct PipelineResult {
    std::vector<double> importance;
    std::vector<int> kept_topk;
    std::vector<int> recovered;
    std::vector<int> retained;
    BudgetReport budget;
    int iterations_used = 0;
    bool converged = false;
    double cost_ms = 0.0;   // cost matrix construction
    double solve_ms = 0.0;  // transport solve
};

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
    const auto dt = std::chrono::steady_clock::now() - t0;
    return std::chrono::duration<double, std::milli>(dt).count();
}

} // namespace detail

// Shortest decimal that round-trips a double; used by every text artifact so
// outputs stay byte-deterministic.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Scores, prunes, and budgets one token dump. Targets come from the dump
// when present, otherwise the toy block manufactures them at the configured
// tap. The budget report uses the dump's token count as the vision-token
// count; the rest of the model shape comes from the config.
inline PipelineResult run_pipeline(const TokenSet& source, const std::optional<TokenSet>& target,
                                   const RunConfig& cfg) {
    cfg.validate();
    std::optional<TokenSet> manufactured;
    if (!target.has_value()) manufactured = simulate(source, cfg.sim);
    const TokenSet& targets = target.has_value() ? *target : *manufactured;

    PipelineResult result;

    auto t0 = std::chrono::steady_clock::now();
    const CostMatrix cost = build_cost(source, targets, cfg.cost);
    result.cost_ms = detail::ms_since(t0);

    const std::vector<double> p = token_masses(source, cfg.sinkhorn.mass_mode);
    const std::vector<double> q = token_masses(targets, cfg.sinkhorn.mass_mode);

    t0 = std::chrono::steady_clock::now();
    const TransportPlan plan = solve(cost.c_v, p, q, cfg.sinkhorn);
    result.solve_ms = detail::ms_since(t0);
    result.iterations_used = plan.iterations_used;
    result.converged = plan.converged;

    PruneDecision decision = prune(source, plan, cfg.prune);
    result.importance = std::move(decision.importance);
    result.kept_topk = std::move(decision.kept_topk);
    result.recovered = std::move(decision.recovered);
    result.retained = std::move(decision.retained);

    ModelShape shape = cfg.model_shape;
    shape.n_visual = static_cast<int>(source.size());
    result.budget = flops_ratio(static_cast<int>(result.retained.size()), shape);
    return result;
}

// decision.csv: one row per token, statuses kept / recovered / pruned
// partition the index range exactly.
inline void write_decision_csv(const std::string& path, const PipelineResult& r) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "index,importance,status\n";
    std::size_t k = 0;
    std::size_t rec = 0;
    for (std::size_t i = 0; i < r.importance.size(); ++i) {
        const int idx = static_cast<int>(i);
        const char* status = "pruned";
        if (k < r.kept_topk.size() && r.kept_topk[k] == idx) {
            status = "kept";
            ++k;
        } else if (rec < r.recovered.size() && r.recovered[rec] == idx) {
            status = "recovered";
            ++rec;
        }
        out << idx << ',' << format_double(r.importance[i]) << ',' << status << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

inline void write_retained_txt(const std::string& path, const std::vector<int>& retained) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (int idx : retained) out << idx << '\n';
    if (!out) throw IoError("write failed: " + path);
}

inline void write_budget_csv(const std::string& path, const BudgetReport& b) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "retained_tokens,flops_ratio_tokenfraction,flops_ratio_layerweighted,kv_ratio\n";
    out << b.retained_tokens << ',' << format_double(b.flops_ratio_tokenfraction) << ','
        << format_double(b.flops_ratio_layerweighted) << ',' << format_double(b.kv_ratio) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

inline void write_artifacts(const std::string& out_dir, const TokenSet& source,
                            const PipelineResult& r) {
    write_decision_csv(out_dir + "/decision.csv", r);
    write_retained_txt(out_dir + "/retained.txt", r.retained);
    write_pgm(out_dir + "/importance.pgm", r.importance, source.grid_h(), source.grid_w(),
              source.coords());
    write_budget_csv(out_dir + "/budget.csv", r.budget);
}

} // namespace topv
