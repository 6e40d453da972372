#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "topv/matrix.hpp"
#include "topv/oracle.hpp"
#include "topv/sinkhorn.hpp"
#include "topv/splitmix64.hpp"

namespace topv {

struct VerifyCheck {
    std::string name;
    double value = 0.0;      // observed error
    double tolerance = 0.0;  // allowed error
    bool pass = false;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass = true;
};

using SolveFn = std::function<TransportPlan(const Matrix&, const std::vector<double>&,
                                            const std::vector<double>&, const SinkhornConfig&)>;

namespace detail {

inline double max_entry_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

inline std::vector<double> random_marginal(SplitMix64& rng, int n) {
    std::vector<double> w(n);
    double total = 0.0;
    for (double& v : w) {
        v = 0.1 + rng.next_unit();
        total += v;
    }
    for (double& v : w) v /= total;
    return w;
}

} // namespace detail

// Cross-checks the production solver against oracle_solve on random
// instances. Every tolerance here matches the contract it verifies; a check
// that cannot be evaluated (solver threw) is reported as failed.
inline VerifyReport run_verify_suite(std::uint64_t seed, const std::vector<int>& sizes,
                                     const SolveFn& solver = {}) {
    const SolveFn solve_fn =
        solver ? solver
               : SolveFn([](const Matrix& c, const std::vector<double>& pp,
                            const std::vector<double>& qq, const SinkhornConfig& cf) {
                     return solve(c, pp, qq, cf);
                 });

    VerifyReport report;
    SplitMix64 rng(seed);
    const double epsilon = 0.25;

    const auto add = [&report](const std::string& name, double value, double tol) {
        VerifyCheck c{name, value, tol, value <= tol};
        report.all_pass = report.all_pass && c.pass;
        report.checks.push_back(c);
    };

    for (int n : sizes) {
        if (n < 1 || n > 64) throw ContractError("run_verify_suite: sizes must be in [1, 64]");
        const std::string tag = "N=" + std::to_string(n) + " ";

        Matrix cost(n, n);
        for (double& v : cost.values()) v = rng.next_unit();
        const std::vector<double> p = detail::random_marginal(rng, n);
        const std::vector<double> q = detail::random_marginal(rng, n);

        SinkhornConfig cfg;
        cfg.epsilon = epsilon;
        cfg.max_iter = 20000;
        cfg.tolerance = 1e-10;

        try {
            const TransportPlan reference = oracle_solve(cost, p, q, epsilon);
            const TransportPlan plan = solve_fn(cost, p, q, cfg);

            add(tag + "plan vs oracle", detail::max_entry_diff(plan.plan, reference.plan), 1e-6);
            add(tag + "objective vs oracle",
                std::abs(transport_objective(plan.plan, cost, epsilon) -
                         transport_objective(reference.plan, cost, epsilon)),
                1e-6);

            double col_err = 0.0;
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += plan.plan(i, j);
                col_err = std::max(col_err, std::abs(s - q[j]));
            }
            add(tag + "column marginal", col_err, 1e-6);

            double oracle_err = 0.0;
            for (int i = 0; i < n; ++i) {
                double rs = 0.0, cs = 0.0;
                for (int j = 0; j < n; ++j) {
                    rs += reference.plan(i, j);
                    cs += reference.plan(j, i);
                }
                oracle_err = std::max(oracle_err, std::abs(rs - p[i]));
                oracle_err = std::max(oracle_err, std::abs(cs - q[i]));
            }
            add(tag + "oracle marginals", oracle_err, 1e-10);

            Matrix shifted = cost;
            for (double& v : shifted.values()) v += 0.37;
            const TransportPlan plan_shifted = solve_fn(shifted, p, q, cfg);
            add(tag + "constant-shift invariance",
                detail::max_entry_diff(plan.plan, plan_shifted.plan), 1e-9);

            SinkhornConfig log_cfg = cfg;
            log_cfg.log_domain = true;
            const TransportPlan plan_log = solve_fn(cost, p, q, log_cfg);
            add(tag + "log vs linear domain", detail::max_entry_diff(plan.plan, plan_log.plan),
                1e-8);
        } catch (const Error& e) {
            add(tag + "solver raised: " + std::string(e.what()),
                std::numeric_limits<double>::infinity(), 0.0);
        }
    }
    return report;
}

} // namespace topv
