#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "topv/errors.hpp"
#include "topv/matrix.hpp"
#include "topv/sinkhorn.hpp"

namespace topv {

// Reference solver for cross-checking `solve`. Deliberately plain log-domain
// scaling, written directly from the fixed-point definition and sharing no
// code with the production path. Runs until both marginals of the current
// plan are satisfied to 1e-12 in max-norm; desk-scale instances only.
inline TransportPlan oracle_solve(const Matrix& cost, const std::vector<double>& p,
                                  const std::vector<double>& q, double epsilon) {
    const std::size_t n = cost.rows();
    if (n == 0 || cost.cols() != n) throw ContractError("oracle_solve: cost must be square");
    if (n > 64) throw ContractError("oracle_solve: N must be <= 64");
    if (p.size() != n || q.size() != n)
        throw ContractError("oracle_solve: marginal length mismatch");
    if (!(epsilon > 0.0)) throw ContractError("oracle_solve: epsilon must be positive");

    constexpr double kTolerance = 1e-12;
    constexpr long kMaxIterations = 100000;

    const auto lse = [n](const std::vector<double>& terms) {
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) hi = std::max(hi, terms[k]);
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += std::exp(terms[k] - hi);
        return hi + std::log(acc);
    };

    std::vector<double> f(n, 0.0), g(n, 0.0), terms(n);
    Matrix plan(n, n);
    TransportPlan result;
    result.p = p;
    result.q = q;

    for (long t = 1; t <= kMaxIterations; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) terms[j] = -cost(i, j) / epsilon + g[j];
            f[i] = std::log(p[i]) - lse(terms);
        }
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) terms[i] = -cost(i, j) / epsilon + f[i];
            g[j] = std::log(q[j]) - lse(terms);
        }

        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                plan(i, j) = std::exp(f[i] - cost(i, j) / epsilon + g[j]);

        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row_sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) row_sum += plan(i, j);
            worst = std::max(worst, std::abs(row_sum - p[i]));
        }
        for (std::size_t j = 0; j < n; ++j) {
            double col_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) col_sum += plan(i, j);
            worst = std::max(worst, std::abs(col_sum - q[j]));
        }
        if (worst < kTolerance) {
            result.plan = plan;
            result.iterations_used = static_cast<int>(t);
            result.converged = true;
            return result;
        }
    }
    throw NumericalError("oracle_solve: no convergence within iteration cap");
}

} // namespace topv
