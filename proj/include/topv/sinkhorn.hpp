#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "topv/errors.hpp"
#include "topv/matrix.hpp"
#include "topv/token_set.hpp"

namespace topv {

enum class MassMode { uniform, l2_norm };
enum class LastUpdate { column, row };

inline std::string to_string(MassMode m) {
    return m == MassMode::uniform ? "uniform" : "l2_norm";
}
inline MassMode mass_mode_from_string(const std::string& s) {
    if (s == "uniform") return MassMode::uniform;
    if (s == "l2_norm") return MassMode::l2_norm;
    throw ConfigError("unknown mass_mode '" + s + "'");
}

inline std::string to_string(LastUpdate l) {
    return l == LastUpdate::column ? "column" : "row";
}
inline LastUpdate last_update_from_string(const std::string& s) {
    if (s == "column") return LastUpdate::column;
    if (s == "row") return LastUpdate::row;
    throw ConfigError("unknown last_update '" + s + "'");
}

struct SinkhornConfig {
    double epsilon = 0.05;  // entropic temperature on the combined cost
    int max_iter = 3;       // fixed iteration budget by default
    double tolerance = 1e-6;
    MassMode mass_mode = MassMode::l2_norm;
    LastUpdate last_update = LastUpdate::column;
    bool log_domain = false;

    void validate() const {
        if (!(epsilon > 0.0) || !std::isfinite(epsilon))
            throw ConfigError("sinkhorn.epsilon must be positive");
        if (!(tolerance > 0.0) || !std::isfinite(tolerance))
            throw ConfigError("sinkhorn.tolerance must be positive");
        if (max_iter < 1) throw ConfigError("sinkhorn.max_iter must be >= 1");
    }
};

struct TransportPlan {
    Matrix plan;            // P*, N x N, nonnegative
    std::vector<double> p;  // source marginal
    std::vector<double> q;  // target marginal
    int iterations_used = 0;
    bool converged = false;
};

// Mass distributions over source and target tokens, each strictly positive
// and summing to 1. l2_norm weights each token by the L2 norm of its feature
// vector; tokens with zero norm get a 1e-12 floor before renormalization.
inline std::vector<double> token_masses(const TokenSet& tokens, MassMode mode) {
    const std::size_t n = tokens.size();
    std::vector<double> w(n);
    if (mode == MassMode::uniform) {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
        return w;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = tokens.token(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < tokens.dim(); ++k) acc += row[k] * row[k];
        w[i] = std::max(std::sqrt(acc), 1e-12);
        total += w[i];
    }
    for (double& v : w) v /= total;
    return w;
}

inline std::pair<std::vector<double>, std::vector<double>>
make_marginals(const TokenSet& source, const TokenSet& target, MassMode mode) {
    if (source.size() == 0) throw ContractError("make_marginals: empty token set");
    return {token_masses(source, mode), token_masses(target, mode)};
}

namespace detail {

inline void check_solve_inputs(const Matrix& cost, const std::vector<double>& p,
                               const std::vector<double>& q) {
    const std::size_t n = cost.rows();
    if (n == 0 || cost.cols() != n) throw ContractError("solve: cost must be square, N >= 1");
    if (p.size() != n || q.size() != n)
        throw ContractError("solve: marginal length does not match cost");
    if (!cost.all_finite()) throw ContractError("solve: cost has non-finite entries");
    double ps = 0.0;
    double qs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(p[i] > 0.0) || !(q[i] > 0.0))
            throw ContractError("solve: marginals must be strictly positive");
        ps += p[i];
        qs += q[i];
    }
    if (std::abs(ps - 1.0) > 1e-9 || std::abs(qs - 1.0) > 1e-9)
        throw ContractError("solve: marginals must sum to 1");
}

inline double max_abs_change(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// log(sum_j exp(v_j)) with the usual max shift.
inline double log_sum_exp(const double* v, std::size_t n) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) hi = std::max(hi, v[j]);
    if (!std::isfinite(hi)) return hi;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += std::exp(v[j] - hi);
    return hi + std::log(acc);
}

} // namespace detail

// Entropic OT by alternating diagonal scaling of K = exp(-C / epsilon):
//
//   u <- p ./ (K v)        v <- q ./ (K^T u)
//
// last_update picks which scaling runs second within an iteration, so that
// side's marginal is matched exactly when iteration stops early. Stops when
// both scaling vectors move less than `tolerance` in max-norm, or after
// max_iter iterations. The log_domain path evaluates the same fixed point
// with log-sum-exp updates and tolerates kernels that underflow linearly.
inline TransportPlan solve(const Matrix& cost, const std::vector<double>& p,
                           const std::vector<double>& q, const SinkhornConfig& cfg) {
    cfg.validate();
    detail::check_solve_inputs(cost, p, q);
    const std::size_t n = cost.rows();

    TransportPlan result;
    result.p = p;
    result.q = q;

    if (!cfg.log_domain) {
        Matrix kernel(n, n);
        std::vector<bool> row_alive(n, false), col_alive(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double k = std::exp(-cost(i, j) / cfg.epsilon);
                if (!std::isfinite(k))
                    throw NumericalError("solve: kernel overflow; use log_domain");
                if (k > 0.0) {
                    row_alive[i] = true;
                    col_alive[j] = true;
                }
                kernel(i, j) = k;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!row_alive[i] || !col_alive[i])
                throw NumericalError(
                    "solve: kernel underflowed to an all-zero row or column; use log_domain");
        }
        // Clamp vanishing entries so the scaling divisions stay finite.
        for (double& k : kernel.values()) k = std::max(k, 1e-300);

        std::vector<double> u(n, 1.0), v(n, 1.0);
        for (int t = 1; t <= cfg.max_iter; ++t) {
            const std::vector<double> u_prev = u;
            const std::vector<double> v_prev = v;
            if (cfg.last_update == LastUpdate::column) {
                const std::vector<double> kv = matvec(kernel, v);
                for (std::size_t i = 0; i < n; ++i) u[i] = p[i] / kv[i];
                const std::vector<double> ktu = matvec_transposed(kernel, u);
                for (std::size_t j = 0; j < n; ++j) v[j] = q[j] / ktu[j];
            } else {
                const std::vector<double> ktu = matvec_transposed(kernel, u);
                for (std::size_t j = 0; j < n; ++j) v[j] = q[j] / ktu[j];
                const std::vector<double> kv = matvec(kernel, v);
                for (std::size_t i = 0; i < n; ++i) u[i] = p[i] / kv[i];
            }
            result.iterations_used = t;
            if (detail::max_abs_change(u, u_prev) < cfg.tolerance &&
                detail::max_abs_change(v, v_prev) < cfg.tolerance) {
                result.converged = true;
                break;
            }
        }
        result.plan = Matrix(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) result.plan(i, j) = u[i] * kernel(i, j) * v[j];
    } else {
        Matrix log_kernel(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) log_kernel(i, j) = -cost(i, j) / cfg.epsilon;
        std::vector<double> log_p(n), log_q(n);
        for (std::size_t i = 0; i < n; ++i) {
            log_p[i] = std::log(p[i]);
            log_q[i] = std::log(q[i]);
        }

        std::vector<double> f(n, 0.0), g(n, 0.0);  // log u, log v
        std::vector<double> u_lin(n, 1.0), v_lin(n, 1.0);
        std::vector<double> scratch(n);
        const auto update_f = [&] {
            for (std::size_t i = 0; i < n; ++i) {
                const double* krow = log_kernel.row(i);
                for (std::size_t j = 0; j < n; ++j) scratch[j] = krow[j] + g[j];
                f[i] = log_p[i] - detail::log_sum_exp(scratch.data(), n);
            }
        };
        const auto update_g = [&] {
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < n; ++i) scratch[i] = log_kernel(i, j) + f[i];
                g[j] = log_q[j] - detail::log_sum_exp(scratch.data(), n);
            }
        };

        for (int t = 1; t <= cfg.max_iter; ++t) {
            const std::vector<double> u_prev = u_lin;
            const std::vector<double> v_prev = v_lin;
            if (cfg.last_update == LastUpdate::column) {
                update_f();
                update_g();
            } else {
                update_g();
                update_f();
            }
            for (std::size_t i = 0; i < n; ++i) {
                u_lin[i] = std::exp(f[i]);
                v_lin[i] = std::exp(g[i]);
            }
            result.iterations_used = t;
            if (detail::max_abs_change(u_lin, u_prev) < cfg.tolerance &&
                detail::max_abs_change(v_lin, v_prev) < cfg.tolerance) {
                result.converged = true;
                break;
            }
        }
        result.plan = Matrix(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                result.plan(i, j) = std::exp(f[i] + log_kernel(i, j) + g[j]);
    }

    if (!result.plan.all_finite())
        throw NumericalError("solve: transport plan is not finite");
    return result;
}

// <P, C> - epsilon * H(P) with Shannon entropy H(P) = -sum P log P.
inline double plan_entropy(const Matrix& plan) {
    double h = 0.0;
    for (double v : plan.values())
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

inline double transport_objective(const Matrix& plan, const Matrix& cost, double epsilon) {
    if (!plan.same_shape(cost)) throw ContractError("transport_objective: shape mismatch");
    double lin = 0.0;
    for (std::size_t i = 0; i < plan.values().size(); ++i)
        lin += plan.values()[i] * cost.values()[i];
    return lin - epsilon * plan_entropy(plan);
}

} // namespace topv
