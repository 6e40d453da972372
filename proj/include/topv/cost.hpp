#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "topv/errors.hpp"
#include "topv/matrix.hpp"
#include "topv/token_set.hpp"

namespace topv {

enum class Normalization { min_max_per_matrix, none };

inline std::string to_string(Normalization n) {
    return n == Normalization::min_max_per_matrix ? "min_max_per_matrix" : "none";
}

inline Normalization normalization_from_string(const std::string& s) {
    if (s == "min_max_per_matrix") return Normalization::min_max_per_matrix;
    if (s == "none") return Normalization::none;
    throw ConfigError("unknown normalization '" + s + "'");
}

struct CostConfig {
    double alpha = 1.0;   // feature term weight
    double beta = 1.0;    // spatial term weight
    double gamma = 0.01;  // central term weight
    double sigma = 10.0;  // Gaussian bandwidth, grid units
    Normalization normalization = Normalization::min_max_per_matrix;

    void validate() const {
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw ConfigError("cost.sigma must be positive");
        for (double w : {alpha, beta, gamma}) {
            if (!std::isfinite(w) || w < 0.0)
                throw ConfigError("cost weights must be finite and nonnegative");
        }
        if (alpha == 0.0 && beta == 0.0 && gamma == 0.0)
            throw ConfigError("at least one cost weight must be positive");
    }
};

// Components after normalization plus their weighted combination.
struct CostMatrix {
    Matrix c_f;
    Matrix c_s;
    Matrix c_e;
    Matrix c_v;
};

// Entry (i, j) is the squared L2 distance between source token i and target
// token j.
inline Matrix feature_cost(const TokenSet& source, const TokenSet& target) {
    if (source.dim() != target.dim())
        throw ContractError("feature_cost: token dimensions differ");
    if (source.size() != target.size())
        throw ContractError("feature_cost: token counts differ");
    const std::size_t n = source.size();
    const std::size_t d = source.dim();
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* s = source.token(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double* t = target.token(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = s[k] - t[k];
                acc += diff * diff;
            }
            out(i, j) = acc;
        }
    }
    return out;
}

// Entry (i, j) is 1 - exp(-((dx^2 + dy^2) / (2 sigma^2))) over grid positions.
// Zero at coincident positions, approaches 1 for distant pairs.
inline Matrix spatial_cost(const TokenSet& source, const TokenSet& target, double sigma) {
    if (!(sigma > 0.0)) throw ContractError("spatial_cost: sigma must be positive");
    if (source.size() != target.size())
        throw ContractError("spatial_cost: token counts differ");
    const std::size_t n = source.size();
    const double inv = 1.0 / (2.0 * sigma * sigma);
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const GridCoord a = source.coord(i);
        for (std::size_t j = 0; j < n; ++j) {
            const GridCoord b = target.coord(j);
            const double dx = static_cast<double>(a.x - b.x);
            const double dy = static_cast<double>(a.y - b.y);
            out(i, j) = 1.0 - std::exp(-(dx * dx + dy * dy) * inv);
        }
    }
    return out;
}

// Row-constant matrix: every entry of row i is the Euclidean distance from
// source token i to the grid center (grid_w / 2, grid_h / 2).
inline Matrix central_cost(const TokenSet& source) {
    const std::size_t n = source.size();
    const double cx = source.grid_w() / 2.0;
    const double cy = source.grid_h() / 2.0;
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const GridCoord a = source.coord(i);
        const double dx = a.x - cx;
        const double dy = a.y - cy;
        const double dist = std::sqrt(dx * dx + dy * dy);
        double* row = out.row(i);
        for (std::size_t j = 0; j < n; ++j) row[j] = dist;
    }
    return out;
}

// Min-max rescale over all entries to [0, 1]; a constant matrix maps to all
// zeros so degenerate components cannot divide by zero.
inline void min_max_normalize(Matrix& m) {
    if (m.values().empty()) return;
    double lo = m.values()[0];
    double hi = m.values()[0];
    for (double v : m.values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi - lo;
    if (span > 0.0) {
        for (double& v : m.values()) v = (v - lo) / span;
    } else {
        for (double& v : m.values()) v = 0.0;
    }
}

// Normalizes each component independently, then combines them elementwise as
// alpha * c_f + beta * c_s + gamma * c_e.
inline CostMatrix build_cost(const TokenSet& source, const TokenSet& target,
                             const CostConfig& cfg) {
    cfg.validate();
    CostMatrix cm;
    cm.c_f = feature_cost(source, target);
    cm.c_s = spatial_cost(source, target, cfg.sigma);
    cm.c_e = central_cost(source);
    if (cfg.normalization == Normalization::min_max_per_matrix) {
        min_max_normalize(cm.c_f);
        min_max_normalize(cm.c_s);
        min_max_normalize(cm.c_e);
    }
    const std::size_t n = source.size();
    cm.c_v = Matrix(n, n);
    for (std::size_t i = 0; i < n * n; ++i) {
        cm.c_v.values()[i] = cfg.alpha * cm.c_f.values()[i] +
                             cfg.beta * cm.c_s.values()[i] +
                             cfg.gamma * cm.c_e.values()[i];
    }
    if (!cm.c_v.all_finite()) throw NumericalError("build_cost: non-finite combined cost");
    return cm;
}

} // namespace topv
