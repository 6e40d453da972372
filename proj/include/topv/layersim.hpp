#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "topv/errors.hpp"
#include "topv/matrix.hpp"
#include "topv/splitmix64.hpp"
#include "topv/token_set.hpp"

namespace topv {

enum class Tap {
    pre_ln,            // after the first LayerNorm
    attn,              // attention output + residual
    attn_no_residual,  // attention output alone
    post_ln,           // after the second LayerNorm
    mlp,               // full block output
};

inline std::string to_string(Tap t) {
    switch (t) {
        case Tap::pre_ln: return "pre_ln";
        case Tap::attn: return "attn";
        case Tap::attn_no_residual: return "attn_no_residual";
        case Tap::post_ln: return "post_ln";
        case Tap::mlp: return "mlp";
    }
    throw ContractError("unknown tap");
}

inline Tap tap_from_string(const std::string& s) {
    if (s == "pre_ln") return Tap::pre_ln;
    if (s == "attn") return Tap::attn;
    if (s == "attn_no_residual") return Tap::attn_no_residual;
    if (s == "post_ln") return Tap::post_ln;
    if (s == "mlp") return Tap::mlp;
    throw ConfigError("unknown tap: " + s);
}

struct ToyBlockConfig {
    int dim = 16;
    int heads = 2;
    int mlp_mult = 4;
    std::uint64_t seed = 0;
    Tap tap = Tap::post_ln;

    void validate() const {
        if (dim < 1) throw ConfigError("sim.dim must be >= 1");
        if (heads < 1) throw ConfigError("sim.heads must be >= 1");
        if (dim % heads != 0) throw ConfigError("sim.dim must be divisible by sim.heads");
        if (mlp_mult < 1) throw ConfigError("sim.mlp_mult must be >= 1");
    }
};

struct ToyBlock {
    int dim = 0;
    int heads = 0;
    Matrix wq, wk, wv, wo;  // each dim x dim
    Matrix w1;              // dim x (mlp_mult * dim)
    Matrix w2;              // (mlp_mult * dim) x dim
};

namespace detail {

inline void fill_weights(Matrix& m, SplitMix64& rng) {
    for (double& v : m.values()) v = std::ldexp(static_cast<double>(rng.next()), -64) * 0.2 - 0.1;
}

// Per-token LayerNorm: population variance, floored at 1e-5, no affine.
inline Matrix layer_norm(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    const std::size_t d = x.cols();
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* row = x.row(i);
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += row[j];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double c = row[j] - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(std::max(var, 1e-5));
        double* orow = out.row(i);
        for (std::size_t j = 0; j < d; ++j) orow[j] = (row[j] - mean) * inv;
    }
    return out;
}

inline void softmax_rows(Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double* row = m.row(i);
        double mx = row[0];
        for (std::size_t j = 1; j < m.cols(); ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (std::size_t j = 0; j < m.cols(); ++j) row[j] /= sum;
    }
}

inline Matrix add(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.values().size(); ++i)
        out.values()[i] = a.values()[i] + b.values()[i];
    return out;
}

} // namespace detail

// Weights come from a single SplitMix64 stream: wq, wk, wv, wo, w1, w2 in
// that order, each filled row by row.
inline ToyBlock init_block(const ToyBlockConfig& cfg) {
    cfg.validate();
    ToyBlock b;
    b.dim = cfg.dim;
    b.heads = cfg.heads;
    const std::size_t d = static_cast<std::size_t>(cfg.dim);
    const std::size_t h = d * static_cast<std::size_t>(cfg.mlp_mult);
    b.wq = Matrix(d, d);
    b.wk = Matrix(d, d);
    b.wv = Matrix(d, d);
    b.wo = Matrix(d, d);
    b.w1 = Matrix(d, h);
    b.w2 = Matrix(h, d);
    SplitMix64 rng(cfg.seed);
    detail::fill_weights(b.wq, rng);
    detail::fill_weights(b.wk, rng);
    detail::fill_weights(b.wv, rng);
    detail::fill_weights(b.wo, rng);
    detail::fill_weights(b.w1, rng);
    detail::fill_weights(b.w2, rng);
    return b;
}

inline Matrix multi_head_attention(const ToyBlock& block, const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const std::size_t head_dim = d / static_cast<std::size_t>(block.heads);
    const Matrix q = matmul(x, block.wq);
    const Matrix k = matmul(x, block.wk);
    const Matrix v = matmul(x, block.wv);
    Matrix context(n, d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
    for (int h = 0; h < block.heads; ++h) {
        const std::size_t off = static_cast<std::size_t>(h) * head_dim;
        Matrix scores(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            const double* qi = q.row(i) + off;
            for (std::size_t j = 0; j < n; ++j) {
                const double* kj = k.row(j) + off;
                double dot = 0.0;
                for (std::size_t c = 0; c < head_dim; ++c) dot += qi[c] * kj[c];
                scores(i, j) = dot * scale;
            }
        }
        detail::softmax_rows(scores);
        for (std::size_t i = 0; i < n; ++i) {
            double* out = context.row(i) + off;
            std::fill(out, out + head_dim, 0.0);
            const double* srow = scores.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                const double* vj = v.row(j) + off;
                const double a = srow[j];
                for (std::size_t c = 0; c < head_dim; ++c) out[c] += a * vj[c];
            }
        }
    }
    return matmul(context, block.wo);
}

// Pre-LN transformer block, stopped at the requested tap:
//   h1 = ln(x); a = mhsa(h1) @ wo; x1 = x + a
//   h2 = ln(x1); m = relu(h2 @ w1) @ w2; x2 = x1 + m
inline Matrix forward_tap(const ToyBlock& block, const Matrix& x, Tap tap) {
    if (x.cols() != static_cast<std::size_t>(block.dim))
        throw ContractError("forward_tap: feature dim does not match block dim");
    const Matrix h1 = detail::layer_norm(x);
    if (tap == Tap::pre_ln) return h1;
    const Matrix a = multi_head_attention(block, h1);
    if (tap == Tap::attn_no_residual) return a;
    const Matrix x1 = detail::add(x, a);
    if (tap == Tap::attn) return x1;
    const Matrix h2 = detail::layer_norm(x1);
    if (tap == Tap::post_ln) return h2;
    Matrix hidden = matmul(h2, block.w1);
    for (double& v : hidden.values()) v = std::max(v, 0.0);
    const Matrix m = matmul(hidden, block.w2);
    return detail::add(x1, m);
}

// Convenience wrapper: run the block over a token set, keep the grid.
inline TokenSet simulate(const TokenSet& source, const ToyBlockConfig& cfg) {
    ToyBlockConfig adjusted = cfg;
    adjusted.dim = static_cast<int>(source.dim());
    if (adjusted.dim % adjusted.heads != 0)
        throw ConfigError("sim.heads must divide the token feature dim");
    const ToyBlock block = init_block(adjusted);
    Matrix out = forward_tap(block, source.data(), adjusted.tap);
    return TokenSet(std::move(out), source.grid_h(), source.grid_w(), source.coords());
}

} // namespace topv
