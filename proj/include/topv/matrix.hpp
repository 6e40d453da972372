#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "topv/errors.hpp"

namespace topv {

// Dense row-major matrix of doubles. Just enough linear algebra for this
// project; not a general-purpose library.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ContractError("matmul: inner dimensions disagree");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = arow[k];
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

// y = M x
inline std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
    if (m.cols() != x.size()) throw ContractError("matvec: dimension mismatch");
    std::vector<double> y(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* row = m.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

// y = M^T x
inline std::vector<double> matvec_transposed(const Matrix& m, const std::vector<double>& x) {
    if (m.rows() != x.size()) throw ContractError("matvec_transposed: dimension mismatch");
    std::vector<double> y(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* row = m.row(i);
        const double xi = x[i];
        for (std::size_t j = 0; j < m.cols(); ++j) y[j] += row[j] * xi;
    }
    return y;
}

} // namespace topv
