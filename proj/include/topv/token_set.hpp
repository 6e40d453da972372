#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "topv/errors.hpp"
#include "topv/matrix.hpp"

namespace topv {

struct GridCoord {
    int x = 0;
    int y = 0;
    bool operator==(const GridCoord&) const = default;
};

// A set of token feature vectors (N x d) tied to positions on a 2-D patch
// grid. Immutable after construction, safe to share across threads.
//
// When coords are auto-generated the flattening is row-major with x fastest:
// token i sits at (i mod grid_w, i div grid_w).
class TokenSet {
public:
    // Auto-generated coords; requires N == grid_h * grid_w.
    TokenSet(Matrix data, int grid_h, int grid_w)
        : TokenSet(std::move(data), grid_h, grid_w, row_major_coords(grid_h, grid_w)) {}

    TokenSet(Matrix data, int grid_h, int grid_w, std::vector<GridCoord> coords)
        : data_(std::move(data)), grid_h_(grid_h), grid_w_(grid_w), coords_(std::move(coords)) {
        if (grid_h_ <= 0 || grid_w_ <= 0)
            throw ContractError("TokenSet: grid dimensions must be positive");
        if (coords_.size() != data_.rows())
            throw ContractError("TokenSet: coords size must equal token count");
        for (const GridCoord& c : coords_) {
            if (c.x < 0 || c.x >= grid_w_ || c.y < 0 || c.y >= grid_h_)
                throw ContractError("TokenSet: coordinate outside grid");
        }
        if (!data_.all_finite())
            throw DataError("TokenSet: non-finite feature value");
    }

    std::size_t size() const { return data_.rows(); }
    std::size_t dim() const { return data_.cols(); }
    int grid_h() const { return grid_h_; }
    int grid_w() const { return grid_w_; }

    const Matrix& data() const { return data_; }
    const double* token(std::size_t i) const { return data_.row(i); }
    const GridCoord& coord(std::size_t i) const { return coords_[i]; }
    const std::vector<GridCoord>& coords() const { return coords_; }

    static std::vector<GridCoord> row_major_coords(int grid_h, int grid_w) {
        std::vector<GridCoord> coords;
        coords.reserve(static_cast<std::size_t>(grid_h) * static_cast<std::size_t>(grid_w));
        for (int y = 0; y < grid_h; ++y)
            for (int x = 0; x < grid_w; ++x) coords.push_back({x, y});
        return coords;
    }

private:
    Matrix data_;
    int grid_h_;
    int grid_w_;
    std::vector<GridCoord> coords_;
};

} // namespace topv
