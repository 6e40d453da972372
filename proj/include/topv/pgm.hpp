#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "topv/errors.hpp"
#include "topv/token_set.hpp"

namespace topv {

// Plain-text PGM (P2) heatmap of one value per token, placed on the grid via
// the token coords. Values are min-max scaled to 0..255; a constant field
// renders as all-zero.
inline void write_pgm(const std::string& path, const std::vector<double>& values,
                      int grid_h, int grid_w, const std::vector<GridCoord>& coords) {
    if (values.size() != coords.size())
        throw ContractError("write_pgm: values and coords disagree");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = values.empty() ? 0.0 : *lo_it;
    const double hi = values.empty() ? 0.0 : *hi_it;
    const double span = hi - lo;

    std::vector<int> pixels(static_cast<std::size_t>(grid_h) * static_cast<std::size_t>(grid_w), 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const int level = span > 0.0
                              ? static_cast<int>(std::lround((values[i] - lo) / span * 255.0))
                              : 0;
        pixels[static_cast<std::size_t>(coords[i].y) * grid_w + coords[i].x] = level;
    }

    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "P2\n" << grid_w << " " << grid_h << "\n255\n";
    for (int y = 0; y < grid_h; ++y) {
        for (int x = 0; x < grid_w; ++x) {
            out << pixels[static_cast<std::size_t>(y) * grid_w + x];
            out << (x + 1 == grid_w ? '\n' : ' ');
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace topv
