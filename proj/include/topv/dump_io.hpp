#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "topv/errors.hpp"
#include "topv/token_set.hpp"

namespace topv {

// "TOPV" dump: 28-byte header followed by float32 token features, row-major.
//
//   magic        4 bytes  "TOPV"
//   version      u32 LE   1
//   n_tokens     u32 LE
//   dim          u32 LE
//   grid_h       u32 LE
//   grid_w       u32 LE
//   payload_kind u32 LE   0 = source only, 1 = source + target
//
// Payload length is exactly (1 or 2) * n_tokens * dim * 4 bytes. Features are
// stored single-precision on disk and widened to double in memory.

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void append_f32le(std::string& out, float f) {
    put_u32le(out, std::bit_cast<std::uint32_t>(f));
}

inline void append_matrix_f32(std::string& out, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* row = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j)
            append_f32le(out, static_cast<float>(row[j]));
    }
}

inline Matrix read_matrix_f32(const unsigned char* p, std::size_t n, std::size_t d) {
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = m.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            row[j] = static_cast<double>(std::bit_cast<float>(get_u32le(p)));
            p += 4;
        }
    }
    return m;
}

} // namespace detail

inline constexpr std::size_t kDumpHeaderSize = 28;
inline constexpr std::uint32_t kDumpVersion = 1;

inline void save_dump(const TokenSet& source, const std::optional<TokenSet>& target,
                      const std::string& path) {
    if (target) {
        if (target->size() != source.size() || target->dim() != source.dim() ||
            target->grid_h() != source.grid_h() || target->grid_w() != source.grid_w())
            throw ContractError("save_dump: target shape does not match source");
    }
    std::string bytes;
    bytes.reserve(kDumpHeaderSize + (target ? 2u : 1u) * source.size() * source.dim() * 4);
    bytes.append("TOPV", 4);
    detail::put_u32le(bytes, kDumpVersion);
    detail::put_u32le(bytes, static_cast<std::uint32_t>(source.size()));
    detail::put_u32le(bytes, static_cast<std::uint32_t>(source.dim()));
    detail::put_u32le(bytes, static_cast<std::uint32_t>(source.grid_h()));
    detail::put_u32le(bytes, static_cast<std::uint32_t>(source.grid_w()));
    detail::put_u32le(bytes, target ? 1u : 0u);
    detail::append_matrix_f32(bytes, source.data());
    if (target) detail::append_matrix_f32(bytes, target->data());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("save_dump: cannot open " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("save_dump: write failed for " + path);
}

inline std::pair<TokenSet, std::optional<TokenSet>> load_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_dump: cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("load_dump: read failed for " + path);

    if (bytes.size() < kDumpHeaderSize) throw FormatError("load_dump: truncated header");
    const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (std::memcmp(p, "TOPV", 4) != 0) throw FormatError("load_dump: bad magic");
    const std::uint32_t version = detail::get_u32le(p + 4);
    if (version != kDumpVersion)
        throw FormatError("load_dump: unsupported version " + std::to_string(version));
    const std::uint32_t n = detail::get_u32le(p + 8);
    const std::uint32_t d = detail::get_u32le(p + 12);
    const std::uint32_t grid_h = detail::get_u32le(p + 16);
    const std::uint32_t grid_w = detail::get_u32le(p + 20);
    const std::uint32_t kind = detail::get_u32le(p + 24);
    if (kind > 1) throw FormatError("load_dump: unknown payload kind " + std::to_string(kind));
    if (n == 0 || d == 0 || grid_h == 0 || grid_w == 0)
        throw FormatError("load_dump: zero-sized dump");
    if (static_cast<std::uint64_t>(grid_h) * grid_w != n)
        throw FormatError("load_dump: token count does not match grid");

    const std::uint64_t block = static_cast<std::uint64_t>(n) * d * 4;
    const std::uint64_t expected = kDumpHeaderSize + (kind == 1 ? 2 : 1) * block;
    if (bytes.size() != expected)
        throw FormatError("load_dump: payload length mismatch (expected " +
                          std::to_string(expected) + " bytes, got " +
                          std::to_string(bytes.size()) + ")");

    Matrix src = detail::read_matrix_f32(p + kDumpHeaderSize, n, d);
    if (!src.all_finite()) throw DataError("load_dump: non-finite value in source payload");
    TokenSet source(std::move(src), static_cast<int>(grid_h), static_cast<int>(grid_w));

    std::optional<TokenSet> target;
    if (kind == 1) {
        Matrix tgt = detail::read_matrix_f32(p + kDumpHeaderSize + block, n, d);
        if (!tgt.all_finite()) throw DataError("load_dump: non-finite value in target payload");
        target.emplace(std::move(tgt), static_cast<int>(grid_h), static_cast<int>(grid_w));
    }
    return {std::move(source), std::move(target)};
}

} // namespace topv
