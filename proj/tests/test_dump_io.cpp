#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "topv/dump_io.hpp"
#include "topv/errors.hpp"
#include "topv/matrix.hpp"
#include "topv/token_set.hpp"

namespace {

// Values chosen to be exactly representable in single precision so the
// round-trip comparison can demand bit equality.
topv::TokenSet make_tokens(int grid_h, int grid_w, int dim, double scale) {
    const std::size_t n = static_cast<std::size_t>(grid_h) * grid_w;
    topv::Matrix data(n, static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j)
            data(i, j) = scale * (0.25 * static_cast<double>(i) - 0.5 * j);
    return topv::TokenSet(std::move(data), grid_h, grid_w);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::uint32_t u32le(const std::string& bytes, std::size_t off) {
    const auto b = [&](std::size_t k) {
        return static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + k]));
    };
    return b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
}

} // namespace

TEST_CASE("source-only dump round-trips bit-exactly", "[dump_io]") {
    const topv::TokenSet tokens = make_tokens(2, 3, 4, 1.0);
    const std::string path = "dump_roundtrip_src.topv";
    topv::save_dump(tokens, std::nullopt, path);

    const auto [source, target] = topv::load_dump(path);
    REQUIRE_FALSE(target.has_value());
    REQUIRE(source.size() == 6);
    REQUIRE(source.dim() == 4);
    REQUIRE(source.grid_h() == 2);
    REQUIRE(source.grid_w() == 3);
    for (std::size_t i = 0; i < source.size(); ++i)
        for (std::size_t j = 0; j < source.dim(); ++j)
            REQUIRE(source.data()(i, j) == tokens.data()(i, j));

    // Saving the loaded set reproduces the file byte for byte.
    const std::string path2 = "dump_roundtrip_src2.topv";
    topv::save_dump(source, std::nullopt, path2);
    REQUIRE(read_file(path) == read_file(path2));
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("source+target dump round-trips and sets kind=1", "[dump_io]") {
    const topv::TokenSet src = make_tokens(2, 2, 3, 1.0);
    const topv::TokenSet tgt = make_tokens(2, 2, 3, -2.0);
    const std::string path = "dump_roundtrip_pair.topv";
    topv::save_dump(src, tgt, path);

    const std::string bytes = read_file(path);
    REQUIRE(bytes.size() == topv::kDumpHeaderSize + 2u * 4u * 3u * 4u);
    REQUIRE(bytes.substr(0, 4) == "TOPV");
    REQUIRE(u32le(bytes, 4) == topv::kDumpVersion);
    REQUIRE(u32le(bytes, 8) == 4);   // n_tokens
    REQUIRE(u32le(bytes, 12) == 3);  // dim
    REQUIRE(u32le(bytes, 16) == 2);  // grid_h
    REQUIRE(u32le(bytes, 20) == 2);  // grid_w
    REQUIRE(u32le(bytes, 24) == 1);  // payload_kind

    const auto [source, target] = topv::load_dump(path);
    REQUIRE(target.has_value());
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            REQUIRE(source.data()(i, j) == src.data()(i, j));
            REQUIRE(target->data()(i, j) == tgt.data()(i, j));
        }
    std::remove(path.c_str());
}

TEST_CASE("auto coords are row-major with x fastest", "[dump_io]") {
    const topv::TokenSet tokens = make_tokens(2, 2, 1, 1.0);
    const std::string path = "dump_coords.topv";
    topv::save_dump(tokens, std::nullopt, path);
    const auto [source, target] = topv::load_dump(path);
    const std::vector<topv::GridCoord> want = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    REQUIRE(source.coords() == want);
    std::remove(path.c_str());
}

TEST_CASE("doubles are stored as single precision", "[dump_io]") {
    topv::Matrix data(1, 1);
    data(0, 0) = 0.1;  // not representable in float32
    const topv::TokenSet tokens(std::move(data), 1, 1);
    const std::string path = "dump_f32.topv";
    topv::save_dump(tokens, std::nullopt, path);
    const auto [source, target] = topv::load_dump(path);
    REQUIRE(source.data()(0, 0) == static_cast<double>(static_cast<float>(0.1)));
    REQUIRE(source.data()(0, 0) != 0.1);
    std::remove(path.c_str());
}

TEST_CASE("target with mismatched shape is rejected at save", "[dump_io]") {
    const topv::TokenSet src = make_tokens(2, 2, 3, 1.0);
    const topv::TokenSet bad_dim = make_tokens(2, 2, 2, 1.0);
    const topv::TokenSet bad_n = make_tokens(2, 3, 3, 1.0);
    REQUIRE_THROWS_AS(topv::save_dump(src, bad_dim, "never_written.topv"), topv::ContractError);
    REQUIRE_THROWS_AS(topv::save_dump(src, bad_n, "never_written.topv"), topv::ContractError);
}

TEST_CASE("malformed dumps raise format errors", "[dump_io]") {
    const topv::TokenSet tokens = make_tokens(2, 2, 2, 1.0);
    const std::string path = "dump_malformed.topv";
    topv::save_dump(tokens, std::nullopt, path);
    const std::string good = read_file(path);

    SECTION("bad magic") {
        std::string bytes = good;
        bytes[0] = 'X';
        write_file(path, bytes);
        REQUIRE_THROWS_AS(topv::load_dump(path), topv::FormatError);
    }
    SECTION("unsupported version") {
        std::string bytes = good;
        bytes[4] = 2;
        write_file(path, bytes);
        REQUIRE_THROWS_AS(topv::load_dump(path), topv::FormatError);
    }
    SECTION("unknown payload kind") {
        std::string bytes = good;
        bytes[24] = 7;
        write_file(path, bytes);
        REQUIRE_THROWS_AS(topv::load_dump(path), topv::FormatError);
    }
    SECTION("truncated header") {
        write_file(path, good.substr(0, 20));
        REQUIRE_THROWS_AS(topv::load_dump(path), topv::FormatError);
    }
    SECTION("truncated payload") {
        write_file(path, good.substr(0, good.size() - 4));
        REQUIRE_THROWS_AS(topv::load_dump(path), topv::FormatError);
    }
    SECTION("trailing bytes") {
        write_file(path, good + std::string(4, '\0'));
        REQUIRE_THROWS_AS(topv::load_dump(path), topv::FormatError);
    }
    SECTION("grid does not match token count") {
        std::string bytes = good;
        bytes[16] = 3;  // grid_h 2 -> 3 while n_tokens stays 4
        write_file(path, bytes);
        REQUIRE_THROWS_AS(topv::load_dump(path), topv::FormatError);
    }
    std::remove(path.c_str());
}

TEST_CASE("non-finite payload raises a data error", "[dump_io]") {
    const topv::TokenSet tokens = make_tokens(2, 2, 2, 1.0);
    const std::string path = "dump_nan.topv";
    topv::save_dump(tokens, std::nullopt, path);
    std::string bytes = read_file(path);
    // float32 quiet NaN, little-endian
    bytes[topv::kDumpHeaderSize + 0] = '\x00';
    bytes[topv::kDumpHeaderSize + 1] = '\x00';
    bytes[topv::kDumpHeaderSize + 2] = '\xc0';
    bytes[topv::kDumpHeaderSize + 3] = '\x7f';
    write_file(path, bytes);
    REQUIRE_THROWS_AS(topv::load_dump(path), topv::DataError);
    std::remove(path.c_str());
}

TEST_CASE("missing file raises an i/o error", "[dump_io]") {
    REQUIRE_THROWS_AS(topv::load_dump("definitely_not_here.topv"), topv::IoError);
}
