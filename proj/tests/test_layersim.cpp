#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "topv/errors.hpp"
#include "topv/layersim.hpp"
#include "topv/matrix.hpp"
#include "topv/splitmix64.hpp"
#include "topv/token_set.hpp"

namespace {

// Independent transcription of the SplitMix64 recurrence, kept separate from
// the class under test on purpose.
std::uint64_t reference_splitmix(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

topv::TokenSet gaussian_tokens(int grid_h, int grid_w, int dim, std::uint64_t seed) {
    topv::SplitMix64 rng(seed);
    topv::Matrix data(static_cast<std::size_t>(grid_h) * grid_w, static_cast<std::size_t>(dim));
    for (double& v : data.values()) v = rng.next_gaussian();
    return topv::TokenSet(std::move(data), grid_h, grid_w);
}

} // namespace

TEST_CASE("SplitMix64 seed 0 matches the known reference outputs", "[layersim]") {
    topv::SplitMix64 rng(0);
    REQUIRE(rng.next() == 0xE220A8397B1DCDAFULL);
    REQUIRE(rng.next() == 0x6E789E6AA1B965F4ULL);
    REQUIRE(rng.next() == 0x06C45D188009454FULL);
}

TEST_CASE("SplitMix64 agrees with an independent recurrence across seeds", "[layersim]") {
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xFFFFFFFFFFFFFFFFULL}) {
        topv::SplitMix64 rng(seed);
        std::uint64_t state = seed;
        for (int k = 0; k < 100; ++k) REQUIRE(rng.next() == reference_splitmix(state));
    }
}

TEST_CASE("weights are drawn in a fixed order with a fixed mapping", "[layersim]") {
    topv::ToyBlockConfig cfg;
    cfg.dim = 2;
    cfg.heads = 1;
    cfg.mlp_mult = 1;
    cfg.seed = 5;
    const topv::ToyBlock block = topv::init_block(cfg);

    std::uint64_t state = 5;
    const auto next_weight = [&state] {
        return std::ldexp(static_cast<double>(reference_splitmix(state)), -64) * 0.2 - 0.1;
    };
    for (const topv::Matrix* m : {&block.wq, &block.wk, &block.wv, &block.wo, &block.w1, &block.w2})
        for (double v : m->values()) REQUIRE(v == next_weight());
}

TEST_CASE("weight mapping lands in (-0.1, 0.1) up to float rounding", "[layersim]") {
    topv::ToyBlockConfig cfg;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.seed = 123;
    const topv::ToyBlock block = topv::init_block(cfg);
    for (const topv::Matrix* m : {&block.wq, &block.wk, &block.wv, &block.wo, &block.w1, &block.w2})
        for (double v : m->values()) {
            REQUIRE(v >= -0.1);
            REQUIRE(v <= 0.1);
        }
}

TEST_CASE("same seed gives identical weights, different seeds differ", "[layersim]") {
    topv::ToyBlockConfig cfg;
    const topv::ToyBlock a = topv::init_block(cfg);
    const topv::ToyBlock b = topv::init_block(cfg);
    REQUIRE(a.wq.values() == b.wq.values());
    REQUIRE(a.w2.values() == b.w2.values());

    topv::ToyBlockConfig other = cfg;
    other.seed = 1;
    const topv::ToyBlock c = topv::init_block(other);
    REQUIRE(a.wq.values() != c.wq.values());
}

TEST_CASE("all five taps preserve the token shape", "[layersim]") {
    const topv::TokenSet tokens = gaussian_tokens(4, 4, 16, 2);
    const topv::ToyBlockConfig cfg;  // dim 16, heads 2
    const topv::ToyBlock block = topv::init_block(cfg);
    for (topv::Tap tap : {topv::Tap::pre_ln, topv::Tap::attn, topv::Tap::attn_no_residual,
                          topv::Tap::post_ln, topv::Tap::mlp}) {
        const topv::Matrix out = topv::forward_tap(block, tokens.data(), tap);
        REQUIRE(out.rows() == tokens.size());
        REQUIRE(out.cols() == tokens.dim());
        REQUIRE(out.all_finite());
    }
}

TEST_CASE("layer norm taps have zero mean and unit variance per token", "[layersim]") {
    const topv::TokenSet tokens = gaussian_tokens(4, 4, 16, 3);
    const topv::ToyBlock block = topv::init_block(topv::ToyBlockConfig{});
    for (topv::Tap tap : {topv::Tap::pre_ln, topv::Tap::post_ln}) {
        const topv::Matrix out = topv::forward_tap(block, tokens.data(), tap);
        for (std::size_t i = 0; i < out.rows(); ++i) {
            double mean = 0.0;
            for (std::size_t j = 0; j < out.cols(); ++j) mean += out(i, j);
            mean /= static_cast<double>(out.cols());
            double var = 0.0;
            for (std::size_t j = 0; j < out.cols(); ++j) {
                const double c = out(i, j) - mean;
                var += c * c;
            }
            var /= static_cast<double>(out.cols());
            REQUIRE(std::abs(mean) < 1e-6);
            REQUIRE(std::abs(var - 1.0) < 1e-5);
        }
    }
}

TEST_CASE("attn tap equals attn_no_residual plus the input, bitwise", "[layersim]") {
    const topv::TokenSet tokens = gaussian_tokens(3, 3, 16, 4);
    const topv::ToyBlock block = topv::init_block(topv::ToyBlockConfig{});
    const topv::Matrix with_res = topv::forward_tap(block, tokens.data(), topv::Tap::attn);
    const topv::Matrix without = topv::forward_tap(block, tokens.data(), topv::Tap::attn_no_residual);
    for (std::size_t k = 0; k < with_res.values().size(); ++k)
        REQUIRE(with_res.values()[k] == tokens.data().values()[k] + without.values()[k]);
}

TEST_CASE("post_ln differs from attn for random input", "[layersim]") {
    const topv::TokenSet tokens = gaussian_tokens(3, 3, 16, 5);
    const topv::ToyBlock block = topv::init_block(topv::ToyBlockConfig{});
    const topv::Matrix attn = topv::forward_tap(block, tokens.data(), topv::Tap::attn);
    const topv::Matrix post = topv::forward_tap(block, tokens.data(), topv::Tap::post_ln);
    const topv::Matrix mlp = topv::forward_tap(block, tokens.data(), topv::Tap::mlp);
    REQUIRE(attn.values() != post.values());
    REQUIRE(post.values() != mlp.values());
}

TEST_CASE("forward is deterministic for a fixed seed and input", "[layersim]") {
    const topv::TokenSet tokens = gaussian_tokens(4, 4, 16, 6);
    topv::ToyBlockConfig cfg;
    cfg.seed = 99;
    const topv::TokenSet a = topv::simulate(tokens, cfg);
    const topv::TokenSet b = topv::simulate(tokens, cfg);
    REQUIRE(a.data().values() == b.data().values());
    REQUIRE(a.grid_h() == 4);
    REQUIRE(a.grid_w() == 4);
    REQUIRE(a.coords() == tokens.coords());
}

TEST_CASE("simulate adopts the source feature dimension", "[layersim]") {
    // config says dim 16 but the tokens carry 32 features; the block follows
    // the tokens
    const topv::TokenSet tokens = gaussian_tokens(2, 2, 32, 7);
    topv::ToyBlockConfig cfg;
    REQUIRE(cfg.dim == 16);
    const topv::TokenSet out = topv::simulate(tokens, cfg);
    REQUIRE(out.dim() == 32);
}

TEST_CASE("config validation for the toy block", "[layersim]") {
    topv::ToyBlockConfig cfg;
    cfg.dim = 15;
    cfg.heads = 2;
    REQUIRE_THROWS_AS(cfg.validate(), topv::ConfigError);
    cfg = topv::ToyBlockConfig{};
    cfg.heads = 0;
    REQUIRE_THROWS_AS(cfg.validate(), topv::ConfigError);
    cfg = topv::ToyBlockConfig{};
    cfg.mlp_mult = 0;
    REQUIRE_THROWS_AS(cfg.validate(), topv::ConfigError);

    // heads must divide the adopted dim too
    const topv::TokenSet tokens = gaussian_tokens(1, 3, 9, 8);
    topv::ToyBlockConfig bad;
    bad.heads = 2;  // 9 % 2 != 0
    REQUIRE_THROWS_AS(topv::simulate(tokens, bad), topv::ConfigError);

    const topv::ToyBlock block = topv::init_block(topv::ToyBlockConfig{});
    topv::Matrix wrong(4, 8);
    REQUIRE_THROWS_AS(topv::forward_tap(block, wrong, topv::Tap::post_ln), topv::ContractError);
}

TEST_CASE("tap names round-trip", "[layersim]") {
    for (topv::Tap tap : {topv::Tap::pre_ln, topv::Tap::attn, topv::Tap::attn_no_residual,
                          topv::Tap::post_ln, topv::Tap::mlp})
        REQUIRE(topv::tap_from_string(topv::to_string(tap)) == tap);
    REQUIRE_THROWS_AS(topv::tap_from_string("norm"), topv::ConfigError);
}
