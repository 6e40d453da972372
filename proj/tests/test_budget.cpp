#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "topv/budget.hpp"
#include "topv/errors.hpp"

namespace {

topv::ModelShape reference_shape() {
    return topv::ModelShape{};  // 32 layers, d 4096, mlp 11008, 576 tokens, prune layer 2
}

} // namespace

TEST_CASE("layer flops formula on a hand-checkable shape", "[budget]") {
    topv::ModelShape shape;
    shape.hidden = 2;
    shape.mlp_hidden = 4;
    REQUIRE(topv::layer_flops(1, shape) == 36.0);  // 4*1*4 + 2*1*2 + 2*1*2*4
}

TEST_CASE("doubling mlp_hidden doubles only the MLP term", "[budget]") {
    topv::ModelShape shape;
    shape.hidden = 8;
    shape.mlp_hidden = 10;
    topv::ModelShape doubled = shape;
    doubled.mlp_hidden = 20;
    const double mlp_term = 2.0 * 3 * 8 * 10;
    REQUIRE(topv::layer_flops(3, doubled) - topv::layer_flops(3, shape) == mlp_term);
}

TEST_CASE("layer flops for the reference shape match a term-by-term recomputation",
          "[budget]") {
    // 4*576*4096^2 = 38654705664; 2*576^2*4096 = 2717908992;
    // 2*576*4096*11008 = 51942260736; total 93314875392
    REQUIRE(topv::layer_flops(576, reference_shape()) == 93314875392.0);
}

TEST_CASE("reference shape ratios for the three reported regimes", "[budget]") {
    const topv::ModelShape shape = reference_shape();

    // 50% ratio, interval 4 -> 360 retained
    topv::BudgetReport r = topv::flops_ratio(360, shape);
    REQUIRE(r.retained_tokens == 360);
    REQUIRE(r.flops_ratio_tokenfraction == 0.3515625);  // 216/576 * 30/32, exact in binary
    REQUIRE(std::abs(r.flops_ratio_layerweighted - 0.3579623027912622) <= 1e-12);
    REQUIRE(r.kv_ratio == 0.6484375);  // (2*576 + 30*360) / (32*576), exact in binary

    // 60% ratio, interval 6 -> 288 retained
    r = topv::flops_ratio(288, shape);
    REQUIRE(r.flops_ratio_tokenfraction == 0.46875);
    REQUIRE(std::abs(r.flops_ratio_layerweighted - 0.4755764563106796) <= 1e-12);

    // 70% ratio, interval 3 -> 307 retained
    r = topv::flops_ratio(307, shape);
    REQUIRE(std::abs(r.flops_ratio_tokenfraction - 0.4378255208333333) <= 1e-12);
    REQUIRE(std::abs(r.flops_ratio_layerweighted - 0.4446222661253961) <= 1e-12);
}

TEST_CASE("no pruning means no savings", "[budget]") {
    const topv::BudgetReport r = topv::flops_ratio(576, reference_shape());
    REQUIRE(r.flops_ratio_tokenfraction == 0.0);
    REQUIRE(r.flops_ratio_layerweighted == 0.0);
    REQUIRE(r.kv_ratio == 1.0);
}

TEST_CASE("dropping every token leaves only the dense prefix layers", "[budget]") {
    const topv::BudgetReport r = topv::flops_ratio(0, reference_shape());
    REQUIRE(r.flops_ratio_tokenfraction == 0.9375);  // 30/32
    REQUIRE(r.flops_ratio_layerweighted == 0.9375);
    REQUIRE(r.kv_ratio == 0.0625);  // 2/32
}

TEST_CASE("fewer retained tokens never decreases either ratio", "[budget]") {
    const topv::ModelShape shape = reference_shape();
    double prev_tf = -1.0, prev_lw = -1.0;
    for (int retained = 576; retained >= 0; retained -= 32) {
        const topv::BudgetReport r = topv::flops_ratio(retained, shape);
        REQUIRE(r.flops_ratio_tokenfraction >= prev_tf);
        REQUIRE(r.flops_ratio_layerweighted >= prev_lw);
        prev_tf = r.flops_ratio_tokenfraction;
        prev_lw = r.flops_ratio_layerweighted;
    }
}

TEST_CASE("the two accountings stay within 2 points on the reference shape", "[budget]") {
    const topv::ModelShape shape = reference_shape();
    for (int retained = 0; retained <= 576; retained += 8) {
        const topv::BudgetReport r = topv::flops_ratio(retained, shape);
        REQUIRE(std::abs(r.flops_ratio_layerweighted - r.flops_ratio_tokenfraction) < 0.02);
        REQUIRE(r.flops_ratio_tokenfraction >= 0.0);
        REQUIRE(r.flops_ratio_tokenfraction <= 1.0);
        REQUIRE(r.flops_ratio_layerweighted >= 0.0);
        REQUIRE(r.flops_ratio_layerweighted <= 1.0);
        REQUIRE(r.kv_ratio >= 0.0);
        REQUIRE(r.kv_ratio <= 1.0);
    }
}

TEST_CASE("kv ratio reduces to retained/n_visual when no dense prefix exists", "[budget]") {
    topv::ModelShape shape = reference_shape();
    shape.prune_layer = 0;
    const topv::BudgetReport r = topv::flops_ratio(144, shape);
    REQUIRE(r.kv_ratio == 0.25);  // 144/576
}

TEST_CASE("budget contract and config violations", "[budget]") {
    const topv::ModelShape shape = reference_shape();
    REQUIRE_THROWS_AS(topv::flops_ratio(-1, shape), topv::ContractError);
    REQUIRE_THROWS_AS(topv::flops_ratio(577, shape), topv::ContractError);
    REQUIRE_THROWS_AS(topv::layer_flops(0, shape), topv::ContractError);

    topv::ModelShape bad = shape;
    bad.prune_layer = 32;
    REQUIRE_THROWS_AS(bad.validate(), topv::ConfigError);
    bad = shape;
    bad.n_layers = 0;
    REQUIRE_THROWS_AS(bad.validate(), topv::ConfigError);
    bad = shape;
    bad.hidden = -4;
    REQUIRE_THROWS_AS(bad.validate(), topv::ConfigError);
}
