// topv: score visual tokens with an entropic transport solve, prune the
// unimportant ones, and account for the FLOPs / KV-cache savings.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topv/budget.hpp"
#include "topv/config.hpp"
#include "topv/dump_io.hpp"
#include "topv/errors.hpp"
#include "topv/layersim.hpp"
#include "topv/pipeline.hpp"
#include "topv/pruner.hpp"
#include "topv/splitmix64.hpp"
#include "topv/token_set.hpp"
#include "topv/verify.hpp"

namespace {

struct ConfigFlags {
    std::string config_path;
    std::map<std::string, std::string> overrides;
};

void add_config_flags(CLI::App* sub, ConfigFlags& flags) {
    sub->add_option("--config", flags.config_path, "JSON config file (defaults used if omitted)");
    for (const std::string& name : topv::config_field_names())
        sub->add_option("--" + name, flags.overrides[name], "override config field " + name);
}

topv::RunConfig resolve_config(const CLI::App* sub, const ConfigFlags& flags) {
    topv::RunConfig cfg;
    if (!flags.config_path.empty()) cfg = topv::load_config(flags.config_path);
    for (const auto& [name, value] : flags.overrides) {
        if (sub->count("--" + name) > 0) topv::apply_override(cfg, name, value);
    }
    cfg.validate();
    return cfg;
}

int cmd_gen(int n_tokens, int dim, int grid_h, int grid_w, std::uint64_t seed,
            const std::string& out) {
    if (grid_h < 1 || grid_w < 1) throw topv::ConfigError("grid dimensions must be positive");
    if (dim < 1) throw topv::ConfigError("dim must be positive");
    const long long grid = static_cast<long long>(grid_h) * grid_w;
    if (n_tokens == 0) n_tokens = static_cast<int>(grid);
    if (n_tokens != grid)
        throw topv::ConfigError("n must equal grid_h * grid_w");

    topv::SplitMix64 rng(seed);
    topv::Matrix features(static_cast<std::size_t>(n_tokens), static_cast<std::size_t>(dim));
    for (double& v : features.values()) v = rng.next_gaussian();
    topv::TokenSet source(std::move(features), grid_h, grid_w);
    topv::save_dump(source, std::nullopt, out);
    std::printf("wrote %s (n=%d, d=%d, grid=%dx%d, source only)\n", out.c_str(), n_tokens, dim,
                grid_h, grid_w);
    return 0;
}

int cmd_simulate(const std::string& in, const std::string& out, const topv::RunConfig& cfg) {
    auto [source, old_target] = topv::load_dump(in);
    (void)old_target;  // targets are regenerated from the source tokens
    topv::TokenSet target = topv::simulate(source, cfg.sim);
    topv::save_dump(source, target, out);
    std::printf("wrote %s (n=%zu, d=%zu, tap=%s, seed=%llu)\n", out.c_str(), source.size(),
                source.dim(), topv::to_string(cfg.sim.tap).c_str(),
                static_cast<unsigned long long>(cfg.sim.seed));
    return 0;
}

int cmd_prune(const std::string& dump_path, const std::string& out_dir,
              const topv::RunConfig& cfg) {
    auto [source, target] = topv::load_dump(dump_path);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw topv::IoError("cannot create output directory: " + out_dir);

    const topv::PipelineResult r = topv::run_pipeline(source, target, cfg);
    topv::write_artifacts(out_dir, source, r);

    std::printf("tokens=%zu kept=%zu recovered=%zu retained=%zu\n", source.size(),
                r.kept_topk.size(), r.recovered.size(), r.retained.size());
    std::printf("iterations=%d converged=%s\n", r.iterations_used, r.converged ? "yes" : "no");
    std::printf("flops_ratio_tokenfraction=%s\n",
                topv::format_double(r.budget.flops_ratio_tokenfraction).c_str());
    std::printf("flops_ratio_layerweighted=%s\n",
                topv::format_double(r.budget.flops_ratio_layerweighted).c_str());
    std::printf("kv_ratio=%s\n", topv::format_double(r.budget.kv_ratio).c_str());
    std::printf("timing_ms cost=%.3f solve=%.3f\n", r.cost_ms, r.solve_ms);
    std::printf("wrote %s/decision.csv %s/retained.txt %s/importance.pgm %s/budget.csv\n",
                out_dir.c_str(), out_dir.c_str(), out_dir.c_str(), out_dir.c_str());
    return 0;
}

void print_budget_block(const topv::BudgetReport& b) {
    std::printf("retained_tokens=%d\n", b.retained_tokens);
    std::printf("flops_ratio_tokenfraction=%s\n",
                topv::format_double(b.flops_ratio_tokenfraction).c_str());
    std::printf("flops_ratio_layerweighted=%s\n",
                topv::format_double(b.flops_ratio_layerweighted).c_str());
    std::printf("kv_ratio=%s\n", topv::format_double(b.kv_ratio).c_str());
}

int cmd_budget(const topv::RunConfig& cfg, const std::string& sweep) {
    if (sweep.empty()) {
        const topv::RetainedCounts counts =
            topv::retained_counts(cfg.model_shape.n_visual, cfg.prune);
        print_budget_block(topv::flops_ratio(counts.retained, cfg.model_shape));
        return 0;
    }

    // --sweep ratio=a:b:step
    const std::string prefix = "ratio=";
    if (sweep.rfind(prefix, 0) != 0)
        throw topv::ConfigError("sweep spec must look like ratio=a:b:step");
    double a = 0.0, b = 0.0, step = 0.0;
    if (std::sscanf(sweep.c_str() + prefix.size(), "%lf:%lf:%lf", &a, &b, &step) != 3)
        throw topv::ConfigError("sweep spec must look like ratio=a:b:step");
    if (!(step > 0.0) || a > b) throw topv::ConfigError("sweep requires a <= b and step > 0");

    std::printf("ratio,retained_tokens,flops_ratio_tokenfraction,flops_ratio_layerweighted,kv_ratio\n");
    const int steps = static_cast<int>((b - a) / step + 1e-9);
    for (int i = 0; i <= steps; ++i) {
        const double ratio = a + i * step;
        topv::PruneConfig pc = cfg.prune;
        pc.ratio = ratio;
        const topv::RetainedCounts counts = topv::retained_counts(cfg.model_shape.n_visual, pc);
        const topv::BudgetReport rep = topv::flops_ratio(counts.retained, cfg.model_shape);
        std::printf("%s,%d,%s,%s,%s\n", topv::format_double(ratio).c_str(), rep.retained_tokens,
                    topv::format_double(rep.flops_ratio_tokenfraction).c_str(),
                    topv::format_double(rep.flops_ratio_layerweighted).c_str(),
                    topv::format_double(rep.kv_ratio).c_str());
    }
    return 0;
}

int cmd_verify(std::uint64_t seed, const std::vector<int>& sizes) {
    for (int n : sizes) {
        if (n < 1 || n > 64) throw topv::ConfigError("verify sizes must be in [1, 64]");
    }
    const topv::VerifyReport report = topv::run_verify_suite(seed, sizes);
    std::printf("%-36s %14s %10s  %s\n", "check", "error", "tol", "status");
    for (const topv::VerifyCheck& c : report.checks)
        std::printf("%-36s %14.6e %10.1e  %s\n", c.name.c_str(), c.value, c.tolerance,
                    c.pass ? "PASS" : "FAIL");
    std::printf("%s\n", report.all_pass ? "all checks passed" : "verification FAILED");
    return report.all_pass ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"visual-token transport scoring, pruning, and budget accounting"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "emit a synthetic Gaussian source dump");
    int gen_n = 0, gen_dim = 16, gen_h = 0, gen_w = 0;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--n", gen_n, "token count (defaults to grid_h*grid_w)");
    gen->add_option("--dim", gen_dim, "feature dimension")->required();
    gen->add_option("--grid-h", gen_h, "grid height")->required();
    gen->add_option("--grid-w", gen_w, "grid width")->required();
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out", gen_out, "output dump path")->required();

    // simulate
    auto* sim = app.add_subcommand("simulate", "attach toy-block targets to a source dump");
    std::string sim_in, sim_out;
    ConfigFlags sim_flags;
    sim->add_option("--in", sim_in, "input dump")->required();
    sim->add_option("--out", sim_out, "output dump (source + target)")->required();
    add_config_flags(sim, sim_flags);

    // prune
    auto* prune = app.add_subcommand("prune", "score, prune, and write decision artifacts");
    std::string prune_dump, prune_out;
    ConfigFlags prune_flags;
    prune->add_option("--dump", prune_dump, "input dump")->required();
    prune->add_option("--out", prune_out, "output directory")->required();
    add_config_flags(prune, prune_flags);

    // budget
    auto* budget = app.add_subcommand("budget", "print FLOPs / KV-cache savings");
    ConfigFlags budget_flags;
    std::string budget_sweep;
    budget->add_option("--sweep", budget_sweep, "tabulate over prune ratios: ratio=a:b:step");
    add_config_flags(budget, budget_flags);

    // verify
    auto* verify = app.add_subcommand("verify", "compare the solver against a slow exact oracle");
    std::uint64_t verify_seed = 0;
    std::vector<int> verify_sizes = {2, 4, 8};
    verify->add_option("--seed", verify_seed, "RNG seed for the random instances");
    verify->add_option("--sizes", verify_sizes, "instance sizes, each <= 64");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_n, gen_dim, gen_h, gen_w, gen_seed, gen_out);
        if (sim->parsed())
            return cmd_simulate(sim_in, sim_out, resolve_config(sim, sim_flags));
        if (prune->parsed())
            return cmd_prune(prune_dump, prune_out, resolve_config(prune, prune_flags));
        if (budget->parsed())
            return cmd_budget(resolve_config(budget, budget_flags), budget_sweep);
        if (verify->parsed())
            return cmd_verify(verify_seed, verify_sizes);
    } catch (const topv::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const topv::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const topv::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
