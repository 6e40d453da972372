#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "topv/budget.hpp"
#include "topv/cost.hpp"
#include "topv/errors.hpp"
#include "topv/layersim.hpp"
#include "topv/pruner.hpp"
#include "topv/sinkhorn.hpp"

namespace topv {

// The full run configuration. Field defaults live on the per-module config
// structs, so a missing section or key simply keeps its default.
struct RunConfig {
    CostConfig cost;
    SinkhornConfig sinkhorn;
    PruneConfig prune;
    ToyBlockConfig sim;
    ModelShape model_shape;

    void validate() const {
        cost.validate();
        sinkhorn.validate();
        prune.validate();
        sim.validate();
        model_shape.validate();
    }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::string& section,
                                const std::vector<std::string>& allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const std::string& key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            const std::string where = section.empty() ? "config" : "config section " + section;
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <typename T>
inline void read_field(const nlohmann::json& obj, const std::string& section,
                       const std::string& key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config field " + section + "." + key + " has the wrong type");
    }
}

inline void read_enum(const nlohmann::json& obj, const std::string& section,
                      const std::string& key, const std::string& expected, std::string& out) {
    if (!obj.contains(key)) return;
    if (!obj.at(key).is_string())
        throw ConfigError("config field " + section + "." + key + " must be a string (" +
                          expected + ")");
    out = obj.at(key).get<std::string>();
}

} // namespace detail

inline RunConfig config_from_json(const nlohmann::json& root) {
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");
    detail::reject_unknown_keys(root, "",
                                {"cost", "sinkhorn", "prune", "sim", "model_shape"});
    RunConfig cfg;

    if (root.contains("cost")) {
        const auto& j = root.at("cost");
        if (!j.is_object()) throw ConfigError("config section cost must be an object");
        detail::reject_unknown_keys(j, "cost", {"alpha", "beta", "gamma", "sigma", "normalization"});
        detail::read_field(j, "cost", "alpha", cfg.cost.alpha);
        detail::read_field(j, "cost", "beta", cfg.cost.beta);
        detail::read_field(j, "cost", "gamma", cfg.cost.gamma);
        detail::read_field(j, "cost", "sigma", cfg.cost.sigma);
        std::string norm;
        detail::read_enum(j, "cost", "normalization", "min_max_per_matrix|none", norm);
        if (!norm.empty()) cfg.cost.normalization = normalization_from_string(norm);
    }

    if (root.contains("sinkhorn")) {
        const auto& j = root.at("sinkhorn");
        if (!j.is_object()) throw ConfigError("config section sinkhorn must be an object");
        detail::reject_unknown_keys(
            j, "sinkhorn", {"epsilon", "max_iter", "tolerance", "mass_mode", "last_update", "log_domain"});
        detail::read_field(j, "sinkhorn", "epsilon", cfg.sinkhorn.epsilon);
        detail::read_field(j, "sinkhorn", "max_iter", cfg.sinkhorn.max_iter);
        detail::read_field(j, "sinkhorn", "tolerance", cfg.sinkhorn.tolerance);
        std::string mass, last;
        detail::read_enum(j, "sinkhorn", "mass_mode", "uniform|l2_norm", mass);
        if (!mass.empty()) cfg.sinkhorn.mass_mode = mass_mode_from_string(mass);
        detail::read_enum(j, "sinkhorn", "last_update", "column|row", last);
        if (!last.empty()) cfg.sinkhorn.last_update = last_update_from_string(last);
        detail::read_field(j, "sinkhorn", "log_domain", cfg.sinkhorn.log_domain);
    }

    if (root.contains("prune")) {
        const auto& j = root.at("prune");
        if (!j.is_object()) throw ConfigError("config section prune must be an object");
        detail::reject_unknown_keys(j, "prune", {"ratio", "recovery_interval"});
        detail::read_field(j, "prune", "ratio", cfg.prune.ratio);
        detail::read_field(j, "prune", "recovery_interval", cfg.prune.recovery_interval);
    }

    if (root.contains("sim")) {
        const auto& j = root.at("sim");
        if (!j.is_object()) throw ConfigError("config section sim must be an object");
        detail::reject_unknown_keys(j, "sim", {"dim", "heads", "mlp_mult", "seed", "tap"});
        detail::read_field(j, "sim", "dim", cfg.sim.dim);
        detail::read_field(j, "sim", "heads", cfg.sim.heads);
        detail::read_field(j, "sim", "mlp_mult", cfg.sim.mlp_mult);
        detail::read_field(j, "sim", "seed", cfg.sim.seed);
        std::string tap;
        detail::read_enum(j, "sim", "tap", "pre_ln|attn|attn_no_residual|post_ln|mlp", tap);
        if (!tap.empty()) cfg.sim.tap = tap_from_string(tap);
    }

    if (root.contains("model_shape")) {
        const auto& j = root.at("model_shape");
        if (!j.is_object()) throw ConfigError("config section model_shape must be an object");
        detail::reject_unknown_keys(
            j, "model_shape", {"n_layers", "hidden", "mlp_hidden", "n_visual", "prune_layer"});
        detail::read_field(j, "model_shape", "n_layers", cfg.model_shape.n_layers);
        detail::read_field(j, "model_shape", "hidden", cfg.model_shape.hidden);
        detail::read_field(j, "model_shape", "mlp_hidden", cfg.model_shape.mlp_hidden);
        detail::read_field(j, "model_shape", "n_visual", cfg.model_shape.n_visual);
        detail::read_field(j, "model_shape", "prune_layer", cfg.model_shape.prune_layer);
    }

    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return config_from_json(root);
}

inline nlohmann::json to_json(const RunConfig& cfg) {
    return nlohmann::json{
        {"cost",
         {{"alpha", cfg.cost.alpha},
          {"beta", cfg.cost.beta},
          {"gamma", cfg.cost.gamma},
          {"sigma", cfg.cost.sigma},
          {"normalization", to_string(cfg.cost.normalization)}}},
        {"sinkhorn",
         {{"epsilon", cfg.sinkhorn.epsilon},
          {"max_iter", cfg.sinkhorn.max_iter},
          {"tolerance", cfg.sinkhorn.tolerance},
          {"mass_mode", to_string(cfg.sinkhorn.mass_mode)},
          {"last_update", to_string(cfg.sinkhorn.last_update)},
          {"log_domain", cfg.sinkhorn.log_domain}}},
        {"prune", {{"ratio", cfg.prune.ratio}, {"recovery_interval", cfg.prune.recovery_interval}}},
        {"sim",
         {{"dim", cfg.sim.dim},
          {"heads", cfg.sim.heads},
          {"mlp_mult", cfg.sim.mlp_mult},
          {"seed", cfg.sim.seed},
          {"tap", to_string(cfg.sim.tap)}}},
        {"model_shape",
         {{"n_layers", cfg.model_shape.n_layers},
          {"hidden", cfg.model_shape.hidden},
          {"mlp_hidden", cfg.model_shape.mlp_hidden},
          {"n_visual", cfg.model_shape.n_visual},
          {"prune_layer", cfg.model_shape.prune_layer}}}};
}

// Dotted config paths recognized by apply_override, in display order.
inline const std::vector<std::string>& config_field_names() {
    static const std::vector<std::string> names = {
        "cost.alpha", "cost.beta", "cost.gamma", "cost.sigma", "cost.normalization",
        "sinkhorn.epsilon", "sinkhorn.max_iter", "sinkhorn.tolerance", "sinkhorn.mass_mode",
        "sinkhorn.last_update", "sinkhorn.log_domain",
        "prune.ratio", "prune.recovery_interval",
        "sim.dim", "sim.heads", "sim.mlp_mult", "sim.seed", "sim.tap",
        "model_shape.n_layers", "model_shape.hidden", "model_shape.mlp_hidden",
        "model_shape.n_visual", "model_shape.prune_layer"};
    return names;
}

namespace detail {

inline double parse_double(const std::string& path, const std::string& text) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::out_of_range&) {
        throw ConfigError("override " + path + ": '" + text + "' is out of range");
    } catch (const std::exception&) {
        throw ConfigError("override " + path + ": '" + text + "' is not a number");
    }
    if (pos != text.size())
        throw ConfigError("override " + path + ": '" + text + "' is not a number");
    return v;
}

inline int parse_int(const std::string& path, const std::string& text) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(text, &pos);
    } catch (const std::out_of_range&) {
        throw ConfigError("override " + path + ": '" + text + "' is out of range");
    } catch (const std::exception&) {
        throw ConfigError("override " + path + ": '" + text + "' is not an integer");
    }
    if (pos != text.size())
        throw ConfigError("override " + path + ": '" + text + "' is not an integer");
    return v;
}

inline std::uint64_t parse_u64(const std::string& path, const std::string& text) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &pos);
    } catch (const std::out_of_range&) {
        throw ConfigError("override " + path + ": '" + text + "' is out of range");
    } catch (const std::exception&) {
        throw ConfigError("override " + path + ": '" + text + "' is not an unsigned integer");
    }
    if (pos != text.size())
        throw ConfigError("override " + path + ": '" + text + "' is not an unsigned integer");
    return static_cast<std::uint64_t>(v);
}

inline bool parse_bool(const std::string& path, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError("override " + path + ": '" + text + "' is not a boolean");
}

} // namespace detail

// Applies one --section.field=value style override. Validation of the
// resulting config is the caller's job (overrides may arrive in any order).
inline void apply_override(RunConfig& cfg, const std::string& path, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_int;
    using detail::parse_u64;

    if (path == "cost.alpha") cfg.cost.alpha = parse_double(path, value);
    else if (path == "cost.beta") cfg.cost.beta = parse_double(path, value);
    else if (path == "cost.gamma") cfg.cost.gamma = parse_double(path, value);
    else if (path == "cost.sigma") cfg.cost.sigma = parse_double(path, value);
    else if (path == "cost.normalization") cfg.cost.normalization = normalization_from_string(value);
    else if (path == "sinkhorn.epsilon") cfg.sinkhorn.epsilon = parse_double(path, value);
    else if (path == "sinkhorn.max_iter") cfg.sinkhorn.max_iter = parse_int(path, value);
    else if (path == "sinkhorn.tolerance") cfg.sinkhorn.tolerance = parse_double(path, value);
    else if (path == "sinkhorn.mass_mode") cfg.sinkhorn.mass_mode = mass_mode_from_string(value);
    else if (path == "sinkhorn.last_update") cfg.sinkhorn.last_update = last_update_from_string(value);
    else if (path == "sinkhorn.log_domain") cfg.sinkhorn.log_domain = parse_bool(path, value);
    else if (path == "prune.ratio") cfg.prune.ratio = parse_double(path, value);
    else if (path == "prune.recovery_interval") cfg.prune.recovery_interval = parse_int(path, value);
    else if (path == "sim.dim") cfg.sim.dim = parse_int(path, value);
    else if (path == "sim.heads") cfg.sim.heads = parse_int(path, value);
    else if (path == "sim.mlp_mult") cfg.sim.mlp_mult = parse_int(path, value);
    else if (path == "sim.seed") cfg.sim.seed = parse_u64(path, value);
    else if (path == "sim.tap") cfg.sim.tap = tap_from_string(value);
    else if (path == "model_shape.n_layers") cfg.model_shape.n_layers = parse_int(path, value);
    else if (path == "model_shape.hidden") cfg.model_shape.hidden = parse_int(path, value);
    else if (path == "model_shape.mlp_hidden") cfg.model_shape.mlp_hidden = parse_int(path, value);
    else if (path == "model_shape.n_visual") cfg.model_shape.n_visual = parse_int(path, value);
    else if (path == "model_shape.prune_layer") cfg.model_shape.prune_layer = parse_int(path, value);
    else throw ConfigError("unknown config override: " + path);
}

} // namespace topv
