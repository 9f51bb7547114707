#pragma once

/**
 * @file config.hpp
 * @brief Flat key = value experiment config files ('#' comments), applied on
 *        top of the built-in defaults; CLI flags override afterwards.
 */

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pipeline.hpp"

namespace fruitgrade::config {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty() || line.front() == '[') // section headers are ignored
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: missing '=' on line " + std::to_string(lineno));
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline std::vector<std::string> parse_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            out.push_back(trim(item));
    return out;
}

inline void apply_overrides(pipeline::ExperimentConfig& cfg,
                            const std::map<std::string, std::string>& kv) {
    auto geti = [&](const std::string& k, int& out) {
        if (auto it = kv.find(k); it != kv.end()) out = std::stoi(it->second);
    };
    auto getd = [&](const std::string& k, double& out) {
        if (auto it = kv.find(k); it != kv.end()) out = std::stod(it->second);
    };
    auto getu = [&](const std::string& k, std::uint64_t& out) {
        if (auto it = kv.find(k); it != kv.end()) out = std::stoull(it->second);
    };
    auto getb = [&](const std::string& k, bool& out) {
        if (auto it = kv.find(k); it != kv.end())
            out = it->second == "1" || it->second == "true" || it->second == "yes";
    };

    geti("samples_per_variety", cfg.samples_per_variety);
    getd("dimension_std_scale", cfg.dimension_std_scale);
    getd("mass_rel_noise", cfg.mass_rel_noise);
    geti("repeats", cfg.repeats);
    getu("master_seed", cfg.master_seed);

    getd("mm_per_pixel", cfg.render.mm_per_pixel);
    geti("image_width", cfg.render.image_width);
    geti("image_height", cfg.render.image_height);
    geti("foreground_level", cfg.render.foreground_level);
    geti("background_level", cfg.render.background_level);
    getd("noise_std", cfg.render.noise_std);
    geti("blur_radius", cfg.render.blur_radius);
    getd("calib_target_mm", cfg.calib_target_mm);

    getd("split_train", cfg.ratios.train);
    getd("split_test", cfg.ratios.test);
    getd("split_verify", cfg.ratios.verify);

    if (auto it = kv.find("models"); it != kv.end())
        cfg.models = parse_list(it->second);

    geti("mlp_hidden", cfg.mlp.hidden);
    geti("mlp_max_epochs", cfg.mlp.max_epochs);
    getd("mlp_min_error", cfg.mlp.min_error);
    getd("mlp_init_range", cfg.mlp.init_range);
    getd("mlp_lambda_init", cfg.mlp.lambda_init);

    getd("rbf_sigma", cfg.rbf.sigma);
    getd("rbf_radius", cfg.rbf.sub_radius);
    getb("rbf_raw_inputs", cfg.rbf_raw_inputs);

    geti("anfis_grid_mfs", cfg.anfis_grid.mfs_per_input);
    geti("anfis_rule_cap", cfg.anfis_grid.rule_cap);
    getd("anfis_sub_radius", cfg.anfis_sub.sub_radius);
    geti("anfis_fcm_clusters", cfg.anfis_fcm.fcm_clusters);
    for (auto* a : {&cfg.anfis_grid, &cfg.anfis_sub, &cfg.anfis_fcm}) {
        geti("anfis_epochs", a->train.epochs);
        getd("anfis_min_error", a->train.min_error);
        getd("anfis_learning_rate", a->train.learning_rate);
        getb("anfis_pure_backprop", a->train.pure_backprop);
    }
    getd("anfis_grid_lse_ridge", cfg.anfis_grid.train.lse_ridge);
}

inline pipeline::ExperimentConfig load(const std::string& path) {
    pipeline::ExperimentConfig cfg;
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("config: cannot open " + path);
    apply_overrides(cfg, parse_key_values(in));
    return cfg;
}

} // namespace fruitgrade::config
