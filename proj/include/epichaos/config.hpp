#pragma once

// Run configuration in Boost INFO syntax: `key value` lines, nested blocks in
// braces, `;` starts a comment. Unknown keys are rejected so typos surface.
//
//   case case1
//   seed 1
//   priors
//   {
//       R0 { distribution lognormal
//            mean 1.4
//            variance 0.000625 }
//   }

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/info_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "epichaos/calibrate.hpp"
#include "epichaos/distributions.hpp"
#include "epichaos/epimodels.hpp"
#include "epichaos/output.hpp"

namespace epichaos::config {

namespace pt = boost::property_tree;
using distributions::DistributionSpec;

struct Prior {
    std::string name;
    DistributionSpec spec;
};

struct Case1Config {
    std::vector<Prior> priors = {
        {"R0", DistributionSpec::lognormal(1.4, 0.025 * 0.025)},
        {"tau_inc", DistributionSpec::lognormal(4.2, 0.7 * 0.7)},
        {"tau_inf", DistributionSpec::lognormal(3.3, 0.7 * 0.7)},
    };
    double population = epimodels::kDanishPopulation;
    double initial_infected = 100.0;
    double initial_exposed = 0.0;
    double horizon = 1500.0;  // days
    unsigned order = 3;
};

struct FitConfig {
    std::string data_file;
    double target_growth = 0.23;
    bool target_growth_from_data = false;  // take the data file's "# growth_rate" line
    double alpha = 0.01;
    calibrate::FitSettings settings;
};

struct UqConfig {
    unsigned order = 5;
    double relative_std = 0.1;
    double horizon = 200.0;
    double coverage = 0.95;
    std::string fit_file;
};

struct SynthConfig {
    int days = 110;
    double noise = 0.0;
};

struct RunConfig {
    std::string case_name = "case2";
    std::string source;  // file the config came from; not part of the hash
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    Case1Config case1;
    epimodels::SuperspreaderParams model = epimodels::SuperspreaderParams::defaults();
    std::vector<epimodels::AgeGroupRow> age_table = epimodels::default_age_table();
    FitConfig fit;
    UqConfig uq;
    SynthConfig synth;

    /// Resolves a path given in the config relative to the config's directory.
    std::string resolve(const std::string& path) const {
        if (path.empty() || source.empty()) return path;
        const std::filesystem::path p(path);
        if (p.is_absolute()) return path;
        return (std::filesystem::path(source).parent_path() / p).lexically_normal().string();
    }

    void validate() const;
    nlohmann::json to_json() const;
    std::string hash() const { return output::hex64(output::fnv1a64(to_json().dump())); }
};

namespace detail {

inline void check_keys(const pt::ptree& node, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [key, child] : node) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T get(const pt::ptree& node, const std::string& key, const std::string& where, T fallback) {
    const auto child = node.get_child_optional(key);
    if (!child) return fallback;
    const auto value = child->get_value_optional<T>();
    if (!value) {
        throw ConfigError("key '" + key + "' in " + where + ": cannot read '" + child->data() + "'");
    }
    return *value;
}

inline std::vector<double> day_durations(const epimodels::SuperspreaderParams& p) {
    return {1.0 / p.sigma, 1.0 / p.gamma1, 1.0 / p.gamma2, 1.0 / p.gamma3, 1.0 / p.alpha, 1.0 / p.zeta};
}

inline Prior parse_prior(const std::string& name, const pt::ptree& node) {
    const std::string where = "priors." + name;
    check_keys(node, where, {"distribution", "mean", "variance", "std"});
    const auto kind = distributions::parse_kind(get<std::string>(node, "distribution", where, "lognormal"));
    const double mean = get<double>(node, "mean", where, std::nan(""));
    double variance = get<double>(node, "variance", where, std::nan(""));
    if (node.get_child_optional("std")) {
        if (node.get_child_optional("variance")) throw ConfigError(where + ": give either variance or std");
        const double sd = get<double>(node, "std", where, 0.0);
        variance = sd * sd;
    }
    if (std::isnan(mean) || std::isnan(variance)) throw ConfigError(where + ": mean and variance are required");
    DistributionSpec spec{kind, mean, variance};
    try {
        spec.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return {name, spec};
}

inline void parse_case1(const pt::ptree& root, Case1Config& c) {
    if (const auto model = root.get_child_optional("model")) {
        check_keys(*model, "model", {"population", "initial_infected", "initial_exposed", "horizon"});
        c.population = get(*model, "population", "model", c.population);
        c.initial_infected = get(*model, "initial_infected", "model", c.initial_infected);
        c.initial_exposed = get(*model, "initial_exposed", "model", c.initial_exposed);
        c.horizon = get(*model, "horizon", "model", c.horizon);
    }
    if (const auto priors = root.get_child_optional("priors")) {
        check_keys(*priors, "priors", {"R0", "tau_inc", "tau_inf"});
        std::vector<Prior> parsed;
        for (const char* name : {"R0", "tau_inc", "tau_inf"}) {
            const auto node = priors->get_child_optional(name);
            if (!node) throw ConfigError(std::string("priors: missing '") + name + "'");
            parsed.push_back(parse_prior(name, *node));
        }
        c.priors = parsed;
    }
    if (const auto quad = root.get_child_optional("quadrature")) {
        check_keys(*quad, "quadrature", {"order"});
        c.order = get(*quad, "order", "quadrature", c.order);
    }
}

inline void parse_case2(const pt::ptree& root, RunConfig& cfg) {
    auto& m = cfg.model;
    if (const auto model = root.get_child_optional("model")) {
        check_keys(*model, "model", {"population", "initial_infected", "durations", "profile", "restrictions", "age_groups"});
        m.population = get(*model, "population", "model", m.population);
        m.initial_infected = get(*model, "initial_infected", "model", m.initial_infected);
        if (const auto d = model->get_child_optional("durations")) {
            const std::string where = "model.durations";
            check_keys(*d, where, {"E", "I1", "I2", "W", "H", "C"});
            auto dur = day_durations(m);
            const char* keys[] = {"E", "I1", "I2", "W", "H", "C"};
            for (int i = 0; i < 6; ++i) {
                dur[i] = get(*d, keys[i], where, dur[i]);
                if (!(dur[i] > 0.0)) throw ConfigError(where + "." + keys[i] + " must be positive");
            }
            m.sigma = 1.0 / dur[0];
            m.gamma1 = 1.0 / dur[1];
            m.gamma2 = 1.0 / dur[2];
            m.gamma3 = 1.0 / dur[3];
            m.alpha = 1.0 / dur[4];
            m.zeta = 1.0 / dur[5];
        }
        if (const auto p = model->get_child_optional("profile")) {
            check_keys(*p, "model.profile", {"p", "contribution", "s"});
            m.profile.p = get(*p, "p", "model.profile", m.profile.p);
            m.profile.contribution = get(*p, "contribution", "model.profile", m.profile.contribution);
            m.profile.s = get(*p, "s", "model.profile", m.profile.s);
        }
        if (const auto r = model->get_child_optional("restrictions")) {
            const std::string where = "model.restrictions";
            check_keys(*r, where, {"t1", "t2", "t3", "c1", "c2", "c3", "initial_level"});
            auto& s = m.schedule;
            s.t1 = get(*r, "t1", where, s.t1);
            s.t2 = get(*r, "t2", where, s.t2);
            s.t3 = get(*r, "t3", where, s.t3);
            s.c1 = get(*r, "c1", where, s.c1);
            s.c2 = get(*r, "c2", where, s.c2);
            s.c3 = get(*r, "c3", where, s.c3);
            if (const auto level = r->get_child_optional("initial_level")) {
                if (level->data() == "none") {
                    s.initial_level.reset();
                } else {
                    s.initial_level = get<double>(*r, "initial_level", where, 1.0);
                }
            }
        }
        if (const auto groups = model->get_child_optional("age_groups")) {
            check_keys(*groups, "model.age_groups", {"group"});
            cfg.age_table.clear();
            for (const auto& [key, g] : *groups) {
                check_keys(g, "model.age_groups.group", {"share", "hospitalization", "critical"});
                // Table entries are percentages.
                cfg.age_table.push_back({get(g, "share", "age group", 0.0) / 100.0,
                                         get(g, "hospitalization", "age group", 0.0) / 100.0,
                                         get(g, "critical", "age group", 0.0) / 100.0});
            }
        }
    }
    const auto split = epimodels::hospitalization_split(cfg.age_table);
    m.z1 = split.z1;
    m.z2 = split.z2;

    if (const auto f = root.get_child_optional("fit")) {
        const std::string where = "fit";
        check_keys(*f, where, {"data", "target_growth", "alpha", "penalty_weight", "multistart", "jitter",
                               "restarts", "start_s", "start_i0", "max_iterations"});
        auto& fc = cfg.fit;
        fc.data_file = get(*f, "data", where, fc.data_file);
        if (const auto g = f->get_child_optional("target_growth"); g && g->data() == "data") {
            fc.target_growth_from_data = true;
        } else {
            fc.target_growth = get(*f, "target_growth", where, fc.target_growth);
        }
        fc.alpha = get(*f, "alpha", where, fc.alpha);
        fc.settings.penalty_weight = get(*f, "penalty_weight", where, fc.settings.penalty_weight);
        fc.settings.multistart = get(*f, "multistart", where, fc.settings.multistart);
        fc.settings.jitter = get(*f, "jitter", where, fc.settings.jitter);
        fc.settings.restarts = get(*f, "restarts", where, fc.settings.restarts);
        fc.settings.stage_one_start_s = get(*f, "start_s", where, fc.settings.stage_one_start_s);
        fc.settings.stage_one_start_i0 = get(*f, "start_i0", where, fc.settings.stage_one_start_i0);
        fc.settings.optimizer.max_iterations =
            get(*f, "max_iterations", where, fc.settings.optimizer.max_iterations);
    }
    if (const auto u = root.get_child_optional("uq")) {
        check_keys(*u, "uq", {"order", "relative_std", "horizon", "coverage", "fit"});
        cfg.uq.order = get(*u, "order", "uq", cfg.uq.order);
        cfg.uq.relative_std = get(*u, "relative_std", "uq", cfg.uq.relative_std);
        cfg.uq.horizon = get(*u, "horizon", "uq", cfg.uq.horizon);
        cfg.uq.coverage = get(*u, "coverage", "uq", cfg.uq.coverage);
        cfg.uq.fit_file = get(*u, "fit", "uq", cfg.uq.fit_file);
    }
    if (const auto s = root.get_child_optional("synth")) {
        check_keys(*s, "synth", {"days", "noise"});
        cfg.synth.days = get(*s, "days", "synth", cfg.synth.days);
        cfg.synth.noise = get(*s, "noise", "synth", cfg.synth.noise);
    }
}

}  // namespace detail

inline void RunConfig::validate() const {
    if (case_name == "case1") {
        if (case1.order < 1) throw ConfigError("quadrature order must be >= 1");
        if (!(case1.horizon > 0.0)) throw ConfigError("horizon must be positive");
        if (!(case1.population > 0.0)) throw ConfigError("population must be positive");
        if (!(case1.initial_infected >= 0.0 && case1.initial_exposed >= 0.0) ||
            case1.initial_infected + case1.initial_exposed > case1.population) {
            throw ConfigError("initial infected/exposed must be in [0, population]");
        }
        for (const auto& p : case1.priors) {
            if (p.spec.kind == distributions::DistributionKind::TruncatedNormal) {
                throw ConfigError("priors." + p.name + ": truncated normal priors are not supported");
            }
        }
    } else {
        model.validate();
        if (uq.order < 1) throw ConfigError("uq.order must be >= 1");
        if (!(uq.horizon > 0.0)) throw ConfigError("uq.horizon must be positive");
        if (!(uq.relative_std >= 0.0)) throw ConfigError("uq.relative_std must be non-negative");
        if (!(uq.coverage > 0.0 && uq.coverage < 1.0)) throw ConfigError("uq.coverage must be in (0, 1)");
        if (synth.days < 2) throw ConfigError("synth.days must be >= 2");
        if (!(synth.noise >= 0.0)) throw ConfigError("synth.noise must be non-negative");
        if (!(fit.target_growth > 0.0)) throw ConfigError("fit.target_growth must be positive");
        if (!(fit.alpha >= 0.0)) throw ConfigError("fit.alpha must be non-negative");
        if (!(fit.settings.penalty_weight >= 0.0)) throw ConfigError("fit.penalty_weight must be non-negative");
        if (!(fit.settings.stage_one_start_s > 0.0 && fit.settings.stage_one_start_i0 > 0.0)) throw ConfigError("fit.start_s and fit.start_i0 must be positive");
    }
}

inline nlohmann::json RunConfig::to_json() const {
    nlohmann::json doc;
    doc["case"] = case_name;
    doc["seed"] = seed;
    if (case_name == "case1") {
        nlohmann::json priors = nlohmann::json::object();
        for (const auto& p : case1.priors) {
            priors[p.name] = {{"distribution", distributions::to_string(p.spec.kind)},
                              {"mean", p.spec.mean},
                              {"variance", p.spec.variance}};
        }
        doc["priors"] = priors;
        doc["model"] = {{"population", case1.population},
                        {"initial_infected", case1.initial_infected},
                        {"initial_exposed", case1.initial_exposed},
                        {"horizon", case1.horizon}};
        doc["order"] = case1.order;
        return doc;
    }
    const auto& m = model;
    doc["model"] = {
        {"population", m.population},
        {"initial_infected", m.initial_infected},
        {"rates", {{"sigma", m.sigma}, {"gamma1", m.gamma1}, {"gamma2", m.gamma2}, {"gamma3", m.gamma3},
                   {"alpha", m.alpha}, {"zeta", m.zeta}}},
        {"z1", m.z1},
        {"z2", m.z2},
        {"profile", {{"p", m.profile.p}, {"contribution", m.profile.contribution}, {"s", m.profile.s}}},
        {"restrictions", {{"t", {m.schedule.t1, m.schedule.t2, m.schedule.t3}},
                          {"c", {m.schedule.c1, m.schedule.c2, m.schedule.c3}},
                          {"initial_level", m.schedule.initial_level ? nlohmann::json(*m.schedule.initial_level)
                                                                      : nlohmann::json("none")}}},
    };
    const auto& s = fit.settings;
    doc["fit"] = {{"data", fit.data_file},
                  {"target_growth", fit.target_growth_from_data ? nlohmann::json("data") : nlohmann::json(fit.target_growth)},
                  {"alpha", fit.alpha},            {"penalty_weight", s.penalty_weight},
                  {"multistart", s.multistart},    {"jitter", s.jitter},
                  {"restarts", s.restarts},        {"start_s", s.stage_one_start_s},
                  {"start_i0", s.stage_one_start_i0}, {"max_iterations", s.optimizer.max_iterations}};
    doc["uq"] = {{"order", uq.order},
                 {"relative_std", uq.relative_std},
                 {"horizon", uq.horizon},
                 {"coverage", uq.coverage},
                 {"fit", uq.fit_file}};
    doc["synth"] = {{"days", synth.days}, {"noise", synth.noise}};
    return doc;
}

inline RunConfig parse(std::istream& in, const std::string& source = "") {
    pt::ptree root;
    try {
        pt::read_info(in, root);
    } catch (const pt::info_parser_error& e) {
        throw ConfigError("config " + (source.empty() ? std::string("<stream>") : source) + ": " + e.message() +
                          " (line " + std::to_string(e.line()) + ")");
    }
    RunConfig cfg;
    cfg.source = source;
    detail::check_keys(root, "top level",
                       {"case", "seed", "output", "model", "priors", "quadrature", "fit", "uq", "synth"});
    cfg.case_name = detail::get<std::string>(root, "case", "top level", "");
    if (cfg.case_name != "case1" && cfg.case_name != "case2") {
        throw ConfigError("config: 'case' must be case1 or case2, got '" + cfg.case_name + "'");
    }
    cfg.seed = detail::get<std::uint64_t>(root, "seed", "top level", cfg.seed);
    cfg.output_dir = detail::get<std::string>(root, "output", "top level", cfg.output_dir);
    if (cfg.case_name == "case1") {
        for (const char* k : {"fit", "uq", "synth"}) {
            if (root.get_child_optional(k)) throw ConfigError(std::string("config: block '") + k + "' is not used by case1");
        }
        detail::parse_case1(root, cfg.case1);
    } else {
        for (const char* k : {"priors", "quadrature"}) {
            if (root.get_child_optional(k)) throw ConfigError(std::string("config: block '") + k + "' is not used by case2");
        }
        detail::parse_case2(root, cfg);
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in, path);
}

}  // namespace epichaos::config
