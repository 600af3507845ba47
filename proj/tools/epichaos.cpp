// epichaos command-line front end.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "epichaos/cases.hpp"
#include "epichaos/config.hpp"
#include "epichaos/output.hpp"
#include "epichaos/version.hpp"

namespace {

using namespace epichaos;

struct Options {
    std::string config_path;
    std::string data_path;
    std::string fit_path;
    std::string out_dir;
    std::optional<unsigned> order;
    std::optional<std::uint64_t> seed;
    double perturb = 0.0;
};

config::RunConfig load_config(const Options& opt, const std::string& expected_case) {
    config::RunConfig cfg;
    if (!opt.config_path.empty()) {
        cfg = config::load(opt.config_path);
    } else {
        cfg.case_name = expected_case;
    }
    if (cfg.case_name != expected_case) {
        throw ConfigError("config '" + opt.config_path + "' describes " + cfg.case_name + ", not " + expected_case);
    }
    if (opt.seed) cfg.seed = *opt.seed;
    if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
    cfg.validate();
    return cfg;
}

output::Writer make_writer(const std::string& dir, const std::string& command, const std::string& hash) {
    return output::Writer(dir, output::Provenance{command, hash});
}

void report(const output::Writer& w) {
    for (const auto& p : w.written()) std::cout << "wrote " << p.string() << '\n';
}

int run_case1(const Options& opt) {
    auto cfg = load_config(opt, "case1");
    if (opt.order) cfg.case1.order = *opt.order;
    cfg.validate();
    auto w = make_writer(cfg.output_dir, "case1", cfg.hash());
    const auto r = cases::run_case1(cfg, w);
    std::cout << "case1: " << r.solves << " model solves (q = " << cfg.case1.order << ")\n";
    for (std::size_t k = 0; k < 2; ++k) {
        std::cout << "  " << r.expansion.labels[k] << ": mean " << output::fmt(r.mean[k]) << ", variance "
                  << output::fmt(r.variance[k]) << '\n';
    }
    report(w);
    return 0;
}

int run_case2_fit(const Options& opt) {
    auto cfg = load_config(opt, "case2");
    if (!opt.data_path.empty()) cfg.fit.data_file = opt.data_path;
    else cfg.fit.data_file = cfg.resolve(cfg.fit.data_file);
    if (cfg.fit.data_file.empty()) throw ConfigError("case2 fit: no data file (use --data or fit.data)");
    const auto data = calibrate::read_admissions_csv(cfg.fit.data_file);
    auto w = make_writer(cfg.output_dir, "case2 fit", cfg.hash());
    const auto r = cases::run_case2_fit(cfg, data, w);
    const auto& p = r.fitted;
    std::cout << "case2 fit: s = " << output::fmt(p.profile.s) << ", I0 = " << output::fmt(p.initial_infected)
              << ", c = (" << output::fmt(p.schedule.c1) << ", " << output::fmt(p.schedule.c2) << ", "
              << output::fmt(p.schedule.c3) << "), A = " << output::fmt(p.profile.multiplier()) << '\n';
    for (const auto& fit : {r.stage_one, r.stage_two}) {
        for (const auto& msg : fit.warnings) std::cout << "  warning: " << msg << '\n';
    }
    report(w);
    return 0;
}

int run_case2_uq(const Options& opt) {
    auto cfg = load_config(opt, "case2");
    if (opt.order) cfg.uq.order = *opt.order;
    if (!opt.fit_path.empty()) cfg.uq.fit_file = opt.fit_path;
    else cfg.uq.fit_file = cfg.resolve(cfg.uq.fit_file);
    cfg.validate();
    auto base = cfg.model;
    if (!cfg.uq.fit_file.empty()) cases::apply_fit(cases::read_json_file(cfg.uq.fit_file), base);
    base.validate();
    auto w = make_writer(cfg.output_dir, "case2 uq", cfg.hash());
    const auto r = cases::run_case2_uq(cfg, base, w);
    std::cout << "case2 uq: " << r.grid.size() << " model solves (q = " << cfg.uq.order << "), " << r.days
              << " days\n";
    report(w);
    return 0;
}

int run_synth(const Options& opt) {
    const auto cfg = load_config(opt, "case2");
    auto w = make_writer(cfg.output_dir, "synth", cfg.hash());
    const auto data = cases::run_synth(cfg, w);
    std::cout << "synth: " << data.size() << " days, noise " << output::fmt(cfg.synth.noise) << ", seed " << cfg.seed
              << '\n';
    report(w);
    return 0;
}

int run_quad_check(const Options& opt) {
    const unsigned order = opt.order.value_or(64);
    const auto r = cases::quad_check(order, opt.perturb);
    std::cout << "quad-check: orders 1.." << order << " (hermite, legendre)\n"
              << "  max moment error      " << output::fmt(r.max_moment_error) << '\n'
              << "  max orthonormal error " << output::fmt(r.max_gram_error) << '\n'
              << "  tolerance             " << output::fmt(r.tolerance) << '\n'
              << (r.passed() ? "PASS" : "FAIL") << '\n';
    if (!opt.out_dir.empty()) {
        const nlohmann::json key = {{"command", "quad-check"}, {"order", order}, {"perturb", opt.perturb}};
        auto w = make_writer(opt.out_dir, "quad-check", output::hex64(output::fnv1a64(key.dump())));
        w.json("quad_check.json", cases::to_json(r));
        report(w);
    }
    return r.passed() ? 0 : 2;
}

int run_sobol_demo(const Options& opt) {
    const unsigned order = opt.order.value_or(14);
    const auto doc = cases::sobol_demo(order);
    std::cout << doc.dump(2) << '\n';
    if (!opt.out_dir.empty()) {
        const nlohmann::json key = {{"command", "sobol-demo"}, {"order", order}};
        auto w = make_writer(opt.out_dir, "sobol-demo", output::hex64(output::fnv1a64(key.dump())));
        w.json("sobol_demo.json", doc);
        report(w);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polynomial chaos uncertainty quantification for epidemic models"};
    app.set_version_flag("--version", std::string("epichaos ") + epichaos::kVersion);
    app.require_subcommand(1);
    Options opt;

    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "Run configuration file (INFO format)")->check(CLI::ExistingFile);
    };
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", opt.out_dir, "Output directory"); };
    auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", opt.seed, "Random seed"); };
    auto add_order = [&](CLI::App* sub, const std::string& help) {
        sub->add_option("--order", opt.order, help)->check(CLI::PositiveNumber);
    };

    auto* quad = app.add_subcommand("quad-check", "Quadrature exactness and orthonormality self-test");
    add_order(quad, "Largest rule size to check (default 64)");
    add_out(quad);
    quad->add_option("--perturb-weights", opt.perturb, "Relative perturbation of one weight (failure drill)")
        ->group("");

    auto* case1 = app.add_subcommand("case1", "SEIR peak uncertainty under log-normal inputs");
    add_config(case1);
    add_out(case1);
    add_order(case1, "Quadrature points per input");
    add_seed(case1);

    auto* case2 = app.add_subcommand("case2", "Superspreader model");
    case2->require_subcommand(1);
    auto* fit = case2->add_subcommand("fit", "Two-stage fit to daily admissions");
    add_config(fit);
    fit->add_option("--data", opt.data_path, "Admissions CSV (date,day,admissions)");
    add_out(fit);
    add_seed(fit);
    auto* uq = case2->add_subcommand("uq", "Uncertainty bands and Sobol series for the restriction levels");
    add_config(uq);
    uq->add_option("--fit", opt.fit_path, "Fit result JSON providing s, I0, c1..c3");
    add_out(uq);
    add_order(uq, "Quadrature points per restriction level");
    add_seed(uq);

    auto* synth = app.add_subcommand("synth", "Generate synthetic admissions from the model");
    add_config(synth);
    add_out(synth);
    add_seed(synth);

    auto* demo = app.add_subcommand("sobol-demo", "Sobol indices of analytic test functions");
    add_order(demo, "Quadrature points per input (default 14)");
    add_out(demo);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*quad) return run_quad_check(opt);
        if (*case1) return run_case1(opt);
        if (*fit) return run_case2_fit(opt);
        if (*uq) return run_case2_uq(opt);
        if (*synth) return run_synth(opt);
        if (*demo) return run_sobol_demo(opt);
    } catch (const epichaos::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const epichaos::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
