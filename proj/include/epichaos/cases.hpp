#pragma once

// Case studies wired end to end: ensemble solves on a tensor grid, spectral
// projection, statistics and Sobol series, written as plot-ready files.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epichaos/calibrate.hpp"
#include "epichaos/config.hpp"
#include "epichaos/distributions.hpp"
#include "epichaos/epimodels.hpp"
#include "epichaos/orthopoly.hpp"
#include "epichaos/output.hpp"
#include "epichaos/parallel.hpp"
#include "epichaos/pce.hpp"
#include "epichaos/sobol.hpp"

namespace epichaos::cases {

using output::fmt;

namespace detail {

inline std::string describe_node(const std::vector<std::string>& names, const std::vector<double>& x) {
    std::ostringstream os;
    os << '(';
    for (std::size_t d = 0; d < x.size(); ++d) os << (d ? ", " : "") << names[d] << " = " << fmt(x[d]);
    os << ')';
    return os.str();
}

/// Runs `solve` on every grid node in parallel. Any failure aborts the run
/// with a report of the failing nodes, since a partial ensemble would bias
/// the statistics.
template <class Solve>
std::vector<std::vector<double>> solve_ensemble(const pce::TensorGrid& grid, const std::vector<std::string>& names,
                                                Solve&& solve) {
    std::vector<std::vector<double>> rows(grid.size());
    std::vector<std::string> failures(grid.size());
    parallel_for(grid.size(), [&](std::size_t j) {
        try {
            rows[j] = solve(grid.parameter_nodes[j]);
        } catch (const std::exception& e) {
            failures[j] = "node " + std::to_string(j) + " " + describe_node(names, grid.parameter_nodes[j]) + ": " +
                          e.what();
        }
    });
    std::string report;
    std::size_t failed = 0;
    for (const auto& f : failures) {
        if (f.empty()) continue;
        if (++failed <= 10) report += "\n  " + f;
    }
    if (failed > 0) {
        if (failed > 10) report += "\n  ... and " + std::to_string(failed - 10) + " more";
        throw NumericalError(std::to_string(failed) + " of " + std::to_string(grid.size()) +
                             " ensemble members failed:" + report);
    }
    return rows;
}

inline pce::PceExpansion slice(const pce::PceExpansion& e, std::size_t begin, std::size_t end) {
    pce::PceExpansion out;
    out.index_set = e.index_set;
    out.families = e.families;
    out.coefficients.assign(e.coefficients.begin() + static_cast<std::ptrdiff_t>(begin),
                            e.coefficients.begin() + static_cast<std::ptrdiff_t>(end));
    out.labels.assign(e.labels.begin() + static_cast<std::ptrdiff_t>(begin),
                      e.labels.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

inline nlohmann::json matrix_json(const std::vector<std::vector<double>>& m) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : m) out.push_back(row);
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Case 1: SEIR peak (t_peak, I_peak) under log-normal inputs

struct Case1Result {
    std::vector<std::string> names;
    pce::TensorGrid grid;
    std::size_t solves = 0;
    std::vector<std::vector<double>> outputs;  // [node] {t_peak, I_peak}
    pce::PceExpansion expansion;
    std::vector<double> mean;
    std::vector<double> variance;
    std::vector<std::vector<double>> covariance;
    std::vector<sobol::SobolIndices> sobol;                   // per output
    std::vector<distributions::DistributionSpec> lognormal;   // per output
};

inline Case1Result case1_analysis(const config::RunConfig& cfg) {
    const auto& c = cfg.case1;
    Case1Result r;
    std::vector<distributions::DistributionSpec> specs;
    for (const auto& p : c.priors) {
        r.names.push_back(p.name);
        specs.push_back(p.spec);
    }
    r.grid = pce::build_tensor_grid(specs, c.order);
    std::atomic<std::size_t> solves{0};
    r.outputs = detail::solve_ensemble(r.grid, r.names, [&](const std::vector<double>& x) {
        const auto params = epimodels::SeirParams::from_durations(x[0], x[1], x[2], c.population);
        const epimodels::SeirState y0 = {c.population - c.initial_infected - c.initial_exposed, c.initial_exposed,
                                         c.initial_infected, 0.0};
        const auto traj = epimodels::simulate_seir(params, y0, c.horizon);
        ++solves;
        const auto [t_peak, i_peak] = epimodels::find_peak(traj, 2);
        return std::vector<double>{t_peak, i_peak};
    });
    r.solves = solves.load();
    r.expansion = pce::project(r.outputs, r.grid, {"t_peak", "I_peak"});
    r.mean = pce::mean(r.expansion);
    r.variance = pce::variance(r.expansion);
    r.covariance = pce::covariance_matrix(r.expansion);
    for (std::size_t k = 0; k < 2; ++k) {
        r.sobol.push_back(sobol::sobol_indices(r.expansion, k));
        r.lognormal.push_back(distributions::fit_lognormal_from_moments(r.mean[k], r.variance[k]));
    }
    return r;
}

inline void write_case1(const Case1Result& r, output::Writer& w) {
    const auto& labels = r.expansion.labels;
    {
        std::ostringstream os;
        os << "node";
        for (const auto& n : r.names) os << ",xi_" << n;
        for (const auto& n : r.names) os << ',' << n;
        os << ",weight,t_peak,I_peak\n";
        for (std::size_t j = 0; j < r.grid.size(); ++j) {
            os << j;
            for (double v : r.grid.standard_nodes[j]) os << ',' << fmt(v);
            for (double v : r.grid.parameter_nodes[j]) os << ',' << fmt(v);
            os << ',' << fmt(r.grid.weights[j]) << ',' << fmt(r.outputs[j][0]) << ',' << fmt(r.outputs[j][1]) << '\n';
        }
        w.csv("case1_ensemble.csv", os.str());
    }
    {
        std::ostringstream os;
        os << "output,x,pdf\n";
        for (std::size_t k = 0; k < 2; ++k) {
            const double sd = std::sqrt(r.variance[k]);
            const double lo = std::max(r.mean[k] - 5.0 * sd, r.mean[k] * 1e-3);
            const double hi = r.mean[k] + 5.0 * sd;
            for (int i = 0; i <= 200; ++i) {
                const double x = lo + (hi - lo) * i / 200.0;
                os << labels[k] << ',' << fmt(x) << ',' << fmt(distributions::lognormal_pdf(r.lognormal[k], x)) << '\n';
            }
        }
        w.csv("case1_distributions.csv", os.str());
    }
    {
        std::ostringstream os;
        os << "output,subset,index\n";
        for (std::size_t k = 0; k < 2; ++k) {
            for (unsigned m : sobol::subset_order(r.names.size())) {
                os << labels[k] << ',' << sobol::subset_label(m, r.names) << ',' << fmt(r.sobol[k][m]) << '\n';
            }
        }
        w.csv("case1_sobol.csv", os.str());
    }
    nlohmann::json doc;
    doc["solves"] = r.solves;
    doc["order"] = r.grid.orders();
    doc["parameters"] = r.names;
    doc["outputs"] = labels;
    doc["mean"] = r.mean;
    doc["variance"] = r.variance;
    doc["covariance"] = detail::matrix_json(r.covariance);
    nlohmann::json fits = nlohmann::json::object();
    nlohmann::json sob = nlohmann::json::object();
    for (std::size_t k = 0; k < 2; ++k) {
        const auto u = distributions::lognormal_underlying(r.lognormal[k].mean, r.lognormal[k].variance);
        fits[labels[k]] = {{"distribution", "lognormal"}, {"mean", r.mean[k]}, {"variance", r.variance[k]},
                           {"log_mean", u.m}, {"log_std", u.s}};
        sob[labels[k]] = sobol::to_json(r.sobol[k], r.names);
    }
    doc["output_distributions"] = fits;
    doc["sobol"] = sob;
    w.json("case1_summary.json", doc);
    w.json("case1_pce.json", pce::to_json(r.expansion));
}

inline Case1Result run_case1(const config::RunConfig& cfg, output::Writer& w) {
    auto r = case1_analysis(cfg);
    write_case1(r, w);
    return r;
}

// ---------------------------------------------------------------------------
// Case 2: superspreader model fit

struct Case2FitResult {
    calibrate::AdmissionsSeries data;
    calibrate::StageOneWeights weights;
    calibrate::FitResult stage_one;
    calibrate::FitResult stage_two;
    epimodels::SuperspreaderParams fitted;
    ode::Trajectory trajectory;
    std::vector<double> model_admissions;
};

inline Case2FitResult case2_fit_analysis(const config::RunConfig& cfg, const calibrate::AdmissionsSeries& data) {
    Case2FitResult r;
    r.data = data;
    auto settings = cfg.fit.settings;
    settings.seed = cfg.seed;
    double target = cfg.fit.target_growth;
    if (cfg.fit.target_growth_from_data) {
        const auto it = data.metadata.find("growth_rate");
        if (it == data.metadata.end()) {
            throw ConfigError("fit.target_growth is 'data' but the data file has no '# growth_rate' line");
        }
        try {
            target = std::stod(it->second);
        } catch (const std::logic_error&) {
            throw ConfigError("data file growth_rate '" + it->second + "' is not a number");
        }
    }
    r.weights = calibrate::StageOneWeights::for_data(data, target, cfg.fit.alpha);
    r.stage_one = calibrate::fit_stage_one(cfg.model, data, r.weights, settings);
    r.stage_two = calibrate::fit_stage_two(cfg.model, data, r.stage_one, settings);
    r.fitted = cfg.model;
    r.fitted.profile.s = r.stage_one.value("s");
    r.fitted.initial_infected = r.stage_one.value("I0");
    r.fitted.schedule.c1 = r.stage_two.value("c1");
    r.fitted.schedule.c2 = r.stage_two.value("c2");
    r.fitted.schedule.c3 = r.stage_two.value("c3");
    r.trajectory = epimodels::simulate_superspreader(r.fitted, static_cast<double>(data.days.back() + 1));
    r.model_admissions = epimodels::daily_admissions(r.trajectory);
    return r;
}

inline nlohmann::json parameters_json(const epimodels::SuperspreaderParams& p) {
    return {{"s", p.profile.s},
            {"I0", p.initial_infected},
            {"c1", p.schedule.c1},
            {"c2", p.schedule.c2},
            {"c3", p.schedule.c3}};
}

inline void write_case2_fit(const Case2FitResult& r, output::Writer& w) {
    const auto& traj = r.trajectory;
    {
        std::ostringstream os;
        os << 't';
        for (const auto& n : traj.state_names) os << ',' << n;
        os << ",beta_bar,restriction\n";
        for (std::size_t i = 0; i < traj.size(); ++i) {
            os << fmt(traj.times[i]);
            for (double v : traj.states[i]) os << ',' << fmt(v);
            os << ',' << fmt(traj.observables.at("beta_bar")[i]) << ',' << fmt(traj.observables.at("restriction")[i])
               << '\n';
        }
        w.csv("case2_fit_trajectory.csv", os.str());
    }
    double rss = 0.0;
    {
        std::ostringstream os;
        os << "day,date,observed,model,residual\n";
        for (std::size_t i = 0; i < r.data.size(); ++i) {
            const double model = r.model_admissions.at(static_cast<std::size_t>(r.data.days[i]));
            const double res = r.data.admissions[i] - model;
            rss += res * res;
            os << r.data.days[i] << ',' << (r.data.dates.empty() ? "" : r.data.dates[i]) << ','
               << fmt(r.data.admissions[i]) << ',' << fmt(model) << ',' << fmt(res) << '\n';
        }
        w.csv("case2_fit_residuals.csv", os.str());
    }
    nlohmann::json doc;
    doc["parameters"] = parameters_json(r.fitted);
    doc["stage_one"] = calibrate::to_json(r.stage_one);
    doc["stage_two"] = calibrate::to_json(r.stage_two);
    doc["derived"] = {{"A", r.fitted.profile.multiplier()},
                      {"unrestricted_beta_bar", r.fitted.profile.unrestricted_mean()},
                      {"z1", r.fitted.z1},
                      {"z2", r.fitted.z2}};
    doc["residuals"] = {{"observations", r.data.size()},
                        {"rss", rss},
                        {"rmse", std::sqrt(rss / static_cast<double>(r.data.size()))}};
    w.json("case2_fit.json", doc);
}

inline Case2FitResult run_case2_fit(const config::RunConfig& cfg, const calibrate::AdmissionsSeries& data,
                                    output::Writer& w) {
    auto r = case2_fit_analysis(cfg, data);
    write_case2_fit(r, w);
    return r;
}

/// Copies s, I0, c1..c3 from a fit file's "parameters" object into `model`.
inline void apply_fit(const nlohmann::json& doc, epimodels::SuperspreaderParams& model) {
    const auto params = doc.find("parameters");
    if (params == doc.end() || !params->is_object()) throw ConfigError("fit file has no 'parameters' object");
    auto take = [&](const char* key, double& target) {
        if (const auto it = params->find(key); it != params->end()) target = it->get<double>();
    };
    take("s", model.profile.s);
    take("I0", model.initial_infected);
    take("c1", model.schedule.c1);
    take("c2", model.schedule.c2);
    take("c3", model.schedule.c3);
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Case 2: uncertainty in the restriction levels

struct Band {
    std::vector<double> mean, variance, lower, upper;
};

struct Case2UqResult {
    std::vector<std::string> names = {"c1", "c2", "c3"};
    epimodels::SuperspreaderParams base;
    pce::TensorGrid grid;
    std::size_t days = 0;
    std::vector<std::string> quantities = {"H", "C", "admissions"};
    std::vector<pce::PceExpansion> expansions;               // per quantity, one output per day
    std::vector<Band> bands;                                 // per quantity
    std::vector<std::vector<sobol::SobolIndices>> sobol;     // per quantity, per day
};

/// Two-sided band from a normal with the given moments truncated to [0, inf).
inline std::pair<double, double> positive_band(double mean, double variance, double coverage) {
    if (!(variance > 0.0)) return {mean, mean};
    return distributions::truncated_normal_interval(distributions::DistributionSpec::truncated_normal(mean, variance),
                                                    coverage);
}

inline Case2UqResult case2_uq_analysis(const config::RunConfig& cfg, const epimodels::SuperspreaderParams& base) {
    Case2UqResult r;
    r.base = base;
    const double rel = cfg.uq.relative_std > 0.0 ? cfg.uq.relative_std : 1e-12;
    const double cs[] = {base.schedule.c1, base.schedule.c2, base.schedule.c3};
    std::vector<distributions::DistributionSpec> specs;
    for (double c : cs) specs.push_back(distributions::DistributionSpec::normal(c, rel * c * rel * c));
    r.grid = pce::build_tensor_grid(specs, cfg.uq.order);
    r.days = static_cast<std::size_t>(std::floor(cfg.uq.horizon));
    const std::size_t T = r.days;

    // Row layout per node: H(0..T-1), C(0..T-1), admissions on days 0..T-1.
    const auto rows = detail::solve_ensemble(r.grid, r.names, [&](const std::vector<double>& x) {
        auto p = base;
        p.schedule.c1 = x[0];
        p.schedule.c2 = x[1];
        p.schedule.c3 = x[2];
        const auto traj = epimodels::simulate_superspreader(p, static_cast<double>(T));
        const auto adm = epimodels::daily_admissions(traj);
        std::vector<double> row(3 * T);
        for (std::size_t d = 0; d < T; ++d) {
            row[d] = traj.states[d][epimodels::kH];
            row[T + d] = traj.states[d][epimodels::kC];
            row[2 * T + d] = adm[d];
        }
        return row;
    });
    std::vector<std::string> labels;
    for (const auto& q : r.quantities) {
        for (std::size_t d = 0; d < T; ++d) labels.push_back(q + "_" + std::to_string(d));
    }
    const auto all = pce::project(rows, r.grid, std::move(labels));
    for (std::size_t q = 0; q < 3; ++q) {
        r.expansions.push_back(detail::slice(all, q * T, (q + 1) * T));
        Band b;
        b.mean = pce::mean(r.expansions.back());
        b.variance = pce::variance(r.expansions.back());
        for (std::size_t d = 0; d < T; ++d) {
            const auto [lo, hi] = positive_band(b.mean[d], b.variance[d], cfg.uq.coverage);
            b.lower.push_back(lo);
            b.upper.push_back(hi);
        }
        r.bands.push_back(std::move(b));
        r.sobol.push_back(sobol::sobol_time_series(r.expansions.back()));
    }
    return r;
}

inline void write_case2_uq(const Case2UqResult& r, const config::RunConfig& cfg, output::Writer& w) {
    {
        std::ostringstream os;
        os << 't';
        for (const auto& q : r.quantities) os << ',' << q << "_mean," << q << "_variance," << q << "_lower," << q << "_upper";
        os << ",restriction\n";
        for (std::size_t d = 0; d < r.days; ++d) {
            os << d;
            for (const auto& b : r.bands) {
                os << ',' << fmt(b.mean[d]) << ',' << fmt(b.variance[d]) << ',' << fmt(b.lower[d]) << ','
                   << fmt(b.upper[d]);
            }
            os << ',' << fmt(r.base.schedule.reported_level(static_cast<double>(d))) << '\n';
        }
        w.csv("case2_uq_bands.csv", os.str());
    }
    std::vector<double> times(r.days);
    for (std::size_t d = 0; d < r.days; ++d) times[d] = static_cast<double>(d);
    for (std::size_t q = 0; q < r.quantities.size(); ++q) {
        std::ostringstream os;
        sobol::write_time_series_csv(os, times, r.sobol[q], r.names);
        w.csv("case2_uq_sobol_" + r.quantities[q] + ".csv", os.str());
    }
    nlohmann::json doc;
    doc["solves"] = r.grid.size();
    doc["order"] = r.grid.orders();
    doc["days"] = r.days;
    doc["coverage"] = cfg.uq.coverage;
    doc["base_parameters"] = parameters_json(r.base);
    nlohmann::json priors = nlohmann::json::object();
    for (std::size_t d = 0; d < 3; ++d) {
        priors[r.names[d]] = {{"distribution", "normal"}, {"mean", r.grid.specs[d].mean},
                              {"variance", r.grid.specs[d].variance}};
    }
    doc["priors"] = priors;
    nlohmann::json degenerate = nlohmann::json::object();
    for (std::size_t q = 0; q < r.quantities.size(); ++q) {
        std::size_t n = 0;
        for (const auto& s : r.sobol[q]) n += s.degenerate ? 1 : 0;
        degenerate[r.quantities[q]] = n;
    }
    doc["degenerate_days"] = degenerate;
    w.json("case2_uq_summary.json", doc);
}

inline Case2UqResult run_case2_uq(const config::RunConfig& cfg, const epimodels::SuperspreaderParams& base,
                                  output::Writer& w) {
    auto r = case2_uq_analysis(cfg, base);
    write_case2_uq(r, cfg, w);
    return r;
}

// ---------------------------------------------------------------------------
// Synthetic admissions

inline calibrate::AdmissionsSeries run_synth(const config::RunConfig& cfg, output::Writer& w) {
    const auto& p = cfg.model;
    const auto data = calibrate::synthesize_data(p, cfg.synth.days, cfg.synth.noise, cfg.seed);
    const double growth = calibrate::growth_rate(epimodels::simulate_superspreader(p, p.schedule.t1), p.schedule.t1);
    std::ostringstream os;
    os << "# truth s=" << fmt(p.profile.s) << " I0=" << fmt(p.initial_infected) << " c1=" << fmt(p.schedule.c1)
       << " c2=" << fmt(p.schedule.c2) << " c3=" << fmt(p.schedule.c3) << '\n';
    os << "# noise " << fmt(cfg.synth.noise) << " seed " << cfg.seed << '\n';
    os << "# growth_rate " << fmt(growth) << '\n';
    calibrate::write_admissions_csv(os, data);
    w.csv("synthetic_admissions.csv", os.str());
    return data;
}

// ---------------------------------------------------------------------------
// Quadrature self-test

struct QuadCheckRow {
    std::string family;
    unsigned order = 0;
    double moment_error = 0.0;  // relative; absolute for vanishing moments
    double gram_error = 0.0;    // max |G - I|
};

struct QuadCheckReport {
    unsigned max_order = 0;
    double tolerance = 1e-9;
    std::vector<QuadCheckRow> rows;
    double max_moment_error = 0.0;
    double max_gram_error = 0.0;
    bool passed() const { return max_moment_error < tolerance && max_gram_error < tolerance; }
};

namespace detail {

inline double double_factorial(int k) {
    double r = 1.0;
    for (int i = k; i > 1; i -= 2) r *= i;
    return r;
}

/// Sum of w_i x_i^k pairing mirror nodes from the outside in, so odd moments
/// of a symmetric rule cancel exactly.
inline double symmetric_moment(const orthopoly::QuadratureRule& rule, int k) {
    const std::size_t n = rule.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n / 2; ++i) {
        s += rule.weights[i] * std::pow(rule.nodes[i], k) + rule.weights[n - 1 - i] * std::pow(rule.nodes[n - 1 - i], k);
    }
    if (n % 2) s += rule.weights[n / 2] * std::pow(rule.nodes[n / 2], k);
    return s;
}

}  // namespace detail

/// Moment exactness (degree <= 2n - 1) and discrete orthonormality of the
/// n-point Hermite and Legendre rules for n = 1 .. max_order. A nonzero
/// `perturb` scales the first weight by (1 + perturb) to exercise failure.
inline QuadCheckReport quad_check(unsigned max_order = 64, double perturb = 0.0) {
    if (max_order < 1) throw std::invalid_argument("quad_check: order must be >= 1");
    QuadCheckReport report;
    report.max_order = max_order;
    using orthopoly::FamilyKind;
    for (auto kind : {FamilyKind::HermiteProbabilists, FamilyKind::Legendre}) {
        for (unsigned n = 1; n <= max_order; ++n) {
            const auto family = orthopoly::recurrence_coefficients(kind, n);
            auto rule = orthopoly::gauss_rule(family, n);
            rule.weights[0] *= 1.0 + perturb;
            QuadCheckRow row;
            row.family = orthopoly::to_string(kind);
            row.order = n;
            for (int k = 0; k <= static_cast<int>(2 * n - 1); ++k) {
                double exact = 0.0;
                if (k % 2 == 0) {
                    exact = kind == FamilyKind::HermiteProbabilists ? detail::double_factorial(k - 1) : 1.0 / (k + 1);
                }
                const double err = std::abs(detail::symmetric_moment(rule, k) - exact);
                row.moment_error = std::max(row.moment_error, exact == 0.0 ? err : err / exact);
            }
            std::vector<std::vector<double>> phi(n, std::vector<double>(n));
            for (unsigned i = 0; i < n; ++i) orthopoly::eval_orthonormal_all(family, n - 1, rule.nodes[i], phi[i]);
            for (unsigned a = 0; a < n; ++a) {
                for (unsigned b = a; b < n; ++b) {
                    double g = 0.0;
                    for (unsigned i = 0; i < n; ++i) g += rule.weights[i] * phi[i][a] * phi[i][b];
                    row.gram_error = std::max(row.gram_error, std::abs(g - (a == b ? 1.0 : 0.0)));
                }
            }
            report.max_moment_error = std::max(report.max_moment_error, row.moment_error);
            report.max_gram_error = std::max(report.max_gram_error, row.gram_error);
            report.rows.push_back(row);
        }
    }
    return report;
}

inline nlohmann::json to_json(const QuadCheckReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"family", row.family}, {"order", row.order}, {"moment_error", row.moment_error},
                        {"gram_error", row.gram_error}});
    }
    return {{"max_order", r.max_order},         {"tolerance", r.tolerance},
            {"max_moment_error", r.max_moment_error}, {"max_gram_error", r.max_gram_error},
            {"passed", r.passed()},             {"rows", rows}};
}

// ---------------------------------------------------------------------------
// Sobol demonstration functions

/// Smooth three-input test function in the spirit of Ishigami, for standard
/// normal inputs.
inline double ishigami_normal(const std::vector<double>& x) {
    return std::sin(x[0]) + 0.7 * std::sin(x[1]) * std::sin(x[1]) + 0.1 * std::pow(x[2], 4) * std::sin(x[0]);
}

inline pce::PceExpansion expand_standard_normal(std::size_t dim, unsigned order,
                                                const std::function<double(const std::vector<double>&)>& f) {
    const auto grid = pce::build_tensor_grid(
        std::vector<distributions::DistributionSpec>(dim, distributions::DistributionSpec::normal(0.0, 1.0)), order);
    std::vector<std::vector<double>> rows;
    for (const auto& x : grid.parameter_nodes) rows.push_back({f(x)});
    return pce::project(rows, grid);
}

inline nlohmann::json sobol_demo(unsigned order) {
    nlohmann::json doc;
    const std::vector<std::string> two = {"X1", "X2"}, three = {"X1", "X2", "X3"};
    const auto additive = expand_standard_normal(2, std::max(order, 2u), [](auto& x) { return 2.0 * x[0] + x[1]; });
    const auto product = expand_standard_normal(2, std::max(order, 2u), [](auto& x) { return x[0] * x[1]; });
    const auto ishigami = expand_standard_normal(3, std::max(order, 2u), ishigami_normal);
    doc["additive_2x1_plus_x2"] = sobol::to_json(sobol::sobol_indices(additive, 0), two);
    doc["product_x1_x2"] = sobol::to_json(sobol::sobol_indices(product, 0), two);
    doc["ishigami_normal"] = sobol::to_json(sobol::sobol_indices(ishigami, 0), three);
    doc["order"] = std::max(order, 2u);
    return doc;
}

}  // namespace epichaos::cases
