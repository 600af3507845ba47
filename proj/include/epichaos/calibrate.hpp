#pragma once

/**
 * @file calibrate.hpp
 * @brief Two-stage least-squares calibration of the superspreader model to
 *        daily hospital admissions, plus a synthetic data generator.
 *
 * Stage one fits the infectivity scale s and the initial infected count I0
 * on the pre-lockdown window t < t1, balancing the observed initial growth
 * rate against the admissions misfit. Stage two keeps (s, I0) and fits the
 * three restriction levels on the whole series, with a soft ordering
 * penalty c1 <= c2 <= c3.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epichaos/epimodels.hpp"
#include "epichaos/errors.hpp"
#include "epichaos/parallel.hpp"

namespace epichaos::calibrate {

using epimodels::SuperspreaderParams;
using epimodels::Trajectory;

// ---------------------------------------------------------------------------
// Data

struct AdmissionsSeries {
    std::vector<int> days;             // day 0 = first observation
    std::vector<double> admissions;    // persons/day
    std::vector<std::string> dates;    // ISO-8601 or empty, one per row
    std::map<std::string, std::string> metadata;  // from "# key value" comment lines

    std::size_t size() const noexcept { return days.size(); }

    void validate() const {
        if (admissions.size() != days.size() || (!dates.empty() && dates.size() != days.size())) {
            throw ConfigError("admissions series: column lengths differ");
        }
        for (std::size_t i = 0; i < days.size(); ++i) {
            if (days[i] < 0) throw ConfigError("admissions series: negative day index");
            if (i > 0 && days[i] <= days[i - 1]) {
                throw ConfigError("admissions series: day indices must be strictly increasing");
            }
            if (!(admissions[i] >= 0.0) || !std::isfinite(admissions[i])) {
                throw ConfigError("admissions series: admissions must be finite and non-negative");
            }
        }
    }

    double squared_norm() const {
        double s = 0.0;
        for (double v : admissions) s += v * v;
        return s;
    }
};

/// Reads `date,day,admissions`. Lines starting with '#' are comments; a
/// comment of the form "# key value" is kept in `metadata`.
inline AdmissionsSeries read_admissions_csv(std::istream& in, const std::string& origin = "<stream>") {
    AdmissionsSeries series;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream cs(line.substr(1));
            std::string key, rest;
            if (cs >> key && std::getline(cs >> std::ws, rest)) series.metadata[key] = rest;
            continue;
        }
        if (!header_seen) {
            if (line != "date,day,admissions") {
                throw ConfigError(origin + ": expected header 'date,day,admissions', got '" + line + "'");
            }
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string date, day, value;
        if (!std::getline(ss, date, ',') || !std::getline(ss, day, ',') || !std::getline(ss, value)) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected three columns");
        }
        try {
            std::size_t used = 0;
            const int d = std::stoi(day, &used);
            if (used != day.size()) throw std::invalid_argument(day);
            const double v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            series.days.push_back(d);
            series.admissions.push_back(v);
            series.dates.push_back(date);
        } catch (const std::logic_error&) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed row '" + line + "'");
        }
    }
    if (!header_seen) throw ConfigError(origin + ": missing header");
    try {
        series.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return series;
}

inline AdmissionsSeries read_admissions_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file '" + path + "'");
    return read_admissions_csv(in, path);
}

inline void write_admissions_csv(std::ostream& os, const AdmissionsSeries& series) {
    series.validate();
    os << "date,day,admissions\n";
    const auto prec = os.precision(17);
    for (std::size_t i = 0; i < series.size(); ++i) {
        os << (series.dates.empty() ? std::string{} : series.dates[i]) << ',' << series.days[i] << ','
           << series.admissions[i] << '\n';
    }
    os.precision(prec);
}

// ---------------------------------------------------------------------------
// Optimizer

struct NelderMeadSettings {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    double xtol_rel = 1e-8;        // simplex diameter relative to the best vertex
    double ftol = 1e-10;           // spread of objective values over the simplex
    std::size_t max_iterations = 5000;
    double initial_step_rel = 0.05;
    double initial_step_abs = 0.00025;  // used for zero start coordinates
};

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> values;
    double objective = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
    std::map<std::string, double> diagnostics;

    double value(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) return values[i];
        }
        throw std::out_of_range("fit result has no parameter '" + name + "'");
    }
};

/// Derivative-free simplex minimization. Returns the best vertex found; with
/// `converged == false` when the iteration cap is hit. A NaN objective value
/// raises NumericalError.
template <class Objective>
FitResult nelder_mead(Objective&& objective, const std::vector<double>& start,
                      const NelderMeadSettings& settings = {}) {
    const std::size_t k = start.size();
    if (k == 0) throw std::invalid_argument("nelder_mead: empty start point");
    FitResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double f = objective(std::span<const double>(x));
        if (std::isnan(f)) {
            std::ostringstream msg;
            msg << "nelder_mead: objective returned NaN at (";
            for (std::size_t i = 0; i < x.size(); ++i) msg << (i ? ", " : "") << x[i];
            msg << ")";
            throw NumericalError(msg.str());
        }
        return f;
    };

    std::vector<std::vector<double>> simplex(k + 1, start);
    for (std::size_t i = 0; i < k; ++i) {
        simplex[i + 1][i] = start[i] != 0.0 ? start[i] * (1.0 + settings.initial_step_rel)
                                            : settings.initial_step_abs;
    }
    std::vector<double> fvals(k + 1);
    for (std::size_t i = 0; i <= k; ++i) fvals[i] = eval(simplex[i]);
    if (!std::isfinite(fvals[0])) throw NumericalError("nelder_mead: objective not finite at the start point");

    std::vector<std::size_t> order(k + 1);
    auto sort_simplex = [&] {
        for (std::size_t i = 0; i <= k; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
        std::vector<std::vector<double>> s2;
        std::vector<double> f2;
        for (auto i : order) {
            s2.push_back(simplex[i]);
            f2.push_back(fvals[i]);
        }
        simplex = std::move(s2);
        fvals = std::move(f2);
    };

    std::vector<double> centroid(k), xr(k), xe(k), xc(k);
    sort_simplex();
    while (true) {
        double diameter = 0.0;
        double scale = 1.0;
        for (std::size_t i = 0; i < k; ++i) scale = std::max(scale, std::abs(simplex[0][i]));
        for (std::size_t v = 1; v <= k; ++v) {
            for (std::size_t i = 0; i < k; ++i) diameter = std::max(diameter, std::abs(simplex[v][i] - simplex[0][i]));
        }
        const double spread = fvals[k] - fvals[0];
        if (diameter <= settings.xtol_rel * scale || spread <= settings.ftol) {
            result.converged = true;
            break;
        }
        if (result.iterations >= settings.max_iterations) break;
        ++result.iterations;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t v = 0; v < k; ++v) {
            for (std::size_t i = 0; i < k; ++i) centroid[i] += simplex[v][i] / static_cast<double>(k);
        }
        for (std::size_t i = 0; i < k; ++i) xr[i] = centroid[i] + settings.reflection * (centroid[i] - simplex[k][i]);
        const double fr = eval(xr);

        if (fr < fvals[0]) {
            for (std::size_t i = 0; i < k; ++i) xe[i] = centroid[i] + settings.expansion * (xr[i] - centroid[i]);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[k] = xe;
                fvals[k] = fe;
            } else {
                simplex[k] = xr;
                fvals[k] = fr;
            }
        } else if (fr < fvals[k - 1]) {
            simplex[k] = xr;
            fvals[k] = fr;
        } else {
            const bool outside = fr < fvals[k];
            for (std::size_t i = 0; i < k; ++i) {
                xc[i] = outside ? centroid[i] + settings.contraction * (xr[i] - centroid[i])
                                : centroid[i] + settings.contraction * (simplex[k][i] - centroid[i]);
            }
            const double fc = eval(xc);
            if (fc < (outside ? fr : fvals[k])) {
                simplex[k] = xc;
                fvals[k] = fc;
            } else {
                for (std::size_t v = 1; v <= k; ++v) {
                    for (std::size_t i = 0; i < k; ++i) {
                        simplex[v][i] = simplex[0][i] + settings.shrink * (simplex[v][i] - simplex[0][i]);
                    }
                    fvals[v] = eval(simplex[v]);
                }
            }
        }
        sort_simplex();
    }
    result.values = simplex[0];
    result.objective = fvals[0];
    return result;
}

// ---------------------------------------------------------------------------
// Objectives

/// Mean day-over-day relative growth of x over consecutive daily samples.
inline double growth_rate(std::span<const double> daily) {
    if (daily.size() < 2) throw std::invalid_argument("growth_rate: need at least two daily values");
    double sum = 0.0;
    for (std::size_t t = 1; t < daily.size(); ++t) {
        if (!(daily[t - 1] > 0.0)) throw NumericalError("growth_rate: non-positive value at day " + std::to_string(t - 1));
        sum += (daily[t] - daily[t - 1]) / daily[t - 1];
    }
    return sum / static_cast<double>(daily.size() - 1);
}

/// Growth of the active non-hospital infections E + I1 + I2 over the integer
/// days 0 .. t1 - 1 (ratios for t in [1, t1)).
inline double growth_rate(const Trajectory& traj, double t1) {
    using namespace epimodels;
    std::vector<double> x;
    for (double t = traj.times.front(); t < t1 - 1e-9; t += 1.0) {
        const auto& s = traj.states[traj.sample_at(t)];
        x.push_back(s[kE] + s[kI1] + s[kI2]);
    }
    return growth_rate(x);
}

struct StageOneWeights {
    double target_growth = 0.23;   // 1/day
    double w0 = 1.0 / (0.23 * 0.23);
    double w1 = 1.0;               // 1 / ||H_data||^2, set from the data
    double alpha = 0.01;

    static StageOneWeights for_data(const AdmissionsSeries& data, double target_growth = 0.23,
                                    double alpha = 0.01) {
        StageOneWeights w;
        w.target_growth = target_growth;
        w.w0 = 1.0 / (target_growth * target_growth);
        const double norm2 = data.squared_norm();
        w.w1 = norm2 > 0.0 ? 1.0 / norm2 : 1.0;
        w.alpha = alpha;
        return w;
    }
};

struct FitSettings {
    NelderMeadSettings optimizer;
    std::size_t restarts = 2;       // re-run the simplex from the previous optimum
    std::size_t multistart = 5;     // stage two: jittered start points
    double jitter = 0.2;            // stage two: log-scale jitter of the start points
    std::uint64_t seed = 1;
    double penalty_weight = 1e6;    // w2
    double stage_one_start_s = 0.5;
    double stage_one_start_i0 = 100.0;
};

struct StageOneTerms {
    double objective = 0.0;
    double growth = 0.0;
    double growth_term = 0.0;
    double misfit_term = 0.0;
};

/// Stage-one objective at (s, I0); `base` supplies every other model parameter.
inline StageOneTerms stage_one_terms(const SuperspreaderParams& base, const AdmissionsSeries& data,
                                     const StageOneWeights& weights, double s, double i0) {
    SuperspreaderParams p = base;
    p.profile.s = s;
    p.initial_infected = i0;
    const double t1 = p.schedule.t1;
    const auto traj = epimodels::simulate_superspreader(p, t1);
    const auto model = epimodels::daily_admissions(traj);
    StageOneTerms terms;
    terms.growth = growth_rate(traj, t1);
    terms.growth_term = 0.5 * weights.w0 * (terms.growth - weights.target_growth) * (terms.growth - weights.target_growth);
    double misfit = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.days[i] >= t1) continue;
        const double r = model.at(static_cast<std::size_t>(data.days[i])) - data.admissions[i];
        misfit += r * r;
    }
    terms.misfit_term = weights.alpha * 0.5 * weights.w1 * misfit;
    terms.objective = terms.growth_term + terms.misfit_term;
    return terms;
}

namespace detail {

template <class Objective>
FitResult minimize_with_restarts(Objective&& objective, std::vector<double> start, const FitSettings& settings) {
    FitResult best = nelder_mead(objective, start, settings.optimizer);
    for (std::size_t r = 0; r < settings.restarts; ++r) {
        FitResult next = nelder_mead(objective, best.values, settings.optimizer);
        next.iterations += best.iterations;
        next.evaluations += best.evaluations;
        const bool improved = next.objective < best.objective;
        if (!improved) {
            best.iterations = next.iterations;
            best.evaluations = next.evaluations;
            break;
        }
        best = std::move(next);
    }
    return best;
}

}  // namespace detail

/// Fits (s, I0) on the data before t1 with no restriction level fitted.
/// Parameters are optimized on a log scale so both stay positive.
inline FitResult fit_stage_one(const SuperspreaderParams& base, const AdmissionsSeries& data,
                               const StageOneWeights& weights, const FitSettings& settings = {}) {
    data.validate();
    const double t1 = base.schedule.t1;
    if (data.size() == 0 || data.days.front() >= t1) {
        throw ConfigError("stage one: data has no observations before t1 = " + std::to_string(t1));
    }
    auto objective = [&](std::span<const double> x) {
        return stage_one_terms(base, data, weights, std::exp(x[0]), std::exp(x[1])).objective;
    };
    FitResult fit = detail::minimize_with_restarts(
        objective, {std::log(settings.stage_one_start_s), std::log(settings.stage_one_start_i0)}, settings);
    fit.names = {"s", "I0"};
    for (double& v : fit.values) v = std::exp(v);
    const auto terms = stage_one_terms(base, data, weights, fit.values[0], fit.values[1]);
    fit.diagnostics["growth_rate"] = terms.growth;
    fit.diagnostics["target_growth"] = weights.target_growth;
    fit.diagnostics["growth_term"] = terms.growth_term;
    fit.diagnostics["misfit_term"] = terms.misfit_term;
    fit.diagnostics["w0"] = weights.w0;
    fit.diagnostics["w1"] = weights.w1;
    fit.diagnostics["alpha"] = weights.alpha;
    if (data.squared_norm() == 0.0) fit.warnings.push_back("data are identically zero; w1 set to 1");
    if (fit.values[1] < 1.0) fit.warnings.push_back("I0 driven towards the zero boundary");
    if (!fit.converged) fit.warnings.push_back("stage one: iteration cap reached");
    return fit;
}

struct StageTwoTerms {
    double objective = 0.0;
    double misfit = 0.0;
    double penalty = 0.0;
};

inline StageTwoTerms stage_two_terms(const SuperspreaderParams& base, const AdmissionsSeries& data,
                                     double penalty_weight, double c1, double c2, double c3) {
    SuperspreaderParams p = base;
    p.schedule.c1 = c1;
    p.schedule.c2 = c2;
    p.schedule.c3 = c3;
    const double horizon = static_cast<double>(data.days.back() + 1);
    const auto model = epimodels::daily_admissions(epimodels::simulate_superspreader(p, horizon));
    StageTwoTerms terms;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = model.at(static_cast<std::size_t>(data.days[i])) - data.admissions[i];
        terms.misfit += 0.5 * r * r;
    }
    terms.penalty = -penalty_weight * (std::min(0.0, c2 - c1) + std::min(0.0, c3 - c2));
    terms.objective = terms.misfit + terms.penalty;
    return terms;
}

/// Fits (c1, c2, c3) on the whole series with (s, I0) taken from stage one.
/// Runs `multistart` jittered starts around (s/2, s/2, s/2) in parallel and
/// keeps the best by (objective, start index).
inline FitResult fit_stage_two(const SuperspreaderParams& base, const AdmissionsSeries& data,
                               const FitResult& stage_one, const FitSettings& settings = {}) {
    data.validate();
    SuperspreaderParams p = base;
    p.profile.s = stage_one.value("s");
    p.initial_infected = stage_one.value("I0");
    if (data.size() == 0 || data.days.back() <= p.schedule.t3) {
        throw ConfigError("stage two: data must extend beyond t3 = " + std::to_string(p.schedule.t3));
    }
    auto objective = [&](std::span<const double> x) {
        return stage_two_terms(p, data, settings.penalty_weight, std::exp(x[0]), std::exp(x[1]), std::exp(x[2]))
            .objective;
    };

    const std::size_t starts = std::max<std::size_t>(1, settings.multistart);
    std::vector<std::vector<double>> start_points;
    std::mt19937_64 rng(settings.seed);
    std::normal_distribution<double> normal;
    for (std::size_t k = 0; k < starts; ++k) {
        std::vector<double> x(3, std::log(0.5 * p.profile.s));
        if (k > 0) {
            for (double& v : x) v += settings.jitter * normal(rng);
        }
        start_points.push_back(x);
    }
    std::vector<FitResult> runs(starts);
    parallel_for(starts, [&](std::size_t k) {
        runs[k] = detail::minimize_with_restarts(objective, start_points[k], settings);
    });
    std::size_t best = 0;
    for (std::size_t k = 1; k < starts; ++k) {
        if (runs[k].objective < runs[best].objective) best = k;
    }
    FitResult fit = runs[best];
    fit.names = {"c1", "c2", "c3"};
    for (double& v : fit.values) v = std::exp(v);
    const auto terms = stage_two_terms(p, data, settings.penalty_weight, fit.values[0], fit.values[1], fit.values[2]);
    fit.diagnostics["misfit"] = terms.misfit;
    fit.diagnostics["penalty"] = terms.penalty;
    fit.diagnostics["data_norm2"] = data.squared_norm();
    fit.diagnostics["best_start"] = static_cast<double>(best);
    fit.diagnostics["penalty_weight"] = settings.penalty_weight;
    if (!(fit.values[0] <= fit.values[1] && fit.values[1] <= fit.values[2])) {
        fit.warnings.push_back("restriction levels are not ordered c1 <= c2 <= c3");
    }
    if (!fit.converged) fit.warnings.push_back("stage two: iteration cap reached");
    return fit;
}

inline nlohmann::json to_json(const FitResult& fit) {
    nlohmann::json doc;
    nlohmann::json params = nlohmann::json::object();
    for (std::size_t i = 0; i < fit.names.size(); ++i) params[fit.names[i]] = fit.values[i];
    doc["parameters"] = params;
    doc["names"] = fit.names;
    doc["objective"] = fit.objective;
    doc["iterations"] = fit.iterations;
    doc["evaluations"] = fit.evaluations;
    doc["converged"] = fit.converged;
    doc["warnings"] = fit.warnings;
    doc["diagnostics"] = fit.diagnostics;
    return doc;
}

inline FitResult fit_from_json(const nlohmann::json& doc) {
    FitResult fit;
    fit.names = doc.at("names").get<std::vector<std::string>>();
    for (const auto& n : fit.names) fit.values.push_back(doc.at("parameters").at(n).get<double>());
    fit.objective = doc.value("objective", 0.0);
    fit.converged = doc.value("converged", true);
    return fit;
}

// ---------------------------------------------------------------------------
// Synthetic data

/// Forward-model admissions for days 0 .. days-1, each multiplied by
/// (1 + noise * eta) with eta standard normal from a seeded generator and
/// clamped at zero.
inline AdmissionsSeries synthesize_data(const SuperspreaderParams& truth, int days, double noise,
                                        std::uint64_t seed) {
    if (!(noise >= 0.0)) throw std::invalid_argument("synthesize_data: noise must be non-negative");
    if (days < 1) throw std::invalid_argument("synthesize_data: need at least one day");
    const auto clean = epimodels::daily_admissions(epimodels::simulate_superspreader(truth, days));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    AdmissionsSeries series;
    for (int d = 0; d < days; ++d) {
        double v = clean[static_cast<std::size_t>(d)];
        if (noise > 0.0) v *= 1.0 + noise * normal(rng);
        series.days.push_back(d);
        series.admissions.push_back(std::max(0.0, v));
        series.dates.emplace_back();
    }
    return series;
}

}  // namespace epichaos::calibrate
