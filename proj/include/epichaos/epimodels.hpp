#pragma once

/**
 * @file epimodels.hpp
 * @brief SEIR model and the superspreader restriction model, with the
 *        derived observables used for calibration and uncertainty analysis.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "epichaos/errors.hpp"
#include "epichaos/ode.hpp"

namespace epichaos::epimodels {

using ode::Trajectory;

inline constexpr double kDanishPopulation = 5.8e6;

// ---------------------------------------------------------------------------
// SEIR

/// Rates in 1/day, population in persons.
struct SeirParams {
    double beta = 0.0;
    double sigma = 0.0;
    double gamma = 0.0;
    double population = kDanishPopulation;

    /// sigma = 1/tau_inc, gamma = 1/tau_inf, beta = R0 * gamma.
    static SeirParams from_durations(double r0, double tau_inc, double tau_inf,
                                     double population = kDanishPopulation) {
        SeirParams p;
        p.sigma = 1.0 / tau_inc;
        p.gamma = 1.0 / tau_inf;
        p.beta = r0 * p.gamma;
        p.population = population;
        p.validate();
        return p;
    }

    double r0() const { return beta / gamma; }

    void validate() const {
        for (double r : {beta, sigma, gamma}) {
            if (!(r > 0.0 && std::isfinite(r))) throw ConfigError("SEIR rates must be positive and finite");
        }
        if (!(population > 0.0)) throw ConfigError("SEIR population must be positive");
    }
};

using SeirState = std::array<double, 4>;  // S, E, I, R

inline SeirState seir_rhs(const SeirState& y, double /*t*/, const SeirParams& p) {
    const double infection = p.beta * y[2] * y[0] / p.population;
    const double onset = p.sigma * y[1];
    const double recovery = p.gamma * y[2];
    return {-infection, infection - onset, onset - recovery, recovery};
}

inline ode::IntegratorOptions default_options(double population) {
    ode::IntegratorOptions opt;
    opt.rtol = 1e-8;
    opt.atol = 1e-10 * population;
    return opt;
}

inline Trajectory simulate_seir(const SeirParams& params, const SeirState& initial, double horizon,
                                ode::IntegratorOptions options) {
    params.validate();
    auto traj = ode::integrate<4>([&](double t, const SeirState& y) { return seir_rhs(y, t, params); },
                                  initial, 0.0, horizon, options);
    traj.state_names = {"S", "E", "I", "R"};
    return traj;
}

inline Trajectory simulate_seir(const SeirParams& params, const SeirState& initial, double horizon) {
    return simulate_seir(params, initial, horizon, default_options(params.population));
}

// ---------------------------------------------------------------------------
// Peak location

/// Discrete maximum of a compartment refined by cubic Hermite interpolation on
/// the two neighbouring sample intervals. Slopes come from the stored
/// right-hand side when available, otherwise from central differences.
inline std::pair<double, double> find_peak(const Trajectory& traj, std::size_t compartment) {
    const std::size_t n = traj.size();
    if (n < 3) throw NoPeakError(NoPeakError::Reason::HorizonTooShort, "find_peak: fewer than three samples");
    const auto values = traj.component(compartment);
    const auto argmax = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
    if (argmax == 0) {
        throw NoPeakError(NoPeakError::Reason::NeverTakesOff,
                          "find_peak: compartment never rises above its initial value (epidemic does not take off)");
    }
    if (argmax == n - 1) {
        throw NoPeakError(NoPeakError::Reason::HorizonTooShort,
                          "find_peak: compartment still rising at t = " + std::to_string(traj.times.back()) +
                              " (time horizon too short)");
    }
    const bool have_slopes = traj.derivatives.size() == n;
    auto slope = [&](std::size_t i) {
        if (have_slopes) return traj.derivatives[i][compartment];
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = std::min(i + 1, n - 1);
        return (values[hi] - values[lo]) / (traj.times[hi] - traj.times[lo]);
    };

    double best_t = traj.times[argmax];
    double best_v = values[argmax];
    for (std::size_t left : {argmax - 1, argmax}) {
        const std::size_t right = left + 1;
        const double h = traj.times[right] - traj.times[left];
        const double p0 = values[left], p1 = values[right];
        const double m0 = slope(left) * h, m1 = slope(right) * h;
        // p(s) = h00 p0 + h10 m0 + h01 p1 + h11 m1; p'(s) = A s^2 + B s + C
        const double qa = 6.0 * p0 + 3.0 * m0 - 6.0 * p1 + 3.0 * m1;
        const double qb = -6.0 * p0 - 4.0 * m0 + 6.0 * p1 - 2.0 * m1;
        const double qc = m0;
        auto eval = [&](double s) {
            const double s2 = s * s, s3 = s2 * s;
            return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
        };
        std::vector<double> roots;
        if (std::abs(qa) < 1e-300) {
            if (qb != 0.0) roots.push_back(-qc / qb);
        } else {
            const double disc = qb * qb - 4.0 * qa * qc;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                const double q = -0.5 * (qb + std::copysign(sq, qb));
                if (q != 0.0) roots.push_back(qc / q);
                roots.push_back(q / qa);
            }
        }
        for (double s : roots) {
            if (s >= 0.0 && s <= 1.0) {
                const double v = eval(s);
                if (v > best_v) {
                    best_v = v;
                    best_t = traj.times[left] + s * h;
                }
            }
        }
    }
    return {best_t, best_v};
}

// ---------------------------------------------------------------------------
// Superspreader model

/// One row of the age-group table: population share, hospitalization
/// probability and critical-care probability, all as fractions.
struct AgeGroupRow {
    double share = 0.0;
    double hospitalization = 0.0;
    double critical = 0.0;
};

/// Nine ten-year age groups (0-9 .. 80+). The 80+ share includes a 0.1
/// point correction so shares sum to one, and the 0-9 hospitalization
/// probability is 0.001 % instead of zero.
inline std::vector<AgeGroupRow> default_age_table() {
    const double share[] = {10.9, 11.9, 13.3, 11.7, 13.6, 13.6, 11.7, 8.9, 4.4};
    const double hosp[] = {0.001, 0.013, 0.37, 1.1, 1.4, 2.7, 3.9, 5.5, 5.5};
    const double crit[] = {5, 5, 5, 5, 6.3, 12.2, 27.4, 43.2, 70.9};
    std::vector<AgeGroupRow> rows;
    for (int i = 0; i < 9; ++i) rows.push_back({share[i] / 100.0, hosp[i] / 100.0, crit[i] / 100.0});
    return rows;
}

struct HospitalizationSplit {
    double z1 = 0.0;  // P(W -> H)
    double z2 = 0.0;  // P(H -> C)
};

/// z1 = sum d_i h_i, z2 = sum (d_i h_i / z1) kappa_i.
inline HospitalizationSplit hospitalization_split(const std::vector<AgeGroupRow>& table) {
    if (table.empty()) throw ConfigError("hospitalization_split: empty table");
    double share_sum = 0.0;
    for (const auto& r : table) {
        if (r.share < 0.0 || r.hospitalization < 0.0 || r.critical < 0.0) {
            throw ConfigError("hospitalization_split: negative table entry");
        }
        share_sum += r.share;
    }
    if (std::abs(share_sum - 1.0) > 1e-6) {
        throw ConfigError("hospitalization_split: population shares sum to " + std::to_string(share_sum) +
                          ", expected 1");
    }
    HospitalizationSplit out;
    for (const auto& r : table) out.z1 += r.share * r.hospitalization;
    if (!(out.z1 > 0.0)) throw NumericalError("hospitalization_split: z1 is zero");
    for (const auto& r : table) out.z2 += r.share * r.hospitalization / out.z1 * r.critical;
    return out;
}

/// Piecewise-constant infectivity: a fraction p of the population infects
/// at rate s*A, the rest at rate s. A is fixed by requiring the top fraction p
/// to cause the fraction C_p of all infections.
struct InfectivityProfile {
    double p = 0.1;
    double contribution = 0.8;  // C_p
    double s = 0.602;

    double multiplier() const { return contribution * (1.0 - p) / (p * (1.0 - contribution)); }

    /// Mean infectivity without any cap: s (pA + 1 - p).
    double unrestricted_mean() const { return s * (p * multiplier() + 1.0 - p); }

    void validate() const {
        if (!(p > 0.0 && p < 1.0)) throw ConfigError("infectivity profile: p must be in (0, 1)");
        if (!(contribution > p && contribution < 1.0)) {
            throw ConfigError("infectivity profile: C_p must satisfy p < C_p < 1");
        }
        if (!(s > 0.0)) throw ConfigError("infectivity profile: s must be positive");
    }
};

/// Population-averaged infectivity under a cap; nullopt means no cap.
inline double effective_beta(const InfectivityProfile& profile, std::optional<double> cap) {
    if (!cap) return profile.unrestricted_mean();
    const double a = profile.multiplier();
    return profile.p * std::min(profile.s * a, *cap) + (1.0 - profile.p) * std::min(profile.s, *cap);
}

/// c(t): `initial_level` up to t1, then c1, c2, c3 after t1, t2, t3.
/// An empty `initial_level` leaves infectivity uncapped before t1.
struct RestrictionSchedule {
    double t1 = 16.0, t2 = 46.0, t3 = 86.0;
    double c1 = 0.130, c2 = 0.187, c3 = 0.188;
    std::optional<double> initial_level = 1.0;

    std::optional<double> cap(double t) const {
        if (t <= t1) return initial_level;
        if (t <= t2) return c1;
        if (t <= t3) return c2;
        return c3;
    }

    /// Value of c(t) for plotting; the uncapped phase is shown as 1.
    double reported_level(double t) const { return cap(t).value_or(1.0); }

    std::vector<double> breakpoints() const { return {t1, t2, t3}; }

    void validate() const {
        if (!(t1 < t2 && t2 < t3)) throw ConfigError("restriction schedule: need t1 < t2 < t3");
        if (!(c1 > 0.0 && c2 > 0.0 && c3 > 0.0)) throw ConfigError("restriction levels must be positive");
        if (initial_level && !(*initial_level > 0.0)) throw ConfigError("initial restriction level must be positive");
    }
};

struct SuperspreaderParams {
    double sigma = 1.0 / 1.2;
    double gamma1 = 1.0 / 1.2;
    double gamma2 = 1.0 / 3.0;
    double gamma3 = 1.0 / 2.0;
    double alpha = 1.0 / 5.0;
    double zeta = 1.0 / 12.0;
    double z1 = 0.0;
    double z2 = 0.0;
    InfectivityProfile profile;
    RestrictionSchedule schedule;
    double population = kDanishPopulation;
    double initial_infected = 473.572;

    /// Published rates, the age-table split, (p, C_p) = (0.1, 0.8) and the
    /// fitted values s = 0.602, I0 = 473.572, c = (0.130, 0.187, 0.188).
    static SuperspreaderParams defaults() {
        SuperspreaderParams p;
        const auto split = hospitalization_split(default_age_table());
        p.z1 = split.z1;
        p.z2 = split.z2;
        return p;
    }

    void validate() const {
        for (double r : {sigma, gamma1, gamma2, gamma3, alpha, zeta}) {
            if (!(r > 0.0)) throw ConfigError("superspreader rates must be positive");
        }
        if (!(z1 > 0.0 && z1 < 1.0 && z2 > 0.0 && z2 < 1.0)) {
            throw ConfigError("branch probabilities z1, z2 must be in (0, 1)");
        }
        if (!(population > 0.0)) throw ConfigError("population must be positive");
        if (!(initial_infected >= 0.0)) throw ConfigError("initial infected must be non-negative");
        profile.validate();
        schedule.validate();
    }
};

/// S, E, I1, I2, W, H, C, R, cumulative admissions.
using SuperspreaderState = std::array<double, 9>;

enum SuperspreaderIndex : std::size_t { kS = 0, kE, kI1, kI2, kW, kH, kC, kR, kAdmitted };

inline const std::vector<std::string>& superspreader_state_names() {
    static const std::vector<std::string> names = {"S", "E", "I1", "I2", "W", "H", "C", "R", "H_cum"};
    return names;
}

inline SuperspreaderState superspreader_rhs(const SuperspreaderState& y, double t,
                                            const SuperspreaderParams& p) {
    const double beta = effective_beta(p.profile, p.schedule.cap(t));
    const double infection = beta * (y[kI1] + y[kI2]) * y[kS] / p.population;
    const double onset = p.sigma * y[kE];
    const double progression = p.gamma1 * y[kI1];
    const double isolation = p.gamma2 * y[kI2];
    const double leave_wait = p.gamma3 * y[kW];
    const double admission = p.z1 * leave_wait;
    const double leave_hospital = p.alpha * y[kH];
    const double to_critical = p.z2 * leave_hospital;
    const double leave_critical = p.zeta * y[kC];
    return {
        -infection,
        infection - onset,
        onset - progression,
        progression - isolation,
        isolation - leave_wait,
        admission - leave_hospital,
        to_critical - leave_critical,
        (leave_wait - admission) + (leave_hospital - to_critical) + leave_critical,
        admission,
    };
}

/// S = N - I0, E = I0/2, I1 = I0/3, I2 = I0/6, everything else zero.
inline SuperspreaderState initial_state(const SuperspreaderParams& p) {
    SuperspreaderState y{};
    const double i0 = p.initial_infected;
    y[kE] = i0 / 2.0;
    y[kI1] = i0 / 3.0;
    y[kI2] = i0 - y[kE] - y[kI1];
    y[kS] = p.population - i0;
    return y;
}

inline Trajectory simulate_superspreader(const SuperspreaderParams& params, double horizon,
                                         ode::IntegratorOptions options) {
    params.validate();
    options.breakpoints = params.schedule.breakpoints();
    auto traj = ode::integrate<9>(
        [&](double t, const SuperspreaderState& y) { return superspreader_rhs(y, t, params); },
        initial_state(params), 0.0, horizon, options);
    traj.state_names = superspreader_state_names();
    auto& beta = traj.observables["beta_bar"];
    auto& level = traj.observables["restriction"];
    for (double t : traj.times) {
        beta.push_back(effective_beta(params.profile, params.schedule.cap(t)));
        level.push_back(params.schedule.reported_level(t));
    }
    return traj;
}

inline Trajectory simulate_superspreader(const SuperspreaderParams& params, double horizon) {
    return simulate_superspreader(params, horizon, default_options(params.population));
}

/// First differences of a cumulative series sampled at integer days:
/// entry d is the increase over [t0 + d, t0 + d + 1].
inline std::vector<double> daily_increments(const Trajectory& traj, std::size_t cumulative_index) {
    if (traj.size() == 0) return {};
    const double t0 = traj.times.front();
    const auto days = static_cast<std::size_t>(std::floor(traj.times.back()) - std::floor(t0));
    std::vector<double> out;
    out.reserve(days);
    double prev = traj.states[traj.sample_at(t0)][cumulative_index];
    for (std::size_t d = 1; d <= days; ++d) {
        const double cur = traj.states[traj.sample_at(t0 + static_cast<double>(d))][cumulative_index];
        out.push_back(cur - prev);
        prev = cur;
    }
    return out;
}

/// Newly admitted hospitalizations per day from the cumulative-admissions state.
inline std::vector<double> daily_admissions(const Trajectory& traj) {
    if (traj.dimension() != superspreader_state_names().size()) {
        throw std::invalid_argument("daily_admissions: trajectory has no cumulative-admissions state");
    }
    return daily_increments(traj, kAdmitted);
}

}  // namespace epichaos::epimodels
