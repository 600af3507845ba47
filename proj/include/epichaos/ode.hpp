#pragma once

/**
 * @file ode.hpp
 * @brief Adaptive Dormand-Prince 5(4) integrator with continuous output.
 *
 * The integrator samples the solution on a uniform output grid
 * (t0, t0 + step, ...) using the fourth-order continuous extension, so that
 * samples land exactly on integer days for step = 1. Right-hand sides with
 * known discontinuities in t are handled by passing the discontinuity times
 * as breakpoints: integration stops there and restarts with a fresh stage.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epichaos/errors.hpp"

namespace epichaos::ode {

struct IntegratorOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double output_step = 1.0;
    /// Disables error control and takes steps of this size (convergence studies).
    std::optional<double> fixed_step;
    /// Times in (t0, t1) where the right-hand side is discontinuous.
    std::vector<double> breakpoints;
    std::size_t max_steps = 5'000'000;
};

/// Dense time-indexed states. `derivatives` holds the right-hand side at each
/// sample, which lets peak refinement use cubic Hermite interpolation.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> derivatives;
    std::vector<std::string> state_names;
    std::map<std::string, std::vector<double>> observables;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    std::size_t size() const noexcept { return times.size(); }
    std::size_t dimension() const noexcept { return states.empty() ? 0 : states.front().size(); }

    std::vector<double> component(std::size_t index) const {
        std::vector<double> out;
        out.reserve(states.size());
        for (const auto& s : states) out.push_back(s.at(index));
        return out;
    }

    std::size_t index_of(const std::string& name) const {
        const auto it = std::find(state_names.begin(), state_names.end(), name);
        if (it == state_names.end()) throw std::out_of_range("trajectory has no state '" + name + "'");
        return static_cast<std::size_t>(it - state_names.begin());
    }

    /// Sample index whose time equals t (within 1e-9); throws if t is not sampled.
    std::size_t sample_at(double t) const {
        const auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9);
        if (it == times.end() || std::abs(*it - t) > 1e-9) {
            throw std::out_of_range("trajectory has no sample at t = " + std::to_string(t));
        }
        return static_cast<std::size_t>(it - times.begin());
    }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension (Hairer, Norsett & Wanner).
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

template <std::size_t M>
bool all_finite(const std::array<double, M>& y) {
    return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace detail

/// Integrates dy/dt = rhs(t, y) from t0 to t1. `rhs` maps
/// (double, const std::array<double, M>&) to std::array<double, M>.
template <std::size_t M, class Rhs>
Trajectory integrate(Rhs&& rhs, const std::array<double, M>& initial, double t0, double t1,
                     const IntegratorOptions& options = {}) {
    using State = std::array<double, M>;
    using namespace detail;

    if (!(t1 > t0)) throw std::invalid_argument("integrate: t1 must exceed t0");
    if (!(options.rtol > 0.0) || !(options.atol > 0.0)) {
        throw std::invalid_argument("integrate: tolerances must be positive");
    }
    if (!(options.output_step > 0.0)) throw std::invalid_argument("integrate: output step must be positive");
    if (options.fixed_step && !(*options.fixed_step > 0.0)) {
        throw std::invalid_argument("integrate: fixed step must be positive");
    }
    if (!all_finite(initial)) throw IntegrationError("integrate: non-finite initial state");

    Trajectory traj;
    const auto n_samples = static_cast<std::size_t>(std::floor((t1 - t0) / options.output_step + 1e-9)) + 1;
    std::vector<double> sample_times;
    for (std::size_t k = 0; k < n_samples; ++k) {
        sample_times.push_back(t0 + static_cast<double>(k) * options.output_step);
    }
    if (t1 - sample_times.back() > 1e-9) sample_times.push_back(t1);
    std::size_t next_sample = 0;

    auto record = [&](double t, const State& y, const State& dy) {
        traj.times.push_back(t);
        traj.states.emplace_back(y.begin(), y.end());
        traj.derivatives.emplace_back(dy.begin(), dy.end());
    };

    std::vector<double> segment_ends;
    for (double b : options.breakpoints) {
        if (b > t0 && b < t1) segment_ends.push_back(b);
    }
    std::sort(segment_ends.begin(), segment_ends.end());
    segment_ends.erase(std::unique(segment_ends.begin(), segment_ends.end()), segment_ends.end());
    segment_ends.push_back(t1);

    auto scaled_norm = [&](const State& v, const State& ya, const State& yb) {
        double acc = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            const double sc = options.atol + options.rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
            const double r = v[i] / sc;
            acc += r * r;
        }
        return std::sqrt(acc / static_cast<double>(M));
    };

    State y = initial;
    double t = t0;
    double h = 0.0;
    std::size_t steps = 0;

    for (double seg_end : segment_ends) {
        // Stage times are clamped one ulp inside the segment so a right-hand
        // side with a jump at a breakpoint sees the value belonging here.
        const double lo = std::nextafter(t, seg_end);
        const double hi = std::nextafter(seg_end, t);
        auto f = [&](double tt, const State& yy) { return rhs(std::clamp(tt, lo, hi), yy); };
        State k1 = f(t, y);
        if (!all_finite(k1)) throw IntegrationError("integrate: non-finite derivative at t = " + std::to_string(t));

        if (next_sample < sample_times.size() && std::abs(sample_times[next_sample] - t) <= 1e-9) {
            record(sample_times[next_sample], y, k1);
            ++next_sample;
        }

        if (options.fixed_step) {
            h = *options.fixed_step;
        } else if (h == 0.0) {
            // Initial step heuristic (Hairer, Norsett & Wanner, II.4).
            const State zero{};
            const double d0 = scaled_norm(y, y, zero);
            const double d1n = scaled_norm(k1, y, zero);
            double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
            h0 = std::min(h0, seg_end - t);
            State y1;
            for (std::size_t i = 0; i < M; ++i) y1[i] = y[i] + h0 * k1[i];
            const State f1 = f(t + h0, y1);
            State df;
            for (std::size_t i = 0; i < M; ++i) df[i] = f1[i] - k1[i];
            const double d2 = scaled_norm(df, y, zero) / h0;
            const double dmax = std::max(d1n, d2);
            const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
            h = std::min(100.0 * h0, h1);
        }

        while (seg_end - t > 1e-12 * std::max(1.0, std::abs(seg_end))) {
            if (++steps > options.max_steps) {
                throw IntegrationError("integrate: step budget exhausted at t = " + std::to_string(t));
            }
            const bool last = t + h >= seg_end - 1e-12 * std::max(1.0, std::abs(seg_end));
            const double hs = last ? seg_end - t : h;
            const double min_h = 1e-12 * std::max(1.0, std::abs(t));
            if (hs < min_h && !last) {
                throw IntegrationError("integrate: step size underflow at t = " + std::to_string(t) +
                                       " (stiff or blowing-up system)");
            }

            State tmp, k2, k3, k4, k5, k6, k7, y_new;
            for (std::size_t i = 0; i < M; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
            k2 = f(t + c2 * hs, tmp);
            for (std::size_t i = 0; i < M; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
            k3 = f(t + c3 * hs, tmp);
            for (std::size_t i = 0; i < M; ++i) tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            k4 = f(t + c4 * hs, tmp);
            for (std::size_t i = 0; i < M; ++i)
                tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            k5 = f(t + c5 * hs, tmp);
            for (std::size_t i = 0; i < M; ++i)
                tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            k6 = f(t + hs, tmp);
            for (std::size_t i = 0; i < M; ++i)
                y_new[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            k7 = f(t + hs, y_new);

            double err = 0.0;
            if (!options.fixed_step) {
                State e;
                for (std::size_t i = 0; i < M; ++i) {
                    e[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                }
                err = scaled_norm(e, y, y_new);
                if (!std::isfinite(err) || !all_finite(y_new)) err = 1e10;
                if (err > 1.0) {
                    ++traj.rejected_steps;
                    h = hs * std::max(0.2, 0.9 * std::pow(err, -0.2));
                    if (h < min_h) {
                        throw IntegrationError("integrate: step size underflow at t = " + std::to_string(t) +
                                               " (stiff or blowing-up system)");
                    }
                    continue;
                }
            } else if (!all_finite(y_new)) {
                throw IntegrationError("integrate: non-finite state at t = " + std::to_string(t + hs));
            }

            ++traj.accepted_steps;
            const double t_new = last ? seg_end : t + hs;

            // Samples strictly inside (t, t_new) come from the continuous extension.
            if (next_sample < sample_times.size() && sample_times[next_sample] < t_new - 1e-9) {
                State r2, r3, r4, r5;
                for (std::size_t i = 0; i < M; ++i) {
                    r2[i] = y_new[i] - y[i];
                    r3[i] = hs * k1[i] - r2[i];
                    r4[i] = r2[i] - hs * k7[i] - r3[i];
                    r5[i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
                }
                while (next_sample < sample_times.size() && sample_times[next_sample] < t_new - 1e-9) {
                    const double theta = (sample_times[next_sample] - t) / hs;
                    const double theta1 = 1.0 - theta;
                    State ys;
                    for (std::size_t i = 0; i < M; ++i) {
                        ys[i] = y[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
                    }
                    record(sample_times[next_sample], ys, f(sample_times[next_sample], ys));
                    ++next_sample;
                }
            }

            y = y_new;
            t = t_new;
            k1 = k7;
            if (next_sample < sample_times.size() && std::abs(sample_times[next_sample] - t) <= 1e-9) {
                record(sample_times[next_sample], y, k1);
                ++next_sample;
            }

            if (!options.fixed_step) {
                const double fac = err == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 10.0);
                if (!last) h = hs * fac;
                else h = std::max(h, hs * fac);
            }
        }
        t = seg_end;
    }
    return traj;
}

}  // namespace epichaos::ode
