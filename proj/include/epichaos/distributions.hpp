#pragma once

// One-dimensional input distributions, their mapping from standard quadrature
// nodes into parameter space, and moment-matched output fits.

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "epichaos/errors.hpp"
#include "epichaos/orthopoly.hpp"

namespace epichaos::distributions {

enum class DistributionKind { Normal, LogNormal, TruncatedNormal };

inline std::string to_string(DistributionKind kind) {
    switch (kind) {
        case DistributionKind::Normal: return "normal";
        case DistributionKind::LogNormal: return "lognormal";
        case DistributionKind::TruncatedNormal: return "truncated_normal";
    }
    return "unknown";
}

inline DistributionKind parse_kind(const std::string& text) {
    if (text == "normal") return DistributionKind::Normal;
    if (text == "lognormal") return DistributionKind::LogNormal;
    if (text == "truncated_normal") return DistributionKind::TruncatedNormal;
    throw ConfigError("unknown distribution kind '" + text +
                      "' (expected normal, lognormal or truncated_normal)");
}

/// Mean and variance are moments of the variable itself. For a truncated
/// normal they describe the parent (untruncated) normal.
struct DistributionSpec {
    DistributionKind kind = DistributionKind::Normal;
    double mean = 0.0;
    double variance = 1.0;
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();

    void validate() const {
        if (!(variance > 0.0) || !std::isfinite(variance)) {
            throw ConfigError("distribution variance must be positive and finite");
        }
        if (!std::isfinite(mean)) {
            throw ConfigError("distribution mean must be finite");
        }
        if (kind == DistributionKind::LogNormal && !(mean > 0.0)) {
            throw ConfigError("log-normal distribution requires a positive mean");
        }
        if (kind == DistributionKind::TruncatedNormal && !(lower < upper)) {
            throw ConfigError("truncated normal requires lower < upper");
        }
    }

    double stddev() const { return std::sqrt(variance); }

    static DistributionSpec normal(double mean, double variance) {
        DistributionSpec spec{DistributionKind::Normal, mean, variance};
        spec.validate();
        return spec;
    }

    static DistributionSpec lognormal(double mean, double variance) {
        DistributionSpec spec{DistributionKind::LogNormal, mean, variance};
        spec.validate();
        return spec;
    }

    static DistributionSpec truncated_normal(double mean, double variance, double lower = 0.0,
                                             double upper = std::numeric_limits<double>::infinity()) {
        DistributionSpec spec{DistributionKind::TruncatedNormal, mean, variance, lower, upper};
        spec.validate();
        return spec;
    }
};

/// Parameters (m, s) of the normal variable underlying a log-normal.
struct UnderlyingNormal {
    double m = 0.0;
    double s = 0.0;
};

inline UnderlyingNormal lognormal_underlying(double mean, double variance) {
    // log1p keeps s accurate when variance / mean^2 is tiny.
    const double s2 = std::log1p(variance / (mean * mean));
    return {std::log(mean) - 0.5 * s2, std::sqrt(s2)};
}

/// Maps standard-normal nodes xi_i into parameter space. Weights are unchanged.
inline std::vector<double> to_parameter_nodes(const DistributionSpec& spec,
                                              const orthopoly::QuadratureRule& rule) {
    spec.validate();
    if (spec.kind == DistributionKind::TruncatedNormal) {
        throw ConfigError("to_parameter_nodes: truncated normal has no Gaussian rule mapping");
    }
    if (rule.kind != orthopoly::FamilyKind::HermiteProbabilists) {
        throw ConfigError("to_parameter_nodes: " + to_string(spec.kind) +
                          " parameters need a Hermite (standard normal) rule, got " +
                          orthopoly::to_string(rule.kind));
    }
    std::vector<double> out(rule.size());
    if (spec.kind == DistributionKind::Normal) {
        const double sigma = spec.stddev();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = spec.mean + sigma * rule.nodes[i];
    } else {
        const auto [m, s] = lognormal_underlying(spec.mean, spec.variance);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(m + s * rule.nodes[i]);
    }
    return out;
}

/// Log-normal whose mean and variance equal the inputs.
inline DistributionSpec fit_lognormal_from_moments(double mean, double variance) {
    if (!(mean > 0.0)) {
        throw NumericalError("fit_lognormal_from_moments: mean " + std::to_string(mean) +
                             " is not positive; quantity is not representable as log-normal");
    }
    if (!(variance > 0.0)) {
        throw NumericalError("fit_lognormal_from_moments: variance must be positive");
    }
    return DistributionSpec::lognormal(mean, variance);
}

/// Density of a log-normal spec; used for plot-ready output curves.
inline double lognormal_pdf(const DistributionSpec& spec, double x) {
    if (!(x > 0.0)) return 0.0;
    const auto [m, s] = lognormal_underlying(spec.mean, spec.variance);
    const double z = (std::log(x) - m) / s;
    return std::exp(-0.5 * z * z) / (x * s * std::sqrt(2.0 * M_PI));
}

/// Central `coverage` interval of a normal restricted to [lower, upper]:
/// the returned endpoints leave (1 - coverage) / 2 truncated mass in each tail.
inline std::pair<double, double> truncated_normal_interval(const DistributionSpec& spec,
                                                           double coverage) {
    if (!(coverage > 0.0 && coverage < 1.0)) {
        throw std::invalid_argument("truncated_normal_interval: coverage must be in (0, 1)");
    }
    if (spec.kind != DistributionKind::TruncatedNormal) {
        throw std::invalid_argument("truncated_normal_interval: spec must be a truncated normal");
    }
    spec.validate();

    const boost::math::normal standard;
    const double sigma = spec.stddev();
    double lo = (spec.lower - spec.mean) / sigma;
    double hi = (spec.upper - spec.mean) / sigma;

    // Work in the lower tail for accuracy: reflect when the window sits above the mean.
    const bool reflect = lo > 0.0;
    if (reflect) {
        std::swap(lo, hi);
        lo = -lo;
        hi = -hi;
    }
    const double cdf_lo = std::isinf(lo) ? 0.0 : boost::math::cdf(standard, lo);
    const double cdf_hi = std::isinf(hi) ? 1.0 : boost::math::cdf(standard, hi);
    const double mass = cdf_hi - cdf_lo;
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw NumericalError("truncated_normal_interval: no probability mass inside the bounds");
    }
    const double tail = 0.5 * (1.0 - coverage);
    auto inverse = [&](double q) {
        const double target = cdf_lo + q * mass;
        if (!(target > 0.0 && target < 1.0)) {
            throw NumericalError("truncated_normal_interval: coverage mass unreachable within bounds");
        }
        return boost::math::quantile(standard, target);
    };
    double z_lo = inverse(tail);
    double z_hi = inverse(1.0 - tail);
    if (reflect) {
        std::swap(z_lo, z_hi);
        z_lo = -z_lo;
        z_hi = -z_hi;
    }
    return {spec.mean + sigma * z_lo, spec.mean + sigma * z_hi};
}

}  // namespace epichaos::distributions
