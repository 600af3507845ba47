#pragma once

// Sobol variance decomposition read directly off PCE coefficients.
//
// Every coefficient with alpha != 0 belongs to exactly one subset u of the
// parameters: the support of alpha. The partial variance V[f_u] is the sum of
// c_alpha^2 over the multi-indices with support exactly u, and S_u is that sum
// divided by the total variance.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epichaos/pce.hpp"

namespace epichaos::sobol {

inline constexpr std::size_t kMaxParameters = 16;

struct SobolIndices {
    std::size_t dim = 0;
    // Indexed by subset bitmask; entry 0 (the empty set) is unused and zero.
    std::vector<double> partial_variance;
    std::vector<double> index;
    double total_variance = 0.0;
    bool degenerate = false;

    double operator[](unsigned mask) const { return index.at(mask); }
    std::size_t subset_count() const noexcept { return index.empty() ? 0 : index.size() - 1; }
};

/// Non-empty subsets ordered by size, then by their sorted element lists:
/// {1},{2},{3},{1,2},{1,3},{2,3},{1,2,3}.
inline std::vector<unsigned> subset_order(std::size_t dim) {
    std::vector<unsigned> masks;
    for (unsigned m = 1; m < (1u << dim); ++m) masks.push_back(m);
    std::stable_sort(masks.begin(), masks.end(), [](unsigned x, unsigned y) {
        const int px = std::popcount(x);
        const int py = std::popcount(y);
        if (px != py) return px < py;
        // lowest differing bit set in x means x's element list is smaller
        const unsigned diff = x ^ y;
        return (x & diff & (~diff + 1)) != 0;
    });
    return masks;
}

inline std::string subset_label(unsigned mask, const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t d = 0; d < names.size(); ++d) {
        if (mask & (1u << d)) out += names[d];
    }
    return out;
}

namespace detail {

inline void check_dim(std::size_t dim) {
    if (dim == 0 || dim > kMaxParameters) {
        throw std::invalid_argument("sobol: parameter count must be in 1.." +
                                    std::to_string(kMaxParameters));
    }
}

inline SobolIndices from_partials(std::size_t dim, std::vector<double> partial,
                                  double degenerate_threshold) {
    SobolIndices out;
    out.dim = dim;
    double total = 0.0;
    for (std::size_t m = 1; m < partial.size(); ++m) total += partial[m];
    out.total_variance = total;
    out.partial_variance = std::move(partial);
    out.index.assign(out.partial_variance.size(), 0.0);
    if (!(total > degenerate_threshold)) {
        out.degenerate = true;
        return out;
    }
    for (std::size_t m = 1; m < out.index.size(); ++m) out.index[m] = out.partial_variance[m] / total;
    return out;
}

inline std::vector<double> partial_variances(const pce::PceExpansion& expansion, std::size_t output) {
    const std::size_t dim = expansion.index_set.dim;
    check_dim(dim);
    if (output >= expansion.outputs()) throw std::out_of_range("sobol: output index out of range");
    std::vector<double> partial(std::size_t{1} << dim, 0.0);
    const auto& c = expansion.coefficients[output];
    for (std::size_t a = 0; a < expansion.index_set.size(); ++a) {
        const unsigned mask = pce::support_mask(expansion.index_set.indices[a]);
        if (mask == 0) continue;
        partial[mask] += c[a] * c[a];
    }
    return partial;
}

}  // namespace detail

/// Indices of every non-empty parameter subset for one output. A variance at
/// rounding level relative to the second moment E[f^2] yields all-zero
/// indices with `degenerate` set.
inline SobolIndices sobol_indices(const pce::PceExpansion& expansion, std::size_t output,
                                  double rel_threshold = 1e-24) {
    const std::size_t dim = expansion.index_set.dim;
    auto partial = detail::partial_variances(expansion, output);
    double second_moment = 0.0;
    for (double c : expansion.coefficients[output]) second_moment += c * c;
    return detail::from_partials(dim, std::move(partial), rel_threshold * second_moment);
}

/// Per-output (per time point) indices of a multi-output expansion. Points
/// whose variance is below rel_threshold times the largest variance over the
/// series are flagged degenerate.
inline std::vector<SobolIndices> sobol_time_series(const pce::PceExpansion& expansion,
                                                   double rel_threshold = 1e-14) {
    const std::size_t dim = expansion.index_set.dim;
    std::vector<std::vector<double>> partials;
    double max_variance = 0.0;
    for (std::size_t i = 0; i < expansion.outputs(); ++i) {
        partials.push_back(detail::partial_variances(expansion, i));
        double total = 0.0;
        for (std::size_t m = 1; m < partials.back().size(); ++m) total += partials.back()[m];
        max_variance = std::max(max_variance, total);
    }
    std::vector<SobolIndices> out;
    for (auto& p : partials) {
        out.push_back(detail::from_partials(dim, std::move(p), rel_threshold * max_variance));
    }
    return out;
}

/// Series over separate expansions sharing one index set; `output` selects
/// the quantity within each expansion.
inline std::vector<SobolIndices> sobol_time_series(const std::vector<pce::PceExpansion>& expansions,
                                                   std::size_t output, double rel_threshold = 1e-14) {
    if (expansions.empty()) return {};
    pce::PceExpansion merged;
    merged.index_set = expansions.front().index_set;
    merged.families = expansions.front().families;
    for (const auto& e : expansions) {
        if (e.index_set.dim != merged.index_set.dim || e.index_set.indices != merged.index_set.indices) {
            throw std::invalid_argument("sobol_time_series: expansions use different index sets");
        }
        if (output >= e.outputs()) throw std::out_of_range("sobol_time_series: output out of range");
        merged.coefficients.push_back(e.coefficients[output]);
        merged.labels.push_back(e.labels.at(output));
    }
    return sobol_time_series(merged, rel_threshold);
}

struct FirstAndTotal {
    double first = 0.0;
    double total = 0.0;
};

inline FirstAndTotal first_order_and_total(const SobolIndices& indices, std::size_t parameter) {
    if (parameter >= indices.dim) throw std::out_of_range("first_order_and_total: bad parameter index");
    const unsigned bit = 1u << parameter;
    FirstAndTotal out;
    out.first = indices.index[bit];
    for (unsigned m = 1; m < indices.index.size(); ++m) {
        if (m & bit) out.total += indices.index[m];
    }
    return out;
}

/// CSV with columns t, one per subset label, then a degenerate flag.
inline void write_time_series_csv(std::ostream& os, const std::vector<double>& times,
                                  const std::vector<SobolIndices>& series,
                                  const std::vector<std::string>& names) {
    if (times.size() != series.size()) throw std::invalid_argument("write_time_series_csv: size mismatch");
    const auto order = subset_order(names.size());
    const auto prec = os.precision(std::numeric_limits<double>::max_digits10);
    os << "t";
    for (unsigned m : order) os << ',' << subset_label(m, names);
    os << ",degenerate\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        os << times[i];
        for (unsigned m : order) os << ',' << series[i].index[m];
        os << ',' << (series[i].degenerate ? 1 : 0) << '\n';
    }
    os.precision(prec);
}

inline nlohmann::json to_json(const SobolIndices& indices, const std::vector<std::string>& names) {
    nlohmann::json doc;
    doc["total_variance"] = indices.total_variance;
    doc["degenerate"] = indices.degenerate;
    nlohmann::json subsets = nlohmann::json::object();
    for (unsigned m : subset_order(indices.dim)) subsets[subset_label(m, names)] = indices.index[m];
    doc["indices"] = subsets;
    nlohmann::json totals = nlohmann::json::object();
    for (std::size_t d = 0; d < indices.dim; ++d) {
        const auto ft = first_order_and_total(indices, d);
        totals[names[d]] = {{"first", ft.first}, {"total", ft.total}};
    }
    doc["first_and_total"] = totals;
    return doc;
}

}  // namespace epichaos::sobol
