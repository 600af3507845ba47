#pragma once

/**
 * @file pce.hpp
 * @brief Tensor-grid polynomial chaos expansions of black-box model outputs.
 *
 * A model with n uncertain inputs is evaluated at the N = q_1 * ... * q_n
 * nodes of a tensor Gaussian grid. Coefficients are the discrete projections
 *
 *     c_{i,alpha} = sum_j w_j f_i(x_j) phi_alpha(xi_j)
 *
 * where phi_alpha is the product of orthonormal polynomials evaluated at the
 * standard (untransformed) nodes xi_j. The index set is the full tensor box
 * with degree q_d - 1 in dimension d, so the projection of any polynomial in
 * that box is exact.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epichaos/distributions.hpp"
#include "epichaos/errors.hpp"
#include "epichaos/orthopoly.hpp"

namespace epichaos::pce {

using MultiIndex = std::vector<unsigned>;

/// Ordered multi-indices. Traversal: ascending total degree, ties in
/// descending lexicographic order, so (0,..,0) comes first and
/// (1,0,0) precedes (0,1,0) precedes (0,0,1).
struct MultiIndexSet {
    std::size_t dim = 0;
    std::vector<MultiIndex> indices;

    std::size_t size() const noexcept { return indices.size(); }

    /// Per-dimension maximum degree occurring in the set.
    std::vector<unsigned> max_degrees() const {
        std::vector<unsigned> out(dim, 0);
        for (const auto& alpha : indices) {
            for (std::size_t d = 0; d < dim; ++d) out[d] = std::max(out[d], alpha[d]);
        }
        return out;
    }

    static MultiIndexSet tensor_box(const std::vector<unsigned>& max_degree) {
        MultiIndexSet set;
        set.dim = max_degree.size();
        if (set.dim == 0) throw std::invalid_argument("tensor_box: dimension must be >= 1");
        MultiIndex alpha(set.dim, 0);
        while (true) {
            set.indices.push_back(alpha);
            std::size_t d = set.dim;
            while (d-- > 0) {
                if (alpha[d] < max_degree[d]) {
                    ++alpha[d];
                    break;
                }
                alpha[d] = 0;
            }
            if (d == static_cast<std::size_t>(-1)) break;
        }
        std::stable_sort(set.indices.begin(), set.indices.end(),
                         [](const MultiIndex& x, const MultiIndex& y) {
                             const auto tx = std::accumulate(x.begin(), x.end(), 0u);
                             const auto ty = std::accumulate(y.begin(), y.end(), 0u);
                             if (tx != ty) return tx < ty;
                             return std::lexicographical_compare(y.begin(), y.end(), x.begin(),
                                                                 x.end());
                         });
        return set;
    }

    static MultiIndexSet tensor_box(std::size_t dim, unsigned max_degree) {
        return tensor_box(std::vector<unsigned>(dim, max_degree));
    }
};

/// Bitmask of the dimensions where alpha is nonzero.
inline unsigned support_mask(const MultiIndex& alpha) {
    unsigned mask = 0;
    for (std::size_t d = 0; d < alpha.size(); ++d) {
        if (alpha[d] != 0) mask |= 1u << d;
    }
    return mask;
}

struct TensorGrid {
    std::vector<distributions::DistributionSpec> specs;
    std::vector<orthopoly::PolynomialFamily> families;
    std::vector<orthopoly::QuadratureRule> rules;

    // Flattened points, last dimension varying fastest.
    std::vector<std::vector<std::size_t>> node_index;   // [N][n] 1-D rule indices
    std::vector<std::vector<double>> standard_nodes;    // [N][n] xi
    std::vector<std::vector<double>> parameter_nodes;   // [N][n] x
    std::vector<double> weights;                        // [N]

    std::size_t dim() const noexcept { return rules.size(); }
    std::size_t size() const noexcept { return weights.size(); }
    std::vector<unsigned> orders() const {
        std::vector<unsigned> out;
        for (const auto& r : rules) out.push_back(static_cast<unsigned>(r.size()));
        return out;
    }
};

inline orthopoly::FamilyKind family_for(const distributions::DistributionSpec& spec) {
    switch (spec.kind) {
        case distributions::DistributionKind::Normal:
        case distributions::DistributionKind::LogNormal:
            return orthopoly::FamilyKind::HermiteProbabilists;
        default:
            throw ConfigError("no polynomial chaos family for a " + to_string(spec.kind) +
                              " input");
    }
}

inline TensorGrid build_tensor_grid(const std::vector<distributions::DistributionSpec>& specs,
                                    const std::vector<unsigned>& orders) {
    if (specs.empty()) throw std::invalid_argument("build_tensor_grid: need at least one input");
    if (orders.size() != specs.size()) {
        throw std::invalid_argument("build_tensor_grid: one quadrature order per input required");
    }
    TensorGrid grid;
    grid.specs = specs;
    const std::size_t n = specs.size();
    std::vector<std::vector<double>> mapped(n);
    std::size_t total = 1;
    for (std::size_t d = 0; d < n; ++d) {
        if (orders[d] < 1) throw std::invalid_argument("build_tensor_grid: order must be >= 1");
        grid.families.push_back(orthopoly::recurrence_coefficients(family_for(specs[d]), orders[d]));
        grid.rules.push_back(orthopoly::gauss_rule(grid.families.back(), orders[d]));
        mapped[d] = distributions::to_parameter_nodes(specs[d], grid.rules.back());
        total *= orders[d];
    }

    grid.node_index.reserve(total);
    grid.standard_nodes.reserve(total);
    grid.parameter_nodes.reserve(total);
    grid.weights.reserve(total);
    std::vector<std::size_t> idx(n, 0);
    for (std::size_t j = 0; j < total; ++j) {
        std::vector<double> xi(n);
        std::vector<double> x(n);
        double w = 1.0;
        for (std::size_t d = 0; d < n; ++d) {
            xi[d] = grid.rules[d].nodes[idx[d]];
            x[d] = mapped[d][idx[d]];
            w *= grid.rules[d].weights[idx[d]];
        }
        grid.node_index.push_back(idx);
        grid.standard_nodes.push_back(std::move(xi));
        grid.parameter_nodes.push_back(std::move(x));
        grid.weights.push_back(w);
        for (std::size_t d = n; d-- > 0;) {
            if (++idx[d] < orders[d]) break;
            idx[d] = 0;
        }
    }
    return grid;
}

inline TensorGrid build_tensor_grid(const std::vector<distributions::DistributionSpec>& specs,
                                    unsigned order) {
    return build_tensor_grid(specs, std::vector<unsigned>(specs.size(), order));
}

struct PceExpansion {
    MultiIndexSet index_set;
    std::vector<orthopoly::PolynomialFamily> families;
    std::vector<std::vector<double>> coefficients;  // [k outputs][|index_set|]
    std::vector<std::string> labels;

    std::size_t outputs() const noexcept { return coefficients.size(); }
};

/// Discrete projection of grid-ordered model outputs (rows = grid points,
/// columns = output quantities) onto the index set.
inline PceExpansion project(const std::vector<std::vector<double>>& model_outputs,
                            const TensorGrid& grid, const MultiIndexSet& index_set,
                            std::vector<std::string> labels = {}) {
    const std::size_t n = grid.dim();
    if (index_set.dim != n) {
        throw std::invalid_argument("project: index set dimension " + std::to_string(index_set.dim) +
                                    " does not match grid dimension " + std::to_string(n));
    }
    if (model_outputs.size() != grid.size()) {
        throw std::invalid_argument("project: expected " + std::to_string(grid.size()) +
                                    " model output rows, got " +
                                    std::to_string(model_outputs.size()));
    }
    const auto max_deg = index_set.max_degrees();
    for (std::size_t d = 0; d < n; ++d) {
        if (max_deg[d] + 1 > grid.rules[d].size()) {
            throw std::invalid_argument("project: degree " + std::to_string(max_deg[d]) +
                                        " in dimension " + std::to_string(d) +
                                        " exceeds quadrature order - 1");
        }
    }
    const std::size_t k = model_outputs.empty() ? 0 : model_outputs.front().size();
    for (const auto& row : model_outputs) {
        if (row.size() != k) throw std::invalid_argument("project: ragged model output matrix");
        for (double v : row) {
            if (!std::isfinite(v)) throw NumericalError("project: non-finite model output");
        }
    }
    if (labels.empty()) {
        for (std::size_t i = 0; i < k; ++i) labels.push_back("y" + std::to_string(i + 1));
    }
    if (labels.size() != k) throw std::invalid_argument("project: one label per output required");

    // table[d][node][degree]
    std::vector<std::vector<std::vector<double>>> table(n);
    for (std::size_t d = 0; d < n; ++d) {
        const auto& rule = grid.rules[d];
        table[d].resize(rule.size());
        for (std::size_t i = 0; i < rule.size(); ++i) {
            table[d][i].resize(max_deg[d] + 1);
            orthopoly::eval_orthonormal_all(grid.families[d], max_deg[d], rule.nodes[i],
                                            table[d][i]);
        }
    }

    PceExpansion out;
    out.index_set = index_set;
    out.families = grid.families;
    out.labels = std::move(labels);
    out.coefficients.assign(k, std::vector<double>(index_set.size(), 0.0));
    std::vector<double> basis(index_set.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto& idx = grid.node_index[j];
        for (std::size_t a = 0; a < index_set.size(); ++a) {
            double value = grid.weights[j];
            const auto& alpha = index_set.indices[a];
            for (std::size_t d = 0; d < n; ++d) value *= table[d][idx[d]][alpha[d]];
            basis[a] = value;
        }
        for (std::size_t i = 0; i < k; ++i) {
            const double f = model_outputs[j][i];
            auto& c = out.coefficients[i];
            for (std::size_t a = 0; a < index_set.size(); ++a) c[a] += f * basis[a];
        }
    }
    return out;
}

/// Projection with the default tensor-box index set of the grid.
inline PceExpansion project(const std::vector<std::vector<double>>& model_outputs,
                            const TensorGrid& grid, std::vector<std::string> labels = {}) {
    std::vector<unsigned> degrees;
    for (const auto& r : grid.rules) degrees.push_back(static_cast<unsigned>(r.size()) - 1);
    return project(model_outputs, grid, MultiIndexSet::tensor_box(degrees), std::move(labels));
}

inline std::size_t zero_index_position(const PceExpansion& expansion) {
    if (expansion.index_set.size() == 0 || support_mask(expansion.index_set.indices[0]) != 0) {
        throw std::invalid_argument("expansion index set must start with the zero multi-index");
    }
    return 0;
}

inline std::vector<double> mean(const PceExpansion& expansion) {
    const std::size_t zero = zero_index_position(expansion);
    std::vector<double> out;
    for (const auto& c : expansion.coefficients) out.push_back(c[zero]);
    return out;
}

inline std::vector<double> variance(const PceExpansion& expansion) {
    zero_index_position(expansion);
    std::vector<double> out;
    for (const auto& c : expansion.coefficients) {
        double v = 0.0;
        for (std::size_t a = 1; a < c.size(); ++a) v += c[a] * c[a];
        out.push_back(v);
    }
    return out;
}

/// C = Q Q^T with the mean column removed from Q.
inline std::vector<std::vector<double>> covariance_matrix(const PceExpansion& expansion) {
    zero_index_position(expansion);
    const std::size_t k = expansion.outputs();
    std::vector<std::vector<double>> cov(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            const auto& ci = expansion.coefficients[i];
            const auto& cj = expansion.coefficients[j];
            double s = 0.0;
            for (std::size_t a = 1; a < ci.size(); ++a) s += ci[a] * cj[a];
            cov[i][j] = s;
            cov[j][i] = s;
        }
    }
    return cov;
}

/// Evaluates the truncated expansion at a point given in standard variables.
inline std::vector<double> evaluate(const PceExpansion& expansion,
                                    const std::vector<double>& standard_point) {
    const std::size_t n = expansion.index_set.dim;
    if (standard_point.size() != n) throw std::invalid_argument("evaluate: point dimension mismatch");
    const auto max_deg = expansion.index_set.max_degrees();
    std::vector<std::vector<double>> phi(n);
    for (std::size_t d = 0; d < n; ++d) {
        phi[d].resize(max_deg[d] + 1);
        orthopoly::eval_orthonormal_all(expansion.families[d], max_deg[d], standard_point[d], phi[d]);
    }
    std::vector<double> out(expansion.outputs(), 0.0);
    for (std::size_t a = 0; a < expansion.index_set.size(); ++a) {
        double basis = 1.0;
        for (std::size_t d = 0; d < n; ++d) basis *= phi[d][expansion.index_set.indices[a][d]];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += expansion.coefficients[i][a] * basis;
    }
    return out;
}

/// {labels, dim, order, indices, coefficients}
inline nlohmann::json to_json(const PceExpansion& expansion) {
    nlohmann::json doc;
    doc["labels"] = expansion.labels;
    doc["dim"] = expansion.index_set.dim;
    std::vector<unsigned> order;
    std::vector<std::string> families;
    for (const auto& f : expansion.families) {
        order.push_back(static_cast<unsigned>(f.size()));
        families.push_back(orthopoly::to_string(f.kind));
    }
    doc["order"] = order;
    doc["families"] = families;
    doc["indices"] = expansion.index_set.indices;
    doc["coefficients"] = expansion.coefficients;
    return doc;
}

inline PceExpansion from_json(const nlohmann::json& doc) {
    PceExpansion out;
    out.labels = doc.at("labels").get<std::vector<std::string>>();
    out.index_set.dim = doc.at("dim").get<std::size_t>();
    out.index_set.indices = doc.at("indices").get<std::vector<MultiIndex>>();
    out.coefficients = doc.at("coefficients").get<std::vector<std::vector<double>>>();
    const auto order = doc.at("order").get<std::vector<unsigned>>();
    std::vector<std::string> families(order.size(), "hermite");
    if (doc.contains("families")) families = doc.at("families").get<std::vector<std::string>>();
    for (std::size_t d = 0; d < order.size(); ++d) {
        const auto kind = families[d] == "legendre" ? orthopoly::FamilyKind::Legendre
                                                    : orthopoly::FamilyKind::HermiteProbabilists;
        out.families.push_back(orthopoly::recurrence_coefficients(kind, order[d]));
    }
    return out;
}

}  // namespace epichaos::pce
