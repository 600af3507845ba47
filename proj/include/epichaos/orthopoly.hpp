#pragma once

/**
 * @file orthopoly.hpp
 * @brief Orthonormal polynomial families and Gaussian quadrature rules for
 *        probability measures.
 *
 * Families are described by their three-term recurrence data
 *
 *     sqrt(b_{k+1}) phi_{k+1}(x) = (x - a_k) phi_k(x) - sqrt(b_k) phi_{k-1}(x)
 *
 * with phi_{-1} = 0 and phi_0 = 1. The entry b_0 stores the total mass of the
 * measure, which is 1 for every family here since all measures are
 * probability measures.
 *
 * Rules are computed from the symmetric tridiagonal Jacobi matrix: nodes are
 * its eigenvalues, weights are the Christoffel numbers 1 / sum_k phi_k(x_i)^2
 * evaluated at those nodes. Weights are normalized to sum to one.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "epichaos/errors.hpp"

namespace epichaos::orthopoly {

enum class FamilyKind {
    HermiteProbabilists,  // standard normal measure
    Legendre              // uniform probability measure on [-1, 1]
};

inline std::string to_string(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::HermiteProbabilists: return "hermite";
        case FamilyKind::Legendre: return "legendre";
    }
    return "unknown";
}

struct PolynomialFamily {
    FamilyKind kind = FamilyKind::HermiteProbabilists;
    std::vector<double> a;  // a_0 .. a_{n-1}
    std::vector<double> b;  // b_0 (measure mass) .. b_{n-1}

    std::size_t size() const noexcept { return a.size(); }
};

struct QuadratureRule {
    FamilyKind kind = FamilyKind::HermiteProbabilists;
    std::vector<double> nodes;    // strictly increasing
    std::vector<double> weights;  // positive, sum to 1

    std::size_t size() const noexcept { return nodes.size(); }
};

/// Recurrence coefficients k = 0..n-1 of the requested family.
inline PolynomialFamily recurrence_coefficients(FamilyKind kind, std::size_t n) {
    if (n < 1) {
        throw std::invalid_argument("recurrence_coefficients: n must be >= 1");
    }
    PolynomialFamily family;
    family.kind = kind;
    family.a.assign(n, 0.0);
    family.b.assign(n, 0.0);
    family.b[0] = 1.0;
    switch (kind) {
        case FamilyKind::HermiteProbabilists:
            for (std::size_t k = 1; k < n; ++k) {
                family.b[k] = static_cast<double>(k);
            }
            break;
        case FamilyKind::Legendre:
            for (std::size_t k = 1; k < n; ++k) {
                const double kk = static_cast<double>(k) * static_cast<double>(k);
                family.b[k] = kk / (4.0 * kk - 1.0);
            }
            break;
        default:
            throw std::invalid_argument("recurrence_coefficients: unsupported family kind");
    }
    return family;
}

/// Writes phi_0(x) .. phi_d(x) into `out` (size >= d + 1).
inline void eval_orthonormal_all(const PolynomialFamily& family, unsigned degree, double x,
                                 std::span<double> out) {
    if (family.size() < static_cast<std::size_t>(degree) + 1) {
        throw std::out_of_range("eval_orthonormal: family has only " +
                                std::to_string(family.size()) + " recurrence terms, degree " +
                                std::to_string(degree) + " requested");
    }
    if (out.size() < static_cast<std::size_t>(degree) + 1) {
        throw std::out_of_range("eval_orthonormal: output span too small");
    }
    double prev = 0.0;
    double cur = 1.0 / std::sqrt(family.b[0]);
    out[0] = cur;
    for (unsigned k = 0; k < degree; ++k) {
        const double next =
            ((x - family.a[k]) * cur - (k == 0 ? 0.0 : std::sqrt(family.b[k]) * prev)) /
            std::sqrt(family.b[k + 1]);
        prev = cur;
        cur = next;
        out[k + 1] = cur;
    }
}

inline double eval_orthonormal(const PolynomialFamily& family, unsigned degree, double x) {
    std::vector<double> values(static_cast<std::size_t>(degree) + 1);
    eval_orthonormal_all(family, degree, x, values);
    return values.back();
}

namespace detail {

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts. `diag` is overwritten with the unsorted eigenvalues.
/// `offdiag[i]` couples rows i and i+1; offdiag.size() == diag.size().
inline void tridiagonal_eigenvalues(std::vector<double>& diag, std::vector<double> offdiag,
                                    double rel_tol = 1e-14) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    offdiag.resize(n, 0.0);
    offdiag[n - 1] = 0.0;
    const std::size_t max_iter = 50 * n;
    std::size_t iter = 0;

    for (std::size_t l = 0; l < n; ++l) {
        std::size_t m = l;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double scale = std::abs(diag[m]) + std::abs(diag[m + 1]);
                if (std::abs(offdiag[m]) <= rel_tol * scale ||
                    std::abs(offdiag[m]) < std::numeric_limits<double>::min()) {
                    break;
                }
            }
            if (m == l) break;
            if (++iter > max_iter) {
                throw NumericalError("tridiagonal eigensolver did not converge within " +
                                     std::to_string(max_iter) + " iterations");
            }
            double g = (diag[l + 1] - diag[l]) / (2.0 * offdiag[l]);
            double r = std::hypot(g, 1.0);
            g = diag[m] - diag[l] + offdiag[l] / (g + std::copysign(r, g));
            double s = 1.0;
            double c = 1.0;
            double p = 0.0;
            bool deflated = false;
            for (std::size_t i = m; i-- > l;) {
                const double f = s * offdiag[i];
                const double b = c * offdiag[i];
                r = std::hypot(f, g);
                offdiag[i + 1] = r;
                if (r == 0.0) {
                    diag[i + 1] -= p;
                    offdiag[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if (deflated) continue;
            diag[l] -= p;
            offdiag[l] = g;
            offdiag[m] = 0.0;
        } while (m != l);
    }
}

}  // namespace detail

/// n-point Gaussian rule for the family's measure. Exact for polynomials of
/// degree <= 2n - 1.
inline QuadratureRule gauss_rule(const PolynomialFamily& family, std::size_t n) {
    if (n < 1) {
        throw std::invalid_argument("gauss_rule: n must be >= 1");
    }
    if (family.size() < n) {
        throw std::invalid_argument("gauss_rule: family has fewer than n recurrence terms");
    }
    for (std::size_t k = 1; k < n; ++k) {
        if (!(family.b[k] > 0.0)) {
            throw NumericalError("gauss_rule: recurrence coefficient b_" + std::to_string(k) +
                                 " is not positive");
        }
    }

    std::vector<double> nodes(family.a.begin(), family.a.begin() + static_cast<long>(n));
    std::vector<double> offdiag(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        offdiag[k] = std::sqrt(family.b[k + 1]);
    }
    detail::tridiagonal_eigenvalues(nodes, offdiag);
    std::sort(nodes.begin(), nodes.end());

    const bool symmetric = std::all_of(family.a.begin(), family.a.begin() + static_cast<long>(n),
                                       [](double v) { return v == 0.0; });
    if (symmetric) {
        for (std::size_t i = 0; i < n / 2; ++i) {
            const double magnitude = 0.5 * (nodes[n - 1 - i] - nodes[i]);
            nodes[i] = -magnitude;
            nodes[n - 1 - i] = magnitude;
        }
        if (n % 2 == 1) nodes[n / 2] = 0.0;
    }

    QuadratureRule rule;
    rule.kind = family.kind;
    rule.nodes = nodes;
    rule.weights.resize(n);
    std::vector<double> phi(n);
    for (std::size_t i = 0; i < n; ++i) {
        eval_orthonormal_all(family, static_cast<unsigned>(n - 1), nodes[i], phi);
        double christoffel = 0.0;
        for (double v : phi) christoffel += v * v;
        rule.weights[i] = 1.0 / christoffel;
    }
    if (symmetric) {
        for (std::size_t i = 0; i < n / 2; ++i) {
            const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
            rule.weights[i] = w;
            rule.weights[n - 1 - i] = w;
        }
    }
    double total = 0.0;
    for (double w : rule.weights) total += w;
    for (double& w : rule.weights) w /= total;

    for (std::size_t i = 1; i < n; ++i) {
        if (!(rule.nodes[i] > rule.nodes[i - 1])) {
            throw NumericalError("gauss_rule: nodes not strictly increasing (ill-conditioned input)");
        }
    }
    return rule;
}

inline QuadratureRule gauss_rule(FamilyKind kind, std::size_t n) {
    return gauss_rule(recurrence_coefficients(kind, n), n);
}

}  // namespace epichaos::orthopoly
