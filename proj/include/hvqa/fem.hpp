// Copyright 2026 The hvqa Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * High-order Lagrange finite elements for the 1D Helmholtz problem
 *
 *     phi'' + k^2 phi = f  on (0, 1),  phi(0) = 0,  phi'(1) = 0,
 *
 * discretized on a uniform mesh with Gauss-Lobatto-Legendre element nodes.
 * The weak form gives (K + M) phi = f with K_ij = -int phi_i' phi_j' and
 * M_ij = k^2 int phi_i phi_j. The Dirichlet node at x = 0 is eliminated so
 * the system has N * p unknowns.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "errors.hpp"
#include "types.hpp"

namespace hvqa::fem {

namespace detail {

/// Legendre polynomial P_n and its derivative at x (three-term recurrence).
template <class T> std::pair<T, T> legendre(int n, T x) {
    if (n == 0) {
        return {T(1), T(0)};
    }
    T p_prev = 1;
    T p = x;
    for (int k = 2; k <= n; ++k) {
        const T p_next = ((2 * k - 1) * x * p - T(k - 1) * p_prev) / T(k);
        p_prev = p;
        p = p_next;
    }
    // P_n'(x) from the derivative recurrence; valid at the endpoints too.
    T dp = 0;
    if (std::abs(x) == T(1)) {
        dp = T(0.5) * n * (n + 1) * (((n + 1) % 2 == 0 || x > 0) ? T(1) : T(-1));
    } else {
        dp = n * (x * p - p_prev) / (x * x - 1);
    }
    return {p, dp};
}

/// Gauss-Legendre nodes and weights in precision T, ascending.
template <class T> void gauss_legendre(int num_points, std::vector<T> &nodes,
                                       std::vector<T> &weights) {
    nodes.assign(static_cast<std::size_t>(num_points), T(0));
    weights.assign(static_cast<std::size_t>(num_points), T(0));
    const T tol = 4 * std::numeric_limits<T>::epsilon();
    for (int i = 0; i < num_points; ++i) {
        T x = std::cos(T(pi) * (i + T(0.75)) / (num_points + T(0.5)));
        for (int it = 0; it < 100; ++it) {
            const auto [value, d] = legendre<T>(num_points, x);
            const T step = value / d;
            x -= step;
            if (std::abs(step) <= tol) {
                break;
            }
        }
        const T deriv = legendre<T>(num_points, x).second;
        const auto idx = static_cast<std::size_t>(num_points - 1 - i);
        nodes[idx] = x;
        weights[idx] = 2 / ((1 - x * x) * deriv * deriv);
    }
}

template <class T> T lagrange_value(std::span<const double> nodes, std::size_t j, T x) {
    T value = 1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i != j) {
            value *= (x - T(nodes[i])) / (T(nodes[j]) - T(nodes[i]));
        }
    }
    return value;
}

template <class T> T lagrange_derivative(std::span<const double> nodes, std::size_t j, T x) {
    T sum = 0;
    for (std::size_t m = 0; m < nodes.size(); ++m) {
        if (m == j) {
            continue;
        }
        T term = 1 / (T(nodes[j]) - T(nodes[m]));
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (i != j && i != m) {
                term *= (x - T(nodes[i])) / (T(nodes[j]) - T(nodes[i]));
            }
        }
        sum += term;
    }
    return sum;
}

} // namespace detail

/// Gauss-Lobatto-Legendre nodes of order p, sorted ascending.
///
/// The interior nodes are the roots of P_p', found by Newton iteration from
/// Chebyshev-Gauss-Lobatto initial guesses.
inline std::vector<double> gll_nodes(int p) {
    if (p < 1) {
        throw ConfigError("gll_nodes: order must be >= 1");
    }
    std::vector<double> nodes(static_cast<std::size_t>(p) + 1);
    nodes.front() = -1.0;
    nodes.back() = 1.0;
    constexpr double tol = 1e-15;
    constexpr int max_iterations = 100;
    for (int i = 1; i < p; ++i) {
        double x = -std::cos(pi * i / p);
        for (int it = 0; it < max_iterations; ++it) {
            const auto [value, deriv] = detail::legendre(p, x);
            // (1 - x^2) P'' = 2x P' - p(p+1) P
            const double second = (2.0 * x * deriv - p * (p + 1.0) * value) /
                                  (1.0 - x * x);
            const double step = deriv / second;
            x -= step;
            if (std::abs(step) <= tol) {
                break;
            }
        }
        nodes[static_cast<std::size_t>(i)] = x;
    }
    std::sort(nodes.begin(), nodes.end());
    for (int i = 1; i < p; ++i) {
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(p - i);
        if (lo >= hi) {
            break;
        }
        const double sym = 0.5 * (nodes[hi] - nodes[lo]);
        nodes[lo] = -sym;
        nodes[hi] = sym;
    }
    if (p % 2 == 0) {
        nodes[static_cast<std::size_t>(p / 2)] = 0.0;
    }
    return nodes;
}

/// Gauss-Legendre rule on [-1, 1], exact for polynomials of degree 2n-1.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline QuadratureRule gauss_legendre(int num_points) {
    if (num_points < 1) {
        throw ConfigError("gauss_legendre: need at least one point");
    }
    QuadratureRule rule;
    detail::gauss_legendre<double>(num_points, rule.nodes, rule.weights);
    return rule;
}

inline void require_distinct(std::span<const double> nodes) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            if (nodes[i] == nodes[j]) {
                throw InvalidInput("lagrange basis: duplicate interpolation nodes");
            }
        }
    }
}

/// j-th Lagrange basis polynomial on `nodes`, evaluated at x.
inline double lagrange_basis_eval(std::span<const double> nodes, std::size_t j,
                                  double x) {
    require_distinct(nodes);
    if (j >= nodes.size()) {
        throw InvalidInput("lagrange basis: index out of range");
    }
    return detail::lagrange_value<double>(nodes, j, x);
}

/// Derivative of the j-th Lagrange basis polynomial at x.
inline double lagrange_basis_derivative(std::span<const double> nodes,
                                        std::size_t j, double x) {
    require_distinct(nodes);
    if (j >= nodes.size()) {
        throw InvalidInput("lagrange basis: index out of range");
    }
    return detail::lagrange_derivative<double>(nodes, j, x);
}

/// Helmholtz problem on a uniform mesh of [0, length]; Dirichlet left, Neumann right.
struct FemProblem {
    int num_elements = 4;
    int order = 1;
    double wavenumber = 0.0;
    std::function<double(double)> source = [](double) { return 1.0; };
    double length = 1.0;

    [[nodiscard]] int num_dofs() const { return num_elements * order; }
    [[nodiscard]] double element_width() const { return length / num_elements; }

    void validate() const {
        if (num_elements < 1) {
            throw ConfigError("FemProblem: num_elements must be positive");
        }
        if (order != 1 && order != 2 && order != 4 && order != 8) {
            throw ConfigError("FemProblem: order must be one of 1, 2, 4, 8");
        }
        if (!(length > 0.0) || !std::isfinite(length)) {
            throw ConfigError("FemProblem: length must be finite and > 0");
        }
        if (!(wavenumber >= 0.0) || !std::isfinite(wavenumber)) {
            throw ConfigError("FemProblem: wavenumber must be finite and >= 0");
        }
        if (!is_power_of_two(static_cast<std::size_t>(num_dofs()))) {
            std::ostringstream msg;
            msg << "FemProblem: N*p = " << num_dofs()
                << " must be a power of two";
            throw ConfigError(msg.str());
        }
        if (!source) {
            throw ConfigError("FemProblem: source function is empty");
        }
    }
};

struct AssembledSystem {
    int num_elements = 0;
    int order = 0;
    double wavenumber = 0.0;
    Matrix stiffness; ///< K, negative semidefinite
    Matrix mass;      ///< M = k^2 * mass_unit
    Matrix mass_unit; ///< int phi_i phi_j
    Matrix matrix;    ///< A = K + M
    Vector rhs;
    double norm_rhs = 0.0;

    [[nodiscard]] int num_dofs() const {
        return static_cast<int>(matrix.rows());
    }
    [[nodiscard]] int num_qubits() const {
        return log2_exact(static_cast<std::size_t>(num_dofs()));
    }
};

/// Reference-element matrices on [-1, 1] scaled to width h.
struct ElementMatrices {
    Matrix stiffness;
    Matrix mass_unit;
};

/// Integrals are accumulated in long double and rounded once, so any exact
/// rule gives the same doubles.
inline ElementMatrices element_matrices(int order, double h, int quad_points = 0) {
    using Wide = long double;
    const auto nodes = gll_nodes(order);
    const int points = quad_points > 0 ? quad_points : order + 1;
    require_distinct(nodes);
    std::vector<Wide> xs;
    std::vector<Wide> ws;
    detail::gauss_legendre<Wide>(points, xs, ws);
    const int nb = order + 1;
    const auto unb = static_cast<std::size_t>(nb);
    std::vector<Wide> stiff(unb * unb, 0);
    std::vector<Wide> mass(unb * unb, 0);
    std::vector<Wide> val(unb);
    std::vector<Wide> der(unb);
    for (std::size_t q = 0; q < xs.size(); ++q) {
        for (std::size_t a = 0; a < unb; ++a) {
            val[a] = detail::lagrange_value<Wide>(nodes, a, xs[q]);
            der[a] = detail::lagrange_derivative<Wide>(nodes, a, xs[q]);
        }
        for (std::size_t a = 0; a < unb; ++a) {
            for (std::size_t b = a; b < unb; ++b) {
                stiff[a * unb + b] -= ws[q] * der[a] * der[b];
                mass[a * unb + b] += ws[q] * val[a] * val[b];
            }
        }
    }
    ElementMatrices em{Matrix::Zero(nb, nb), Matrix::Zero(nb, nb)};
    for (int a = 0; a < nb; ++a) {
        for (int b = a; b < nb; ++b) {
            const auto idx = static_cast<std::size_t>(a) * unb + static_cast<std::size_t>(b);
            em.stiffness(a, b) = em.stiffness(b, a) = static_cast<double>(stiff[idx] * 2 / Wide(h));
            em.mass_unit(a, b) = em.mass_unit(b, a) = static_cast<double>(mass[idx] * Wide(h) / 2);
        }
    }
    return em;
}

/// Physical coordinate of every unknown (global nodes 1..N*p).
inline std::vector<double> dof_coordinates(int num_elements, int order) {
    const auto nodes = gll_nodes(order);
    const double h = 1.0 / num_elements;
    std::vector<double> coords;
    coords.reserve(static_cast<std::size_t>(num_elements * order));
    for (int e = 0; e < num_elements; ++e) {
        for (int a = 1; a <= order; ++a) {
            coords.push_back((e + 0.5 * (nodes[static_cast<std::size_t>(a)] + 1.0)) * h);
        }
    }
    return coords;
}

/// Assemble (K + M) phi = f. `quad_points` overrides the default p+1 Gauss points.
inline AssembledSystem assemble(const FemProblem &problem, int quad_points = 0) {
    problem.validate();
    const int n_el = problem.num_elements;
    const int p = problem.order;
    const int ndof = problem.num_dofs();
    const double h = problem.element_width();
    const double k2 = problem.wavenumber * problem.wavenumber;

    const auto em = element_matrices(p, h, quad_points);
    const auto nodes = gll_nodes(p);
    const auto rule = gauss_legendre(quad_points > 0 ? quad_points : p + 1);

    AssembledSystem sys;
    sys.num_elements = n_el;
    sys.order = p;
    sys.wavenumber = problem.wavenumber;
    sys.stiffness = Matrix::Zero(ndof, ndof);
    sys.mass_unit = Matrix::Zero(ndof, ndof);
    sys.rhs = Vector::Zero(ndof);

    for (int e = 0; e < n_el; ++e) {
        std::vector<double> fe(static_cast<std::size_t>(p) + 1, 0.0);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double x = (e + 0.5 * (rule.nodes[q] + 1.0)) * h;
            const double fx = problem.source(x);
            for (int a = 0; a <= p; ++a) {
                fe[static_cast<std::size_t>(a)] +=
                    rule.weights[q] * fx *
                    lagrange_basis_eval(nodes, static_cast<std::size_t>(a), rule.nodes[q]) *
                    (h / 2.0);
            }
        }
        for (int a = 0; a <= p; ++a) {
            const int row = e * p + a - 1; // global node e*p+a, minus the Dirichlet node
            if (row < 0) {
                continue;
            }
            sys.rhs(row) += fe[static_cast<std::size_t>(a)];
            for (int b = 0; b <= p; ++b) {
                const int col = e * p + b - 1;
                if (col < 0) {
                    continue;
                }
                sys.stiffness(row, col) += em.stiffness(a, b);
                sys.mass_unit(row, col) += em.mass_unit(a, b);
            }
        }
    }
    sys.mass = k2 * sys.mass_unit;
    sys.matrix = sys.stiffness + sys.mass;
    sys.norm_rhs = sys.rhs.norm();
    return sys;
}

/// Wavenumbers k at which K + k^2 M1 is singular: k = sqrt(lambda) for the
/// generalized eigenvalues of (-K, M1). Sorted ascending.
inline std::vector<double> resonant_wavenumbers(const AssembledSystem &sys) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(-sys.stiffness,
                                                            sys.mass_unit);
    std::vector<double> ks;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        ks.push_back(std::sqrt(std::max(0.0, solver.eigenvalues()(i))));
    }
    std::sort(ks.begin(), ks.end());
    return ks;
}

/// Distance from the system's wavenumber to the nearest discrete resonance.
inline double resonance_distance(const AssembledSystem &sys) {
    double best = std::numeric_limits<double>::infinity();
    for (double k : resonant_wavenumbers(sys)) {
        best = std::min(best, std::abs(k - sys.wavenumber));
    }
    return best;
}

inline constexpr double resonance_guard = 1e-8;

/// Dense LU solve of A phi = f.
inline Vector classical_solve(const AssembledSystem &sys) {
    Eigen::PartialPivLU<Matrix> lu(sys.matrix);
    const double rcond = lu.rcond();
    const double cond = rcond > 0.0 ? 1.0 / rcond
                                    : std::numeric_limits<double>::infinity();
    if (sys.wavenumber > 0.0 && resonance_distance(sys) <= resonance_guard) {
        std::ostringstream msg;
        msg << "classical_solve: k = " << sys.wavenumber
            << " is within " << resonance_guard
            << " of a discrete resonance (estimated condition number " << cond
            << ")";
        throw SingularSystem(msg.str(), cond);
    }
    const Vector phi = lu.solve(sys.rhs);
    const double residual = (sys.matrix * phi - sys.rhs).norm();
    if (!phi.allFinite() || residual > 1e-10 * std::max(sys.rhs.norm(), 1e-300)) {
        std::ostringstream msg;
        msg << "classical_solve: singular system (estimated condition number "
            << cond << ", residual " << residual << ")";
        throw SingularSystem(msg.str(), cond);
    }
    return phi;
}

/// Evaluate the finite element function with nodal values `dofs` at x.
inline double evaluate(const Vector &dofs, int num_elements, int order, double x) {
    const auto nodes = gll_nodes(order);
    const double h = 1.0 / num_elements;
    int e = static_cast<int>(std::floor(x / h));
    e = std::clamp(e, 0, num_elements - 1);
    const double xi = 2.0 * (x / h - e) - 1.0;
    double value = 0.0;
    for (int a = 0; a <= order; ++a) {
        const int dof = e * order + a - 1;
        if (dof < 0) {
            continue;
        }
        value += dofs(dof) * lagrange_basis_eval(nodes, static_cast<std::size_t>(a), xi);
    }
    return value;
}

/// L2 norm of (u_h - exact) using a high-order element quadrature.
inline double l2_error(const Vector &dofs, int num_elements, int order,
                       const std::function<double(double)> &exact) {
    const auto rule = gauss_legendre(order + 8);
    const double h = 1.0 / num_elements;
    double sum = 0.0;
    for (int e = 0; e < num_elements; ++e) {
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double x = (e + 0.5 * (rule.nodes[q] + 1.0)) * h;
            const double diff = evaluate(dofs, num_elements, order, x) - exact(x);
            sum += rule.weights[q] * diff * diff * (h / 2.0);
        }
    }
    return std::sqrt(sum);
}

struct ConvergenceLevel {
    int num_elements = 0;
    double h = 0.0;
    double l2_error = 0.0;
};

struct ConvergenceResult {
    std::vector<ConvergenceLevel> levels;
    double slope = 0.0; ///< least-squares slope of log(error) against log(h)
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Solve with a manufactured solution on successively refined meshes.
/// `rhs` must equal exact'' + k^2 exact, and `exact` must satisfy both
/// boundary conditions.
inline ConvergenceResult
convergence_study(int order, double wavenumber,
                  const std::function<double(double)> &exact,
                  const std::function<double(double)> &rhs,
                  std::span<const int> element_counts) {
    ConvergenceResult result;
    std::vector<double> hs;
    std::vector<double> errs;
    for (int n_el : element_counts) {
        FemProblem problem{n_el, order, wavenumber, rhs};
        const auto sys = assemble(problem);
        const Vector phi = classical_solve(sys);
        const double err = l2_error(phi, n_el, order, exact);
        result.levels.push_back({n_el, 1.0 / n_el, err});
        hs.push_back(1.0 / n_el);
        errs.push_back(err);
    }
    if (hs.size() >= 2) {
        result.slope = loglog_slope(hs, errs);
    }
    return result;
}

} // namespace hvqa::fem
