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
 * Circuit counts and depths measured from compiled programs.
 *
 * Depths are critical-path lengths of the elementary-gate form produced by
 * qsim::lower, under qsim's layering convention.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "blockstruct.hpp"
#include "estimators.hpp"
#include "fem.hpp"
#include "lcu.hpp"
#include "qsim.hpp"
#include "vqa.hpp"

namespace hvqa::resources {

struct ResourceRow {
    std::string target; ///< "A" or "AtA"
    std::string term;
    int n = 0;
    int p = 0;
    std::int64_t num_elements = 0;
    std::size_t circuits = 0;
    int max_depth = 0;
};

struct SweepPoint {
    int n = 0;
    int p = 0;
};

struct Compiled {
    blockstruct::BlockDecomposition blocks;
    std::vector<blockstruct::StructuredTerm> terms_a;
    std::vector<blockstruct::StructuredTerm> terms_ata;
    lcu::LcuProgram program_a;
    lcu::LcuProgram program_ata;
};

/// Blocks of the (N = 2^n / p, p, k) system and both compiled decompositions.
/// The blocks depend only on h = 1/N, p and k, so they are read from a
/// four-element strip of width 4h instead of the full 2^n system.
inline Compiled compile(int n, int p, double wavenumber) {
    if (n < 1 || n > 62 || p < 1 || (std::int64_t{1} << n) % p != 0) {
        throw ConfigError("resources: p must divide 2^n");
    }
    const double h = static_cast<double>(p) / static_cast<double>(std::int64_t{1} << n);
    fem::FemProblem strip{4, p, wavenumber, [](double) { return 1.0; }, 4.0 * h};
    Compiled c;
    c.blocks = blockstruct::extract_blocks(fem::assemble(strip).matrix, p);
    c.terms_a = blockstruct::decompose_A(c.blocks, n);
    c.terms_ata = blockstruct::decompose_AdagA(c.blocks, n);
    c.program_a = lcu::compile_full(c.terms_a, n, "A");
    c.program_ata = lcu::compile_full(c.terms_ata, n, "AtA");
    return c;
}

/// One row per structured term, including terms that compile to nothing.
inline std::vector<ResourceRow>
term_rows(const std::vector<blockstruct::StructuredTerm> &terms,
          const lcu::LcuProgram &program, int n, int p, const std::string &target) {
    std::vector<ResourceRow> rows;
    for (const auto &t : terms) {
        ResourceRow row;
        row.target = target;
        row.term = t.name;
        row.n = n;
        row.p = p;
        row.num_elements = static_cast<std::int64_t>((std::int64_t{1} << n) / p);
        for (const auto &lt : program.terms) {
            if (lt.source != t.name) {
                continue;
            }
            ++row.circuits;
            row.max_depth = std::max(row.max_depth, qsim::lowered_depth(lt.unitary));
        }
        rows.push_back(row);
    }
    return rows;
}

inline std::vector<ResourceRow> tabulate(std::span<const SweepPoint> sweep,
                                         double wavenumber = 0.0) {
    std::vector<ResourceRow> rows;
    for (const auto &pt : sweep) {
        const auto c = compile(pt.n, pt.p, wavenumber);
        for (auto &r : term_rows(c.terms_a, c.program_a, pt.n, pt.p, "A")) {
            rows.push_back(std::move(r));
        }
        for (auto &r : term_rows(c.terms_ata, c.program_ata, pt.n, pt.p, "AtA")) {
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

/// Slope of log(y) against log(x), skipping non-positive y.
inline double fit_exponent(std::span<const double> x, std::span<const double> y) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] > 0.0) {
            xs.push_back(x[i]);
            ys.push_back(y[i]);
        }
    }
    if (xs.size() < 2) {
        return 0.0;
    }
    return fem::loglog_slope(xs, ys);
}

struct IterationCost {
    int n = 0;
    int p = 0;
    std::int64_t num_elements = 0;
    int parameters = 0;
    std::size_t terms_a = 0;
    std::size_t terms_ata = 0;
    int depth_overlap = 0;   ///< Hadamard test of A, including n layers for U_f
    int depth_quadratic = 0; ///< Hadamard test of A^T A
    double cost = 0.0;       ///< (1 + 2 dim(theta)) (depth_overlap + depth_quadratic)
};

/// Proxy cost of one BFGS iteration: every gradient needs 1 + 2 dim(theta)
/// evaluations of each estimator, each costing one circuit of the measured
/// depth. U_f is charged n layers.
inline IterationCost iteration_cost(int n, int p, const vqa::Ansatz &ansatz,
                                    double wavenumber = 0.0) {
    if (ansatz.num_qubits != n) {
        throw ConfigError("iteration_cost: ansatz width differs from n");
    }
    const auto c = compile(n, p, wavenumber);
    IterationCost ic;
    ic.n = n;
    ic.p = p;
    ic.num_elements = (std::int64_t{1} << n) / p;
    ic.parameters = ansatz.num_parameters();
    ic.terms_a = c.program_a.size();
    ic.terms_ata = c.program_ata.size();
    const auto be_a = estimators::build_block_encoding(c.program_a, -1, false);
    const auto be_aa = estimators::build_block_encoding(c.program_ata, -1, false);
    const Vector theta = Vector::Constant(ansatz.num_parameters(), 0.5);
    const auto phi = ansatz.circuit(theta);
    const qsim::Circuit no_f(n);
    ic.depth_overlap = qsim::lowered_depth(estimators::overlap_circuit(be_a, no_f, phi)) + n;
    ic.depth_quadratic = qsim::lowered_depth(estimators::quadratic_circuit(be_aa, phi));
    ic.cost = (1.0 + 2.0 * ic.parameters) *
              static_cast<double>(ic.depth_overlap + ic.depth_quadratic);
    return ic;
}

struct CostReport {
    std::vector<IterationCost> p_sweep;  ///< fixed n
    std::vector<IterationCost> n_sweep;  ///< fixed p
    double p_exponent = 0.0;
    std::vector<double> n_ratios;        ///< cost(n+1) / cost(n)
    std::vector<double> n_ratio_limits;  ///< (n+1)^2 / n^2 * slack
    double slack = 1.5;
    double p_exponent_limit = 3.5;

    [[nodiscard]] bool p_ok() const { return p_sweep.size() < 2 || p_exponent <= p_exponent_limit; }
    [[nodiscard]] bool n_ok() const {
        for (std::size_t i = 0; i < n_ratios.size(); ++i) {
            if (n_ratios[i] > n_ratio_limits[i]) {
                return false;
            }
        }
        return true;
    }
};

/// Fits the p exponent over `p_sweep` and the successive cost ratios over `n_sweep`.
inline CostReport iteration_cost_report(std::vector<IterationCost> p_sweep,
                                        std::vector<IterationCost> n_sweep,
                                        double slack = 1.5) {
    CostReport report;
    report.slack = slack;
    report.p_sweep = std::move(p_sweep);
    report.n_sweep = std::move(n_sweep);
    std::vector<double> ps;
    std::vector<double> costs;
    for (const auto &c : report.p_sweep) {
        ps.push_back(c.p);
        costs.push_back(c.cost);
    }
    report.p_exponent = fit_exponent(ps, costs);
    for (std::size_t i = 1; i < report.n_sweep.size(); ++i) {
        const auto &a = report.n_sweep[i - 1];
        const auto &b = report.n_sweep[i];
        const double ratio_n = static_cast<double>(b.n) / a.n;
        report.n_ratios.push_back(b.cost / a.cost);
        report.n_ratio_limits.push_back(ratio_n * ratio_n * slack);
    }
    return report;
}

} // namespace hvqa::resources
