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
 * Variational solver for A x = f.
 *
 * With |f> = f / ||f|| and |phi(theta)> from the ansatz,
 * J(theta) = -Re<f|A|phi>^2 / <phi|A^T A|phi>, r = Re<f|A|phi> / <phi|A^T A|phi>,
 * and ||A r phi - f||^2 / ||f||^2 = 1 + J. The solution estimate is ||f|| r |phi>.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bfgs.hpp"
#include "blockstruct.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "fem.hpp"
#include "lcu.hpp"
#include "qsim.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace hvqa::vqa {

enum class Rotations { RY, RYRZ };

/// Per layer: rotations on every qubit, then CNOT(i -> i+1) for i = 0..n-2.
/// A final rotation layer follows the last entangler.
struct Ansatz {
    int num_qubits = 1;
    int layers = 7;
    Rotations rotations = Rotations::RY;

    [[nodiscard]] int parameters_per_qubit() const {
        return rotations == Rotations::RY ? 1 : 2;
    }
    [[nodiscard]] int num_parameters() const {
        return num_qubits * (layers + 1) * parameters_per_qubit();
    }

    void validate() const {
        if (num_qubits < 1) {
            throw ConfigError("Ansatz: need at least one qubit");
        }
        if (layers < 0) {
            throw ConfigError("Ansatz: layers must be >= 0");
        }
    }

    [[nodiscard]] qsim::Circuit circuit(const Vector &theta) const {
        if (theta.size() != num_parameters()) {
            throw InvalidInput("Ansatz: parameter vector has the wrong length");
        }
        qsim::Circuit c(num_qubits);
        Eigen::Index k = 0;
        for (int layer = 0; layer <= layers; ++layer) {
            for (int q = 0; q < num_qubits; ++q) {
                c.add(qsim::gates::ry(q, theta(k++)));
                if (rotations == Rotations::RYRZ) {
                    c.add(qsim::gates::rz(q, theta(k++)));
                }
            }
            if (layer < layers) {
                for (int q = 0; q + 1 < num_qubits; ++q) {
                    c.add(qsim::gates::cnot(q, q + 1));
                }
            }
        }
        return c;
    }

    [[nodiscard]] CVector state(const Vector &theta) const {
        return estimators::prepared_state(circuit(theta), num_qubits);
    }
};

/// Linear-overlap and quadratic estimators for one linear system.
class CostModel {
  public:
    CostModel(const fem::AssembledSystem &sys, Ansatz ansatz,
              estimators::Mode mode = estimators::Mode::exact_mode())
        : CostModel(sys.matrix, sys.rhs, compile_a(sys), compile_ata(sys), ansatz, mode) {}

    /// `program_a` and `program_ata` must realize A and A^T A on the ansatz register.
    CostModel(Matrix matrix, Vector rhs, lcu::LcuProgram program_a,
              lcu::LcuProgram program_ata, Ansatz ansatz,
              estimators::Mode mode = estimators::Mode::exact_mode())
        : ansatz_(ansatz), mode_(mode), matrix_(std::move(matrix)), rhs_(std::move(rhs)) {
        ansatz_.validate();
        if (program_a.num_qubits != ansatz_.num_qubits ||
            program_ata.num_qubits != ansatz_.num_qubits ||
            matrix_.rows() != (Eigen::Index{1} << ansatz_.num_qubits) ||
            rhs_.size() != matrix_.rows()) {
            throw ConfigError("CostModel: ansatz width differs from the system register");
        }
        f_norm_ = rhs_.norm();
        if (!(f_norm_ > 0.0)) {
            throw ConfigError("CostModel: right-hand side is zero");
        }
        be_a_ = estimators::build_block_encoding(std::move(program_a));
        be_aa_ = estimators::build_block_encoding(std::move(program_ata));
        const Vector fhat = rhs_ / f_norm_;
        prep_f_ = qsim::state_prep(std::span<const double>(fhat.data(), fhat.size()));
    }

    static lcu::LcuProgram compile_a(const fem::AssembledSystem &sys) {
        const auto bd = blockstruct::extract_blocks(sys.matrix, sys.order);
        return lcu::compile_full(blockstruct::decompose_A(bd, sys.num_qubits()),
                                 sys.num_qubits(), "A");
    }

    static lcu::LcuProgram compile_ata(const fem::AssembledSystem &sys) {
        const auto bd = blockstruct::extract_blocks(sys.matrix, sys.order);
        return lcu::compile_full(blockstruct::decompose_AdagA(bd, sys.num_qubits()),
                                 sys.num_qubits(), "AtA");
    }

    struct Values {
        double overlap = 0.0;
        double quadratic = 0.0;
        double cost = 0.0;
    };

    [[nodiscard]] const Ansatz &ansatz() const noexcept { return ansatz_; }
    [[nodiscard]] double rhs_norm() const noexcept { return f_norm_; }
    [[nodiscard]] const estimators::BlockEncoding &encoding_a() const { return be_a_; }
    [[nodiscard]] const estimators::BlockEncoding &encoding_ata() const { return be_aa_; }
    [[nodiscard]] const qsim::Circuit &prep_f() const noexcept { return prep_f_; }
    [[nodiscard]] const Matrix &matrix() const noexcept { return matrix_; }
    [[nodiscard]] const Vector &rhs() const noexcept { return rhs_; }

    void set_mode(estimators::Mode mode) { mode_ = mode; }
    [[nodiscard]] const estimators::Mode &mode() const noexcept { return mode_; }

    [[nodiscard]] double overlap(const Vector &theta, std::uint64_t stream = 0) const {
        return estimators::estimate_overlap(be_a_, prep_f_, ansatz_.circuit(theta),
                                            with_stream(stream))
            .value;
    }

    [[nodiscard]] double quadratic(const Vector &theta, std::uint64_t stream = 0) const {
        return estimators::estimate_quadratic(be_aa_, ansatz_.circuit(theta),
                                              with_stream(stream))
            .value;
    }

    [[nodiscard]] Values values(const Vector &theta) const {
        Values v;
        v.overlap = overlap(theta, 0);
        v.quadratic = quadratic(theta, 1);
        if (!(v.quadratic > degenerate_tol * be_aa_.eta)) {
            throw DegenerateState("cost: <phi|A^T A|phi> vanishes");
        }
        v.cost = -v.overlap * v.overlap / v.quadratic;
        return v;
    }

    [[nodiscard]] double cost(const Vector &theta) const { return values(theta).cost; }

    /// Parameter-shift gradient of J at s = pi/2:
    /// d<f|A|phi> = [o(t+s) - o(t-s)] / (4 sin(s/2)), d<phi|A^T A|phi> = [q(t+s) - q(t-s)] / 2.
    [[nodiscard]] Vector gradient(const Vector &theta, Values *at = nullptr) const {
        const Values v = values(theta);
        if (at != nullptr) {
            *at = v;
        }
        const double s = pi / 2;
        const double lin = 1.0 / (4.0 * std::sin(s / 2));
        Vector g(theta.size());
        Vector shifted = theta;
        for (Eigen::Index j = 0; j < theta.size(); ++j) {
            const auto stream = 2 + 4 * static_cast<std::uint64_t>(j);
            shifted(j) = theta(j) + s;
            const double ov_p = overlap(shifted, stream);
            const double q_p = quadratic(shifted, stream + 1);
            shifted(j) = theta(j) - s;
            const double ov_m = overlap(shifted, stream + 2);
            const double q_m = quadratic(shifted, stream + 3);
            shifted(j) = theta(j);
            const double d_ov = lin * (ov_p - ov_m);
            const double d_q = 0.5 * (q_p - q_m);
            g(j) = -2.0 * v.overlap * d_ov / v.quadratic +
                   v.overlap * v.overlap * d_q / (v.quadratic * v.quadratic);
        }
        return g;
    }

    /// Relative tolerance on <phi|A^T A|phi> / eta'.
    static constexpr double degenerate_tol = 1e-14;

  private:
    [[nodiscard]] estimators::Mode with_stream(std::uint64_t stream) const {
        estimators::Mode m = mode_;
        m.seed = splitmix64(mode_.seed ^ splitmix64(stream + counter_salt));
        return m;
    }

    static constexpr std::uint64_t counter_salt = 0x5bd1e995ULL;

    Ansatz ansatz_;
    estimators::Mode mode_;
    Matrix matrix_;
    Vector rhs_;
    double f_norm_ = 0.0;
    estimators::BlockEncoding be_a_;
    estimators::BlockEncoding be_aa_;
    qsim::Circuit prep_f_;
};

struct SolveOptions {
    bfgs::Options bfgs;
    std::uint64_t seed = 0;
    int max_restarts = 5;
    double perturbation = 0.1;
};

struct TraceRow {
    int iteration = 0;
    double cost = 0.0;
    double residual = 0.0;
    double grad_norm = 0.0;
    double r = 0.0;
};

struct VqaRun {
    std::vector<Vector> thetas;
    std::vector<TraceRow> trace;
    Vector theta;
    double cost = 0.0;
    double overlap = 0.0;
    double quadratic = 0.0;
    double r = 0.0;
    double residual = 0.0;   ///< ||A x - f||^2 / ||f||^2 for the read-out x
    double fidelity = 0.0;   ///< |<x_classical, x>|^2 / (||x_classical||^2 ||x||^2)
    Vector solution;         ///< ||f|| r |phi>
    Vector classical;
    int iterations = 0;
    int evaluations = 0;
    int restarts = 0;
    bool converged = false;
    bfgs::Status status = bfgs::Status::MaxIterations;
};

/// Real part of an ansatz state; the imaginary part is zero for RY ansatze.
inline Vector real_state(const CVector &state) { return state.real(); }

/// Minimize J from theta0 = 0 with BFGS.
inline VqaRun solve(const CostModel &model, const SolveOptions &options = {}) {
    const auto &ansatz = model.ansatz();
    const auto dim = ansatz.num_parameters();
    Vector theta0 = Vector::Zero(dim);
    CounterRng rng(options.seed, 0x7e57);

    VqaRun run;
    for (int attempt = 0;; ++attempt) {
        try {
            CostModel::Values v;
            const Vector g = model.gradient(theta0, &v);
            const bool stationary_nonoptimal =
                g.norm() <= options.bfgs.gtol && v.overlap * v.overlap <= 1e-14 * v.quadratic;
            if (!stationary_nonoptimal) {
                break;
            }
        } catch (const DegenerateState &) {
        }
        if (attempt >= options.max_restarts) {
            throw DegenerateState("solve: no usable starting point after restarts");
        }
        for (Eigen::Index j = 0; j < dim; ++j) {
            theta0(j) += rng.uniform(-options.perturbation, options.perturbation);
        }
        ++run.restarts;
    }

    // Trial points with a vanishing estimate of <phi|A^T A|phi> (possible
    // under shot noise) are rejected by the line search.
    const bfgs::Objective objective = [&model, dim](const Vector &theta) {
        CostModel::Values v;
        bfgs::Evaluation e;
        try {
            e.gradient = model.gradient(theta, &v);
            e.value = v.cost;
        } catch (const DegenerateState &) {
            e.gradient = Vector::Zero(dim);
            e.value = std::numeric_limits<double>::infinity();
        }
        return e;
    };
    auto record = [&](const bfgs::Iterate &it) {
        const auto v = model.values(it.x);
        run.thetas.push_back(it.x);
        run.trace.push_back({it.iteration, v.cost, 1.0 + v.cost, it.grad_norm,
                             estimators::amplitude_r(v.overlap, v.quadratic)});
    };
    const auto result = bfgs::minimize(objective, theta0, options.bfgs, record);

    run.theta = result.x;
    run.iterations = result.iterations;
    run.evaluations = result.evaluations;
    run.status = result.status;
    run.converged = result.converged();
    const auto v = model.values(run.theta);
    run.cost = v.cost;
    run.overlap = v.overlap;
    run.quadratic = v.quadratic;
    run.r = estimators::amplitude_r(v.overlap, v.quadratic);
    const Vector phi = real_state(ansatz.state(run.theta));
    run.solution = model.rhs_norm() * run.r * phi;
    const Vector diff = model.matrix() * run.solution - model.rhs();
    run.residual = diff.squaredNorm() / model.rhs().squaredNorm();
    return run;
}

/// Adds the classical reference and the fidelity against it.
inline void attach_classical(VqaRun &run, const fem::AssembledSystem &sys) {
    run.classical = fem::classical_solve(sys);
    const double num = run.classical.dot(run.solution);
    run.fidelity = num * num / (run.classical.squaredNorm() * run.solution.squaredNorm());
}

inline void write_trace_csv(std::ostream &out, const VqaRun &run) {
    out << "iteration,J,residual,grad_norm,r\n";
    char buf[160];
    for (const auto &row : run.trace) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", row.iteration,
                      row.cost, row.residual, row.grad_norm, row.r);
        out << buf;
    }
}

} // namespace hvqa::vqa
