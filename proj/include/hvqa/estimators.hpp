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
 * Block encodings and Hadamard-test estimators.
 *
 * Register layout of every estimator circuit: system qubits 0..n-1, LCU
 * index register n..n+m-1, Hadamard ancilla n+m. With
 * U = (U_a^dag x I) U_s (U_a x I), the ancilla satisfies
 * P(a = 0) = (1 + Re<0,x|U|0,y>) / 2 = (1 + Re<x|A|y> / eta) / 2,
 * so no condition on the index register is needed.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "errors.hpp"
#include "lcu.hpp"
#include "qsim.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace hvqa::estimators {

struct BlockEncoding {
    lcu::LcuProgram program;
    int num_qubits = 0;     ///< system register n
    int num_ancillas = 0;   ///< index register m
    qsim::Circuit prep;     ///< U_alpha on qubits n..n+m-1
    qsim::Circuit select;   ///< U_s
    double eta = 0.0;
    CMatrix realized;       ///< sum_j alpha_j U_j

    [[nodiscard]] int width() const noexcept { return num_qubits + num_ancillas; }

    /// (U_alpha^dag x I) U_s (U_alpha x I)
    [[nodiscard]] qsim::Circuit unitary() const {
        qsim::Circuit u(width());
        u.append(prep).append(select).append(prep.inverse());
        return u;
    }
};

/// Widest system register for which the dense LCU sum is cached.
inline constexpr int max_realized_qubits = 10;

inline int ancillas_for(std::size_t terms) {
    int m = 0;
    while ((std::size_t{1} << m) < terms) {
        ++m;
    }
    return m;
}

/// `ancillas` < 0 picks ceil(log2(#terms)). Exact-mode estimates need
/// `cache_dense`.
inline BlockEncoding build_block_encoding(lcu::LcuProgram program, int ancillas = -1,
                                          bool cache_dense = true) {
    if (program.terms.empty()) {
        throw ConfigError("build_block_encoding: program has no terms");
    }
    const int n = program.num_qubits;
    const int m = ancillas < 0 ? ancillas_for(program.size()) : ancillas;
    if ((std::size_t{1} << m) < program.size()) {
        throw ConfigError("build_block_encoding: too many terms for the index register");
    }
    BlockEncoding be;
    be.num_qubits = n;
    be.num_ancillas = m;
    be.eta = program.eta();
    if (!(be.eta > 0.0)) {
        throw ConfigError("build_block_encoding: eta must be positive");
    }

    std::vector<double> amplitudes(std::size_t{1} << m, 0.0);
    for (std::size_t j = 0; j < program.size(); ++j) {
        amplitudes[j] = std::sqrt(program.terms[j].alpha / be.eta);
    }
    const double norm = std::sqrt(
        std::inner_product(amplitudes.begin(), amplitudes.end(), amplitudes.begin(), 0.0));
    for (auto &a : amplitudes) {
        a /= norm;
    }
    be.prep = qsim::state_prep(amplitudes, n, n + m);

    std::vector<int> identity(static_cast<std::size_t>(n));
    std::iota(identity.begin(), identity.end(), 0);
    std::vector<int> index_qubits(static_cast<std::size_t>(m));
    std::iota(index_qubits.begin(), index_qubits.end(), n);
    be.select = qsim::Circuit(n + m);
    for (std::size_t j = 0; j < program.size(); ++j) {
        std::vector<std::uint8_t> states(static_cast<std::size_t>(m));
        for (int b = 0; b < m; ++b) {
            states[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>((j >> b) & 1U);
        }
        be.select.append(program.terms[j]
                             .unitary.remapped(identity, n + m)
                             .controlled(index_qubits, states));
    }
    if (cache_dense && n <= max_realized_qubits) {
        be.realized = program.dense();
    }
    be.program = std::move(program);
    return be;
}

/// Top-left 2^n x 2^n block of dense(U); equals target / eta.
inline CMatrix top_left_block(const BlockEncoding &be) {
    const auto dim = std::int64_t{1} << be.num_qubits;
    const auto u = be.unitary();
    CMatrix out(dim, dim);
    for (std::int64_t j = 0; j < dim; ++j) {
        auto sv = qsim::Statevector::basis(be.width(), static_cast<std::size_t>(j));
        sv.apply(u);
        for (std::int64_t i = 0; i < dim; ++i) {
            out(i, j) = sv[static_cast<std::size_t>(i)];
        }
    }
    return out;
}

struct Mode {
    bool exact = true;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;

    static Mode exact_mode() { return {}; }
    static Mode sampled(std::uint64_t shots, std::uint64_t seed) { return {false, shots, seed}; }
};

struct EstimatorResult {
    double value = 0.0;
    Mode mode;
    double std_error = 0.0;
    double probability_zero = 0.0; ///< ancilla statistic (shot mode)
};

inline int ancilla_qubit(const BlockEncoding &be) { return be.width(); }

/// H(a), prep_f on a=0, prep_phi on a=1, U_alpha, U_s on a=1, U_alpha^dag, H(a).
inline qsim::Circuit overlap_circuit(const BlockEncoding &be, const qsim::Circuit &prep_f,
                                     const qsim::Circuit &prep_phi) {
    const int a = ancilla_qubit(be);
    qsim::Circuit c(be.width() + 1);
    const std::vector<int> anc{a};
    const std::vector<std::uint8_t> zero{0};
    const std::vector<std::uint8_t> one{1};
    c.add(qsim::gates::h(a));
    c.append(prep_f.controlled(anc, zero));
    c.append(prep_phi.controlled(anc, one));
    c.append(be.prep);
    c.append(be.select.controlled(anc, one));
    c.append(be.prep.inverse());
    c.add(qsim::gates::h(a));
    return c;
}

/// prep_phi, then the Hadamard test of U' on the same state.
inline qsim::Circuit quadratic_circuit(const BlockEncoding &be, const qsim::Circuit &prep_phi) {
    const int a = ancilla_qubit(be);
    qsim::Circuit c(be.width() + 1);
    const std::vector<int> anc{a};
    const std::vector<std::uint8_t> one{1};
    c.append(prep_phi);
    c.add(qsim::gates::h(a));
    c.append(be.prep);
    c.append(be.select.controlled(anc, one));
    c.append(be.prep.inverse());
    c.add(qsim::gates::h(a));
    return c;
}

/// P(qubit = 0) after running `circuit` on |0..0>.
inline double probability_zero(const qsim::Circuit &circuit, int qubit) {
    qsim::Statevector sv(circuit.num_qubits());
    sv.apply(circuit);
    const auto amps = sv.amplitudes();
    const std::uint64_t bit = std::uint64_t{1} << qubit;
    double p = 0.0;
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        if ((i & bit) == 0) {
            p += std::norm(amps[i]);
        }
    }
    return p;
}

inline CVector prepared_state(const qsim::Circuit &prep, int n) {
    qsim::Statevector sv(n);
    sv.apply(prep);
    return sv.to_vector();
}

namespace detail {

inline EstimatorResult sample(const qsim::Circuit &circuit, int ancilla, double eta,
                              const Mode &mode) {
    if (mode.shots == 0) {
        throw ConfigError("shot mode needs shots > 0");
    }
    const double p0 = std::clamp(probability_zero(circuit, ancilla), 0.0, 1.0);
    CounterRng rng(mode.seed);
    const auto zeros = rng.binomial(mode.shots, p0);
    const double shots = static_cast<double>(mode.shots);
    const double x = 2.0 * static_cast<double>(zeros) / shots - 1.0;
    EstimatorResult r;
    r.value = eta * x;
    r.mode = mode;
    r.std_error = eta * std::sqrt(std::max(0.0, 1.0 - x * x) / shots);
    r.probability_zero = p0;
    return r;
}

inline const CMatrix &realized(const BlockEncoding &be) {
    if (be.realized.size() == 0) {
        throw ConfigError("exact mode: system register too wide for the dense operator");
    }
    return be.realized;
}

} // namespace detail

/// Re<f|A|phi>.
inline EstimatorResult estimate_overlap(const BlockEncoding &be, const qsim::Circuit &prep_f,
                                        const qsim::Circuit &prep_phi, const Mode &mode) {
    if (mode.exact) {
        const CVector f = prepared_state(prep_f, be.num_qubits);
        const CVector phi = prepared_state(prep_phi, be.num_qubits);
        EstimatorResult r;
        r.value = f.dot(detail::realized(be) * phi).real();
        r.mode = mode;
        r.probability_zero = 0.5 * (1.0 + r.value / be.eta);
        return r;
    }
    return detail::sample(overlap_circuit(be, prep_f, prep_phi), ancilla_qubit(be), be.eta,
                          mode);
}

/// <phi|A^T A|phi> from a block encoding of A^T A.
inline EstimatorResult estimate_quadratic(const BlockEncoding &be_sq,
                                          const qsim::Circuit &prep_phi, const Mode &mode) {
    if (mode.exact) {
        const CVector phi = prepared_state(prep_phi, be_sq.num_qubits);
        EstimatorResult r;
        r.value = phi.dot(detail::realized(be_sq) * phi).real();
        r.mode = mode;
        r.probability_zero = 0.5 * (1.0 + r.value / be_sq.eta);
        return r;
    }
    return detail::sample(quadratic_circuit(be_sq, prep_phi), ancilla_qubit(be_sq),
                          be_sq.eta, mode);
}

/// r = Re<f|A|phi> / <phi|A^T A|phi>.
inline double amplitude_r(double overlap, double quadratic, double tol = 1e-14) {
    if (!(quadratic > tol)) {
        throw DegenerateState("amplitude_r: A|phi> vanishes");
    }
    return overlap / quadratic;
}

} // namespace hvqa::estimators
