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
 * Linear combinations of unitaries built from structured terms.
 *
 * A block is expanded in Pauli strings; each string becomes a unitary on
 * the low register, optionally tensored with a reflection on the high
 * register (projected terms use I0 = (I + R0)/2 and I1 = (I + R1)/2) and
 * conjugated by a cyclic shift. Complex and negative coefficients have
 * their phase moved into the unitary so every stored alpha is >= 0.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "blockstruct.hpp"
#include "errors.hpp"
#include "qsim.hpp"
#include "types.hpp"

namespace hvqa::lcu {

/// label[i] acts on qubit i of the block register.
struct PauliTerm {
    std::string label;
    Complex coefficient;
};

inline constexpr int max_pauli_qubits = 6;

namespace detail {

/// <x ^ xmask| P |x> for the string given by (xmask, zmask, #Y).
inline Complex pauli_phase(std::uint64_t x, std::uint64_t zmask, int num_y) {
    static constexpr Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const Complex base = ipow[num_y % 4];
    return (std::popcount(x & zmask) % 2 == 0) ? base : -base;
}

inline std::string label_of(std::uint64_t xmask, std::uint64_t zmask, int m) {
    std::string label(static_cast<std::size_t>(m), 'I');
    for (int q = 0; q < m; ++q) {
        const bool xb = (xmask >> q) & 1U;
        const bool zb = (zmask >> q) & 1U;
        label[static_cast<std::size_t>(q)] = xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : 'I');
    }
    return label;
}

inline void masks_of(const std::string &label, std::uint64_t &xmask, std::uint64_t &zmask,
                     int &num_y) {
    xmask = zmask = 0;
    num_y = 0;
    for (std::size_t q = 0; q < label.size(); ++q) {
        const std::uint64_t bit = std::uint64_t{1} << q;
        switch (label[q]) {
        case 'X':
            xmask |= bit;
            break;
        case 'Y':
            xmask |= bit;
            zmask |= bit;
            ++num_y;
            break;
        case 'Z':
            zmask |= bit;
            break;
        case 'I':
            break;
        default:
            throw InvalidInput("Pauli label must use I, X, Y, Z");
        }
    }
}

} // namespace detail

/// Dense matrix of a Pauli string.
inline CMatrix pauli_matrix(const std::string &label) {
    std::uint64_t xmask = 0;
    std::uint64_t zmask = 0;
    int num_y = 0;
    detail::masks_of(label, xmask, zmask, num_y);
    const auto dim = std::int64_t{1} << label.size();
    CMatrix out = CMatrix::Zero(dim, dim);
    for (std::int64_t x = 0; x < dim; ++x) {
        const auto ux = static_cast<std::uint64_t>(x);
        out(static_cast<std::int64_t>(ux ^ xmask), x) =
            detail::pauli_phase(ux, zmask, num_y);
    }
    return out;
}

/// Hilbert-Schmidt expansion block = sum c_P P, keeping |c_P| above
/// 1e-13 relative to max(1, max|block|). Sorted by label.
inline std::vector<PauliTerm> pauli_decompose(const CMatrix &block) {
    if (block.rows() != block.cols() || block.rows() == 0 ||
        !is_power_of_two(static_cast<std::size_t>(block.rows()))) {
        throw ConfigError("pauli_decompose: block must be 2^m x 2^m");
    }
    const int m = log2_exact(static_cast<std::size_t>(block.rows()));
    if (m > max_pauli_qubits) {
        throw ConfigError("pauli_decompose: block register wider than 6 qubits");
    }
    const auto dim = std::uint64_t{1} << m;
    const double cutoff = 1e-13 * std::max(1.0, block.cwiseAbs().maxCoeff());
    std::vector<PauliTerm> out;
    for (std::uint64_t xmask = 0; xmask < dim; ++xmask) {
        for (std::uint64_t zmask = 0; zmask < dim; ++zmask) {
            const int num_y = std::popcount(xmask & zmask);
            Complex trace = 0.0;
            for (std::uint64_t x = 0; x < dim; ++x) {
                trace += std::conj(detail::pauli_phase(x, zmask, num_y)) *
                         block(static_cast<std::int64_t>(x ^ xmask),
                               static_cast<std::int64_t>(x));
            }
            const Complex c = trace / static_cast<double>(dim);
            if (std::abs(c) > cutoff) {
                out.push_back({detail::label_of(xmask, zmask, m), c});
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const PauliTerm &a, const PauliTerm &b) { return a.label < b.label; });
    return out;
}

inline std::vector<PauliTerm> pauli_decompose(const Matrix &block) {
    return pauli_decompose(CMatrix(block.cast<Complex>()));
}

/// One alpha_j U_j with alpha_j >= 0.
struct LcuTerm {
    double alpha = 0.0;
    qsim::Circuit unitary;
    std::string source;   ///< structured term name
    std::string label;    ///< Pauli string on the block register
    std::int64_t shift = 0;
    blockstruct::Projector reflection = blockstruct::Projector::None;
    double phase = 0.0;   ///< folded phase
};

struct LcuProgram {
    int num_qubits = 0;
    std::string source;
    std::vector<LcuTerm> terms;

    [[nodiscard]] std::size_t size() const noexcept { return terms.size(); }

    [[nodiscard]] double eta() const {
        double s = 0.0;
        for (const auto &t : terms) {
            s += t.alpha;
        }
        return s;
    }

    /// sum_j alpha_j dense(U_j).
    [[nodiscard]] CMatrix dense() const {
        const auto dim = std::int64_t{1} << num_qubits;
        CMatrix out = CMatrix::Zero(dim, dim);
        for (const auto &t : terms) {
            out += t.alpha * qsim::dense(t.unitary);
        }
        return out;
    }

    /// Number of LCU unitaries per structured term, in order of appearance.
    [[nodiscard]] std::vector<std::pair<std::string, std::size_t>> counts_by_source() const {
        std::vector<std::pair<std::string, std::size_t>> out;
        for (const auto &t : terms) {
            if (out.empty() || out.back().first != t.source) {
                out.emplace_back(t.source, 0);
            }
            ++out.back().second;
        }
        return out;
    }
};

/// LCU fragment for one structured term on n qubits.
inline LcuProgram compile_term(const blockstruct::StructuredTerm &term, int n) {
    const int nb = term.block_qubits();
    if (nb > n) {
        throw ConfigError("compile_term: block register wider than the system");
    }
    LcuProgram out;
    out.num_qubits = n;
    out.source = term.name;

    std::vector<int> low(static_cast<std::size_t>(nb));
    std::iota(low.begin(), low.end(), 0);
    std::vector<int> high(static_cast<std::size_t>(n - nb));
    std::iota(high.begin(), high.end(), nb);
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);

    const bool projected = term.projector != blockstruct::Projector::None && !high.empty();
    std::vector<blockstruct::Projector> pieces{blockstruct::Projector::None};
    if (projected) {
        pieces.push_back(term.projector);
    }
    const double weight = projected ? 0.5 : 1.0;

    for (const auto &pt : pauli_decompose(term.block)) {
        const Complex c = static_cast<double>(term.sign) * weight * pt.coefficient;
        for (auto piece : pieces) {
            LcuTerm lt;
            lt.alpha = std::abs(c);
            lt.phase = std::arg(c);
            lt.source = term.name;
            lt.label = pt.label;
            lt.shift = term.shift;
            lt.reflection = piece;
            qsim::Circuit u(n);
            if (term.shift != 0) {
                u.add(qsim::gates::cyclic_shift(all, -term.shift));
            }
            if (pt.label.find_first_not_of('I') != std::string::npos) {
                u.add(qsim::gates::pauli_string(low, pt.label));
            }
            if (piece == blockstruct::Projector::Zeros) {
                u.add(qsim::gates::reflect_zeros(high));
            } else if (piece == blockstruct::Projector::Ones) {
                u.add(qsim::gates::reflect_ones(high));
            }
            if (lt.phase != 0.0) {
                u.add(qsim::gates::global_phase(lt.phase));
            }
            if (term.shift != 0) {
                u.add(qsim::gates::cyclic_shift(all, term.shift));
            }
            lt.unitary = std::move(u);
            out.terms.push_back(std::move(lt));
        }
    }
    return out;
}

inline LcuProgram compile_full(const std::vector<blockstruct::StructuredTerm> &terms, int n,
                               std::string source = {}) {
    LcuProgram out;
    out.num_qubits = n;
    out.source = std::move(source);
    for (const auto &term : terms) {
        auto fragment = compile_term(term, n);
        for (auto &t : fragment.terms) {
            out.terms.push_back(std::move(t));
        }
    }
    return out;
}

/// Text manifest: one line per unitary.
inline std::string manifest(const LcuProgram &program) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "# lcu source=" << (program.source.empty() ? "-" : program.source)
        << " qubits=" << program.num_qubits << " terms=" << program.size()
        << " eta=" << program.eta() << '\n';
    out << "# index term alpha phase shift reflection pauli\n";
    for (std::size_t j = 0; j < program.terms.size(); ++j) {
        const auto &t = program.terms[j];
        out << j << ' ' << t.source << ' ' << t.alpha << ' ' << t.phase << ' ' << t.shift
            << ' ' << blockstruct::to_string(t.reflection) << ' '
            << (t.label.empty() ? "-" : t.label) << '\n';
    }
    return out.str();
}

} // namespace hvqa::lcu
