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
 * Circuit IR and statevector simulator.
 *
 * Qubit ordering is little-endian: qubit q is bit q of the amplitude index.
 * RY(t) = exp(-i t Y / 2), RZ(t) = exp(-i t Z / 2), Phase(t) = diag(1, e^{it}).
 *
 * Besides ordinary one-qubit gates (with any number of controls, each
 * conditioned on |0> or |1>), the IR has composite gates: Pauli strings,
 * the reflections R0 = 2|0..0><0..0| - I and R1 = 2|1..1><1..1| - I, and
 * cyclic shifts |j> -> |j + s mod 2^r> on a register. The simulator applies
 * composite gates directly; `lower` rewrites them into elementary gates
 * (one-qubit gates with at most one control, and X with at most two
 * controls) without ancillas, and depth figures come from the lowered form.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "types.hpp"

namespace hvqa::qsim {

enum class GateKind {
    H,
    X,
    Y,
    Z,
    RY,
    RZ,
    Phase,
    Unitary,
    GlobalPhase,
    PauliString,
    ReflectZeros,
    ReflectOnes,
    CyclicShift,
};

/// Row-major 2x2 matrix.
using Mat2 = std::array<Complex, 4>;

inline Mat2 adjoint(const Mat2 &m) {
    return {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])};
}

inline Mat2 multiply(const Mat2 &a, const Mat2 &b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

/// Principal square root of a 2x2 unitary.
inline Mat2 sqrt_unitary(const Mat2 &m) {
    const Complex det = m[0] * m[3] - m[1] * m[2];
    const Complex tr = m[0] + m[3];
    Complex s = std::sqrt(det);
    Complex denom = std::sqrt(tr + 2.0 * s);
    if (std::abs(denom) < 1e-8) {
        s = -s;
        denom = std::sqrt(tr + 2.0 * s);
    }
    if (std::abs(denom) < 1e-8) {
        // m = lambda * I with the opposite-sign branch also degenerate.
        const Complex r = std::sqrt(m[0]);
        return {r, 0.0, 0.0, r};
    }
    return {(m[0] + s) / denom, m[1] / denom, m[2] / denom, (m[3] + s) / denom};
}

inline const char *to_string(GateKind kind) {
    switch (kind) {
    case GateKind::H:
        return "H";
    case GateKind::X:
        return "X";
    case GateKind::Y:
        return "Y";
    case GateKind::Z:
        return "Z";
    case GateKind::RY:
        return "RY";
    case GateKind::RZ:
        return "RZ";
    case GateKind::Phase:
        return "PHASE";
    case GateKind::Unitary:
        return "U";
    case GateKind::GlobalPhase:
        return "GPHASE";
    case GateKind::PauliString:
        return "PAULI";
    case GateKind::ReflectZeros:
        return "R0";
    case GateKind::ReflectOnes:
        return "R1";
    case GateKind::CyclicShift:
        return "SHIFT";
    }
    return "?";
}

inline bool is_single_qubit_kind(GateKind kind) {
    switch (kind) {
    case GateKind::H:
    case GateKind::X:
    case GateKind::Y:
    case GateKind::Z:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::Phase:
    case GateKind::Unitary:
        return true;
    default:
        return false;
    }
}

struct Gate {
    GateKind kind = GateKind::X;
    std::vector<int> targets;
    std::vector<int> controls;
    std::vector<std::uint8_t> control_states; ///< 1: control on |1>, 0: on |0>
    double angle = 0.0;
    std::int64_t shift = 0;
    std::string pauli; ///< pauli[i] acts on targets[i]
    Mat2 matrix{};     ///< GateKind::Unitary only

    /// 2x2 matrix of a single-qubit kind.
    [[nodiscard]] Mat2 matrix2() const {
        using namespace std::complex_literals;
        const double c = std::cos(angle / 2);
        const double s = std::sin(angle / 2);
        const double r = 1.0 / std::sqrt(2.0);
        switch (kind) {
        case GateKind::H:
            return {r, r, r, -r};
        case GateKind::X:
            return {0.0, 1.0, 1.0, 0.0};
        case GateKind::Y:
            return {0.0, -1i, 1i, 0.0};
        case GateKind::Z:
            return {1.0, 0.0, 0.0, -1.0};
        case GateKind::RY:
            return {c, -s, s, c};
        case GateKind::RZ:
            return {std::polar(1.0, -angle / 2), 0.0, 0.0, std::polar(1.0, angle / 2)};
        case GateKind::Phase:
            return {1.0, 0.0, 0.0, std::polar(1.0, angle)};
        case GateKind::Unitary:
            return matrix;
        default:
            throw InvalidInput("matrix2: not a single-qubit gate");
        }
    }

    [[nodiscard]] std::vector<int> qubits() const {
        std::vector<int> q = targets;
        q.insert(q.end(), controls.begin(), controls.end());
        return q;
    }

    [[nodiscard]] Gate inverse() const {
        Gate g = *this;
        switch (kind) {
        case GateKind::RY:
        case GateKind::RZ:
        case GateKind::Phase:
        case GateKind::GlobalPhase:
            g.angle = -angle;
            break;
        case GateKind::Unitary:
            g.matrix = adjoint(matrix);
            break;
        case GateKind::CyclicShift:
            g.shift = -shift;
            break;
        default:
            break;
        }
        return g;
    }

    /// Copy with additional controls appended.
    [[nodiscard]] Gate with_controls(std::span<const int> extra,
                                     std::span<const std::uint8_t> states) const {
        Gate g = *this;
        g.controls.insert(g.controls.end(), extra.begin(), extra.end());
        g.control_states.insert(g.control_states.end(), states.begin(), states.end());
        return g;
    }
};

namespace gates {

inline Gate single(GateKind kind, int q, double angle = 0.0) {
    Gate g;
    g.kind = kind;
    g.targets = {q};
    g.angle = angle;
    return g;
}
inline Gate h(int q) { return single(GateKind::H, q); }
inline Gate x(int q) { return single(GateKind::X, q); }
inline Gate y(int q) { return single(GateKind::Y, q); }
inline Gate z(int q) { return single(GateKind::Z, q); }
inline Gate ry(int q, double theta) { return single(GateKind::RY, q, theta); }
inline Gate rz(int q, double theta) { return single(GateKind::RZ, q, theta); }
inline Gate phase(int q, double phi) { return single(GateKind::Phase, q, phi); }

inline Gate unitary(int q, const Mat2 &m) {
    Gate g = single(GateKind::Unitary, q);
    g.matrix = m;
    return g;
}

inline Gate controlled(Gate g, std::vector<int> controls) {
    g.control_states.assign(controls.size(), 1);
    g.controls = std::move(controls);
    return g;
}

inline Gate cnot(int control, int target) { return controlled(x(target), {control}); }
inline Gate toffoli(int c1, int c2, int target) {
    return controlled(x(target), {c1, c2});
}
inline Gate mcx(std::vector<int> controls, int target) {
    return controlled(x(target), std::move(controls));
}

inline Gate global_phase(double phi) {
    Gate g;
    g.kind = GateKind::GlobalPhase;
    g.angle = phi;
    return g;
}

inline Gate pauli_string(std::vector<int> targets, std::string label) {
    Gate g;
    g.kind = GateKind::PauliString;
    g.targets = std::move(targets);
    g.pauli = std::move(label);
    return g;
}

inline Gate reflect_zeros(std::vector<int> qubits) {
    Gate g;
    g.kind = GateKind::ReflectZeros;
    g.targets = std::move(qubits);
    return g;
}

inline Gate reflect_ones(std::vector<int> qubits) {
    Gate g;
    g.kind = GateKind::ReflectOnes;
    g.targets = std::move(qubits);
    return g;
}

/// |j> -> |j + s mod 2^r> on the register `qubits` (qubits[0] least significant).
inline Gate cyclic_shift(std::vector<int> qubits, std::int64_t s) {
    Gate g;
    g.kind = GateKind::CyclicShift;
    g.targets = std::move(qubits);
    g.shift = s;
    return g;
}

} // namespace gates

class Circuit {
  public:
    Circuit() = default;
    explicit Circuit(int num_qubits) : num_qubits_(num_qubits) {
        if (num_qubits < 0 || num_qubits > 62) {
            throw ConfigError("Circuit: unsupported qubit count");
        }
    }

    [[nodiscard]] int num_qubits() const noexcept { return num_qubits_; }
    [[nodiscard]] const std::vector<Gate> &gates() const noexcept { return gates_; }
    [[nodiscard]] std::size_t size() const noexcept { return gates_.size(); }
    [[nodiscard]] bool empty() const noexcept { return gates_.empty(); }

    Circuit &add(Gate g) {
        validate(g);
        gates_.push_back(std::move(g));
        return *this;
    }

    Circuit &append(const Circuit &other) {
        if (other.num_qubits_ > num_qubits_) {
            throw ConfigError("Circuit::append: circuit is wider than the target");
        }
        gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
        return *this;
    }

    [[nodiscard]] Circuit inverse() const {
        Circuit out(num_qubits_);
        out.gates_.reserve(gates_.size());
        for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
            out.gates_.push_back(it->inverse());
        }
        return out;
    }

    /// Every gate gets the extra controls; the result widens to hold them.
    [[nodiscard]] Circuit controlled(std::span<const int> controls,
                                     std::span<const std::uint8_t> states) const {
        int width = num_qubits_;
        for (int q : controls) {
            width = std::max(width, q + 1);
        }
        Circuit out(width);
        for (const auto &g : gates_) {
            out.add(g.with_controls(controls, states));
        }
        return out;
    }

    /// Relabel qubit q as mapping[q] in a circuit of width `width`.
    [[nodiscard]] Circuit remapped(std::span<const int> mapping, int width) const {
        if (static_cast<int>(mapping.size()) < num_qubits_) {
            throw ConfigError("Circuit::remapped: mapping too short");
        }
        Circuit out(width);
        for (Gate g : gates_) {
            for (auto &q : g.targets) {
                q = mapping[static_cast<std::size_t>(q)];
            }
            for (auto &q : g.controls) {
                q = mapping[static_cast<std::size_t>(q)];
            }
            out.add(std::move(g));
        }
        return out;
    }

  private:
    void validate(const Gate &g) const {
        if (g.controls.size() != g.control_states.size()) {
            throw InvalidInput("gate: controls and control_states differ in length");
        }
        const auto all = g.qubits();
        for (int q : all) {
            if (q < 0 || q >= num_qubits_) {
                std::ostringstream msg;
                msg << "gate " << to_string(g.kind) << ": qubit index " << q
                    << " out of range for " << num_qubits_ << " qubits";
                throw std::out_of_range(msg.str());
            }
        }
        auto sorted = all;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw InvalidInput("gate: repeated qubit");
        }
        if (is_single_qubit_kind(g.kind) && g.targets.size() != 1) {
            throw InvalidInput("gate: single-qubit kind needs exactly one target");
        }
        if (g.kind == GateKind::GlobalPhase && !g.targets.empty()) {
            throw InvalidInput("gate: global phase takes no targets");
        }
        if (g.kind == GateKind::PauliString) {
            if (g.pauli.size() != g.targets.size()) {
                throw InvalidInput("gate: Pauli label length differs from targets");
            }
            for (char c : g.pauli) {
                if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
                    throw InvalidInput("gate: Pauli label must use I, X, Y, Z");
                }
            }
        }
        if ((g.kind == GateKind::ReflectZeros || g.kind == GateKind::ReflectOnes ||
             g.kind == GateKind::CyclicShift) &&
            g.targets.empty()) {
            throw InvalidInput("gate: register must not be empty");
        }
    }

    int num_qubits_ = 0;
    std::vector<Gate> gates_;
};

class Statevector {
  public:
    explicit Statevector(int num_qubits)
        : num_qubits_(num_qubits), amps_(std::size_t{1} << num_qubits, Complex{0.0}) {
        amps_[0] = 1.0;
    }

    Statevector(int num_qubits, std::vector<Complex> amplitudes)
        : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {
        if (amps_.size() != (std::size_t{1} << num_qubits)) {
            throw InvalidInput("Statevector: amplitude count must be 2^n");
        }
    }

    static Statevector basis(int num_qubits, std::size_t index) {
        Statevector sv(num_qubits);
        sv.amps_[0] = 0.0;
        sv.amps_.at(index) = 1.0;
        return sv;
    }

    [[nodiscard]] int num_qubits() const noexcept { return num_qubits_; }
    [[nodiscard]] std::size_t size() const noexcept { return amps_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const noexcept { return amps_; }
    [[nodiscard]] std::span<Complex> amplitudes() noexcept { return amps_; }
    [[nodiscard]] Complex operator[](std::size_t i) const { return amps_[i]; }

    [[nodiscard]] double norm() const {
        double s = 0.0;
        for (const auto &a : amps_) {
            s += std::norm(a);
        }
        return std::sqrt(s);
    }

    /// <this|other>
    [[nodiscard]] Complex inner(const Statevector &other) const {
        Complex s = 0.0;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            s += std::conj(amps_[i]) * other.amps_[i];
        }
        return s;
    }

    [[nodiscard]] CVector to_vector() const {
        CVector v(static_cast<Eigen::Index>(amps_.size()));
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            v(static_cast<Eigen::Index>(i)) = amps_[i];
        }
        return v;
    }

    void apply(const Circuit &circuit) {
        if (circuit.num_qubits() > num_qubits_) {
            throw std::out_of_range("Statevector::apply: circuit wider than state");
        }
        for (const auto &g : circuit.gates()) {
            apply(g);
        }
    }

    void apply(const Gate &g) {
        for (int q : g.qubits()) {
            if (q < 0 || q >= num_qubits_) {
                throw std::out_of_range("Statevector::apply: qubit index out of range");
            }
        }
        std::uint64_t cmask = 0;
        std::uint64_t cval = 0;
        for (std::size_t i = 0; i < g.controls.size(); ++i) {
            const std::uint64_t bit = std::uint64_t{1} << g.controls[i];
            cmask |= bit;
            if (g.control_states[i] != 0) {
                cval |= bit;
            }
        }
        if (is_single_qubit_kind(g.kind)) {
            apply_single(g.matrix2(), g.targets[0], cmask, cval);
            return;
        }
        switch (g.kind) {
        case GateKind::GlobalPhase:
            apply_diagonal(cmask, cval, 0, 0, std::polar(1.0, g.angle),
                           std::polar(1.0, g.angle));
            break;
        case GateKind::PauliString:
            apply_pauli(g, cmask, cval);
            break;
        case GateKind::ReflectZeros:
        case GateKind::ReflectOnes: {
            std::uint64_t qmask = 0;
            for (int q : g.targets) {
                qmask |= std::uint64_t{1} << q;
            }
            const std::uint64_t pattern = g.kind == GateKind::ReflectZeros ? 0 : qmask;
            apply_diagonal(cmask, cval, qmask, pattern, 1.0, -1.0);
            break;
        }
        case GateKind::CyclicShift:
            apply_shift(g, cmask, cval);
            break;
        default:
            throw InvalidInput("Statevector::apply: unsupported gate");
        }
    }

  private:
    /// Calls fn(base) for every index with control bits at cval and the
    /// bits of `fixed` cleared.
    template <class Fn>
    void for_each_base(std::uint64_t cmask, std::uint64_t cval, std::uint64_t fixed,
                       Fn &&fn) const {
        const std::uint64_t all = amps_.size() - 1;
        const std::uint64_t free = all & ~(cmask | fixed);
        std::uint64_t x = 0;
        do {
            fn(x | cval);
            x = (x - free) & free;
        } while (x != 0);
    }

    void apply_single(const Mat2 &m, int target, std::uint64_t cmask,
                      std::uint64_t cval) {
        const std::uint64_t tbit = std::uint64_t{1} << target;
        for_each_base(cmask, cval, tbit, [&](std::uint64_t i0) {
            const std::uint64_t i1 = i0 | tbit;
            const Complex a0 = amps_[i0];
            const Complex a1 = amps_[i1];
            amps_[i0] = m[0] * a0 + m[1] * a1;
            amps_[i1] = m[2] * a0 + m[3] * a1;
        });
    }

    /// Multiply amplitude i by `on` if (i & qmask) == pattern, else by `off`.
    void apply_diagonal(std::uint64_t cmask, std::uint64_t cval, std::uint64_t qmask,
                        std::uint64_t pattern, Complex on, Complex off) {
        for_each_base(cmask, cval, 0, [&](std::uint64_t i) {
            amps_[i] *= ((i & qmask) == pattern) ? on : off;
        });
    }

    void apply_pauli(const Gate &g, std::uint64_t cmask, std::uint64_t cval) {
        std::uint64_t xmask = 0;
        std::uint64_t zmask = 0;
        int num_y = 0;
        for (std::size_t i = 0; i < g.targets.size(); ++i) {
            const std::uint64_t bit = std::uint64_t{1} << g.targets[i];
            switch (g.pauli[i]) {
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
            default:
                break;
            }
        }
        // P|i> = i^{#Y} (-1)^{|i & zmask|} |i ^ xmask>
        static constexpr std::array<Complex, 4> ipow{Complex{1, 0}, Complex{0, 1},
                                                     Complex{-1, 0}, Complex{0, -1}};
        const Complex base_phase = ipow[static_cast<std::size_t>(num_y % 4)];
        auto phase = [&](std::uint64_t i) {
            return (std::popcount(i & zmask) % 2 == 0) ? base_phase : -base_phase;
        };
        if (xmask == 0) {
            for_each_base(cmask, cval, 0, [&](std::uint64_t i) { amps_[i] *= phase(i); });
            return;
        }
        const std::uint64_t pivot = xmask & (~xmask + 1); // lowest flipped bit
        for_each_base(cmask, cval, pivot, [&](std::uint64_t i) {
            const std::uint64_t j = i ^ xmask;
            const Complex ai = amps_[i];
            const Complex aj = amps_[j];
            amps_[j] = phase(i) * ai;
            amps_[i] = phase(j) * aj;
        });
    }

    void apply_shift(const Gate &g, std::uint64_t cmask, std::uint64_t cval) {
        const auto r = g.targets.size();
        const std::uint64_t dim = std::uint64_t{1} << r;
        std::uint64_t qmask = 0;
        std::vector<std::uint64_t> offsets(dim, 0);
        for (std::uint64_t v = 0; v < dim; ++v) {
            for (std::size_t b = 0; b < r; ++b) {
                if ((v >> b) & 1U) {
                    offsets[v] |= std::uint64_t{1} << g.targets[b];
                }
            }
        }
        for (int q : g.targets) {
            qmask |= std::uint64_t{1} << q;
        }
        const auto sdim = static_cast<std::int64_t>(dim);
        const auto s = static_cast<std::uint64_t>(((g.shift % sdim) + sdim) % sdim);
        if (s == 0) {
            return;
        }
        std::vector<Complex> tmp(dim);
        for_each_base(cmask, cval, qmask, [&](std::uint64_t base) {
            for (std::uint64_t v = 0; v < dim; ++v) {
                tmp[v] = amps_[base | offsets[v]];
            }
            for (std::uint64_t v = 0; v < dim; ++v) {
                amps_[base | offsets[(v + s) & (dim - 1)]] = tmp[v];
            }
        });
    }

    int num_qubits_;
    std::vector<Complex> amps_;
};

/// Dense unitary of a circuit (column j = circuit applied to |j>).
inline CMatrix dense(const Circuit &circuit) {
    const int n = circuit.num_qubits();
    if (n > 12) {
        throw ConfigError("dense: refusing dense form beyond 12 qubits");
    }
    const auto dim = std::size_t{1} << n;
    CMatrix out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
        auto sv = Statevector::basis(n, j);
        sv.apply(circuit);
        out.col(static_cast<Eigen::Index>(j)) = sv.to_vector();
    }
    return out;
}

inline CMatrix dense(const Gate &g, int num_qubits) {
    Circuit c(num_qubits);
    c.add(g);
    return dense(c);
}

/// Critical-path depth: a gate occupies one layer on every qubit it touches
/// (targets and controls); gates on disjoint qubits share a layer. Global
/// phases without controls take no layer.
class DepthCounter {
  public:
    explicit DepthCounter(int num_qubits)
        : level_(static_cast<std::size_t>(num_qubits), 0) {}

    void operator()(const Gate &g) {
        int start = 0;
        const auto qs = g.qubits();
        if (qs.empty()) {
            return;
        }
        for (int q : qs) {
            start = std::max(start, level_[static_cast<std::size_t>(q)]);
        }
        for (int q : qs) {
            level_[static_cast<std::size_t>(q)] = start + 1;
        }
        depth_ = std::max(depth_, start + 1);
        ++count_;
    }

    [[nodiscard]] int depth() const noexcept { return depth_; }
    [[nodiscard]] std::size_t gate_count() const noexcept { return count_; }

  private:
    std::vector<int> level_;
    int depth_ = 0;
    std::size_t count_ = 0;
};

inline int depth(const Circuit &circuit) {
    DepthCounter counter(circuit.num_qubits());
    for (const auto &g : circuit.gates()) {
        counter(g);
    }
    return counter.depth();
}

/// One-qubit gates with at most one control, X with at most two controls,
/// uncontrolled global phase; every control on |1>.
inline bool is_elementary(const Gate &g) {
    if (std::any_of(g.control_states.begin(), g.control_states.end(),
                    [](std::uint8_t s) { return s == 0; })) {
        return false;
    }
    if (g.kind == GateKind::GlobalPhase) {
        return g.controls.empty();
    }
    if (!is_single_qubit_kind(g.kind)) {
        return false;
    }
    return g.controls.size() <= (g.kind == GateKind::X ? 2U : 1U);
}

namespace detail {

template <class Sink> class Lowerer {
  public:
    Lowerer(int num_qubits, Sink &sink) : n_(num_qubits), sink_(sink) {}

    void gate(const Gate &g) {
        if (std::any_of(g.control_states.begin(), g.control_states.end(),
                        [](std::uint8_t s) { return s == 0; })) {
            std::vector<int> flipped;
            for (std::size_t i = 0; i < g.controls.size(); ++i) {
                if (g.control_states[i] == 0) {
                    flipped.push_back(g.controls[i]);
                }
            }
            for (int q : flipped) {
                emit(gates::x(q));
            }
            Gate positive = g;
            std::fill(positive.control_states.begin(), positive.control_states.end(), 1);
            gate(positive);
            for (int q : flipped) {
                emit(gates::x(q));
            }
            return;
        }
        if (is_elementary(g)) {
            emit(g);
            return;
        }
        const auto &c = g.controls;
        switch (g.kind) {
        case GateKind::GlobalPhase: {
            std::vector<int> rest(c.begin(), c.end() - 1);
            gate(gates::controlled(gates::phase(c.back(), g.angle), rest));
            break;
        }
        case GateKind::X:
            mcx(c, g.targets[0]);
            break;
        case GateKind::Z:
            emit(gates::h(g.targets[0]));
            mcx(c, g.targets[0]);
            emit(gates::h(g.targets[0]));
            break;
        case GateKind::H:
        case GateKind::Y:
        case GateKind::RY:
        case GateKind::RZ:
        case GateKind::Phase:
        case GateKind::Unitary:
            mcu(c, g.targets[0], g.matrix2());
            break;
        case GateKind::PauliString:
            for (std::size_t i = 0; i < g.targets.size(); ++i) {
                if (g.pauli[i] == 'I') {
                    continue;
                }
                const GateKind kind = g.pauli[i] == 'X'   ? GateKind::X
                                      : g.pauli[i] == 'Y' ? GateKind::Y
                                                          : GateKind::Z;
                gate(gates::controlled(gates::single(kind, g.targets[i]), c));
            }
            break;
        case GateKind::ReflectZeros:
            if (g.targets.size() == 1) {
                gate(gates::controlled(gates::z(g.targets[0]), c));
                break;
            }
            for (int q : g.targets) {
                emit(gates::x(q));
            }
            multi_z(g.targets, c);
            for (int q : g.targets) {
                emit(gates::x(q));
            }
            gate(gates::controlled(gates::global_phase(pi), c));
            break;
        case GateKind::ReflectOnes:
            multi_z(g.targets, c);
            gate(gates::controlled(gates::global_phase(pi), c));
            break;
        case GateKind::CyclicShift:
            shift(g.targets, g.shift, c);
            break;
        }
    }

  private:
    void emit(const Gate &g) { sink_(g); }

    void multi_z(const std::vector<int> &reg, const std::vector<int> &controls) {
        std::vector<int> ctrl(reg.begin(), reg.end() - 1);
        ctrl.insert(ctrl.end(), controls.begin(), controls.end());
        gate(gates::controlled(gates::z(reg.back()), ctrl));
    }

    void shift(const std::vector<int> &reg, std::int64_t s,
               const std::vector<int> &controls) {
        const auto r = static_cast<int>(reg.size());
        const std::int64_t dim = std::int64_t{1} << r;
        s %= dim;
        if (s == 0) {
            return;
        }
        if (s < 0) {
            // Decrement: inverse of the increment circuit, gate by gate.
            std::vector<Gate> buffer;
            std::function<void(const Gate &)> collect = [&buffer](const Gate &g) {
                buffer.push_back(g);
            };
            Lowerer<std::function<void(const Gate &)>> inner(n_, collect);
            inner.gate(gates::controlled(gates::cyclic_shift(reg, -s), controls));
            for (auto it = buffer.rbegin(); it != buffer.rend(); ++it) {
                emit(it->inverse());
            }
            return;
        }
        for (int b = 0; b < r; ++b) {
            if (((s >> b) & 1) == 0) {
                continue;
            }
            // Adding 2^b increments the sub-register reg[b..r-1].
            for (int i = r - 1; i >= b; --i) {
                std::vector<int> ctrl(reg.begin() + b, reg.begin() + i);
                ctrl.insert(ctrl.end(), controls.begin(), controls.end());
                gate(gates::mcx(ctrl, reg[static_cast<std::size_t>(i)]));
            }
        }
    }

    [[nodiscard]] std::vector<int> free_qubits(const std::vector<int> &controls,
                                               int target) const {
        std::vector<bool> used(static_cast<std::size_t>(n_), false);
        for (int q : controls) {
            used[static_cast<std::size_t>(q)] = true;
        }
        used[static_cast<std::size_t>(target)] = true;
        std::vector<int> out;
        for (int q = 0; q < n_; ++q) {
            if (!used[static_cast<std::size_t>(q)]) {
                out.push_back(q);
            }
        }
        return out;
    }

    /// Multi-controlled X. Borrows idle qubits as dirty ancillas when there
    /// are any, otherwise splits off one control through a square root.
    void mcx(const std::vector<int> &controls, int target) {
        const auto k = controls.size();
        if (k <= 2) {
            emit(gates::mcx(controls, target));
            return;
        }
        const auto free = free_qubits(controls, target);
        if (free.size() >= k - 2) {
            toffoli_chain(controls, std::span<const int>(free).first(k - 2), target);
            return;
        }
        if (!free.empty()) {
            const int ancilla = free.front();
            const auto m1 = (k + 1) / 2;
            std::vector<int> first(controls.begin(),
                                   controls.begin() + static_cast<std::ptrdiff_t>(m1));
            std::vector<int> second(controls.begin() + static_cast<std::ptrdiff_t>(m1),
                                    controls.end());
            second.push_back(ancilla);
            for (int rep = 0; rep < 2; ++rep) {
                mcx(first, ancilla);
                mcx(second, target);
            }
            return;
        }
        split_root(controls, target, gates::x(target).matrix2());
    }

    /// k-controlled X from 4(k-2) Toffolis using k-2 dirty ancillas.
    void toffoli_chain(const std::vector<int> &c, std::span<const int> a, int t) {
        const auto m = static_cast<int>(c.size());
        auto C = [&](int i) { return c[static_cast<std::size_t>(i)]; };
        auto A = [&](int i) { return a[static_cast<std::size_t>(i)]; };
        auto down = [&] {
            for (int i = m - 2; i >= 2; --i) {
                emit(gates::toffoli(C(i), A(i - 2), A(i - 1)));
            }
        };
        auto up = [&] {
            for (int i = 2; i <= m - 2; ++i) {
                emit(gates::toffoli(C(i), A(i - 2), A(i - 1)));
            }
        };
        for (int rep = 0; rep < 2; ++rep) {
            emit(gates::toffoli(C(m - 1), A(m - 3), t));
            down();
            emit(gates::toffoli(C(0), C(1), A(0)));
            up();
        }
    }

    /// Multi-controlled single-qubit unitary.
    void mcu(const std::vector<int> &controls, int target, const Mat2 &u) {
        if (controls.size() <= 1) {
            emit(gates::controlled(gates::unitary(target, u), controls));
            return;
        }
        split_root(controls, target, u);
    }

    /// C^k(U) = C_c(V) . C^{k-1}X[->c] . C_c(V^dag) . C^{k-1}X[->c] . C^{k-1}(V)
    /// with V^2 = U and c the last control.
    void split_root(const std::vector<int> &controls, int target, const Mat2 &u) {
        const Mat2 v = sqrt_unitary(u);
        const int last = controls.back();
        std::vector<int> rest(controls.begin(), controls.end() - 1);
        emit(gates::controlled(gates::unitary(target, v), {last}));
        mcx(rest, last);
        emit(gates::controlled(gates::unitary(target, adjoint(v)), {last}));
        mcx(rest, last);
        mcu(rest, target, v);
    }

    int n_;
    Sink &sink_;
};

} // namespace detail

/// Stream the elementary-gate form of `circuit` into `sink`.
template <class Sink> void lower(const Circuit &circuit, Sink &&sink) {
    detail::Lowerer<std::remove_reference_t<Sink>> lowerer(circuit.num_qubits(), sink);
    for (const auto &g : circuit.gates()) {
        lowerer.gate(g);
    }
}

inline Circuit lower(const Circuit &circuit) {
    Circuit out(circuit.num_qubits());
    lower(circuit, [&out](const Gate &g) { out.add(g); });
    return out;
}

/// Depth of the elementary-gate form, without materializing it.
inline int lowered_depth(const Circuit &circuit) {
    DepthCounter counter(circuit.num_qubits());
    lower(circuit, counter);
    return counter.depth();
}

/// Gate-level |j> -> |j + s mod 2^n> on all n qubits.
inline Circuit cyclic_shift_circuit(int n, std::int64_t s) {
    if (n < 1) {
        throw ConfigError("cyclic_shift_circuit: need at least one qubit");
    }
    std::vector<int> reg(static_cast<std::size_t>(n));
    std::iota(reg.begin(), reg.end(), 0);
    Circuit c(n);
    c.add(gates::cyclic_shift(reg, s));
    return lower(c);
}

/// RY-tree preparing a real amplitude vector from |0..0>. Qubit offsets
/// start at `first_qubit` inside a register of width `width` (0: minimal).
inline Circuit state_prep(std::span<const double> amplitudes, int first_qubit = 0,
                          int width = 0) {
    const auto dim = amplitudes.size();
    if (dim == 0 || !is_power_of_two(dim)) {
        throw InvalidInput("state_prep: length must be a power of two");
    }
    const int m = log2_exact(dim);
    if (m > 16) {
        throw ConfigError("state_prep: register too large");
    }
    double norm2 = 0.0;
    for (double a : amplitudes) {
        norm2 += a * a;
    }
    if (std::abs(norm2 - 1.0) > 1e-10) {
        throw InvalidInput("state_prep: amplitudes are not normalized");
    }
    Circuit c(width > 0 ? width : first_qubit + m);
    if (m == 0) {
        return c;
    }
    // Tree of partial norms: level l has 2^l nodes covering blocks of size 2^{m-l}.
    // The top qubit (m-1) splits first.
    for (int level = 0; level < m; ++level) {
        const int qubit = m - 1 - level;
        const std::size_t block = std::size_t{1} << (qubit + 1);
        const std::size_t half = block / 2;
        for (std::size_t prefix = 0; prefix < (std::size_t{1} << level); ++prefix) {
            const std::size_t start = prefix * block;
            double lo = 0.0;
            double hi = 0.0;
            if (qubit == 0) {
                lo = amplitudes[start];
                hi = amplitudes[start + 1];
            } else {
                for (std::size_t i = 0; i < half; ++i) {
                    lo += amplitudes[start + i] * amplitudes[start + i];
                    hi += amplitudes[start + half + i] * amplitudes[start + half + i];
                }
                lo = std::sqrt(lo);
                hi = std::sqrt(hi);
            }
            const double angle = 2.0 * std::atan2(hi, lo);
            if (std::abs(angle) < 1e-15 || (lo == 0.0 && hi == 0.0)) {
                continue;
            }
            Gate g = gates::ry(first_qubit + qubit, angle);
            for (int l = 0; l < level; ++l) {
                const int ctrl_qubit = m - 1 - l;
                g.controls.push_back(first_qubit + ctrl_qubit);
                // Prefix bit for qubit ctrl_qubit: bit (ctrl_qubit - qubit - 1) of prefix.
                g.control_states.push_back(
                    static_cast<std::uint8_t>((prefix >> (ctrl_qubit - qubit - 1)) & 1U));
            }
            c.add(std::move(g));
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// Text format: "qubits <n>" then one gate per line,
//   <KIND> t=<q,..> [c=<q,..> cs=<0|1,..>] [a=<angle>] [s=<shift>] [p=<label>]
//   [m=<re,im x4>]

inline std::string to_text(const Circuit &circuit) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "qubits " << circuit.num_qubits() << '\n';
    auto list = [&out](const auto &values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            out << (i ? "," : "") << static_cast<long long>(values[i]);
        }
    };
    for (const auto &g : circuit.gates()) {
        out << to_string(g.kind);
        if (!g.targets.empty()) {
            out << " t=";
            list(g.targets);
        }
        if (!g.controls.empty()) {
            out << " c=";
            list(g.controls);
            out << " cs=";
            list(g.control_states);
        }
        switch (g.kind) {
        case GateKind::RY:
        case GateKind::RZ:
        case GateKind::Phase:
        case GateKind::GlobalPhase:
            out << " a=" << g.angle;
            break;
        case GateKind::CyclicShift:
            out << " s=" << g.shift;
            break;
        case GateKind::PauliString:
            out << " p=" << g.pauli;
            break;
        case GateKind::Unitary:
            out << " m=";
            for (std::size_t i = 0; i < 4; ++i) {
                out << (i ? "," : "") << g.matrix[i].real() << ',' << g.matrix[i].imag();
            }
            break;
        default:
            break;
        }
        out << '\n';
    }
    return out.str();
}

inline Circuit from_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string word;
    int n = 0;
    if (!(in >> word >> n) || word != "qubits") {
        throw InvalidInput("from_text: missing 'qubits <n>' header");
    }
    Circuit circuit(n);
    std::string line;
    std::getline(in, line);
    auto split_numbers = [](const std::string &s) {
        std::vector<double> values;
        std::istringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            values.push_back(std::stod(item));
        }
        return values;
    };
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::string kind_name;
        ls >> kind_name;
        Gate g;
        bool found = false;
        for (int k = 0; k <= static_cast<int>(GateKind::CyclicShift); ++k) {
            if (kind_name == to_string(static_cast<GateKind>(k))) {
                g.kind = static_cast<GateKind>(k);
                found = true;
            }
        }
        if (!found) {
            throw InvalidInput("from_text: unknown gate '" + kind_name + "'");
        }
        std::string field;
        while (ls >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos) {
                throw InvalidInput("from_text: malformed field '" + field + "'");
            }
            const std::string key = field.substr(0, eq);
            const std::string value = field.substr(eq + 1);
            if (key == "t" || key == "c") {
                auto &dst = key == "t" ? g.targets : g.controls;
                for (double v : split_numbers(value)) {
                    dst.push_back(static_cast<int>(v));
                }
            } else if (key == "cs") {
                for (double v : split_numbers(value)) {
                    g.control_states.push_back(static_cast<std::uint8_t>(v));
                }
            } else if (key == "a") {
                g.angle = std::stod(value);
            } else if (key == "s") {
                g.shift = std::stoll(value);
            } else if (key == "p") {
                g.pauli = value;
            } else if (key == "m") {
                const auto v = split_numbers(value);
                if (v.size() != 8) {
                    throw InvalidInput("from_text: matrix needs 8 numbers");
                }
                for (std::size_t i = 0; i < 4; ++i) {
                    g.matrix[i] = Complex(v[2 * i], v[2 * i + 1]);
                }
            } else {
                throw InvalidInput("from_text: unknown field '" + key + "'");
            }
        }
        circuit.add(std::move(g));
    }
    return circuit;
}

} // namespace hvqa::qsim
