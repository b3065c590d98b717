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
 * Five-term Kronecker decompositions of a block-tridiagonal Toeplitz matrix
 * A and of A^T A.
 *
 * A is partitioned into p x p blocks: D on the diagonal, S above, S^T below,
 * with boundary corrections D_L (first block) and D_R (last block). Writing
 * X for the cyclic increment X|j> = |j+1 mod 2^n>,
 *
 *   A = I (x) B + X^d [I (x) B] X^-d - X^d [I0 (x) C] X^-d
 *       + I0 (x) D_L + I1 (x) D_R,                          d = -dim(B)/2,
 *
 * with B = [[D/2, S], [S^T, D/2]] and C = [[0, S], [S^T, 0]]. The second
 * and third terms conjugate by a cyclic *decrement* of one block: the third
 * term cancels the wrap-around corners that the second introduces, which
 * only happens for that direction.
 *
 * A^T A has the same shape on 2p x 2p super-blocks with
 *
 *   U = [[W0, W], [W^T, W0]],  V = [[S^2, 0], [W, S^2]],
 *   W0 = S^T S + D^T D + S S^T,  W = D^T S + S D,
 *
 * B~ = [[U/2, V], [V^T, U/2]], C~ = [[0, V], [V^T, 0]] (both 4p x 4p), and
 * the two boundary terms I0 (x) (-I0 (x) S^T S + U_L) and
 * I1 (x) (-I1 (x) S S^T + U_R).
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "types.hpp"

namespace hvqa::blockstruct {

enum class Projector { None, Zeros, Ones };

enum class TermKind { IdentityKron, ShiftedKron, ProjectedKronLeft, ProjectedKronRight };

inline const char *to_string(Projector projector) {
    switch (projector) {
    case Projector::None:
        return "none";
    case Projector::Zeros:
        return "zeros";
    case Projector::Ones:
        return "ones";
    }
    return "?";
}

/// sign * X^shift (Projector^{(x) m} (x) block) X^-shift on n qubits.
struct StructuredTerm {
    std::string name;
    int sign = 1;
    std::int64_t shift = 0;
    Projector projector = Projector::None;
    Matrix block;

    [[nodiscard]] TermKind kind() const {
        switch (projector) {
        case Projector::Zeros:
            return TermKind::ProjectedKronLeft;
        case Projector::Ones:
            return TermKind::ProjectedKronRight;
        case Projector::None:
            break;
        }
        return shift == 0 ? TermKind::IdentityKron : TermKind::ShiftedKron;
    }

    /// n_O = log2(dim(block)).
    [[nodiscard]] int block_qubits() const {
        return log2_exact(static_cast<std::size_t>(block.rows()));
    }
};

/// n_O for a square block whose dimension is a power of two.
inline int block_qubits(const Matrix &block) {
    if (block.rows() != block.cols() ||
        !is_power_of_two(static_cast<std::size_t>(block.rows()))) {
        throw ConfigError("block dimension must be a power of two");
    }
    return log2_exact(static_cast<std::size_t>(block.rows()));
}

struct BlockDecomposition {
    int order = 0; ///< block size p
    Matrix D, S, D_L, D_R;
    Matrix B, C;                  ///< 2p x 2p
    Matrix U, V;                  ///< 2p x 2p super-blocks of A^T A
    Matrix B_tilde, C_tilde;      ///< 4p x 4p
    Matrix U_L, U_R;              ///< 2p x 2p boundary cross terms
    Matrix edge_top, edge_bottom; ///< S^T S and S S^T, missing from the end blocks of A_int^T A_int

    [[nodiscard]] int n_B() const { return block_qubits(B); }
    [[nodiscard]] int n_C() const { return block_qubits(C); }
    [[nodiscard]] int n_B_tilde() const { return block_qubits(B_tilde); }
    [[nodiscard]] int n_C_tilde() const { return block_qubits(C_tilde); }
    [[nodiscard]] int n_D_L() const { return block_qubits(D_L); }
    [[nodiscard]] int n_D_R() const { return block_qubits(D_R); }
    [[nodiscard]] int n_U_L() const { return block_qubits(U_L); }
    [[nodiscard]] int n_U_R() const { return block_qubits(U_R); }
};

namespace detail {

inline Matrix two_by_two(const Matrix &a, const Matrix &b, const Matrix &c,
                         const Matrix &d) {
    const auto p = a.rows();
    Matrix out(2 * p, 2 * p);
    out.topLeftCorner(p, p) = a;
    out.topRightCorner(p, p) = b;
    out.bottomLeftCorner(p, p) = c;
    out.bottomRightCorner(p, p) = d;
    return out;
}

} // namespace detail

/// Build every derived block from the constant blocks D, S, D_L, D_R.
inline BlockDecomposition derive_blocks(const Matrix &D, const Matrix &S,
                                        const Matrix &D_L, const Matrix &D_R) {
    const auto p = D.rows();
    if (!is_power_of_two(static_cast<std::size_t>(p)) || D.cols() != p ||
        S.rows() != p || S.cols() != p || D_L.rows() != p || D_L.cols() != p ||
        D_R.rows() != p || D_R.cols() != p) {
        throw ConfigError("derive_blocks: blocks must be p x p with p a power of two");
    }
    const Matrix Z = Matrix::Zero(p, p);
    BlockDecomposition bd;
    bd.order = static_cast<int>(p);
    bd.D = D;
    bd.S = S;
    bd.D_L = D_L;
    bd.D_R = D_R;
    bd.B = detail::two_by_two(D / 2.0, S, S.transpose(), D / 2.0);
    bd.C = detail::two_by_two(Z, S, S.transpose(), Z);

    const Matrix W0 = S.transpose() * S + D.transpose() * D + S * S.transpose();
    const Matrix W = D.transpose() * S + S * D;
    const Matrix S2 = S * S;
    bd.U = detail::two_by_two(W0, W, W.transpose(), W0);
    bd.V = detail::two_by_two(S2, Z, W, S2);
    bd.B_tilde = detail::two_by_two(bd.U / 2.0, bd.V, bd.V.transpose(), bd.U / 2.0);
    const Matrix Z2 = Matrix::Zero(2 * p, 2 * p);
    bd.C_tilde = detail::two_by_two(Z2, bd.V, bd.V.transpose(), Z2);

    bd.U_L = detail::two_by_two(
        D.transpose() * D_L + D_L.transpose() * D + D_L.transpose() * D_L,
        D_L.transpose() * S, S.transpose() * D_L, Z);
    bd.U_R = detail::two_by_two(
        Z, S * D_R, D_R.transpose() * S.transpose(),
        D.transpose() * D_R + D_R.transpose() * D + D_R.transpose() * D_R);
    bd.edge_top = S.transpose() * S;
    bd.edge_bottom = S * S.transpose();
    return bd;
}

/// Read D, S, D_L, D_R from a block-tridiagonal Toeplitz matrix and check
/// that every interior block agrees (relative tolerance `tol`).
inline BlockDecomposition extract_blocks(const Matrix &A, int p, double tol = 1e-12) {
    if (p < 1 || A.rows() != A.cols() || A.rows() % p != 0) {
        throw ConfigError("extract_blocks: matrix size must be a multiple of p");
    }
    const auto nb = static_cast<int>(A.rows() / p);
    if (nb < 4) {
        throw ConfigError("extract_blocks: need at least 4 blocks");
    }
    auto block = [&](int i, int j) -> Matrix { return A.block(i * p, j * p, p, p); };
    const Matrix D = block(1, 1);
    const Matrix S = block(0, 1);
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    const double limit = tol * scale;

    auto fail = [](const std::string &what, int i, int j, double err) {
        std::ostringstream msg;
        msg << "extract_blocks: " << what << " block (" << i << ", " << j
            << ") deviates by " << err;
        throw NotTranslationInvariant(msg.str());
    };
    for (int i = 0; i < nb; ++i) {
        for (int j = 0; j < nb; ++j) {
            const Matrix blk = block(i, j);
            double err = 0.0;
            if (i == j) {
                if (i == 0 || i == nb - 1) {
                    continue;
                }
                err = max_abs_diff(blk, D);
            } else if (j == i + 1) {
                err = max_abs_diff(blk, S);
            } else if (i == j + 1) {
                err = max_abs_diff(blk, Matrix(S.transpose()));
            } else {
                err = blk.cwiseAbs().maxCoeff();
            }
            if (err > limit) {
                fail(i == j ? "diagonal" : "off-diagonal", i, j, err);
            }
        }
    }
    return derive_blocks(D, S, block(0, 0) - D, block(nb - 1, nb - 1) - D);
}

/// The five terms A_1..A_5 on n qubits.
inline std::vector<StructuredTerm> decompose_A(const BlockDecomposition &bd, int n) {
    if ((std::int64_t{1} << n) < 2 * bd.order) {
        throw ConfigError("decompose_A: need 2p <= 2^n");
    }
    const std::int64_t d_b = -static_cast<std::int64_t>(bd.B.rows()) / 2;
    const std::int64_t d_c = -static_cast<std::int64_t>(bd.C.rows()) / 2;
    return {
        {"A1", 1, 0, Projector::None, bd.B},
        {"A2", 1, d_b, Projector::None, bd.B},
        {"A3", -1, d_c, Projector::Zeros, bd.C},
        {"A4", 1, 0, Projector::Zeros, bd.D_L},
        {"A5", 1, 0, Projector::Ones, bd.D_R},
    };
}

/// The five terms A'_1..A'_5 of A^T A on n qubits.
inline std::vector<StructuredTerm> decompose_AdagA(const BlockDecomposition &bd, int n) {
    if ((std::int64_t{1} << n) < 4 * bd.order) {
        throw ConfigError("decompose_AdagA: need 4p <= 2^n");
    }
    const auto p = bd.order;
    const Matrix Z = Matrix::Zero(p, p);
    const Matrix top = detail::two_by_two(-bd.edge_top, Z, Z, Z) + bd.U_L;
    const Matrix bottom = detail::two_by_two(Z, Z, Z, -bd.edge_bottom) + bd.U_R;
    const std::int64_t d_b = -static_cast<std::int64_t>(bd.B_tilde.rows()) / 2;
    const std::int64_t d_c = -static_cast<std::int64_t>(bd.C_tilde.rows()) / 2;
    return {
        {"A'1", 1, 0, Projector::None, bd.B_tilde},
        {"A'2", 1, d_b, Projector::None, bd.B_tilde},
        {"A'3", -1, d_c, Projector::Zeros, bd.C_tilde},
        {"A'4", 1, 0, Projector::Zeros, top},
        {"A'5", 1, 0, Projector::Ones, bottom},
    };
}

inline constexpr int max_dense_qubits = 12;

/// Dense 2^n x 2^n form of a term. Refuses n > 12.
inline Matrix materialize(const StructuredTerm &term, int n) {
    if (n > max_dense_qubits) {
        throw ConfigError("materialize: refusing dense form beyond 12 qubits");
    }
    const int nb = block_qubits(term.block);
    if (nb > n) {
        throw ConfigError("materialize: block larger than the register");
    }
    const std::int64_t dim = std::int64_t{1} << n;
    const std::int64_t bdim = term.block.rows();
    const std::int64_t high = std::int64_t{1} << (n - nb);
    Matrix out = Matrix::Zero(dim, dim);
    auto wrap = [dim](std::int64_t i) { return ((i % dim) + dim) % dim; };
    for (std::int64_t h = 0; h < high; ++h) {
        if (term.projector == Projector::Zeros && h != 0) {
            continue;
        }
        if (term.projector == Projector::Ones && h != high - 1) {
            continue;
        }
        for (std::int64_t i = 0; i < bdim; ++i) {
            for (std::int64_t j = 0; j < bdim; ++j) {
                out(wrap(h * bdim + i + term.shift), wrap(h * bdim + j + term.shift)) +=
                    term.sign * term.block(i, j);
            }
        }
    }
    return out;
}

inline Matrix reconstruct(const std::vector<StructuredTerm> &terms, int n) {
    Matrix sum = Matrix::Zero(std::int64_t{1} << n, std::int64_t{1} << n);
    for (const auto &t : terms) {
        sum += materialize(t, n);
    }
    return sum;
}

namespace detail {

inline void json_matrix(std::ostringstream &out, const char *name, const Matrix &m) {
    out << "  \"" << name << "\": {\"rows\": " << m.rows() << ", \"cols\": " << m.cols()
        << ", \"data\": [";
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out << (i || j ? ", " : "") << buf;
        }
    }
    out << "]}";
}

} // namespace detail

/// JSON object {"order": p, "<name>": {"rows", "cols", "data" (row-major)}, ...}
/// with 17 significant digits per entry.
inline std::string to_json(const BlockDecomposition &bd) {
    std::ostringstream out;
    out << "{\n  \"order\": " << bd.order;
    const std::pair<const char *, const Matrix *> blocks[] = {
        {"D", &bd.D},         {"S", &bd.S},           {"D_L", &bd.D_L},
        {"D_R", &bd.D_R},     {"B", &bd.B},           {"C", &bd.C},
        {"U", &bd.U},         {"V", &bd.V},           {"B_tilde", &bd.B_tilde},
        {"C_tilde", &bd.C_tilde}, {"U_L", &bd.U_L},   {"U_R", &bd.U_R},
        {"edge_top", &bd.edge_top}, {"edge_bottom", &bd.edge_bottom}};
    for (const auto &[name, m] : blocks) {
        out << ",\n";
        detail::json_matrix(out, name, *m);
    }
    out << "\n}\n";
    return out.str();
}

} // namespace hvqa::blockstruct
