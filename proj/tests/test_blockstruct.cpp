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

#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "hvqa/blockstruct.hpp"
#include "hvqa/fem.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace hvqa;
using blockstruct::Projector;

namespace {


struct Case {
    int num_elements;
    int order;
};

const Case grid[] = {{8, 1}, {16, 1}, {4, 2}, {8, 2}, {4, 4}};

fem::AssembledSystem system(int n_el, int p, double k) {
    return fem::assemble({n_el, p, k, [](double) { return 1.0; }});
}

int qubits(int n_el, int p) { return log2_exact(static_cast<std::size_t>(n_el * p)); }

// sign * X^s (Proj (x) block) X^-s with X|j> = |j+1>, built from Kronecker products.
Matrix kron_oracle(const blockstruct::StructuredTerm &t, int n) {
    const int nb = log2_exact(static_cast<std::size_t>(t.block.rows()));
    const std::int64_t high = std::int64_t{1} << (n - nb);
    oracle::CMat proj = oracle::CMat::Identity(high, high);
    if (t.projector == Projector::Zeros) {
        proj.setZero();
        proj(0, 0) = 1.0;
    } else if (t.projector == Projector::Ones) {
        proj.setZero();
        proj(high - 1, high - 1) = 1.0;
    }
    const oracle::CMat inner = oracle::kron(proj, t.block.cast<oracle::C>());
    const Matrix P = oracle::shift_permutation(n, t.shift);
    return t.sign * (P * inner.real() * P.transpose());
}

} // namespace

TEST_CASE("constant blocks of a linear mesh", "[blockstruct]") {
    const auto bd = blockstruct::extract_blocks(system(4, 1, 0.0).matrix, 1);
    CHECK(bd.D(0, 0) == Catch::Approx(-8.0).margin(1e-13));
    CHECK(bd.S(0, 0) == Catch::Approx(4.0).margin(1e-13));
    CHECK(bd.D_L(0, 0) == Catch::Approx(0.0).margin(1e-13));
    CHECK(bd.D_R(0, 0) == Catch::Approx(4.0).margin(1e-13));
}

TEST_CASE("derived block shapes", "[blockstruct]") {
    for (int p : {1, 2, 4, 8}) {
        const auto bd = blockstruct::extract_blocks(system(32 / p, p, pi).matrix, p);
        CHECK(bd.B.rows() == 2 * p);
        CHECK(bd.C.rows() == 2 * p);
        CHECK(bd.B_tilde.rows() == 4 * p);
        CHECK(bd.C_tilde.rows() == 4 * p);
        CHECK(bd.U_L.rows() == 2 * p);
        CHECK(bd.U_R.rows() == 2 * p);
        CHECK(bd.n_B_tilde() == log2_exact(static_cast<std::size_t>(4 * p)));
        CHECK(bd.C.topLeftCorner(p, p).isZero());
        CHECK((bd.B.topLeftCorner(p, p) - bd.D / 2.0).isZero());
    }
}

TEST_CASE("five terms reconstruct A and A^T A", "[blockstruct]") {
    for (const auto &c : grid) {
        for (double k : {0.0, pi, 2 * pi}) {
            const auto sys = system(c.num_elements, c.order, k);
            const int n = qubits(c.num_elements, c.order);
            const auto bd = blockstruct::extract_blocks(sys.matrix, c.order);
            const auto terms = blockstruct::decompose_A(bd, n);
            REQUIRE(terms.size() == 5);
            CHECK((blockstruct::reconstruct(terms, n) - sys.matrix).cwiseAbs().maxCoeff() <=
                  1e-12);
            if ((1 << n) >= 4 * c.order) {
                const auto sq = blockstruct::decompose_AdagA(bd, n);
                REQUIRE(sq.size() == 5);
                const Matrix ata = sys.matrix.transpose() * sys.matrix;
                const Matrix a2 = sys.matrix * sys.matrix;
                const Matrix rec = blockstruct::reconstruct(sq, n);
                CHECK((rec - ata).cwiseAbs().maxCoeff() <= 1e-10);
                CHECK((rec - a2).cwiseAbs().maxCoeff() <= 1e-10);
            }
        }
    }
}

TEST_CASE("shift direction is pinned by reconstruction", "[blockstruct]") {
    const auto sys = system(8, 2, pi);
    const auto bd = blockstruct::extract_blocks(sys.matrix, 2);
    auto terms = blockstruct::decompose_A(bd, 4);
    for (auto &t : terms) {
        t.shift = -t.shift;
    }
    CHECK((blockstruct::reconstruct(terms, 4) - sys.matrix).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("A3 cancels the wrap-around corners of A2", "[blockstruct]") {
    const auto sys = system(4, 1, 0.0);
    const auto terms = blockstruct::decompose_A(blockstruct::extract_blocks(sys.matrix, 1), 2);
    const Matrix a2 = blockstruct::materialize(terms[1], 2);
    const Matrix a3 = blockstruct::materialize(terms[2], 2);
    CHECK(a2(0, 3) != 0.0);
    CHECK(a2(3, 0) != 0.0);
    const Matrix sum = a2 + a3;
    CHECK(sum(0, 3) == 0.0);
    CHECK(sum(3, 0) == 0.0);
    // Nothing else changes.
    Matrix rest = a3;
    rest(0, 3) = rest(3, 0) = 0.0;
    CHECK(rest.isZero());
}

TEST_CASE("zero left boundary block gives a zero A4", "[blockstruct]") {
    const auto terms =
        blockstruct::decompose_A(blockstruct::extract_blocks(system(8, 1, 0.0).matrix, 1), 3);
    CHECK(terms[3].name == "A4");
    CHECK(blockstruct::materialize(terms[3], 3).isZero());
}

TEST_CASE("perturbed entry breaks translation invariance", "[blockstruct]") {
    Matrix A = system(8, 1, pi).matrix;
    A(3, 4) += 1e-6;
    CHECK_THROWS_AS(blockstruct::extract_blocks(A, 1), NotTranslationInvariant);
    CHECK_THROWS_AS(blockstruct::extract_blocks(system(2, 1, 0.0).matrix, 1), ConfigError);
}

TEST_CASE("materialize", "[blockstruct]") {
    const blockstruct::StructuredTerm id{"I", 1, 0, Projector::None, Matrix::Identity(2, 2)};
    CHECK(blockstruct::materialize(id, 3).isIdentity());
    const blockstruct::StructuredTerm one{"1", 1, 1, Projector::None, Matrix::Ones(1, 1)};
    CHECK(blockstruct::materialize(one, 2).isIdentity());

    std::mt19937_64 gen(7);
    for (Projector proj : {Projector::None, Projector::Zeros, Projector::Ones}) {
        for (std::int64_t s : {-3, -1, 0, 2, 5}) {
            blockstruct::StructuredTerm t{"r", -1, s, proj, oracle::random_symmetric(4, gen)};
            t.block(0, 3) += 0.25;
            CHECK((blockstruct::materialize(t, 4) - kron_oracle(t, 4)).cwiseAbs().maxCoeff() <=
                  1e-15);
        }
    }
    CHECK_THROWS_AS(blockstruct::materialize(id, 13), ConfigError);
}

TEST_CASE("blocks do not depend on the register size", "[blockstruct]") {
    for (int p : {1, 2, 4}) {
        const auto bd = blockstruct::extract_blocks(system(8, p, pi).matrix, p);
        const int n = qubits(8, p);
        const auto a = blockstruct::decompose_AdagA(bd, n);
        const auto b = blockstruct::decompose_AdagA(bd, n + 1);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].block == b[i].block);
            CHECK(a[i].shift == b[i].shift);
        }
    }
    const auto bd = blockstruct::extract_blocks(system(4, 4, pi).matrix, 4);
    CHECK_THROWS_AS(blockstruct::decompose_AdagA(bd, 3), ConfigError);
    CHECK_THROWS_AS(blockstruct::decompose_A(bd, 2), ConfigError);
}

TEST_CASE("JSON dump round-trips every block", "[blockstruct]") {
    const auto bd = blockstruct::extract_blocks(system(8, 2, pi).matrix, 2);
    const auto doc = nlohmann::json::parse(blockstruct::to_json(bd));
    CHECK(doc.at("order") == 2);
    auto check = [&](const char *name, const Matrix &m) {
        const auto &j = doc.at(name);
        REQUIRE(j.at("rows") == m.rows());
        REQUIRE(j.at("cols") == m.cols());
        const auto data = j.at("data").get<std::vector<double>>();
        REQUIRE(data.size() == static_cast<std::size_t>(m.size()));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                CHECK(data[static_cast<std::size_t>(r * m.cols() + c)] == m(r, c));
            }
        }
    };
    check("D", bd.D);
    check("S", bd.S);
    check("V", bd.V);
    check("B_tilde", bd.B_tilde);
    check("edge_bottom", bd.edge_bottom);
}
