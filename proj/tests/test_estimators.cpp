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

#include <random>

#include "hvqa/blockstruct.hpp"
#include "hvqa/estimators.hpp"
#include "hvqa/fem.hpp"
#include "hvqa/lcu.hpp"
#include "oracles.hpp"

using namespace hvqa;
using estimators::Mode;

namespace {

lcu::LcuProgram from_matrix(const Matrix &m) {
    const int n = log2_exact(static_cast<std::size_t>(m.rows()));
    return lcu::compile_term({"M", 1, 0, blockstruct::Projector::None, m}, n);
}

Vector random_unit(int dim, std::mt19937_64 &gen) {
    std::normal_distribution<double> g;
    Vector v(dim);
    for (int i = 0; i < dim; ++i) {
        v(i) = g(gen);
    }
    return v.normalized();
}

qsim::Circuit prep(const Vector &v) {
    return qsim::state_prep({v.data(), static_cast<std::size_t>(v.size())});
}

/// Same target, twice the eta: every term gets a cancelling (+U/2, -U/2) pair.
lcu::LcuProgram with_cancelling_pairs(const lcu::LcuProgram &prog) {
    auto out = prog;
    for (const auto &t : prog.terms) {
        auto plus = t;
        plus.alpha = t.alpha / 2;
        auto minus = plus;
        minus.unitary.add(qsim::gates::global_phase(pi));
        out.terms.push_back(plus);
        out.terms.push_back(minus);
    }
    return out;
}

} // namespace

TEST_CASE("single-term and identity encodings", "[estimators]") {
    const auto id = estimators::build_block_encoding(from_matrix(Matrix::Identity(4, 4)));
    CHECK(id.num_ancillas == 0);
    CHECK(id.prep.empty());
    CHECK((estimators::top_left_block(id) - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <=
          1e-14);

    Matrix x(2, 2);
    x << 0, 3, 3, 0;
    const auto one = estimators::build_block_encoding(from_matrix(x));
    CHECK(one.eta == Catch::Approx(3.0));
    CHECK((qsim::dense(one.unitary()) - oracle::pauli('X')).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("top-left block of the FEM encoding is A / eta", "[estimators]") {
    const auto sys = fem::assemble({4, 1, pi, [](double) { return 1.0; }});
    const auto prog = lcu::compile_full(
        blockstruct::decompose_A(blockstruct::extract_blocks(sys.matrix, 1), 2), 2);
    const auto be = estimators::build_block_encoding(prog);
    CHECK((estimators::top_left_block(be) - sys.matrix.cast<Complex>() / be.eta)
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
    const CMatrix u = qsim::dense(be.unitary());
    CHECK((u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <=
          1e-12);
    CHECK_THROWS_AS(estimators::build_block_encoding(prog, 2), ConfigError);
}

TEST_CASE("overlap estimator", "[estimators]") {
    std::mt19937_64 gen(2);
    const auto id = estimators::build_block_encoding(from_matrix(Matrix::Identity(4, 4)));
    const Vector v = random_unit(4, gen);
    const auto same = estimators::estimate_overlap(id, prep(v), prep(v), Mode::exact_mode());
    CHECK(same.value == Catch::Approx(1.0).margin(1e-14));
    const auto circ = estimators::overlap_circuit(id, prep(v), prep(v));
    CHECK(estimators::probability_zero(circ, estimators::ancilla_qubit(id)) ==
          Catch::Approx(1.0).margin(1e-12));
    const auto shots = estimators::estimate_overlap(id, prep(v), prep(v), Mode::sampled(1000, 1));
    CHECK(shots.value == 1.0);

    for (int trial = 0; trial < 10; ++trial) {
        const Matrix A = oracle::random_symmetric(4, gen);
        const auto be = estimators::build_block_encoding(from_matrix(A));
        const Vector f = random_unit(4, gen);
        const Vector phi = random_unit(4, gen);
        const auto r = estimators::estimate_overlap(be, prep(f), prep(phi), Mode::exact_mode());
        CHECK(r.value == Catch::Approx(f.dot(A * phi)).margin(1e-10));
        // The circuit statistic agrees with the exact value.
        const double p0 = estimators::probability_zero(
            estimators::overlap_circuit(be, prep(f), prep(phi)), estimators::ancilla_qubit(be));
        CHECK(p0 == Catch::Approx(0.5 * (1.0 + r.value / be.eta)).margin(1e-12));

        // f orthogonal to A phi.
        Vector g = random_unit(4, gen);
        const Vector aphi = (A * phi).normalized();
        g = (g - g.dot(aphi) * aphi).normalized();
        const auto zero = estimators::estimate_overlap(be, prep(g), prep(phi), Mode::exact_mode());
        CHECK(zero.value == Catch::Approx(0.0).margin(1e-12));
        const auto noisy =
            estimators::estimate_overlap(be, prep(g), prep(phi), Mode::sampled(10000, trial));
        CHECK(std::abs(noisy.value) <= 5 * noisy.std_error);
    }
}

TEST_CASE("quadratic estimator", "[estimators]") {
    std::mt19937_64 gen(8);
    const Matrix A = oracle::random_symmetric(8, gen);
    const auto be = estimators::build_block_encoding(from_matrix(A.transpose() * A));
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    for (int i = 0; i < 8; ++i) {
        const Vector v = es.eigenvectors().col(i);
        const double lam = es.eigenvalues()(i);
        CHECK(estimators::estimate_quadratic(be, prep(v), Mode::exact_mode()).value ==
              Catch::Approx(lam * lam).margin(1e-10));
    }
    for (int trial = 0; trial < 10; ++trial) {
        const Vector phi = random_unit(8, gen);
        const double q = estimators::estimate_quadratic(be, prep(phi), Mode::exact_mode()).value;
        CHECK(q == Catch::Approx((A * phi).squaredNorm()).margin(1e-10));
        CHECK(q >= 0.0);
    }
    Matrix proj = Matrix::Zero(2, 2);
    proj(1, 1) = 1.0;
    const auto bp = estimators::build_block_encoding(from_matrix(proj));
    const Vector e0 = Vector::Unit(2, 0);
    CHECK(estimators::estimate_quadratic(bp, prep(e0), Mode::exact_mode()).value ==
          Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("shot noise stays within five standard errors", "[estimators]") {
    std::mt19937_64 gen(12);
    const Matrix A = oracle::random_symmetric(4, gen);
    const auto be = estimators::build_block_encoding(from_matrix(A));
    const Vector f = random_unit(4, gen);
    const Vector phi = random_unit(4, gen);
    const double exact = f.dot(A * phi);
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto r = estimators::estimate_overlap(be, prep(f), prep(phi),
                                                    Mode::sampled(10000, seed));
        inside += std::abs(r.value - exact) <= 5 * r.std_error ? 1 : 0;
    }
    CHECK(inside >= 99);

    const auto a = estimators::estimate_overlap(be, prep(f), prep(phi), Mode::sampled(500, 42));
    const auto b = estimators::estimate_overlap(be, prep(f), prep(phi), Mode::sampled(500, 42));
    CHECK(a.value == b.value);
    CHECK_THROWS_AS(estimators::estimate_overlap(be, prep(f), prep(phi), Mode::sampled(0, 1)),
                    ConfigError);
}

TEST_CASE("doubling eta with cancelling pairs leaves estimates unchanged", "[estimators]") {
    const auto sys = fem::assemble({8, 1, pi, [](double) { return 1.0; }});
    const auto prog = lcu::compile_full(
        blockstruct::decompose_A(blockstruct::extract_blocks(sys.matrix, 1), 3), 3);
    const auto be = estimators::build_block_encoding(prog);
    const auto be2 = estimators::build_block_encoding(with_cancelling_pairs(prog));
    CHECK(be2.eta == Catch::Approx(2 * be.eta).epsilon(1e-14));
    std::mt19937_64 gen(6);
    const Vector f = random_unit(8, gen);
    const Vector phi = random_unit(8, gen);
    const auto exact = Mode::exact_mode();
    const double v1 = estimators::estimate_overlap(be, prep(f), prep(phi), exact).value;
    const double v2 = estimators::estimate_overlap(be2, prep(f), prep(phi), exact).value;
    CHECK(v1 == Catch::Approx(v2).margin(1e-10));
    // The circuit statistic, debiased by eta, agrees as well.
    const double p2 = estimators::probability_zero(
        estimators::overlap_circuit(be2, prep(f), prep(phi)), estimators::ancilla_qubit(be2));
    CHECK(be2.eta * (2 * p2 - 1) == Catch::Approx(v1).margin(1e-10));
}

TEST_CASE("amplitude r", "[estimators]") {
    CHECK(estimators::amplitude_r(0.0, 1.0) == 0.0);
    CHECK(estimators::amplitude_r(0.5, 0.25) == 2.0);
    CHECK_THROWS_AS(estimators::amplitude_r(0.5, 0.0), DegenerateState);

    // phi = x / |x| with A x = f: r |phi> recovers x / |f| for unit f.
    const auto sys = fem::assemble({8, 1, pi, [](double) { return 1.0; }});
    const Vector x = fem::classical_solve(sys);
    const Vector fhat = sys.rhs.normalized();
    const Vector phi = x.normalized();
    const double ov = fhat.dot(sys.matrix * phi);
    const double q = (sys.matrix * phi).squaredNorm();
    const double r = estimators::amplitude_r(ov, q);
    CHECK(r * sys.rhs.norm() == Catch::Approx(x.norm()).epsilon(1e-12));
}
