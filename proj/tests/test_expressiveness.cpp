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

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hvqa/expressiveness.hpp"

using namespace hvqa;
using expressiveness::Group;

TEST_CASE("Haar fidelity law", "[expressiveness]") {
    for (double F : {0.0, 0.2, 0.5, 0.9}) {
        CHECK(expressiveness::haar_fidelity_pdf(2, F, Group::SU) ==
              Catch::Approx(1.0).margin(1e-14));
    }
    for (int d : {2, 4, 16}) {
        const double total = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double F) { return expressiveness::haar_fidelity_pdf(d, F, Group::SU); }, 0.0,
            1.0, 15, 1e-12);
        CHECK(total == Catch::Approx(1.0).margin(1e-10));
        // The SO density has an integrable singularity at F = 0.
        CHECK(expressiveness::haar_fidelity_cdf(d, 1.0, Group::SO) ==
              Catch::Approx(1.0).margin(1e-14));
        for (Group g : {Group::SU, Group::SO}) {
            const auto q = expressiveness::haar_bin_probabilities(d, 75, g);
            double sum = 0.0;
            for (double v : q) {
                sum += v;
            }
            CHECK(sum == Catch::Approx(1.0).margin(1e-12));
        }
    }
}

TEST_CASE("real unit vectors follow the SO law", "[expressiveness]") {
    // Chi-square goodness of fit of |<x,y>|^2 against the d = 4 density.
    const int d = 4, pairs = 20000, bins = 20;
    const auto fids = expressiveness::sample_haar_fidelities(d, Group::SO, pairs, 99);
    const auto p = expressiveness::histogram(fids, bins);
    const auto q = expressiveness::haar_bin_probabilities(d, bins, Group::SO);
    double chi2 = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double expect = pairs * q[static_cast<std::size_t>(b)];
        const double got = pairs * p[static_cast<std::size_t>(b)];
        chi2 += (got - expect) * (got - expect) / expect;
    }
    const boost::math::chi_squared dist(bins - 1);
    CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 0.01);
}

TEST_CASE("one-qubit ansatz matches the closed form", "[expressiveness]") {
    const vqa::Ansatz ansatz{1, 0, vqa::Rotations::RYRZ};
    const int pairs = 2000;
    const std::uint64_t seed = 5;
    const auto fids = expressiveness::sample_fidelities(ansatz, pairs, seed);
    std::vector<double> closed(static_cast<std::size_t>(pairs));
    for (int i = 0; i < pairs; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        const double a1 = rng.uniform(0.0, 2 * pi), b1 = rng.uniform(0.0, 2 * pi);
        const double a2 = rng.uniform(0.0, 2 * pi), b2 = rng.uniform(0.0, 2 * pi);
        // RZ(b) RY(a)|0> = (e^{-ib/2} cos(a/2), e^{ib/2} sin(a/2))
        const Complex amp = std::cos(a1 / 2) * std::cos(a2 / 2) *
                                std::polar(1.0, (b1 - b2) / 2) +
                            std::sin(a1 / 2) * std::sin(a2 / 2) *
                                std::polar(1.0, (b2 - b1) / 2);
        closed[static_cast<std::size_t>(i)] = std::norm(amp);
        CHECK(fids[static_cast<std::size_t>(i)] ==
              Catch::Approx(closed[static_cast<std::size_t>(i)]).margin(1e-12));
    }
    expressiveness::Settings s;
    s.pairs = pairs;
    s.seed = seed;
    const auto report = expressiveness::kl_divergence(ansatz, Group::SU, s);
    const auto q = expressiveness::haar_bin_probabilities(2, s.bins, Group::SU);
    CHECK(report.kl ==
          Catch::Approx(expressiveness::kl(expressiveness::histogram(closed, s.bins), q))
              .margin(1e-12));
    CHECK(report.kl >= 0.0);
}

TEST_CASE("Haar samples score near zero", "[expressiveness]") {
    expressiveness::Settings s;
    for (Group g : {Group::SU, Group::SO}) {
        const auto fids = expressiveness::sample_haar_fidelities(16, g, 100000, 3);
        CHECK(expressiveness::score(fids, 16, g, s).kl <= 0.01);
    }
}

TEST_CASE("deeper RY circuits approach the SO law", "[expressiveness]") {
    expressiveness::Settings s;
    s.seed = 2;
    const auto shallow = expressiveness::kl_divergence({4, 1}, Group::SO, s);
    const auto deep = expressiveness::kl_divergence({4, 8}, Group::SO, s);
    CHECK(deep.kl <= shallow.kl);
    CHECK(shallow.std_error > 0.0);
    const auto again = expressiveness::kl_divergence({4, 8}, Group::SO, s);
    CHECK(again.kl == deep.kl);
}

TEST_CASE("too few samples", "[expressiveness]") {
    expressiveness::Settings s;
    s.pairs = 1;
    CHECK_THROWS_WITH(expressiveness::kl_divergence({2, 1}, Group::SO, s),
                      Catch::Matchers::ContainsSubstring("samples >= 1000"));
}

TEST_CASE("parameter count for a KL threshold grows polynomially", "[expressiveness]") {
    expressiveness::Settings s;
    s.seed = 1;
    const std::vector<int> ns{2, 3, 4, 5, 6};
    const auto fit = expressiveness::parameters_for_threshold(ns, Group::SO, 0.01, 20, s);
    for (const auto &pt : fit.points) {
        INFO("n=" << pt.num_qubits << " layers=" << pt.layers << " kl=" << pt.kl);
        CHECK(pt.layers >= 0);
    }
    INFO("exponent " << fit.exponent);
    CHECK(fit.complete);
    CHECK(std::abs(fit.exponent - 1.25) <= 0.75);
}
