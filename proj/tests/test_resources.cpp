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

#include "hvqa/resources.hpp"

using namespace hvqa;

namespace {

const resources::ResourceRow &find(const std::vector<resources::ResourceRow> &rows,
                                   const std::string &target, const std::string &term, int n,
                                   int p) {
    for (const auto &r : rows) {
        if (r.target == target && r.term == term && r.n == n && r.p == p) {
            return r;
        }
    }
    FAIL("missing row " << target << ' ' << term << ' ' << n << ' ' << p);
    throw;
}

} // namespace

TEST_CASE("depth trends over n at fixed p", "[resources]") {
    std::vector<resources::SweepPoint> sweep;
    for (int n = 3; n <= 7; ++n) {
        sweep.push_back({n, 2});
    }
    const auto rows = resources::tabulate(sweep);
    CHECK(rows.size() == 10 * sweep.size());
    const int a1 = find(rows, "A", "A1", 3, 2).max_depth;
    for (int n = 3; n <= 7; ++n) {
        CHECK(find(rows, "A", "A1", n, 2).max_depth == a1);
        if (n > 3) {
            CHECK(find(rows, "A", "A2", n, 2).max_depth >
                  find(rows, "A", "A2", n - 1, 2).max_depth);
        }
    }
}

TEST_CASE("A2 depth grows at most like n^2.5 for large n", "[resources]") {
    for (int p : {1, 2, 4, 8}) {
        std::vector<double> ns, d2;
        for (int n : {32, 40, 48, 56}) {
            const auto c = resources::compile(n, p, 0.0);
            for (const auto &r : resources::term_rows(c.terms_a, c.program_a, n, p, "A")) {
                if (r.term == "A2") {
                    ns.push_back(n);
                    d2.push_back(r.max_depth);
                }
            }
        }
        REQUIRE(ns.size() == 4);
        INFO("p = " << p);
        CHECK(resources::fit_exponent(ns, d2) <= 2.5);
    }
}

TEST_CASE("strip blocks match blocks of the full system", "[resources]") {
    for (int p : {1, 2, 4}) {
        for (double k : {0.0, 2.0 * pi}) {
            const int n = 5;
            const auto c = resources::compile(n, p, k);
            fem::FemProblem full{(1 << n) / p, p, k, [](double) { return 1.0; }};
            const auto ref = blockstruct::extract_blocks(fem::assemble(full).matrix, p);
            const double scale = ref.D.norm();
            for (const auto &[a, b] : {std::pair{&c.blocks.D, &ref.D},
                                       std::pair{&c.blocks.S, &ref.S},
                                       std::pair{&c.blocks.D_L, &ref.D_L},
                                       std::pair{&c.blocks.D_R, &ref.D_R}}) {
                CHECK((*a - *b).norm() <= 1e-12 * scale);
            }
        }
    }
}

TEST_CASE("circuit counts grow at most quadratically in p", "[resources]") {
    std::vector<resources::SweepPoint> sweep{{6, 1}, {6, 2}, {6, 4}, {6, 8}};
    const auto rows = resources::tabulate(sweep);
    std::vector<double> ps, total;
    for (int p : {1, 2, 4, 8}) {
        double sum = 0.0;
        for (const auto &r : rows) {
            if (r.p == p) {
                sum += static_cast<double>(r.circuits);
            }
        }
        ps.push_back(p);
        total.push_back(sum);
    }
    CHECK(resources::fit_exponent(ps, total) <= 2.3);
}

TEST_CASE("counts do not depend on N", "[resources]") {
    std::vector<resources::SweepPoint> sweep{{5, 2}, {6, 2}};
    const auto rows = resources::tabulate(sweep);
    for (const auto &r : rows) {
        if (r.n == 5) {
            CHECK(find(rows, r.target, r.term, 6, 2).circuits == r.circuits);
        }
    }
}

TEST_CASE("tabulation is deterministic", "[resources]") {
    std::vector<resources::SweepPoint> sweep{{4, 1}, {4, 2}};
    const auto a = resources::tabulate(sweep);
    const auto b = resources::tabulate(sweep);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].circuits == b[i].circuits);
        CHECK(a[i].max_depth == b[i].max_depth);
    }
    CHECK(resources::tabulate({}).empty());
    const auto empty = resources::iteration_cost_report({}, {});
    CHECK(empty.p_sweep.empty());
    CHECK(empty.n_ratios.empty());
    CHECK(empty.p_ok());
    CHECK(empty.n_ok());
}

TEST_CASE("iteration cost trends", "[resources]") {
    std::vector<resources::IterationCost> by_p, by_n;
    for (int p : {1, 2, 4, 8}) {
        by_p.push_back(resources::iteration_cost(6, p, vqa::Ansatz{6, 7}));
    }
    for (int n = 4; n <= 7; ++n) {
        by_n.push_back(resources::iteration_cost(n, 2, vqa::Ansatz{n, 7}));
    }
    const auto report = resources::iteration_cost_report(by_p, by_n);
    INFO("p exponent " << report.p_exponent);
    CHECK(report.p_ok());
    CHECK(report.p_exponent <= 3.5);
    CHECK(report.n_ok());
    CHECK(report.n_ratios.size() == 3);
    for (const auto &c : by_p) {
        CHECK(c.parameters == 48);
        CHECK(c.cost > 0.0);
    }
}
