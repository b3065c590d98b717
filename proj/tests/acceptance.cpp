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

// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hvqa/hvqa.hpp"

using namespace hvqa;

namespace {

struct Case {
    int num_elements;
    int p;
    double k;
};

std::vector<Case> decomposition_grid() {
    std::vector<Case> cases;
    for (double k : {0.0, pi, 2.0 * pi}) {
        for (auto [ne, p] : {std::pair{8, 1}, {16, 1}, {4, 2}, {8, 2}, {4, 4}}) {
            cases.push_back({ne, p, k});
        }
    }
    return cases;
}

fem::AssembledSystem assemble(const Case &c) {
    return fem::assemble({c.num_elements, c.p, c.k, [](double) { return 1.0; }});
}

template <class Derived> double max_abs(const Eigen::MatrixBase<Derived> &m) {
    return m.cwiseAbs().maxCoeff();
}

Vector random_theta(int size, CounterRng &rng) {
    Vector theta(size);
    for (int i = 0; i < size; ++i) {
        theta(i) = rng.uniform(-pi, pi);
    }
    return theta;
}

/// Returns the detail line; sets `pass`.
using Criterion = std::function<std::string(bool &pass)>;

std::string c1_decomposition(bool &pass) {
    double err_a = 0.0, err_ata = 0.0;
    for (const auto &c : decomposition_grid()) {
        const auto sys = assemble(c);
        const int n = sys.num_qubits();
        const auto bd = blockstruct::extract_blocks(sys.matrix, c.p);
        const Matrix ata = sys.matrix.transpose() * sys.matrix;
        err_a = std::max(err_a, max_abs(sys.matrix - blockstruct::reconstruct(
                                                         blockstruct::decompose_A(bd, n), n)));
        err_ata = std::max(err_ata, max_abs(ata - blockstruct::reconstruct(
                                                      blockstruct::decompose_AdagA(bd, n), n)));
    }
    pass = err_a <= 1e-12 && err_ata <= 1e-10;
    char buf[160];
    std::snprintf(buf, sizeof buf, "max|A-sum|=%.2e (<=1e-12)  max|AtA-sum|=%.2e (<=1e-10)",
                  err_a, err_ata);
    return buf;
}

std::string c2_block_encoding(bool &pass) {
    double err_a = 0.0, err_ata = 0.0;
    int checked = 0;
    for (const auto &c : decomposition_grid()) {
        const auto sys = assemble(c);
        if (sys.num_qubits() > 6) {
            continue;
        }
        ++checked;
        const auto be_a = estimators::build_block_encoding(vqa::CostModel::compile_a(sys));
        const auto be_ata = estimators::build_block_encoding(vqa::CostModel::compile_ata(sys));
        const Matrix ata = sys.matrix.transpose() * sys.matrix;
        err_a = std::max(err_a, max_abs(estimators::top_left_block(be_a) -
                                        (sys.matrix / be_a.eta).cast<Complex>()));
        err_ata = std::max(err_ata, max_abs(estimators::top_left_block(be_ata) -
                                            (ata / be_ata.eta).cast<Complex>()));
    }
    pass = checked > 0 && err_a <= 1e-10 && err_ata <= 1e-10;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%d cases  max|U00-A/eta|=%.2e  max|U00-AtA/eta'|=%.2e (<=1e-10)", checked,
                  err_a, err_ata);
    return buf;
}

std::string c3_estimators(bool &pass) {
    const auto grid = decomposition_grid();
    CounterRng rng(2026, 3);
    double err_ov = 0.0, err_q = 0.0;
    int within = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const auto sys = assemble(grid[static_cast<std::size_t>(t) % grid.size()]);
        const int n = sys.num_qubits();
        const vqa::CostModel model(sys, vqa::Ansatz{n, 3});
        const Vector theta = random_theta(model.ansatz().num_parameters(), rng);
        const auto phi_c = model.ansatz().circuit(theta);
        const Vector phi = model.ansatz().state(theta).real();
        const Vector fhat = sys.rhs.normalized();
        const double ov_ref = fhat.dot(sys.matrix * phi);
        const double q_ref = (sys.matrix * phi).squaredNorm();

        const auto exact = estimators::Mode::exact_mode();
        const double ov =
            estimators::estimate_overlap(model.encoding_a(), model.prep_f(), phi_c, exact).value;
        const double q = estimators::estimate_quadratic(model.encoding_ata(), phi_c, exact).value;
        err_ov = std::max(err_ov, std::abs(ov - ov_ref));
        err_q = std::max(err_q, std::abs(q - q_ref));

        const auto m1 = estimators::Mode::sampled(10000, splitmix64(2 * t + 1));
        const auto m2 = estimators::Mode::sampled(10000, splitmix64(2 * t + 2));
        const auto so = estimators::estimate_overlap(model.encoding_a(), model.prep_f(), phi_c, m1);
        const auto sq = estimators::estimate_quadratic(model.encoding_ata(), phi_c, m2);
        if (std::abs(so.value - ov_ref) <= 5.0 * so.std_error &&
            std::abs(sq.value - q_ref) <= 5.0 * sq.std_error) {
            ++within;
        }
    }
    pass = err_ov <= 1e-10 && err_q <= 1e-10 && within >= 99;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "exact: max err overlap=%.2e quadratic=%.2e (<=1e-10)  shots: %d/%d within 5 SE "
                  "(>=99)",
                  err_ov, err_q, within, trials);
    return buf;
}

std::string c4_gradient(bool &pass) {
    CounterRng rng(2026, 4);
    double worst = 0.0;
    int count = 0;
    const std::vector<Case> systems{{4, 1, pi}, {8, 1, 2.0 * pi}, {8, 2, 0.0}};
    for (const auto &c : systems) {
        const auto sys = assemble(c);
        const vqa::CostModel model(sys, vqa::Ansatz{sys.num_qubits(), 3});
        const int dim = model.ansatz().num_parameters();
        for (int t = 0; t < 50; ++t) {
            const Vector theta = random_theta(dim, rng);
            const Vector g = model.gradient(theta);
            Vector fd(dim);
            const double h = 1e-5;
            Vector x = theta;
            for (int j = 0; j < dim; ++j) {
                x(j) = theta(j) + h;
                const double fp = model.cost(x);
                x(j) = theta(j) - h;
                const double fm = model.cost(x);
                x(j) = theta(j);
                fd(j) = (fp - fm) / (2.0 * h);
            }
            worst = std::max(worst, (g - fd).norm() / fd.norm());
            ++count;
        }
    }
    pass = worst <= 1e-5;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%d draws over n=2,3,4  max ||g_ps-g_fd||/||g_fd||=%.2e (<=1e-5)", count, worst);
    return buf;
}

std::string c5_solve(bool &pass) {
    pass = true;
    double worst_res = 0.0, worst_fid = 1.0;
    bool monotone = true;
    for (int p : {1, 2, 4}) {
        for (double k : {0.0, pi, 2.0 * pi}) {
            const auto sys = assemble({16 / p, p, k});
            const vqa::CostModel model(sys, vqa::Ansatz{4, 7});
            auto run = vqa::solve(model);
            vqa::attach_classical(run, sys);
            worst_res = std::max(worst_res, run.residual);
            worst_fid = std::min(worst_fid, run.fidelity);
            for (std::size_t i = 1; i < run.trace.size(); ++i) {
                monotone = monotone && run.trace[i].residual <= run.trace[i - 1].residual;
            }
        }
    }
    pass = worst_res <= 1e-4 && worst_fid >= 0.999 && monotone;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "9 cases  max residual=%.2e (<=1e-4)  min fidelity=%.9f (>=0.999)  monotone=%s",
                  worst_res, worst_fid, monotone ? "yes" : "no");
    return buf;
}

std::string c6_convergence(bool &pass) {
    const double k = pi;
    auto exact = [](double x) { return std::sin(pi * x / 2); };
    auto rhs = [k](double x) { return (k * k - pi * pi / 4) * std::sin(pi * x / 2); };
    const std::vector<int> levels{4, 8, 16, 32};
    const double s1 = fem::convergence_study(1, k, exact, rhs, levels).slope;
    const double s2 = fem::convergence_study(2, k, exact, rhs, levels).slope;
    pass = std::abs(s1 - 2.0) <= 0.3 && std::abs(s2 - 3.0) <= 0.3;
    char buf[160];
    std::snprintf(buf, sizeof buf, "L2 slopes p=1: %.3f (2+-0.3)  p=2: %.3f (3+-0.3)", s1, s2);
    return buf;
}

std::string c7_lcu(bool &pass) {
    bool same = true;
    for (int p : {1, 2, 4, 8}) {
        int n = 1;
        while ((1 << n) <= 4 * p) {
            ++n;
        }
        const auto a = resources::compile(n, p, pi);
        const auto b = resources::compile(n + 1, p, pi);
        same = same && a.program_a.counts_by_source() == b.program_a.counts_by_source() &&
               a.program_ata.counts_by_source() == b.program_ata.counts_by_source();
    }
    std::vector<double> ps, totals;
    for (int p : {1, 2, 4, 8}) {
        const auto c = resources::compile(6, p, pi);
        ps.push_back(p);
        totals.push_back(static_cast<double>(c.program_a.size() + c.program_ata.size()));
    }
    const double e = resources::fit_exponent(ps, totals);
    pass = same && e <= 2.3;
    char buf[160];
    std::snprintf(buf, sizeof buf, "counts N vs 2N identical=%s  count exponent in p=%.3f (<=2.3)",
                  same ? "yes" : "no", e);
    return buf;
}

std::string c8_shift(bool &pass) {
    double worst = 0.0;
    int count = 0;
    for (int n = 1; n <= 8; ++n) {
        const auto dim = std::int64_t{1} << n;
        for (std::int64_t s : {1, 2, 4, 8, 16}) {
            if (s >= dim) {
                continue;
            }
            for (std::int64_t shift : {s, -s}) {
                const CMatrix u = qsim::dense(qsim::cyclic_shift_circuit(n, shift));
                CMatrix perm = CMatrix::Zero(dim, dim);
                for (std::int64_t j = 0; j < dim; ++j) {
                    perm(((j + shift) % dim + dim) % dim, j) = 1.0;
                }
                worst = std::max(worst, max_abs(u - perm));
                ++count;
            }
        }
    }
    pass = worst <= 1e-12;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%d circuits (n<=8, s in {1,2,4,8,16}, both signs)  max err=%.2e (<=1e-12)",
                  count, worst);
    return buf;
}

std::string c9_expressiveness(bool &pass) {
    expressiveness::Settings s;
    s.bootstrap = 0;
    double haar_worst = 0.0;
    for (auto group : {expressiveness::Group::SU, expressiveness::Group::SO}) {
        const auto f = expressiveness::sample_haar_fidelities(16, group, 100000, 99);
        haar_worst = std::max(haar_worst, expressiveness::score(f, 16, group, s).kl);
    }
    expressiveness::Settings t;
    t.pairs = 10000;
    t.bootstrap = 10;
    bool trend = true;
    double prev_kl = 0.0, prev_se = 0.0;
    std::string curve;
    for (int L = 1; L <= 8; ++L) {
        t.seed = 900 + static_cast<std::uint64_t>(L);
        const auto r = expressiveness::kl_divergence(vqa::Ansatz{4, L, vqa::Rotations::RY},
                                                     expressiveness::Group::SO, t);
        if (L > 1 && r.kl > prev_kl + 2.0 * std::hypot(prev_se, r.std_error)) {
            trend = false;
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s%.4f", L > 1 ? "," : "", r.kl);
        curve += buf;
        prev_kl = r.kl;
        prev_se = r.std_error;
    }
    pass = haar_worst <= 0.01 && trend;
    char buf[300];
    std::snprintf(buf, sizeof buf,
                  "Haar self-test KL=%.4f (<=0.01)  n=4 RY vs SO, L=1..8: [%s] non-increasing "
                  "within 2 SE=%s",
                  haar_worst, curve.c_str(), trend ? "yes" : "no");
    return buf;
}

std::string c10_resources(bool &pass) {
    std::vector<resources::IterationCost> p_sweep, n_sweep;
    for (int p : {1, 2, 4, 8}) {
        p_sweep.push_back(resources::iteration_cost(6, p, vqa::Ansatz{6, 7}));
    }
    for (int n = 3; n <= 7; ++n) {
        n_sweep.push_back(resources::iteration_cost(n, 1, vqa::Ansatz{n, 7}));
    }
    const auto report = resources::iteration_cost_report(p_sweep, n_sweep);
    pass = report.p_ok() && report.n_ok();
    std::string ratios;
    for (std::size_t i = 0; i < report.n_ratios.size(); ++i) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%s%.2f/%.2f", i ? "," : "", report.n_ratios[i],
                      report.n_ratio_limits[i]);
        ratios += buf;
    }
    char buf[300];
    std::snprintf(buf, sizeof buf,
                  "cost exponent in p=%.3f (<=%.1f)  successive-N cost ratio/limit: %s",
                  report.p_exponent, report.p_exponent_limit, ratios.c_str());
    return buf;
}

} // namespace

int main() {
    const std::vector<std::pair<const char *, Criterion>> criteria{
        {"decomposition fidelity", c1_decomposition},
        {"block-encoding correctness", c2_block_encoding},
        {"estimator exactness", c3_estimators},
        {"gradient check", c4_gradient},
        {"VQA solve", c5_solve},
        {"FEM convergence order", c6_convergence},
        {"LCU scaling", c7_lcu},
        {"shift-circuit equivalence", c8_shift},
        {"expressiveness", c9_expressiveness},
        {"resource trends", c10_resources},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        bool pass = false;
        std::string detail;
        try {
            detail = criteria[i].second(pass);
        } catch (const std::exception &e) {
            pass = false;
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  %2zu  %-27s %s  [%.1fs]\n", pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first, detail.c_str(), secs);
        std::fflush(stdout);
        failures += pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
