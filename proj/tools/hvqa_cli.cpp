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
 * hvqa command-line front-end.
 *
 * Exit codes: 0 success, 1 scientific-check failure or solver error,
 * 2 usage or configuration error. Every option can also be set from a
 * TOML/INI file (--config) or from an HVQA_<NAME> environment variable.
 */

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <type_traits>
#include <vector>

#include "CLI11.hpp"
#include "hvqa/hvqa.hpp"

namespace fs = std::filesystem;
using namespace hvqa;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_check = 1;
constexpr int exit_usage = 2;

/// Accepts a real number, "pi", "2pi", "pi/2", "0.5pi", "3*pi/4".
double parse_wavenumber(const std::string &text) {
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    double value = 1.0;
    std::string rest = s;
    const auto at = s.find("pi");
    if (at != std::string::npos) {
        std::string coef = s.substr(0, at);
        if (!coef.empty() && coef.back() == '*') {
            coef.pop_back();
        }
        value = pi;
        if (!coef.empty()) {
            std::size_t used = 0;
            try {
                value *= std::stod(coef, &used);
            } catch (const std::exception &) {
                used = std::string::npos;
            }
            if (used != coef.size()) {
                throw ConfigError("cannot parse wavenumber '" + text + "'");
            }
        }
        rest = s.substr(at + 2);
        if (!rest.empty()) {
            if (rest[0] != '/') {
                throw ConfigError("cannot parse wavenumber '" + text + "'");
            }
            std::size_t used = 0;
            double den = 0.0;
            try {
                den = std::stod(rest.substr(1), &used);
            } catch (const std::exception &) {
                used = std::string::npos;
            }
            if (used != rest.size() - 1 || den == 0.0) {
                throw ConfigError("cannot parse wavenumber '" + text + "'");
            }
            value /= den;
        }
        return value;
    }
    std::size_t used = 0;
    try {
        value = std::stod(s, &used);
    } catch (const std::exception &) {
        used = std::string::npos;
    }
    if (s.empty() || used != s.size()) {
        throw ConfigError("cannot parse wavenumber '" + text + "'");
    }
    return value;
}

std::vector<double> parse_wavenumbers(const std::vector<std::string> &texts) {
    std::vector<double> ks;
    for (const auto &t : texts) {
        const double k = parse_wavenumber(t);
        if (!(k >= 0.0) || !std::isfinite(k)) {
            throw ConfigError("wavenumber must be finite and >= 0, got '" + t + "'");
        }
        ks.push_back(k);
    }
    return ks;
}

std::string fmt(double v, const char *spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

template <class T> std::string join(const std::vector<T> &values) {
    std::ostringstream out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out << (i ? "," : "");
        if constexpr (std::is_floating_point_v<T>) {
            out << fmt(values[i]);
        } else {
            out << values[i];
        }
    }
    return out.str();
}

struct Common {
    std::string out = "out";
    std::uint64_t seed = 0;
};

void prepare_out(const std::string &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw ConfigError("cannot create output directory '" + dir + "'");
    }
}

std::string path_in(const std::string &dir, const std::string &name) {
    return (fs::path(dir) / name).string();
}

io::Metadata metadata(const std::string &command, const std::string &canonical,
                      std::uint64_t seed) {
    io::Metadata meta;
    meta.command = command;
    meta.config_hash = io::fnv1a(canonical);
    meta.seed = seed;
    meta.extra.emplace_back("config", canonical);
    return meta;
}

// ---------------------------------------------------------------- plots

std::vector<std::string> unique_in_order(const std::vector<std::string> &values) {
    std::vector<std::string> out;
    for (const auto &v : values) {
        if (std::find(out.begin(), out.end(), v) == out.end()) {
            out.push_back(v);
        }
    }
    return out;
}

std::vector<std::string> text_column(const io::CsvFile &csv, const std::string &name) {
    const auto c = csv.column(name);
    std::vector<std::string> out;
    for (const auto &r : csv.rows) {
        out.push_back(r.at(c));
    }
    return out;
}

/// Rows of `csv` grouped by the values of `keys`, in first-appearance order.
std::vector<std::pair<std::vector<std::string>, std::vector<std::size_t>>>
group_rows(const io::CsvFile &csv, const std::vector<std::string> &keys) {
    std::vector<std::size_t> cols;
    for (const auto &k : keys) {
        cols.push_back(csv.column(k));
    }
    std::vector<std::pair<std::vector<std::string>, std::vector<std::size_t>>> groups;
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        std::vector<std::string> key;
        for (auto c : cols) {
            key.push_back(csv.rows[i].at(c));
        }
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto &g) { return g.first == key; });
        if (it == groups.end()) {
            groups.push_back({key, {i}});
        } else {
            it->second.push_back(i);
        }
    }
    return groups;
}

std::vector<double> pick(const io::CsvFile &csv, const std::string &name,
                         const std::vector<std::size_t> &rows) {
    const auto c = csv.column(name);
    std::vector<double> out;
    for (auto i : rows) {
        out.push_back(std::stod(csv.rows[i].at(c)));
    }
    return out;
}

std::string k_label(const std::string &k) { return fmt(std::stod(k), "%.4g"); }

using PlotSet = std::vector<std::pair<std::string, svg::Plot>>;

PlotSet plot_solve_solution(const io::CsvFile &csv) {
    PlotSet plots;
    const auto ks = unique_in_order(text_column(csv, "k"));
    for (std::size_t i = 0; i < ks.size(); ++i) {
        svg::Plot plot;
        plot.title = "VQA and classical solutions, k = " + k_label(ks[i]);
        plot.xlabel = "x";
        plot.ylabel = "u(x)";
        for (const auto &[key, rows] : group_rows(csv, {"k", "p"})) {
            if (key[0] != ks[i]) {
                continue;
            }
            const auto x = pick(csv, "x", rows);
            plot.series.push_back({"VQA p=" + key[1], x, pick(csv, "vqa", rows), true, false});
            plot.series.push_back({"classical p=" + key[1], x, pick(csv, "classical", rows),
                                   false, true});
        }
        plots.emplace_back("solve_k" + std::to_string(i) + ".svg", std::move(plot));
    }
    return plots;
}

PlotSet plot_solve_trace(const io::CsvFile &csv) {
    svg::Plot plot;
    plot.title = "Residual over BFGS iterations";
    plot.xlabel = "iteration";
    plot.ylabel = "||A x - f||^2 / ||f||^2";
    plot.logy = true;
    for (const auto &[key, rows] : group_rows(csv, {"k", "p"})) {
        plot.series.push_back({"k=" + k_label(key[0]) + " p=" + key[1],
                               pick(csv, "iteration", rows), pick(csv, "residual", rows),
                               false, false});
    }
    return {{"solve_residual.svg", std::move(plot)}};
}

PlotSet plot_expressiveness(const io::CsvFile &csv) {
    svg::Plot plot;
    plot.title = "KL divergence to the Haar fidelity law";
    plot.xlabel = "parameters";
    plot.ylabel = "KL";
    plot.logy = true;
    for (const auto &[key, rows] : group_rows(csv, {"group", "n"})) {
        plot.series.push_back({key[0] + " n=" + key[1], pick(csv, "parameters", rows),
                               pick(csv, "KL", rows), true, false});
    }
    return {{"expressiveness.svg", std::move(plot)}};
}

PlotSet plot_resources(const io::CsvFile &csv) {
    svg::Plot circuits;
    circuits.title = "LCU unitaries per target";
    circuits.xlabel = "p";
    circuits.ylabel = "unitaries";
    circuits.logx = true;
    circuits.logy = true;
    svg::Plot depth;
    depth.title = "Maximum lowered depth per term";
    depth.xlabel = "n";
    depth.ylabel = "depth";
    depth.logy = true;
    const auto ns = pick(csv, "n", [&] {
        std::vector<std::size_t> all(csv.rows.size());
        for (std::size_t i = 0; i < all.size(); ++i) {
            all[i] = i;
        }
        return all;
    }());
    const double n_max = ns.empty() ? 0.0 : *std::max_element(ns.begin(), ns.end());
    for (const auto &target : unique_in_order(text_column(csv, "target"))) {
        std::map<double, double> total;
        for (const auto &[key, rows] : group_rows(csv, {"target", "n", "p"})) {
            if (key[0] == target && std::stod(key[1]) == n_max) {
                double sum = 0.0;
                for (double c : pick(csv, "circuits", rows)) {
                    sum += c;
                }
                total[std::stod(key[2])] = sum;
            }
        }
        svg::Series s{target + " (n=" + fmt(n_max, "%g") + ")", {}, {}, true, false};
        for (const auto &[p, c] : total) {
            s.x.push_back(p);
            s.y.push_back(c);
        }
        circuits.series.push_back(std::move(s));
    }
    const auto ps = pick(csv, "p", [&] {
        std::vector<std::size_t> all(csv.rows.size());
        for (std::size_t i = 0; i < all.size(); ++i) {
            all[i] = i;
        }
        return all;
    }());
    const double p_max = ps.empty() ? 0.0 : *std::max_element(ps.begin(), ps.end());
    for (const auto &[key, rows] : group_rows(csv, {"target", "term", "p"})) {
        if (std::stod(key[2]) != p_max) {
            continue;
        }
        const auto y = pick(csv, "max_depth", rows);
        if (std::all_of(y.begin(), y.end(), [](double v) { return v <= 0.0; })) {
            continue;
        }
        depth.series.push_back({key[0] + " " + key[1] + " p=" + key[2], pick(csv, "n", rows),
                                y, true, false});
    }
    return {{"resources_circuits.svg", std::move(circuits)},
            {"resources_depth.svg", std::move(depth)}};
}

PlotSet plot_resources_cost(const io::CsvFile &csv) {
    svg::Plot plot;
    plot.title = "Proxy cost per BFGS iteration";
    plot.xlabel = "p";
    plot.ylabel = "cost";
    plot.logx = true;
    plot.logy = true;
    for (const auto &[key, rows] : group_rows(csv, {"sweep"})) {
        if (key[0] != "p") {
            continue;
        }
        plot.series.push_back({"fixed n", pick(csv, "p", rows), pick(csv, "cost", rows), true,
                               false});
    }
    return {{"resources_cost.svg", std::move(plot)}};
}

PlotSet plot_convergence(const io::CsvFile &csv) {
    svg::Plot plot;
    plot.title = "FEM L2 error";
    plot.xlabel = "h";
    plot.ylabel = "L2 error";
    plot.logx = true;
    plot.logy = true;
    for (const auto &[key, rows] : group_rows(csv, {"k", "p"})) {
        plot.series.push_back({"k=" + k_label(key[0]) + " p=" + key[1], pick(csv, "h", rows),
                               pick(csv, "l2_error", rows), true, false});
    }
    return {{"convergence.svg", std::move(plot)}};
}

const std::map<std::string, PlotSet (*)(const io::CsvFile &)> &plotters() {
    static const std::map<std::string, PlotSet (*)(const io::CsvFile &)> table{
        {"solve_solution.csv", plot_solve_solution},
        {"solve_trace.csv", plot_solve_trace},
        {"expressiveness.csv", plot_expressiveness},
        {"resources.csv", plot_resources},
        {"resources_cost.csv", plot_resources_cost},
        {"convergence.csv", plot_convergence},
    };
    return table;
}

/// Renders every SVG derived from `csv_name` in `dir`; returns the file count.
int replot(const std::string &dir, const std::string &csv_name) {
    const auto it = plotters().find(csv_name);
    if (it == plotters().end()) {
        return 0;
    }
    const auto csv = io::read_csv(path_in(dir, csv_name));
    int count = 0;
    for (const auto &[name, plot] : it->second(csv)) {
        svg::write(path_in(dir, name), plot);
        ++count;
    }
    return count;
}

// ---------------------------------------------------------------- commands

struct SolveConfig {
    int n = 4;
    std::vector<int> p{1, 2, 4};
    std::vector<std::string> k{"0", "pi", "2pi"};
    int layers = 7;
    std::uint64_t shots = 0;
    bool exact = false;
    double residual_tol = 1e-4;
    double fidelity_tol = 0.999;
};

struct ShotCheck {
    double estimate = 0.0;  ///< 1 + J from the shot estimates, NaN if <phi|A^T A|phi> <= 0
    double z_overlap = 0.0; ///< (estimate - exact) / std_error
    double z_quadratic = 0.0;
};

/// Fresh shot estimates at theta against their exact values.
ShotCheck shot_check(const vqa::CostModel &model, const Vector &theta,
                     const estimators::Mode &mode) {
    const auto phi = model.ansatz().circuit(theta);
    const auto exact = estimators::Mode::exact_mode();
    auto mode_q = mode;
    mode_q.seed = splitmix64(mode.seed + 1);
    const auto ov = estimators::estimate_overlap(model.encoding_a(), model.prep_f(), phi, mode);
    const auto q = estimators::estimate_quadratic(model.encoding_ata(), phi, mode_q);
    const double ov0 =
        estimators::estimate_overlap(model.encoding_a(), model.prep_f(), phi, exact).value;
    const double q0 = estimators::estimate_quadratic(model.encoding_ata(), phi, exact).value;
    auto z = [](double est, double ref, double se) {
        return se > 0.0 ? (est - ref) / se : (est == ref ? 0.0 : HUGE_VAL);
    };
    ShotCheck c;
    c.estimate = q.value > 0.0 ? 1.0 - ov.value * ov.value / q.value
                               : std::numeric_limits<double>::quiet_NaN();
    c.z_overlap = z(ov.value, ov0, ov.std_error);
    c.z_quadratic = z(q.value, q0, q.std_error);
    return c;
}

int cmd_solve(const Common &common, const SolveConfig &cfg) {
    const auto ks = parse_wavenumbers(cfg.k);
    if (cfg.exact && cfg.shots > 0) {
        throw ConfigError("--exact and --shots are mutually exclusive");
    }
    if (cfg.n < 2 || cfg.n > 10) {
        throw ConfigError("solve: --n must lie in [2, 10]");
    }
    if (cfg.layers < 0) {
        throw ConfigError("solve: --layers must be >= 0");
    }
    for (int p : cfg.p) {
        if (p != 1 && p != 2 && p != 4 && p != 8) {
            throw ConfigError("solve: --p must be one of 1, 2, 4, 8");
        }
        if ((1 << cfg.n) < 4 * p) {
            throw ConfigError("solve: need 2^n >= 4p (at least four elements) for p = " +
                              std::to_string(p));
        }
    }
    if (ks.empty() || cfg.p.empty()) {
        throw ConfigError("solve: need at least one k and one p");
    }
    const bool exact = cfg.shots == 0;
    const std::string canonical = "solve;n=" + std::to_string(cfg.n) + ";p=" + join(cfg.p) +
                                  ";k=" + join(ks) + ";layers=" + std::to_string(cfg.layers) +
                                  ";shots=" + std::to_string(cfg.shots) +
                                  ";seed=" + std::to_string(common.seed);
    prepare_out(common.out);

    io::Table trace{{"k", "p", "iteration", "J", "residual", "grad_norm", "r"}, {}};
    io::Table solution{{"k", "p", "dof", "x", "vqa", "classical"}, {}};
    io::Table summary{{"k", "p", "num_elements", "mode", "shots", "iterations", "status",
                       "residual", "fidelity", "residual_estimate", "z_overlap", "z_quadratic",
                       "pass"},
                      {}};
    bool all_pass = true;
    std::uint64_t case_index = 0;
    for (double k : ks) {
        for (int p : cfg.p) {
            const std::uint64_t case_seed = splitmix64(common.seed ^ splitmix64(case_index++));
            const int num_elements = (1 << cfg.n) / p;
            const auto sys = fem::assemble({num_elements, p, k, [](double) { return 1.0; }});
            const auto mode = exact ? estimators::Mode::exact_mode()
                                    : estimators::Mode::sampled(cfg.shots, case_seed);
            const vqa::CostModel model(sys, vqa::Ansatz{cfg.n, cfg.layers}, mode);
            vqa::SolveOptions opt;
            opt.seed = case_seed;
            auto run = vqa::solve(model, opt);
            vqa::attach_classical(run, sys);

            ShotCheck shot;
            bool pass = false;
            if (exact) {
                pass = run.residual <= cfg.residual_tol && run.fidelity >= cfg.fidelity_tol;
                shot.estimate = run.residual;
            } else {
                const auto fresh =
                    estimators::Mode::sampled(cfg.shots, splitmix64(case_seed ^ 0xc4ec));
                shot = shot_check(model, run.theta, fresh);
                pass = std::abs(shot.z_overlap) <= 5.0 && std::abs(shot.z_quadratic) <= 5.0;
            }
            all_pass = all_pass && pass;

            for (const auto &row : run.trace) {
                trace.add({k, static_cast<long long>(p), static_cast<long long>(row.iteration),
                           row.cost, row.residual, row.grad_norm, row.r});
            }
            const auto xs = fem::dof_coordinates(num_elements, p);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const auto e = static_cast<Eigen::Index>(i);
                solution.add({k, static_cast<long long>(p), static_cast<long long>(i), xs[i],
                              run.solution(e), run.classical(e)});
            }
            summary.add({k, static_cast<long long>(p), static_cast<long long>(num_elements),
                         std::string(exact ? "exact" : "shots"),
                         static_cast<long long>(cfg.shots),
                         static_cast<long long>(run.iterations),
                         std::string(bfgs::to_string(run.status)), run.residual, run.fidelity,
                         shot.estimate, shot.z_overlap, shot.z_quadratic,
                         static_cast<long long>(pass)});
            std::printf("solve k=%-8.4g p=%d  iterations=%-4d residual=%.3e fidelity=%.9f%s  %s\n",
                        k, p, run.iterations, run.residual, run.fidelity,
                        exact ? ""
                              : (" z_overlap=" + fmt(shot.z_overlap, "%.2f") +
                                 " z_quadratic=" + fmt(shot.z_quadratic, "%.2f"))
                                    .c_str(),
                        pass ? "PASS" : "FAIL");
        }
    }
    auto meta = metadata("solve", canonical, common.seed);
    meta.extra.emplace_back("mode", exact ? "exact" : "shots");
    io::write_csv(path_in(common.out, "solve_trace.csv"), meta, trace);
    io::write_csv(path_in(common.out, "solve_solution.csv"), meta, solution);
    io::write_csv(path_in(common.out, "solve_summary.csv"), meta, summary);
    replot(common.out, "solve_solution.csv");
    replot(common.out, "solve_trace.csv");
    return all_pass ? exit_ok : exit_check;
}

struct DecomposeConfig {
    std::vector<int> n;
    std::vector<int> p;
    std::vector<std::string> k{"0", "pi", "2pi"};
    bool perturb = false;
    bool dump_blocks = false;
    double tol_a = 1e-12;
    double tol_ata = 1e-10;
    double tol_block = 1e-10;
    int max_encoding_qubits = 6;
};

int cmd_decompose_check(const Common &common, const DecomposeConfig &cfg) {
    const auto ks = parse_wavenumbers(cfg.k);
    std::vector<std::pair<int, int>> cases; // (num_elements, p)
    if (cfg.n.empty() && cfg.p.empty()) {
        cases = {{8, 1}, {16, 1}, {4, 2}, {8, 2}, {4, 4}};
    } else {
        const auto ns = cfg.n.empty() ? std::vector<int>{3, 4} : cfg.n;
        const auto ps = cfg.p.empty() ? std::vector<int>{1, 2, 4} : cfg.p;
        for (int n : ns) {
            if (n < 2 || n > blockstruct::max_dense_qubits) {
                throw ConfigError("decompose-check: --n must lie in [2, " +
                                  std::to_string(blockstruct::max_dense_qubits) + "]");
            }
            for (int p : ps) {
                if (p != 1 && p != 2 && p != 4 && p != 8) {
                    throw ConfigError("decompose-check: --p must be one of 1, 2, 4, 8");
                }
                if ((1 << n) >= 4 * p) {
                    cases.emplace_back((1 << n) / p, p);
                }
            }
        }
        if (cases.empty()) {
            throw ConfigError("decompose-check: no (n, p) pair with 2^n >= 4p");
        }
    }
    std::string canonical = "decompose-check;cases=";
    for (const auto &[ne, p] : cases) {
        canonical += std::to_string(ne) + "x" + std::to_string(p) + ",";
    }
    canonical += ";k=" + join(ks) + ";perturb=" + std::to_string(cfg.perturb);
    prepare_out(common.out);

    io::Table table{{"num_elements", "p", "k", "n", "err_A", "err_AtA", "err_block_A",
                     "err_block_AtA", "pass"},
                    {}};
    bool all_pass = true;
    double max_a = 0.0, max_ata = 0.0, max_block = 0.0;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        const double k = ks[ki];
        for (const auto &[ne, p] : cases) {
            const auto sys = fem::assemble({ne, p, k, [](double) { return 1.0; }});
            const int n = sys.num_qubits();
            const auto bd = blockstruct::extract_blocks(sys.matrix, p);
            const auto terms_a = blockstruct::decompose_A(bd, n);
            const auto terms_ata = blockstruct::decompose_AdagA(bd, n);
            Matrix target_a = sys.matrix;
            if (cfg.perturb) {
                target_a(0, 0) += 1e-6 * std::max(1.0, target_a.cwiseAbs().maxCoeff());
            }
            const Matrix ata = sys.matrix.transpose() * sys.matrix;
            const double err_a =
                (target_a - blockstruct::reconstruct(terms_a, n)).cwiseAbs().maxCoeff();
            const double err_ata =
                (ata - blockstruct::reconstruct(terms_ata, n)).cwiseAbs().maxCoeff();
            double err_ba = -1.0, err_bata = -1.0;
            if (n <= cfg.max_encoding_qubits) {
                const auto be_a = estimators::build_block_encoding(
                    lcu::compile_full(terms_a, n, "A"));
                const auto be_ata = estimators::build_block_encoding(
                    lcu::compile_full(terms_ata, n, "AtA"));
                err_ba = (estimators::top_left_block(be_a) -
                          (target_a / be_a.eta).cast<Complex>())
                             .cwiseAbs()
                             .maxCoeff();
                err_bata = (estimators::top_left_block(be_ata) -
                            (ata / be_ata.eta).cast<Complex>())
                               .cwiseAbs()
                               .maxCoeff();
            }
            const bool pass = err_a <= cfg.tol_a && err_ata <= cfg.tol_ata &&
                              err_ba <= cfg.tol_block && err_bata <= cfg.tol_block;
            all_pass = all_pass && pass;
            max_a = std::max(max_a, err_a);
            max_ata = std::max(max_ata, err_ata);
            max_block = std::max({max_block, err_ba, err_bata});
            table.add({static_cast<long long>(ne), static_cast<long long>(p), k,
                       static_cast<long long>(n), err_a, err_ata, err_ba, err_bata,
                       static_cast<long long>(pass)});
            std::printf("N=%-3d p=%d k=%-8.4g  |A-sum|=%.2e  |AtA-sum|=%.2e  block=%.2e/%.2e  %s\n",
                        ne, p, k, err_a, err_ata, err_ba, err_bata, pass ? "PASS" : "FAIL");
            if (cfg.dump_blocks) {
                const std::string name = "blocks_N" + std::to_string(ne) + "_p" +
                                         std::to_string(p) + "_k" + std::to_string(ki) +
                                         ".json";
                std::ofstream out(path_in(common.out, name));
                if (!out) {
                    throw ConfigError("cannot write " + path_in(common.out, name));
                }
                out << blockstruct::to_json(bd);
            }
        }
    }
    io::write_csv(path_in(common.out, "decompose_check.csv"),
                  metadata("decompose-check", canonical, common.seed), table);
    std::printf("max |A - sum A_k| = %.3e (tol %.0e)\n", max_a, cfg.tol_a);
    std::printf("max |A^T A - sum A'_k| = %.3e (tol %.0e)\n", max_ata, cfg.tol_ata);
    std::printf("max block-encoding error = %.3e (tol %.0e)\n", max_block, cfg.tol_block);
    return all_pass ? exit_ok : exit_check;
}

struct ExpressivenessConfig {
    std::vector<int> n{2, 4, 6};
    int layers = 8;
    std::string group = "SO";
    std::string rotations;
    int samples = 10000;
    int bins = 75;
    int bootstrap = 10;
    double threshold = 0.0;
};

int cmd_expressiveness(const Common &common, const ExpressivenessConfig &cfg) {
    if (cfg.samples < 1000) {
        throw ConfigError("expressiveness: samples >= 1000 required (got " +
                          std::to_string(cfg.samples) + ")");
    }
    if (cfg.group != "SU" && cfg.group != "SO") {
        throw ConfigError("expressiveness: --group must be SU or SO");
    }
    const auto group = cfg.group == "SU" ? expressiveness::Group::SU : expressiveness::Group::SO;
    std::string rot = cfg.rotations;
    if (rot.empty()) {
        rot = group == expressiveness::Group::SU ? "ryrz" : "ry";
    }
    if (rot != "ry" && rot != "ryrz") {
        throw ConfigError("expressiveness: --rotations must be ry or ryrz");
    }
    const auto rotations = rot == "ry" ? vqa::Rotations::RY : vqa::Rotations::RYRZ;
    if (cfg.layers < 1) {
        throw ConfigError("expressiveness: --layers must be >= 1");
    }
    for (int n : cfg.n) {
        if (n < 1 || n > 12) {
            throw ConfigError("expressiveness: --n must lie in [1, 12]");
        }
    }
    const std::string canonical =
        "expressiveness;n=" + join(cfg.n) + ";layers=" + std::to_string(cfg.layers) +
        ";group=" + cfg.group + ";rotations=" + rot + ";samples=" + std::to_string(cfg.samples) +
        ";bins=" + std::to_string(cfg.bins) + ";bootstrap=" + std::to_string(cfg.bootstrap) +
        ";threshold=" + fmt(cfg.threshold) + ";seed=" + std::to_string(common.seed);
    prepare_out(common.out);

    io::Table table{{"group", "L", "n", "parameters", "KL", "stderr"}, {}};
    for (int n : cfg.n) {
        double prev_kl = 0.0, prev_se = 0.0;
        for (int L = 1; L <= cfg.layers; ++L) {
            expressiveness::Settings s;
            s.pairs = cfg.samples;
            s.bins = cfg.bins;
            s.bootstrap = cfg.bootstrap;
            s.seed = splitmix64(common.seed ^ splitmix64(static_cast<std::uint64_t>(n * 1000 + L)));
            const vqa::Ansatz ansatz{n, L, rotations};
            const auto r = expressiveness::kl_divergence(ansatz, group, s);
            table.add({cfg.group, static_cast<long long>(L), static_cast<long long>(n),
                       static_cast<long long>(r.parameters), r.kl, r.std_error});
            const bool rise = L > 1 && r.kl > prev_kl + 2.0 * std::hypot(prev_se, r.std_error);
            std::printf("n=%d L=%d parameters=%-4d KL=%.5f +- %.5f%s\n", n, L, r.parameters, r.kl,
                        r.std_error, rise ? "  (rise beyond 2 standard errors)" : "");
            prev_kl = r.kl;
            prev_se = r.std_error;
        }
    }
    const auto meta = metadata("expressiveness", canonical, common.seed);
    io::write_csv(path_in(common.out, "expressiveness.csv"), meta, table);
    replot(common.out, "expressiveness.csv");

    if (cfg.threshold > 0.0) {
        expressiveness::Settings s;
        s.pairs = cfg.samples;
        s.bins = cfg.bins;
        s.seed = common.seed;
        const auto fit =
            expressiveness::parameters_for_threshold(cfg.n, group, cfg.threshold, cfg.layers, s);
        io::Table t{{"n", "layers", "parameters", "KL"}, {}};
        for (const auto &pt : fit.points) {
            t.add({static_cast<long long>(pt.num_qubits), static_cast<long long>(pt.layers),
                   static_cast<long long>(pt.parameters), pt.kl});
        }
        auto m = meta;
        m.extra.emplace_back("exponent", fmt(fit.exponent));
        m.extra.emplace_back("complete", fit.complete ? "1" : "0");
        io::write_csv(path_in(common.out, "expressiveness_threshold.csv"), m, t);
        std::printf("parameters to reach KL <= %g grow like n^%.3f%s\n", cfg.threshold,
                    fit.exponent, fit.complete ? "" : " (threshold not reached for every n)");
    }
    return exit_ok;
}

struct ResourcesConfig {
    std::vector<int> n{3, 4, 5, 6, 7};
    std::vector<int> p{1, 2, 4, 8};
    std::vector<std::string> k{"0"};
    int layers = 7;
    double slack = 1.5;
};

int cmd_resources(const Common &common, const ResourcesConfig &cfg) {
    const auto ks = parse_wavenumbers(cfg.k);
    if (ks.size() != 1) {
        throw ConfigError("resources: give exactly one --k");
    }
    std::set<int> ns(cfg.n.begin(), cfg.n.end());
    std::set<int> ps(cfg.p.begin(), cfg.p.end());
    for (int p : ps) {
        if (p != 1 && p != 2 && p != 4 && p != 8) {
            throw ConfigError("resources: --p must be one of 1, 2, 4, 8");
        }
    }
    for (int n : ns) {
        if (n < 2 || n > 12) {
            throw ConfigError("resources: --n must lie in [2, 12]");
        }
    }
    std::vector<resources::SweepPoint> sweep;
    for (int n : ns) {
        for (int p : ps) {
            if ((1 << n) >= 4 * p) {
                sweep.push_back({n, p});
            }
        }
    }
    if (sweep.empty()) {
        throw ConfigError("resources: no (n, p) pair with 2^n >= 4p");
    }
    const std::string canonical =
        "resources;n=" + join(std::vector<int>(ns.begin(), ns.end())) +
        ";p=" + join(std::vector<int>(ps.begin(), ps.end())) + ";k=" + fmt(ks[0]) +
        ";layers=" + std::to_string(cfg.layers) + ";slack=" + fmt(cfg.slack);
    prepare_out(common.out);
    const auto meta = metadata("resources", canonical, common.seed);

    const auto rows = resources::tabulate(sweep, ks[0]);
    io::Table table{{"target", "term", "n", "p", "num_elements", "circuits", "max_depth"}, {}};
    for (const auto &r : rows) {
        table.add({r.target, r.term, static_cast<long long>(r.n), static_cast<long long>(r.p),
                   static_cast<long long>(r.num_elements), static_cast<long long>(r.circuits),
                   static_cast<long long>(r.max_depth)});
    }
    io::write_csv(path_in(common.out, "resources.csv"), meta, table);
    replot(common.out, "resources.csv");

    io::Table fits{{"quantity", "target", "term", "fixed", "exponent"}, {}};
    const int n_top = sweep.back().n;
    for (const std::string target : {"A", "AtA"}) {
        std::vector<double> xp, yc;
        for (int p : ps) {
            double total = 0.0;
            bool any = false;
            for (const auto &r : rows) {
                if (r.target == target && r.n == n_top && r.p == p) {
                    total += static_cast<double>(r.circuits);
                    any = true;
                }
            }
            if (any) {
                xp.push_back(p);
                yc.push_back(total);
            }
        }
        const double e = resources::fit_exponent(xp, yc);
        fits.add({std::string("circuits_vs_p"), target, std::string("all"),
                  "n=" + std::to_string(n_top), e});
        std::printf("%-3s unitaries ~ p^%.3f at n=%d\n", target.c_str(), e, n_top);
    }
    for (const auto &[key, idx] : [&] {
             std::map<std::tuple<std::string, std::string, int>, std::vector<std::size_t>> g;
             for (std::size_t i = 0; i < rows.size(); ++i) {
                 g[{rows[i].target, rows[i].term, rows[i].p}].push_back(i);
             }
             return g;
         }()) {
        std::vector<double> xn, yd;
        for (auto i : idx) {
            xn.push_back(rows[i].n);
            yd.push_back(rows[i].max_depth);
        }
        fits.add({std::string("depth_vs_n"), std::get<0>(key), std::get<1>(key),
                  "p=" + std::to_string(std::get<2>(key)), resources::fit_exponent(xn, yd)});
    }
    io::write_csv(path_in(common.out, "resources_fits.csv"), meta, fits);

    std::vector<resources::IterationCost> p_sweep, n_sweep;
    const int p_low = *ps.begin();
    for (int p : ps) {
        if ((1 << n_top) >= 4 * p) {
            p_sweep.push_back(resources::iteration_cost(
                n_top, p, vqa::Ansatz{n_top, cfg.layers}, ks[0]));
        }
    }
    for (int n : ns) {
        if ((1 << n) >= 4 * p_low) {
            n_sweep.push_back(
                resources::iteration_cost(n, p_low, vqa::Ansatz{n, cfg.layers}, ks[0]));
        }
    }
    const auto report = resources::iteration_cost_report(p_sweep, n_sweep, cfg.slack);
    io::Table cost{{"sweep", "n", "p", "num_elements", "parameters", "terms_a", "terms_ata",
                    "depth_overlap", "depth_quadratic", "cost"},
                   {}};
    auto add_cost = [&](const std::string &which, const resources::IterationCost &c) {
        cost.add({which, static_cast<long long>(c.n), static_cast<long long>(c.p),
                  static_cast<long long>(c.num_elements), static_cast<long long>(c.parameters),
                  static_cast<long long>(c.terms_a), static_cast<long long>(c.terms_ata),
                  static_cast<long long>(c.depth_overlap),
                  static_cast<long long>(c.depth_quadratic), c.cost});
    };
    for (const auto &c : report.p_sweep) {
        add_cost("p", c);
    }
    for (const auto &c : report.n_sweep) {
        add_cost("n", c);
    }
    auto cost_meta = meta;
    cost_meta.extra.emplace_back("p_exponent", fmt(report.p_exponent));
    cost_meta.extra.emplace_back("p_exponent_limit", fmt(report.p_exponent_limit));
    io::write_csv(path_in(common.out, "resources_cost.csv"), cost_meta, cost);
    replot(common.out, "resources_cost.csv");

    std::printf("iteration cost ~ p^%.3f at n=%d (limit %.2f)  %s\n", report.p_exponent, n_top,
                report.p_exponent_limit, report.p_ok() ? "PASS" : "FAIL");
    for (std::size_t i = 0; i < report.n_ratios.size(); ++i) {
        std::printf("cost(n=%d)/cost(n=%d) = %.3f (limit %.3f)\n", report.n_sweep[i + 1].n,
                    report.n_sweep[i].n, report.n_ratios[i], report.n_ratio_limits[i]);
    }
    std::printf("polylog growth in N: %s\n", report.n_ok() ? "PASS" : "FAIL");
    return report.p_ok() && report.n_ok() ? exit_ok : exit_check;
}

struct ConvergenceConfig {
    std::vector<int> p{1, 2};
    std::vector<int> elements{4, 8, 16, 32};
    std::vector<std::string> k{"pi"};
    double slope_tol = 0.3;
};

int cmd_convergence(const Common &common, const ConvergenceConfig &cfg) {
    const auto ks = parse_wavenumbers(cfg.k);
    if (cfg.elements.size() < 2) {
        throw ConfigError("convergence: need at least two --elements levels");
    }
    for (int p : cfg.p) {
        if (p != 1 && p != 2 && p != 4 && p != 8) {
            throw ConfigError("convergence: --p must be one of 1, 2, 4, 8");
        }
    }
    const std::string canonical = "convergence;p=" + join(cfg.p) +
                                  ";elements=" + join(cfg.elements) + ";k=" + join(ks);
    prepare_out(common.out);
    io::Table table{{"k", "p", "num_elements", "h", "l2_error"}, {}};
    bool all_pass = true;
    for (double k : ks) {
        // u = sin(pi x / 2): u(0) = 0, u'(1) = 0.
        auto exact = [](double x) { return std::sin(pi * x / 2); };
        auto rhs = [k](double x) { return (k * k - pi * pi / 4) * std::sin(pi * x / 2); };
        for (int p : cfg.p) {
            const auto result = fem::convergence_study(p, k, exact, rhs, cfg.elements);
            for (const auto &lv : result.levels) {
                table.add({k, static_cast<long long>(p), static_cast<long long>(lv.num_elements),
                           lv.h, lv.l2_error});
            }
            const bool pass = std::abs(result.slope - (p + 1)) <= cfg.slope_tol;
            all_pass = all_pass && pass;
            std::printf("k=%-8.4g p=%d  L2 slope %.3f (expected %d +- %.1f)  %s\n", k, p,
                        result.slope, p + 1, cfg.slope_tol, pass ? "PASS" : "FAIL");
        }
    }
    io::write_csv(path_in(common.out, "convergence.csv"),
                  metadata("convergence", canonical, common.seed), table);
    replot(common.out, "convergence.csv");
    return all_pass ? exit_ok : exit_check;
}

int cmd_replot(const Common &common) {
    if (!fs::is_directory(common.out)) {
        throw ConfigError("replot: '" + common.out + "' is not a directory");
    }
    int count = 0;
    for (const auto &[name, fn] : plotters()) {
        if (fs::exists(path_in(common.out, name))) {
            count += replot(common.out, name);
        }
    }
    std::printf("wrote %d SVG file(s) to %s\n", count, common.out.c_str());
    return exit_ok;
}

/// --name with an HVQA_NAME environment fallback.
template <class T>
CLI::Option *add(CLI::App *app, const std::string &name, T &target, const std::string &help) {
    std::string env = "HVQA_";
    for (char c : name) {
        env += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    auto *opt = app->add_option("--" + name, target, help)->envname(env);
    if constexpr (requires { target.begin(); } && !std::is_same_v<T, std::string>) {
        opt->delimiter(',');
    }
    return opt->capture_default_str();
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"hvqa: variational solver experiments for 1D Helmholtz problems"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a TOML/INI file")->envname("HVQA_CONFIG");
    app.fallthrough();
    app.footer("Every option may also come from HVQA_<OPTION> (for example HVQA_SEED=3,\n"
               "HVQA_P=1,2). Exit codes: 0 success, 1 check failure, 2 usage error.");

    Common common;
    add(&app, "out", common.out, "Output directory");
    add(&app, "seed", common.seed, "Random seed");

    SolveConfig solve;
    auto *sc = app.add_subcommand("solve", "Variational solves over (k, p) with plots");
    add(sc, "n", solve.n, "System qubits (N_dof = 2^n)");
    add(sc, "p", solve.p, "Element orders (repeatable)");
    add(sc, "k", solve.k, "Wavenumbers (repeatable; accepts pi, 2pi, pi/2)");
    add(sc, "layers", solve.layers, "Ansatz layers");
    add(sc, "shots", solve.shots, "Shots per estimate (0: exact)");
    sc->add_flag("--exact", solve.exact, "Exact expectation values (default)")
        ->envname("HVQA_EXACT");
    add(sc, "residual-tol", solve.residual_tol, "Exact-mode residual bound");
    add(sc, "fidelity-tol", solve.fidelity_tol, "Exact-mode fidelity bound");

    DecomposeConfig dec;
    auto *dc = app.add_subcommand("decompose-check",
                                  "Check the five-term decompositions and block encodings");
    add(dc, "n", dec.n, "System qubits (repeatable; default grid when n and p are unset)");
    add(dc, "p", dec.p, "Element orders (repeatable)");
    add(dc, "k", dec.k, "Wavenumbers (repeatable)");
    dc->add_flag("--perturb", dec.perturb, "Perturb A before comparing (forces a failure)")
        ->envname("HVQA_PERTURB");
    dc->add_flag("--dump-blocks", dec.dump_blocks, "Write the blocks of every case as JSON")
        ->envname("HVQA_DUMP_BLOCKS");

    ExpressivenessConfig ex;
    auto *ec = app.add_subcommand("expressiveness", "KL divergence to Haar against layers");
    add(ec, "n", ex.n, "Qubit counts (repeatable)");
    add(ec, "layers", ex.layers, "Largest layer count");
    add(ec, "group", ex.group, "Haar reference: SU or SO");
    add(ec, "rotations", ex.rotations, "ry or ryrz (default: ry for SO, ryrz for SU)");
    add(ec, "samples", ex.samples, "Fidelity pairs per point (>= 1000)");
    add(ec, "bins", ex.bins, "Histogram bins");
    add(ec, "bootstrap", ex.bootstrap, "Bootstrap resamples for the standard error");
    add(ec, "threshold", ex.threshold, "Also fit parameters needed to reach this KL (0: off)");

    ResourcesConfig res;
    auto *rc = app.add_subcommand("resources", "Unitary counts, depths and iteration cost");
    add(rc, "n", res.n, "System qubits (repeatable)");
    add(rc, "p", res.p, "Element orders (repeatable)");
    add(rc, "k", res.k, "Wavenumber");
    add(rc, "layers", res.layers, "Ansatz layers for the iteration cost");
    add(rc, "slack", res.slack, "Allowed factor over quadratic growth between successive n");

    ConvergenceConfig conv;
    auto *cc = app.add_subcommand("convergence", "FEM L2 convergence order");
    add(cc, "p", conv.p, "Element orders (repeatable)");
    add(cc, "elements", conv.elements, "Element counts (repeatable)");
    add(cc, "k", conv.k, "Wavenumbers (repeatable)");

    auto *rp = app.add_subcommand("replot", "Regenerate every SVG in --out from its CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        app.exit(e);
        std::cerr << '\n' << app.help();
        return exit_usage;
    }

    try {
        if (sc->parsed()) {
            return cmd_solve(common, solve);
        }
        if (dc->parsed()) {
            return cmd_decompose_check(common, dec);
        }
        if (ec->parsed()) {
            return cmd_expressiveness(common, ex);
        }
        if (rc->parsed()) {
            return cmd_resources(common, res);
        }
        if (cc->parsed()) {
            return cmd_convergence(common, conv);
        }
        if (rp->parsed()) {
            return cmd_replot(common);
        }
    } catch (const ConfigError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const InvalidInput &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_check;
    }
    return exit_usage;
}
