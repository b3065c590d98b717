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
 * Expressibility: KL divergence between the fidelity distribution of
 * ansatz state pairs and the Haar fidelity law.
 *
 * For Haar-random unit vectors in dimension d the fidelity F = |<x|y>|^2
 * follows Beta(1, d - 1) over C^d (SU) and Beta(1/2, (d - 1)/2) over R^d (SO).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "errors.hpp"
#include "fem.hpp"
#include "rng.hpp"
#include "types.hpp"
#include "vqa.hpp"

namespace hvqa::expressiveness {

enum class Group { SU, SO };

inline const char *to_string(Group group) { return group == Group::SU ? "SU" : "SO"; }

inline boost::math::beta_distribution<double> haar_law(int d, Group group) {
    if (d < 2) {
        throw ConfigError("haar law: dimension must be >= 2");
    }
    return group == Group::SU ? boost::math::beta_distribution<double>(1.0, d - 1.0)
                              : boost::math::beta_distribution<double>(0.5, 0.5 * (d - 1.0));
}

/// Density of F at F in [0, 1].
inline double haar_fidelity_pdf(int d, double F, Group group) {
    if (!(F >= 0.0 && F <= 1.0)) {
        throw InvalidInput("haar_fidelity_pdf: F must lie in [0, 1]");
    }
    if (group == Group::SU) {
        return (d - 1.0) * std::pow(1.0 - F, d - 2.0);
    }
    return boost::math::pdf(haar_law(d, group), F);
}

inline double haar_fidelity_cdf(int d, double F, Group group) {
    return boost::math::cdf(haar_law(d, group), std::clamp(F, 0.0, 1.0));
}

/// Haar probability mass of each of `bins` equal-width bins on [0, 1].
inline std::vector<double> haar_bin_probabilities(int d, int bins, Group group) {
    std::vector<double> q(static_cast<std::size_t>(bins));
    double prev = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double next = b + 1 == bins ? 1.0 : haar_fidelity_cdf(d, (b + 1.0) / bins, group);
        q[static_cast<std::size_t>(b)] = next - prev;
        prev = next;
    }
    return q;
}

inline std::vector<double> histogram(std::span<const double> values, int bins) {
    std::vector<double> p(static_cast<std::size_t>(bins), 0.0);
    for (double v : values) {
        auto b = static_cast<int>(v * bins);
        b = std::clamp(b, 0, bins - 1);
        p[static_cast<std::size_t>(b)] += 1.0;
    }
    for (auto &x : p) {
        x /= static_cast<double>(values.size());
    }
    return p;
}

/// sum p ln(p / (q + eps)) over bins with p > 0.
inline double kl(std::span<const double> p, std::span<const double> q, double eps = 1e-12) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) {
            s += p[i] * std::log(p[i] / (q[i] + eps));
        }
    }
    return std::max(s, 0.0);
}

/// theta uniform in [0, 2 pi)^dim.
inline Vector draw_parameters(const vqa::Ansatz &ansatz, CounterRng &rng) {
    Vector theta(ansatz.num_parameters());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        theta(i) = rng.uniform(0.0, 2.0 * pi);
    }
    return theta;
}

inline double pair_fidelity(const vqa::Ansatz &ansatz, const Vector &a, const Vector &b) {
    return std::norm(ansatz.state(a).dot(ansatz.state(b)));
}

/// Fidelities of `pairs` independent parameter pairs; pair i uses stream i.
inline std::vector<double> sample_fidelities(const vqa::Ansatz &ansatz, int pairs,
                                             std::uint64_t seed) {
    std::vector<double> out(static_cast<std::size_t>(pairs));
    for (int i = 0; i < pairs; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        const Vector a = draw_parameters(ansatz, rng);
        const Vector b = draw_parameters(ansatz, rng);
        out[static_cast<std::size_t>(i)] = pair_fidelity(ansatz, a, b);
    }
    return out;
}

/// Fidelities of Haar-random pairs (Gaussian vectors, normalized).
inline std::vector<double> sample_haar_fidelities(int d, Group group, int pairs,
                                                  std::uint64_t seed) {
    std::vector<double> out(static_cast<std::size_t>(pairs));
    auto draw = [&](CounterRng &rng) {
        CVector v(d);
        for (int i = 0; i < d; ++i) {
            const double re = rng.normal();
            const double im = group == Group::SU ? rng.normal() : 0.0;
            v(i) = Complex(re, im);
        }
        return CVector(v / v.norm());
    };
    for (int i = 0; i < pairs; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        const CVector a = draw(rng);
        const CVector b = draw(rng);
        out[static_cast<std::size_t>(i)] = std::norm(a.dot(b));
    }
    return out;
}

struct Settings {
    int pairs = 10000;
    int bins = 75;
    double epsilon = 1e-12;
    int bootstrap = 10;
    std::uint64_t seed = 0;
};

struct Report {
    int num_qubits = 0;
    int layers = 0;
    int parameters = 0;
    int pairs = 0;
    int bins = 0;
    Group group = Group::SU;
    double kl = 0.0;
    double std_error = 0.0; ///< bootstrap standard deviation
};

/// KL of a fidelity sample against the Haar law, with bootstrap error.
inline Report score(std::span<const double> fidelities, int d, Group group,
                    const Settings &settings) {
    const auto q = haar_bin_probabilities(d, settings.bins, group);
    Report r;
    r.pairs = static_cast<int>(fidelities.size());
    r.bins = settings.bins;
    r.group = group;
    r.kl = kl(histogram(fidelities, settings.bins), q, settings.epsilon);
    if (settings.bootstrap > 1) {
        CounterRng rng(settings.seed, 0xb007);
        std::vector<double> resample(fidelities.size());
        std::vector<double> values;
        for (int b = 0; b < settings.bootstrap; ++b) {
            for (auto &x : resample) {
                const auto idx = static_cast<std::size_t>(rng.uniform() *
                                                          static_cast<double>(fidelities.size()));
                x = fidelities[std::min(idx, fidelities.size() - 1)];
            }
            values.push_back(kl(histogram(resample, settings.bins), q, settings.epsilon));
        }
        double mean = 0.0;
        for (double v : values) {
            mean += v;
        }
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) {
            var += (v - mean) * (v - mean);
        }
        r.std_error = std::sqrt(var / static_cast<double>(values.size() - 1));
    }
    return r;
}

inline Report kl_divergence(const vqa::Ansatz &ansatz, Group group, const Settings &settings) {
    if (settings.pairs < 1000) {
        throw ConfigError("expressiveness: samples >= 1000 required");
    }
    if (settings.bins < 2) {
        throw ConfigError("expressiveness: need at least two bins");
    }
    const auto fids = sample_fidelities(ansatz, settings.pairs, settings.seed);
    auto r = score(fids, 1 << ansatz.num_qubits, group, settings);
    r.num_qubits = ansatz.num_qubits;
    r.layers = ansatz.layers;
    r.parameters = ansatz.num_parameters();
    return r;
}

struct ThresholdPoint {
    int num_qubits = 0;
    int layers = -1;     ///< -1: threshold not reached
    int parameters = 0;
    double kl = 0.0;
};

struct ThresholdFit {
    std::vector<ThresholdPoint> points;
    double exponent = 0.0; ///< slope of log(parameters) against log(n)
    bool complete = false; ///< every n reached the threshold
};

/// Smallest layer count whose KL falls below `threshold`, for each n.
inline ThresholdFit parameters_for_threshold(std::span<const int> qubit_counts, Group group,
                                             double threshold, int max_layers,
                                             const Settings &settings) {
    ThresholdFit fit;
    fit.complete = true;
    std::vector<double> ns;
    std::vector<double> dims;
    for (int n : qubit_counts) {
        ThresholdPoint pt;
        pt.num_qubits = n;
        for (int L = 0; L <= max_layers; ++L) {
            vqa::Ansatz ansatz{n, L,
                               group == Group::SU ? vqa::Rotations::RYRZ : vqa::Rotations::RY};
            Settings s = settings;
            s.bootstrap = 0;
            const auto r = kl_divergence(ansatz, group, s);
            pt.kl = r.kl;
            if (r.kl <= threshold) {
                pt.layers = L;
                pt.parameters = ansatz.num_parameters();
                break;
            }
        }
        if (pt.layers < 0) {
            fit.complete = false;
        } else {
            ns.push_back(n);
            dims.push_back(pt.parameters);
        }
        fit.points.push_back(pt);
    }
    if (ns.size() >= 2) {
        fit.exponent = fem::loglog_slope(ns, dims);
    }
    return fit;
}

} // namespace hvqa::expressiveness
