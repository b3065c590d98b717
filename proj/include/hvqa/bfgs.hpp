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
 * Dense BFGS with a strong-Wolfe line search (Nocedal and Wright,
 * Algorithms 3.5, 3.6 and 6.1).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "types.hpp"

namespace hvqa::bfgs {

struct Options {
    double gtol = 1e-8;   ///< stop when ||g||_2 <= gtol
    int max_iterations = 2000;
    double c1 = 1e-4;
    double c2 = 0.9;
    int max_line_search = 40;
    /// A failed line search whose predicted decrease is below this
    /// (relative to max(1, |f|)) ends the run with Status::PrecisionLoss.
    double ftol_precision = 1e-12;
};

/// Value and gradient at a point.
struct Evaluation {
    double value = 0.0;
    Vector gradient;
};

using Objective = std::function<Evaluation(const Vector &)>;

struct Iterate {
    int iteration = 0;
    Vector x;
    double value = 0.0;
    double grad_norm = 0.0;
};

enum class Status { Converged, PrecisionLoss, MaxIterations, LineSearchFailed };

inline const char *to_string(Status status) {
    switch (status) {
    case Status::Converged:
        return "converged";
    case Status::PrecisionLoss:
        return "precision_loss";
    case Status::MaxIterations:
        return "max_iterations";
    case Status::LineSearchFailed:
        return "line_search_failed";
    }
    return "?";
}

struct Result {
    Vector x;
    double value = 0.0;
    Vector gradient;
    int iterations = 0;
    int evaluations = 0;
    Status status = Status::MaxIterations;

    [[nodiscard]] bool converged() const noexcept { return status == Status::Converged; }
};

namespace detail {

struct Point {
    double alpha = 0.0;
    double value = 0.0;
    double slope = 0.0;
    Vector gradient;
};

/// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), or NaN.
inline double cubic_min(double a, double fa, double da, double b, double fb, double db) {
    const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - da * db;
    if (disc < 0.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    return b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
}

class LineSearch {
  public:
    LineSearch(const Objective &f, const Vector &x, const Vector &dir, double f0, double d0,
               const Options &opt, int &evaluations)
        : f_(f), x_(x), dir_(dir), f0_(f0), d0_(d0), opt_(opt), evaluations_(evaluations) {}

    /// Returns a point satisfying the strong Wolfe conditions, or the
    /// approximate Wolfe conditions once f differences reach rounding level.
    bool run(double alpha1, Point &out) {
        Point prev{0.0, f0_, d0_, {}};
        double alpha = alpha1;
        for (int i = 0; i < opt_.max_line_search; ++i) {
            Point cur = eval(alpha);
            if (!std::isfinite(cur.value)) {
                alpha *= 0.5;
                continue;
            }
            if (acceptable(cur)) {
                out = std::move(cur);
                return true;
            }
            if (!armijo(cur) || (i > 0 && cur.value >= prev.value)) {
                return zoom(prev, cur, out);
            }
            if (cur.slope >= 0.0) {
                return zoom(cur, prev, out);
            }
            prev = std::move(cur);
            alpha *= 2.0;
        }
        return false;
    }

  private:
    Point eval(double alpha) {
        ++evaluations_;
        auto e = f_(x_ + alpha * dir_);
        return {alpha, e.value, e.gradient.dot(dir_), std::move(e.gradient)};
    }

    [[nodiscard]] bool armijo(const Point &p) const {
        return p.value <= f0_ + opt_.c1 * p.alpha * d0_;
    }

    [[nodiscard]] bool acceptable(const Point &p) const {
        if (armijo(p) && std::abs(p.slope) <= -opt_.c2 * d0_) {
            return true;
        }
        // Approximate Wolfe (Hager and Zhang) near rounding level; f must not increase.
        const double noise = 1e-13 * std::max(1.0, std::abs(f0_));
        return p.value <= f0_ && f0_ - p.value <= noise && p.slope >= opt_.c2 * d0_ &&
               p.slope <= (2.0 * opt_.c1 - 1.0) * d0_;
    }

    bool zoom(Point lo, Point hi, Point &out) {
        double prev_width = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 2 * opt_.max_line_search; ++i) {
            const double a = lo.alpha;
            const double b = hi.alpha;
            const double width = std::abs(b - a);
            if (width <= 1e-16 * std::max(1.0, std::abs(a))) {
                break;
            }
            double alpha = cubic_min(a, lo.value, lo.slope, b, hi.value, hi.slope);
            const double lo_edge = std::min(a, b) + 0.1 * width;
            const double hi_edge = std::max(a, b) - 0.1 * width;
            if (!std::isfinite(alpha) || alpha < lo_edge || alpha > hi_edge ||
                width > 0.5 * prev_width) {
                alpha = 0.5 * (a + b);
            }
            prev_width = width;
            Point cur = eval(alpha);
            if (std::isfinite(cur.value) && acceptable(cur)) {
                out = std::move(cur);
                return true;
            }
            if (!std::isfinite(cur.value) || !armijo(cur) || cur.value >= lo.value) {
                hi = std::move(cur);
                continue;
            }
            if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) {
                hi = lo;
            }
            lo = std::move(cur);
        }
        if (lo.alpha > 0.0 && lo.value < f0_) {
            out = std::move(lo);
            return true;
        }
        return false;
    }

    const Objective &f_;
    const Vector &x_;
    const Vector &dir_;
    double f0_;
    double d0_;
    const Options &opt_;
    int &evaluations_;
};

} // namespace detail

/// Minimize f from x0. `on_iterate` sees x0 (iteration 0) and every accepted iterate.
inline Result minimize(const Objective &f, const Vector &x0, const Options &opt = {},
                       const std::function<void(const Iterate &)> &on_iterate = {}) {
    Result res;
    res.x = x0;
    auto e = f(x0);
    res.evaluations = 1;
    res.value = e.value;
    res.gradient = std::move(e.gradient);
    const auto dim = x0.size();
    Matrix H = Matrix::Identity(dim, dim);
    bool scaled = false;

    auto report = [&](int it) {
        if (on_iterate) {
            on_iterate({it, res.x, res.value, res.gradient.norm()});
        }
    };
    report(0);

    for (int it = 1; it <= opt.max_iterations; ++it) {
        if (res.gradient.norm() <= opt.gtol) {
            res.status = Status::Converged;
            return res;
        }
        Vector dir = -H * res.gradient;
        double slope = res.gradient.dot(dir);
        if (!(slope < 0.0)) {
            H.setIdentity();
            dir = -res.gradient;
            slope = res.gradient.dot(dir);
        }
        const double alpha1 = scaled ? 1.0 : std::min(1.0, 1.0 / res.gradient.norm());
        detail::Point next;
        detail::LineSearch ls(f, res.x, dir, res.value, slope, opt, res.evaluations);
        if (!ls.run(alpha1, next)) {
            if (-0.5 * slope <= opt.ftol_precision * std::max(1.0, std::abs(res.value))) {
                res.status = Status::PrecisionLoss;
                return res;
            }
            if (H.isIdentity()) {
                res.status = Status::LineSearchFailed;
                return res;
            }
            H.setIdentity();
            scaled = false;
            --it;
            continue;
        }
        const Vector s = next.alpha * dir;
        const Vector y = next.gradient - res.gradient;
        res.x += s;
        res.value = next.value;
        res.gradient = std::move(next.gradient);
        res.iterations = it;

        const double sy = s.dot(y);
        if (sy > 1e-14 * s.norm() * y.norm()) {
            if (!scaled) {
                H = (sy / y.squaredNorm()) * Matrix::Identity(dim, dim);
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Vector Hy = H * y;
            // (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded.
            H += (rho * rho * y.dot(Hy) + rho) * (s * s.transpose()) -
                 rho * (Hy * s.transpose() + s * Hy.transpose());
        }
        report(it);
    }
    res.status = res.gradient.norm() <= opt.gtol ? Status::Converged : Status::MaxIterations;
    return res;
}

} // namespace hvqa::bfgs
