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

#pragma once

#include <bit>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

namespace hvqa {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double pi = std::numbers::pi;

[[nodiscard]] constexpr bool is_power_of_two(std::size_t value) noexcept {
    return std::has_single_bit(value);
}

/// log2 of a power of two.
[[nodiscard]] constexpr int log2_exact(std::size_t value) noexcept {
    return std::countr_zero(value);
}

[[nodiscard]] inline double max_abs_diff(const Matrix &a, const Matrix &b) {
    return (a - b).cwiseAbs().maxCoeff();
}

[[nodiscard]] inline double max_abs_diff(const CMatrix &a, const CMatrix &b) {
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace hvqa
