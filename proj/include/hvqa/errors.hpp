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
 * Exception types shared by every hvqa module.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace hvqa {

/// Base class of all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &message) : std::runtime_error(message) {}
};

/// Invalid sizes, orders or combinations of parameters.
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string &message) : Error(message) {}
};

/// Malformed input data (duplicate nodes, unnormalized states, ...).
class InvalidInput : public Error {
  public:
    explicit InvalidInput(const std::string &message) : Error(message) {}
};

/// The linear system is singular or sits on a discrete resonance.
class SingularSystem : public Error {
  public:
    SingularSystem(const std::string &message, double condition_number)
        : Error(message), condition_number_(condition_number) {}

    [[nodiscard]] double condition_number() const noexcept {
        return condition_number_;
    }

  private:
    double condition_number_;
};

/// Interior blocks of a matrix are not all equal.
class NotTranslationInvariant : public Error {
  public:
    explicit NotTranslationInvariant(const std::string &message)
        : Error(message) {}
};

/// A|phi> vanishes, so the amplitude r is undefined.
class DegenerateState : public Error {
  public:
    explicit DegenerateState(const std::string &message) : Error(message) {}
};

} // namespace hvqa
