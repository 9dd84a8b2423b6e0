// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MMWNC_ERRORS_HPP
#define MMWNC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mmwnc {

// Argument outside the mathematical domain of an operation (x <= 0, theta < 0, ...).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Caller-supplied function violates its contract (e.g. a CDF that decreases).
class ContractError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A numerical routine did not reach its tolerance.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// No theta satisfies the stability condition p_a(theta) q(theta) < 1.
class UnstableError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Scenario / configuration problems, carrying the offending field path.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field))
    {}

    const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

} // namespace mmwnc

#endif
