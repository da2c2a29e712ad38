// Copyright 2026 The qalloc developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qalloc {

/// Base class for all qalloc errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised on malformed QASM input. Carries 1-based line/column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error("line " + std::to_string(line) + ", col " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Raised on invalid device files or graphs.
class DeviceError : public Error {
 public:
  explicit DeviceError(const std::string& what) : Error(what) {}
};

/// Raised on invalid run configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Raised when the penalty escalation loop hits its multiplier cap with
/// invalid samples remaining.
class EscalationError : public Error {
 public:
  EscalationError(const std::string& what, std::vector<double> invalid_fraction)
      : Error(what), invalid_fraction_per_multiplier(std::move(invalid_fraction)) {}

  /// Fraction of invalid reads observed at multiplier m (index m-1).
  std::vector<double> invalid_fraction_per_multiplier;
};

}  // namespace qalloc
