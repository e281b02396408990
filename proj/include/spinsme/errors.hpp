// Copyright 2026 The spinsme Authors
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

namespace spinsme {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: dimensions, indices, parameter ranges, config files.
/// The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InvalidDimension : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A parameter-domain condition required by an operation does not hold.
class ConditionFailed : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Numerical failure. The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The state left the admissible region beyond the hard limits; `time` is the
/// simulation time of the failing step.
class IntegrationBlowup : public NumericalError {
 public:
  IntegrationBlowup(const std::string& what, double time)
      : NumericalError(what + " at t=" + std::to_string(time) +
                       " (try a smaller dt)"),
        time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace spinsme
