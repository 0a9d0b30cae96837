// Copyright 2026 The gbspp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace gbspp {

/// Base of every error raised by the library. The CLI maps these to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument (shape, range, flavor) was violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative or algebraic routine could not produce a trustworthy result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A covariance matrix or kernel does not describe a physical Gaussian state.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// An exponential-time evaluator was asked for a size above its configured cap.
class CapExceededError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; the message carries the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

using WarningHandler = std::function<void(const std::string&)>;

/// Installs the sink for non-fatal diagnostics and returns the previous one.
/// The default handler writes to stderr.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace gbspp
