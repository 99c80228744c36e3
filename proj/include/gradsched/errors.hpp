// Copyright 2026 The gradsched Authors
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

#ifndef GRADSCHED_ERRORS_HPP_
#define GRADSCHED_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace gradsched {

/// Base class for all gradsched errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A domain value violates one of its invariants.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// An input file or stream does not conform to its schema.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

/// A model fit is underdetermined or produced unusable coefficients.
class FitError : public Error {
 public:
  explicit FitError(const std::string& what) : Error(what) {}
};

/// A cost model cannot be used for planning (e.g. non-positive startup).
class PlannerError : public Error {
 public:
  explicit PlannerError(const std::string& what) : Error(what) {}
};

/// A guarded operation refused to run (e.g. exhaustive search too large).
class GuardError : public Error {
 public:
  explicit GuardError(const std::string& what) : Error(what) {}
};

}  // namespace gradsched

#endif  // GRADSCHED_ERRORS_HPP_
