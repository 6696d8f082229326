// Copyright 2026 The tagsmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace tagsmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of matrices or lists do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A file is missing, unreadable, or malformed.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented invariant (non-finite, out of range, ...).
class ValueError : public Error {
 public:
  using Error::Error;
};

/// A configuration field is invalid. `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A numerical solver could not proceed (indefinite operator, eigensolver failure).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace tagsmc
