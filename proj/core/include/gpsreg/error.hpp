// Copyright 2026 The gpsreg Authors.
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

namespace gpsreg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes or feature widths.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A structural precondition does not hold (disconnected graph, k too large).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Input data parsed but does not satisfy the schema.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input text is not well-formed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// NaN, Inf or divergence during computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gpsreg
