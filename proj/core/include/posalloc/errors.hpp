// Copyright 2026 The posalloc Authors.
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

namespace posalloc {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed auction instance: dimension mismatch, negative bids, pCTR
/// outside [0,1], non-finite entries, non-square score matrices.
class InvalidInstance : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input too large for an enumeration-based routine.
class SizeLimit : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: unknown distribution family, parameters outside
/// the family's domain, malformed config documents.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Value outside the mathematical domain of an operation (e.g. log of a
/// nonpositive number).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Regression slope cannot be identified from the supplied data.
class Unidentifiable : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver hit its iteration cap. Carries the last sup-norm residual.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace posalloc
