// Copyright 2026 The isogeo Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace isogeo {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite input or a dimension mismatch.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A latent point fell outside the image of a diffeomorphism.
class OutOfImageError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operation not allowed in the current object state (e.g. actnorm not yet
/// initialized).
class StateError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed file or unexpected on-disk format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values produced during a computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A normalizing denominator vanished.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace isogeo
