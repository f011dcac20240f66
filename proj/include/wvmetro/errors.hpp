// Copyright 2026 The wvmetro Authors
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

#include <stdexcept>
#include <string>

namespace wvmetro {

/// Base class for every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The post-selection state is (numerically) orthogonal to the pre-selection.
class OrthogonalPostSelection : public Error {
 public:
  using Error::Error;
};

/// Tail mass of a density beyond the requested grid exceeds the tolerance.
class GridTooNarrow : public Error {
 public:
  using Error::Error;
};

/// The PSA/PSR weights N1 - beta*N2 (or p_f - beta*p_fbar) vanish.
class SingularCombination : public Error {
 public:
  using Error::Error;
};

class DegenerateModification : public Error {
 public:
  using Error::Error;
};

class AllTrialsSingular : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UnknownPreset : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace wvmetro
