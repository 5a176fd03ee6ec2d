// Copyright 2026 The PPC Authors
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

namespace ppc {

/// Raised for malformed inputs: bad qubit indices, wrong dimensions, bad
/// configuration values.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A design matrix or linear system is too ill-conditioned to solve.
class IllConditioned : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A fit did not converge or produced an unusable estimate.
class FitFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Calibration data does not determine every column of the transition matrix.
class IncompleteCalibration : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A reconstructed row of the unitary carries no signal.
class DegenerateRow : public FitFailure {
  public:
    using FitFailure::FitFailure;
};

/// The tomography system does not determine every process-matrix entry.
class RankDeficiency : public FitFailure {
  public:
    using FitFailure::FitFailure;
};

/// A matrix is numerically singular where full rank is required.
class SingularMatrix : public FitFailure {
  public:
    using FitFailure::FitFailure;
};

} // namespace ppc
