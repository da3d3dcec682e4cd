// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace sgpip {

using cdouble = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// N x K precoder F = [f_1, ..., f_K]. Every routine in this library that
// returns a finalized precoder normalizes it to unit Frobenius norm.
using Precoder = CMat;

// Stacked weight vector [w_1; ...; w_K] of length K * D, one D-block per user.
using StackedWeights = CVec;

// Failure of a numerical routine (non-PSD input, failed factorization, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The channel or augmented basis is too close to rank deficient to
// parameterize the precoder.
class IllConditionedBasis : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace sgpip
