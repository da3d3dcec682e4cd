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

#include <vector>

#include "sgpip/types.hpp"

namespace sgpip {

// User indices are zero-based. P and sigma2 share one unit (watts).

// |h_k^H f_k|^2 / (sum_{i != k} |h_k^H f_i|^2 + sigma2 / P)
double sinr(const CMat& F, const CMat& H, int k, double P, double sigma2);

// sum_k log2(1 + sinr_k), bits/s/Hz.
double sum_se(const CMat& F, const CMat& H, double P, double sigma2);

// Closed-form lower bound on the average SE given the estimate H_hat and
// per-user error covariances Phi_k:
//   sum_k log2(1 + |hh_k^H f_k|^2 /
//              (sum_{i != k} |hh_k^H f_i|^2 + sum_i f_i^H Phi_k f_i + sigma2/P))
double sum_se_lower_bound(const CMat& F, const CMat& H_hat,
                          const std::vector<CMat>& Phi, double P,
                          double sigma2);

// ||F - Pi F||_F / ||F||_F with Pi the orthogonal projector onto the column
// space of `basis`. Rank is revealed by column-pivoted Householder QR with
// threshold 1e-10 relative to the largest pivot.
double subspace_residual(const CMat& F, const CMat& basis);

// F / ||F||_F; throws NumericError for a zero matrix.
CMat normalize_precoder(const CMat& F);

}  // namespace sgpip
