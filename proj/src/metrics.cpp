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

#include "sgpip/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace sgpip {
namespace {

void check_shapes(const CMat& F, const CMat& H, double P, double sigma2) {
  if (F.rows() != H.rows() || F.cols() != H.cols())
    throw std::invalid_argument("precoder and channel dimensions differ");
  if (!(P > 0.0) || !(sigma2 > 0.0))
    throw std::invalid_argument("P and sigma2 must be positive");
}

}  // namespace

double sinr(const CMat& F, const CMat& H, int k, double P, double sigma2) {
  check_shapes(F, H, P, sigma2);
  if (k < 0 || k >= H.cols())
    throw std::invalid_argument("user index out of range");
  const Eigen::RowVectorXcd gains = H.col(k).adjoint() * F;
  const double signal = std::norm(gains[k]);
  const double total = gains.squaredNorm();
  return signal / (total - signal + sigma2 / P);
}

double sum_se(const CMat& F, const CMat& H, double P, double sigma2) {
  check_shapes(F, H, P, sigma2);
  const CMat gains = H.adjoint() * F;  // (k, i) = h_k^H f_i
  const double noise = sigma2 / P;
  double total = 0.0;
  for (Eigen::Index k = 0; k < H.cols(); ++k) {
    const double signal = std::norm(gains(k, k));
    const double interference = gains.row(k).squaredNorm() - signal;
    total += std::log2(1.0 + signal / (interference + noise));
  }
  return total;
}

double sum_se_lower_bound(const CMat& F, const CMat& H_hat,
                          const std::vector<CMat>& Phi, double P,
                          double sigma2) {
  check_shapes(F, H_hat, P, sigma2);
  if (static_cast<Eigen::Index>(Phi.size()) != H_hat.cols())
    throw std::invalid_argument("need one error covariance per user");
  const CMat gains = H_hat.adjoint() * F;
  const double noise = sigma2 / P;
  double total = 0.0;
  for (Eigen::Index k = 0; k < H_hat.cols(); ++k) {
    const CMat& phi = Phi[static_cast<std::size_t>(k)];
    if (phi.rows() != F.rows() || phi.cols() != F.rows())
      throw std::invalid_argument("error covariance has the wrong size");
    // sum_i f_i^H Phi_k f_i = tr(F^H Phi_k F)
    const double leak = (F.adjoint() * phi * F).trace().real();
    const double scale = phi.cwiseAbs().maxCoeff() * F.squaredNorm();
    if (leak < -1e-10 * std::max(scale, 1e-300))
      throw NumericError("error covariance is not positive semidefinite");
    const double signal = std::norm(gains(k, k));
    const double interference = gains.row(k).squaredNorm() - signal;
    total += std::log2(1.0 + signal / (interference + std::max(leak, 0.0) + noise));
  }
  return total;
}

double subspace_residual(const CMat& F, const CMat& basis) {
  if (basis.rows() != F.rows())
    throw std::invalid_argument("basis and precoder row counts differ");
  if (basis.cols() > basis.rows())
    throw std::invalid_argument("basis has more columns than rows");
  const double norm = F.norm();
  if (norm == 0.0) throw std::invalid_argument("precoder is zero");

  Eigen::ColPivHouseholderQR<CMat> qr(basis);
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  if (rank == 0) return 1.0;
  const CMat Q = CMat(qr.householderQ()).leftCols(rank);
  return (F - Q * (Q.adjoint() * F)).norm() / norm;
}

CMat normalize_precoder(const CMat& F) {
  const double norm = F.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw NumericError("cannot normalize a zero or non-finite precoder");
  return F / norm;
}

}  // namespace sgpip
