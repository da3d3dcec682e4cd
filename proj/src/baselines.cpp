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

#include "sgpip/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sgpip/metrics.hpp"

namespace sgpip {
namespace {

void require_channel(const CMat& H) {
  if (H.size() == 0) throw std::invalid_argument("empty channel matrix");
  if (!H.allFinite()) throw std::invalid_argument("channel is not finite");
}

bool full_column_rank(const CMat& H) {
  if (H.rows() < H.cols()) return false;
  const RVec sv = Eigen::JacobiSVD<CMat>(H).singularValues();
  return sv[0] > 0.0 && sv[sv.size() - 1] >= 1e-10 * sv[0];
}

}  // namespace

Precoder mrt(const CMat& H) {
  require_channel(H);
  const double norm = H.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("MRT of a zero channel");
  return H / norm;
}

Precoder rzf(const CMat& H, double alpha) {
  require_channel(H);
  if (!(alpha >= 0.0)) throw std::invalid_argument("RZF alpha must be nonnegative");
  if (alpha == 0.0) return zf(H);
  CMat gram = H.adjoint() * H;
  gram.diagonal().array() += alpha;
  const Eigen::LLT<CMat> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericError("RZF system is singular");
  return normalize_precoder(H * llt.solve(CMat::Identity(H.cols(), H.cols())));
}

Precoder zf(const CMat& H) {
  require_channel(H);
  if (!full_column_rank(H)) throw NumericError("ZF needs a full column rank channel");
  // H (H^H H)^{-1} is the pseudo-inverse adjoint; QR avoids squaring kappa(H).
  const Eigen::HouseholderQR<CMat> qr(H);
  const Eigen::Index k = H.cols();
  const CMat R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const CMat Q = qr.householderQ() * CMat::Identity(H.rows(), k);
  const CMat Rinv_adj = R.adjoint().triangularView<Eigen::Lower>().solve(
      CMat::Identity(k, k));  // R^{-H}
  return normalize_precoder(Q * Rinv_adj);
}

RVec water_filling(const RVec& gains, double total_power) {
  if (gains.size() == 0) throw std::invalid_argument("no gains");
  if (!(total_power > 0.0) || !std::isfinite(total_power))
    throw std::invalid_argument("total power must be positive");
  if (!(gains.array() > 0.0).all() || !gains.allFinite())
    throw std::invalid_argument("gains must be positive");

  const Eigen::Index n = gains.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](Eigen::Index a, Eigen::Index b) { return gains[a] > gains[b]; });

  // Largest active set {idx[0..j)} whose water level clears every floor.
  double floors = 0.0;
  double level = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double floor_j = 1.0 / gains[idx[j]];
    const double candidate = (total_power + floors + floor_j) / static_cast<double>(j + 1);
    if (j > 0 && candidate <= floor_j) break;
    floors += floor_j;
    level = candidate;
  }
  RVec p(n);
  for (Eigen::Index k = 0; k < n; ++k) p[k] = std::max(0.0, level - 1.0 / gains[k]);
  return p;
}

double zf_dpc_rate(const CMat& H, double P, double sigma2, bool waterfill,
                   const std::optional<std::vector<int>>& order) {
  require_channel(H);
  if (!(P > 0.0) || !(sigma2 > 0.0))
    throw std::invalid_argument("P and sigma2 must be positive");
  const Eigen::Index k_users = H.cols();
  if (H.rows() < k_users) throw std::invalid_argument("ZF-DPC needs N >= K");

  CMat ordered = H;
  if (order) {
    if (static_cast<Eigen::Index>(order->size()) != k_users)
      throw std::invalid_argument("encoding order has the wrong length");
    std::vector<bool> seen(static_cast<std::size_t>(k_users), false);
    for (Eigen::Index j = 0; j < k_users; ++j) {
      const int u = (*order)[static_cast<std::size_t>(j)];
      if (u < 0 || u >= k_users || seen[static_cast<std::size_t>(u)])
        throw std::invalid_argument("encoding order is not a permutation");
      seen[static_cast<std::size_t>(u)] = true;
      ordered.col(j) = H.col(u);
    }
  }

  const Eigen::HouseholderQR<CMat> qr(ordered);
  RVec g(k_users);
  for (Eigen::Index k = 0; k < k_users; ++k) g[k] = std::norm(qr.matrixQR()(k, k));
  if (!(g.minCoeff() > 1e-20 * g.maxCoeff()))
    throw NumericError("ZF-DPC needs a full column rank channel");

  const RVec snr = g / sigma2;
  const RVec p = waterfill ? water_filling(snr, P)
                           : RVec::Constant(k_users, P / static_cast<double>(k_users));
  double rate = 0.0;
  for (Eigen::Index k = 0; k < k_users; ++k) rate += std::log2(1.0 + p[k] * snr[k]);
  return rate;
}

}  // namespace sgpip
