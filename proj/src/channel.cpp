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

#include "sgpip/channel.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgpip {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_finite(double value, const char* what) {
  if (!std::isfinite(value))
    throw std::invalid_argument(std::string(what) + " must be finite");
}

// (1 / 2 Delta) int exp(j phi sin a) da over [theta - Delta, theta + Delta].
// The integrand oscillates about |phi| / pi times per radian, so the interval
// is split into panels of at most half an oscillation each and every panel is
// integrated with a fixed 30-point Gauss rule.
cdouble mean_phase(double phi, double theta, double delta) {
  using boost::math::quadrature::gauss;
  const double lo = theta - delta;
  const double hi = theta + delta;
  const int panels =
      1 + static_cast<int>(std::ceil(std::abs(phi) * 2.0 * delta / std::numbers::pi));
  const double width = (hi - lo) / panels;
  double re = 0.0;
  double im = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = lo + i * width;
    const double b = i + 1 == panels ? hi : a + width;
    re += gauss<double, 30>::integrate(
        [phi](double x) { return std::cos(phi * std::sin(x)); }, a, b);
    im += gauss<double, 30>::integrate(
        [phi](double x) { return std::sin(phi * std::sin(x)); }, a, b);
  }
  return cdouble(re, im) / (2.0 * delta);
}

}  // namespace

CVec steering_vector(const UlaGeometry& array, double angle_rad) {
  CVec a(array.n_antennas);
  const double phase = kTwoPi * array.element_spacing * std::sin(angle_rad);
  for (int m = 0; m < array.n_antennas; ++m)
    a[m] = std::polar(1.0, phase * m);
  return a;
}

ChannelCovariance one_ring_covariance(const UlaGeometry& array,
                                      const UserGeometry& user, double gain) {
  require_finite(user.azimuth_rad, "azimuth");
  require_finite(user.angular_spread_rad, "angular spread");
  require_finite(gain, "gain");
  require_finite(array.element_spacing, "element spacing");
  if (array.n_antennas < 1)
    throw std::invalid_argument("array needs at least one antenna");
  if (!(array.element_spacing > 0.0))
    throw std::invalid_argument("element spacing must be positive");
  if (user.angular_spread_rad < 0.0 ||
      user.angular_spread_rad > std::numbers::pi)
    throw std::invalid_argument("angular spread must lie in [0, pi]");
  if (gain < 0.0) throw std::invalid_argument("gain must be nonnegative");

  const int n = array.n_antennas;
  ChannelCovariance cov{CMat(n, n), gain};

  if (user.angular_spread_rad == 0.0) {
    const CVec a = steering_vector(array, user.azimuth_rad);
    cov.matrix = gain * a * a.adjoint();
    cov.matrix.diagonal().setConstant(gain);
    return cov;
  }

  // Toeplitz: entry (m, n) depends only on the lag m - n.
  std::vector<cdouble> lag_value(n);
  lag_value[0] = 1.0;
  for (int lag = 1; lag < n; ++lag)
    lag_value[lag] = mean_phase(kTwoPi * array.element_spacing * lag,
                                user.azimuth_rad, user.angular_spread_rad);

  for (int col = 0; col < n; ++col) {
    for (int row = col; row < n; ++row) {
      const cdouble v = gain * lag_value[row - col];
      cov.matrix(row, col) = v;
      cov.matrix(col, row) = std::conj(v);
    }
    cov.matrix(col, col) = gain;
  }
  return cov;
}

double pathloss_umi_nlos(double fc_ghz, double d_2d_m, double h_bs_m,
                         double h_ut_m) {
  if (!(d_2d_m > 0.0))
    throw std::invalid_argument("2D distance must be positive");
  if (!(fc_ghz > 0.0) || !(h_bs_m > 0.0) || !(h_ut_m > 0.0))
    throw std::invalid_argument("carrier frequency and heights must be positive");
  const double d_3d = std::sqrt(h_bs_m * h_bs_m + d_2d_m * d_2d_m);
  return 35.3 * std::log10(d_3d) + 22.4 + 21.3 * std::log10(fc_ghz) -
         0.3 * (h_ut_m - 1.5);
}

double noise_power_dbm(double bandwidth_hz, double noise_figure_db) {
  if (!(bandwidth_hz > 0.0))
    throw std::invalid_argument("bandwidth must be positive");
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

CMat coloring_factor(const ChannelCovariance& cov) {
  if (!cov.matrix.allFinite())
    throw NumericError("covariance has non-finite entries");
  const double scale = cov.matrix.cwiseAbs().maxCoeff();
  if (scale == 0.0) return CMat::Zero(cov.matrix.rows(), cov.matrix.cols());
  if ((cov.matrix - cov.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NumericError("covariance is not Hermitian");

  Eigen::SelfAdjointEigenSolver<CMat> eig(cov.matrix);
  if (eig.info() != Eigen::Success)
    throw NumericError("covariance eigendecomposition failed");
  const RVec root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

ChannelSample sample_channel(const ChannelCovariance& cov, RngStream& rng) {
  const CMat factor = coloring_factor(cov);
  ChannelSample out;
  out.latent = rng.complex_normal(cov.matrix.rows());
  out.h = factor * out.latent;
  return out;
}

ChannelRealization draw_channel(std::vector<ChannelCovariance> covariances,
                                RngStream& rng) {
  if (covariances.empty())
    throw std::invalid_argument("need at least one user covariance");
  const Eigen::Index n = covariances.front().matrix.rows();
  ChannelRealization out;
  out.H.resize(n, static_cast<Eigen::Index>(covariances.size()));
  for (std::size_t k = 0; k < covariances.size(); ++k) {
    if (covariances[k].matrix.rows() != n)
      throw std::invalid_argument("covariances must share the array size");
    ChannelSample s = sample_channel(covariances[k], rng);
    out.H.col(static_cast<Eigen::Index>(k)) = s.h;
    out.latent.push_back(std::move(s.latent));
  }
  out.covariances = std::move(covariances);
  return out;
}

CsitRealization imperfect_csit(const ChannelRealization& channel, double kappa,
                               RngStream& rng) {
  if (!(kappa >= 0.0 && kappa <= 1.0))
    throw std::invalid_argument("kappa must lie in [0, 1]");
  const int n_users = channel.n_users();
  if (static_cast<int>(channel.latent.size()) != n_users ||
      static_cast<int>(channel.covariances.size()) != n_users)
    throw std::invalid_argument("channel realization lacks latent draws");

  const double keep = std::sqrt(1.0 - kappa * kappa);
  const double error_scale = 2.0 - 2.0 * keep;

  CsitRealization csit;
  csit.kappa = kappa;
  csit.H_hat.resize(channel.H.rows(), n_users);
  csit.Phi.reserve(n_users);
  for (int k = 0; k < n_users; ++k) {
    const CVec q = rng.complex_normal(channel.H.rows());
    if (kappa == 0.0) {
      csit.H_hat.col(k) = channel.H.col(k);
    } else {
      const CMat factor = coloring_factor(channel.covariances[k]);
      csit.H_hat.col(k) = factor * (keep * channel.latent[k] + kappa * q);
    }
    csit.Phi.push_back(error_scale * channel.covariances[k].matrix);
  }
  return csit;
}

}  // namespace sgpip
