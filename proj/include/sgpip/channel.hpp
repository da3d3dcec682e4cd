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

#include <cmath>
#include <vector>

#include "sgpip/rng.hpp"
#include "sgpip/types.hpp"

namespace sgpip {

// Uniform linear array; element spacing in wavelengths.
struct UlaGeometry {
  int n_antennas = 1;
  double element_spacing = 0.5;
};

struct UserGeometry {
  double distance_m = 0.0;
  double azimuth_rad = 0.0;
  double angular_spread_rad = 0.0;
};

// Spatial covariance K_h of one user. trace(matrix) == N * gain.
struct ChannelCovariance {
  CMat matrix;
  double gain = 0.0;
};

// True downlink channel H = [h_1, ..., h_K] with the Karhunen-Loeve
// factors used to draw it. latent[k] is the white vector g_k with
// h_k = U_k Lambda_k^{1/2} g_k.
struct ChannelRealization {
  CMat H;
  std::vector<ChannelCovariance> covariances;
  std::vector<CVec> latent;

  int n_antennas() const { return static_cast<int>(H.rows()); }
  int n_users() const { return static_cast<int>(H.cols()); }
};

// What the transmitter knows: channel estimate and error covariances.
struct CsitRealization {
  CMat H_hat;
  std::vector<CMat> Phi;
  double kappa = 0.0;
};

// a(theta)_m = exp(j 2 pi spacing m sin theta), m = 0..N-1.
CVec steering_vector(const UlaGeometry& array, double angle_rad);

// One-ring covariance with entries
//   [K]_{m,n} = gain / (2 Delta) * int_{theta-Delta}^{theta+Delta}
//               exp(j 2 pi spacing (m - n) sin a) da,
// evaluated per distinct lag by adaptive Gauss-Kronrod quadrature. The
// diagonal is exactly `gain`. Delta = 0 gives gain * a(theta) a(theta)^H.
ChannelCovariance one_ring_covariance(const UlaGeometry& array,
                                      const UserGeometry& user, double gain);

// 3GPP UMi street-canyon NLoS path loss in dB (fc in GHz, distances in m).
double pathloss_umi_nlos(double fc_ghz, double d_2d_m, double h_bs_m,
                         double h_ut_m);

// Thermal noise power in dBm: -174 + 10 log10(BW) + NF.
double noise_power_dbm(double bandwidth_hz, double noise_figure_db);

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Coloring factor U Lambda^{1/2} of a covariance (negative rounding-level
// eigenvalues are clamped to zero).
CMat coloring_factor(const ChannelCovariance& cov);

struct ChannelSample {
  CVec h;
  CVec latent;
};

ChannelSample sample_channel(const ChannelCovariance& cov, RngStream& rng);

// Draws one column per covariance, in order.
ChannelRealization draw_channel(std::vector<ChannelCovariance> covariances,
                                RngStream& rng);

// h_hat_k = U_k Lambda_k^{1/2} (sqrt(1 - kappa^2) g_k + kappa q_k) with
// fresh q_k ~ CN(0, I), and Phi_k = (2 - 2 sqrt(1 - kappa^2)) K_{h_k}.
// q_k is drawn for every user even when kappa == 0 so that streams stay
// aligned over a kappa sweep.
CsitRealization imperfect_csit(const ChannelRealization& channel, double kappa,
                               RngStream& rng);

}  // namespace sgpip
