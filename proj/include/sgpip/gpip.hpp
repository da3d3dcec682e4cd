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

#include <string>
#include <vector>

#include "sgpip/types.hpp"

namespace sgpip {

/// How the precoder is parameterized: F = basis * W.
enum class BasisKind {
  kChannel,                ///< basis = H, D = K
  kChannelWithCovariance,  ///< basis = [H_hat, Psi_1, ..., Psi_K], D = K + rK
  kIdentity,               ///< basis = I_N, D = N (conventional GPIP)
};

/// Reduced quadratic-form ingredients shared by every GPIP variant.
///
/// For user k and stacked weights w = [w_1; ...; w_K] (blocks of length D)
///   w^H A_k w = sum_i |s_k^H w_i|^2 + sum_i w_i^H E_k w_i
///               + noise_ratio * sum_i w_i^H C0 w_i
///   w^H B_k w = w^H A_k w - |s_k^H w_k|^2
/// with s_k = G^H h_k, E_k = G^H Phi_k G and C0 = G^H G.
struct SubspaceProblem {
  BasisKind kind = BasisKind::kChannel;
  CMat basis;        ///< G, N x D
  CMat signal_vecs;  ///< D x K, column k is s_k
  std::vector<CMat> error_grams;  ///< E_k, D x D; empty means all zero
  CMat basis_gram;   ///< C0, D x D
  double noise_ratio = 0.0;  ///< sigma^2 / P
  std::vector<std::string> warnings;

  int n_users() const { return static_cast<int>(signal_vecs.cols()); }
  Eigen::Index dim() const { return signal_vecs.rows(); }
  Eigen::Index n_antennas() const { return basis.rows(); }
  bool has_error_terms() const { return !error_grams.empty(); }
};

/// F = H W (range space of the true channel). Throws IllConditionedBasis if
/// the smallest singular value of H is below 1e-10 times the largest.
SubspaceProblem build_subspace_problem_perfect(const CMat& H, double P,
                                               double sigma2);

/// F = [H_hat, Psi] V where Psi_k holds the `rank` dominant eigenvectors of
/// Phi_k (descending). E_k is built from the full Phi_k; only the basis is
/// truncated. Eigenvectors whose eigenvalue is numerically zero are replaced
/// by zero columns and a warning is recorded.
SubspaceProblem build_subspace_problem_cov(const CMat& H_hat,
                                           const std::vector<CMat>& Phi,
                                           int rank, double P, double sigma2);

/// Antenna-domain problem (G = I_N) used as the conventional-GPIP reference.
SubspaceProblem build_subspace_problem_fulldim(const CMat& H, double P,
                                               double sigma2);
SubspaceProblem build_subspace_problem_fulldim(const CMat& H_hat,
                                               const std::vector<CMat>& Phi,
                                               double P, double sigma2);

/// Per-user numerator a_k = w^H A_k w, denominator b_k = w^H B_k w and the
/// desired-signal term a_k - b_k = |s_k^H w_k|^2 (kept separately so the
/// ratio is accurate when it is small).
struct QuadForms {
  RVec a;
  RVec b;
  RVec signal;
};

QuadForms quad_forms(const SubspaceProblem& problem, const StackedWeights& w);

/// sum_k log2(a_k / b_k), evaluated as log1p(signal_k / b_k) / ln 2.
double rayleigh_sum_se(const QuadForms& forms);

/// (Base - c s s^H)^{-1} from Base^{-1}:
///   Base^{-1} + c Base^{-1} s s^H Base^{-1} / (1 - c s^H Base^{-1} s).
/// When the denominator is within 1e-10 of zero the block is recomputed by
/// dense inversion of Base - c s s^H with a ridge of 1e-12 tr(.)/D.
CMat sherman_morrison_block(const CMat& base_inverse, const CVec& s, double c);

enum class InverseMode { kShermanMorrison, kDirect };

/// Block structure of the (lambda_num = lambda_den = 1) KKT matrices at w:
///   A~ = I_K (x) A0,   A0 = sum_k (s_k s_k^H + E_k + noise_ratio C0) / a_k
///   B~ = blkdiag(S~ - s_i s_i^H / b_i),
///        S~ = sum_k (s_k s_k^H + E_k + noise_ratio C0) / b_k
/// The K block inverses come from one factorization of S~ and K rank-one
/// updates (or K dense inversions in kDirect mode). Keeps a reference to
/// `problem`, which must outlive the operator.
class KktOperator {
 public:
  KktOperator(const SubspaceProblem& problem, const StackedWeights& w,
              InverseMode mode = InverseMode::kShermanMorrison);

  const QuadForms& forms() const { return forms_; }
  const CMat& a_block() const { return a_block_; }
  const CMat& b_common() const { return b_common_; }
  const CMat& b_block_inverse(int i) const { return block_inverse_[i]; }

  StackedWeights apply_a(const StackedWeights& x) const;
  StackedWeights apply_b(const StackedWeights& x) const;
  StackedWeights solve_b(const StackedWeights& x) const;

 private:
  const SubspaceProblem& problem_;
  QuadForms forms_;
  CMat a_block_;
  CMat b_common_;
  std::vector<CMat> block_inverse_;
};

/// One unnormalized GPIP map B~^{-1}(w) A~(w) w.
StackedWeights kkt_apply(const SubspaceProblem& problem,
                         const StackedWeights& w,
                         InverseMode mode = InverseMode::kShermanMorrison);

/// RZF ridge used for initialization: K sigma^2 / P.
double rzf_alpha(int n_users, double P, double sigma2);

/// Unit-norm weights of the RZF precoder channel (channel^H channel + alpha I)^{-1}
/// expressed in the problem basis (exact for kChannel, least squares on the
/// normal equations with a 1e-12 relative ridge otherwise).
StackedWeights rzf_init(const SubspaceProblem& problem, const CMat& channel,
                        double alpha);

struct SolverOptions {
  double tol = 1e-2;
  int t_max = 100;
  InverseMode inverse = InverseMode::kShermanMorrison;
};

struct SolverResult {
  StackedWeights weights;
  Precoder precoder;
  std::vector<double> objective_trace;  ///< initial point, then one per iteration
  std::vector<double> step_sizes;       ///< accepted eta per iteration
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  double wall_time_s = 0.0;
};

/// D x K view of the stacked weights.
CMat weight_matrix(const SubspaceProblem& problem, const StackedWeights& w);

/// normalize(G W).
Precoder reconstruct_precoder(const SubspaceProblem& problem,
                              const StackedWeights& w);

/// Rotates `next` by a global phase so that Re<next, prev> is maximal.
StackedWeights align_phase(const StackedWeights& next,
                           const StackedWeights& prev);

/// Fixed-point iteration w <- normalize(kkt_apply(w)) until the
/// phase-aligned step ||w_t - w_{t-1}|| is at most tol or t_max iterations.
SolverResult s_gpip(const SubspaceProblem& problem, const StackedWeights& init,
                    const SolverOptions& options = {});

/// prod_k a_k / b_k; its log2 is the current sum SE.
double eigenvalue_estimate(const SubspaceProblem& problem,
                           const StackedWeights& w);

/// Sine of the angle between kkt_apply(w) and w. Zero exactly at solutions of
/// B~^{-1} A~ w = w, which with lambda_num = lambda_den = 1 are the
/// stationary points.
double kkt_residual(const SubspaceProblem& problem, const StackedWeights& w);

}  // namespace sgpip
