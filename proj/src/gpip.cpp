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

#include "sgpip/gpip.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgpip {
namespace {

constexpr double kRidge = 1e-12;

void check_power(double P, double sigma2) {
  if (!(P > 0.0) || !(sigma2 > 0.0))
    throw std::invalid_argument("P and sigma2 must be positive");
}

// Inverse of a Hermitian PSD matrix; a ridge of 1e-12 tr(M)/D is added when
// the Cholesky factorization fails.
CMat hermitian_inverse(const CMat& M) {
  const Eigen::Index d = M.rows();
  const CMat identity = CMat::Identity(d, d);
  Eigen::LLT<CMat> llt(M);
  if (llt.info() == Eigen::Success) return llt.solve(identity);

  const double trace = M.trace().real();
  if (!(trace > 0.0) || !std::isfinite(trace))
    throw NumericError("cannot invert a zero or non-finite block");
  CMat ridged = M;
  ridged.diagonal().array() += kRidge * trace / static_cast<double>(d);
  llt.compute(ridged);
  if (llt.info() == Eigen::Success) return llt.solve(identity);
  Eigen::FullPivLU<CMat> lu(ridged);
  if (!lu.isInvertible()) throw NumericError("KKT block is singular");
  return lu.inverse();
}

CMat gram_of_signal(const CMat& S, const RVec& scale) {
  return S * scale.asDiagonal() * S.adjoint();
}

SubspaceProblem finish_problem(BasisKind kind, CMat basis, const CMat& channel,
                               double P, double sigma2) {
  SubspaceProblem p;
  p.kind = kind;
  if (kind == BasisKind::kIdentity) {
    p.signal_vecs = channel;
    p.basis_gram = CMat::Identity(basis.rows(), basis.rows());
  } else {
    p.signal_vecs = basis.adjoint() * channel;
    p.basis_gram = basis.adjoint() * basis;
  }
  p.basis = std::move(basis);
  p.noise_ratio = sigma2 / P;
  return p;
}

}  // namespace

SubspaceProblem build_subspace_problem_perfect(const CMat& H, double P,
                                               double sigma2) {
  check_power(P, sigma2);
  if (H.cols() < 1 || H.rows() < H.cols())
    throw std::invalid_argument("need N >= K >= 1");
  const RVec sv = Eigen::JacobiSVD<CMat>(H).singularValues();
  if (!(sv[sv.size() - 1] >= 1e-10 * sv[0]) || sv[0] == 0.0)
    throw IllConditionedBasis("channel matrix is numerically rank deficient");
  SubspaceProblem p = finish_problem(BasisKind::kChannel, H, H, P, sigma2);
  p.basis_gram = 0.5 * (p.basis_gram + p.basis_gram.adjoint()).eval();
  p.signal_vecs = p.basis_gram;  // s_k = H^H h_k is column k of H^H H
  return p;
}

SubspaceProblem build_subspace_problem_cov(const CMat& H_hat,
                                           const std::vector<CMat>& Phi,
                                           int rank, double P, double sigma2) {
  check_power(P, sigma2);
  const Eigen::Index n = H_hat.rows();
  const Eigen::Index k_users = H_hat.cols();
  if (k_users < 1 || n < k_users) throw std::invalid_argument("need N >= K >= 1");
  if (rank < 1 || rank > n)
    throw std::invalid_argument("covariance rank must lie in [1, N]");
  if (static_cast<Eigen::Index>(Phi.size()) != k_users)
    throw std::invalid_argument("need one error covariance per user");

  std::vector<std::string> warnings;
  CMat basis(n, k_users + rank * k_users);
  basis.leftCols(k_users) = H_hat;
  for (Eigen::Index k = 0; k < k_users; ++k) {
    const CMat& phi = Phi[static_cast<std::size_t>(k)];
    if (phi.rows() != n || phi.cols() != n)
      throw std::invalid_argument("error covariance has the wrong size");
    Eigen::SelfAdjointEigenSolver<CMat> eig(phi);
    if (eig.info() != Eigen::Success)
      throw NumericError("error covariance eigendecomposition failed");
    const RVec& values = eig.eigenvalues();  // ascending
    const double top = values[n - 1];
    if (values[0] < -1e-10 * std::max(std::abs(top), 1e-300))
      throw NumericError("error covariance is not positive semidefinite");
    int padded = 0;
    for (int j = 0; j < rank; ++j) {
      const Eigen::Index src = n - 1 - j;
      const Eigen::Index dst = k_users + k * rank + j;
      if (top > 0.0 && values[src] > 1e-10 * top) {
        basis.col(dst) = eig.eigenvectors().col(src);
      } else {
        basis.col(dst).setZero();
        ++padded;
      }
    }
    if (padded > 0)
      warnings.push_back("user " + std::to_string(k) + ": rank " +
                         std::to_string(rank) + " exceeds numerical rank of Phi; " +
                         std::to_string(padded) + " zero column(s) used");
  }

  if (basis.cols() > n)
    warnings.push_back("basis has more columns than antennas; its Gram matrix is singular");
  SubspaceProblem p = finish_problem(BasisKind::kChannelWithCovariance,
                                     std::move(basis), H_hat, P, sigma2);
  p.error_grams.reserve(Phi.size());
  for (const CMat& phi : Phi) {
    CMat e = p.basis.adjoint() * phi * p.basis;
    p.error_grams.push_back(0.5 * (e + e.adjoint()));
  }
  p.warnings = std::move(warnings);
  return p;
}

SubspaceProblem build_subspace_problem_fulldim(const CMat& H, double P,
                                               double sigma2) {
  check_power(P, sigma2);
  if (H.cols() < 1) throw std::invalid_argument("need at least one user");
  return finish_problem(BasisKind::kIdentity,
                        CMat::Identity(H.rows(), H.rows()), H, P, sigma2);
}

SubspaceProblem build_subspace_problem_fulldim(const CMat& H_hat,
                                               const std::vector<CMat>& Phi,
                                               double P, double sigma2) {
  SubspaceProblem p = build_subspace_problem_fulldim(H_hat, P, sigma2);
  if (static_cast<Eigen::Index>(Phi.size()) != H_hat.cols())
    throw std::invalid_argument("need one error covariance per user");
  for (const CMat& phi : Phi) {
    if (phi.rows() != H_hat.rows() || phi.cols() != H_hat.rows())
      throw std::invalid_argument("error covariance has the wrong size");
    p.error_grams.push_back(0.5 * (phi + phi.adjoint()));
  }
  return p;
}

CMat weight_matrix(const SubspaceProblem& problem, const StackedWeights& w) {
  if (w.size() != problem.dim() * problem.n_users())
    throw std::invalid_argument("stacked weights have the wrong length");
  return Eigen::Map<const CMat>(w.data(), problem.dim(), problem.n_users());
}

QuadForms quad_forms(const SubspaceProblem& problem, const StackedWeights& w) {
  const CMat W = weight_matrix(problem, w);
  const int k_users = problem.n_users();
  const CMat cross = problem.signal_vecs.adjoint() * W;  // (k, i) = s_k^H w_i

  double noise = 0.0;
  if (problem.kind == BasisKind::kIdentity)
    noise = problem.noise_ratio * W.squaredNorm();
  else
    noise = problem.noise_ratio * (W.adjoint() * problem.basis_gram * W).trace().real();

  QuadForms f{RVec(k_users), RVec(k_users), RVec(k_users)};
  for (int k = 0; k < k_users; ++k) {
    double leak = 0.0;
    if (problem.has_error_terms())
      leak = (W.adjoint() * problem.error_grams[k] * W).trace().real();
    const double signal = std::norm(cross(k, k));
    const double interference = cross.row(k).squaredNorm() - signal;
    f.signal[k] = signal;
    f.b[k] = std::max(interference, 0.0) + std::max(leak, 0.0) + noise;
    f.a[k] = f.b[k] + signal;
    if (!(f.b[k] > 0.0))
      throw NumericError("Rayleigh-quotient denominator is not positive");
  }
  return f;
}

double rayleigh_sum_se(const QuadForms& forms) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < forms.b.size(); ++k)
    total += std::log1p(forms.signal[k] / forms.b[k]);
  return total / std::numbers::ln2;
}

CMat sherman_morrison_block(const CMat& base_inverse, const CVec& s, double c) {
  if (base_inverse.rows() != base_inverse.cols() || base_inverse.rows() != s.size())
    throw std::invalid_argument("Sherman-Morrison dimensions differ");
  if (c == 0.0) return base_inverse;
  const CVec u = base_inverse * s;                        // Base^{-1} s
  const Eigen::RowVectorXcd v = s.adjoint() * base_inverse;  // s^H Base^{-1}
  const double denom = 1.0 - c * (s.adjoint() * u).value().real();
  if (std::abs(denom) >= 1e-10) return base_inverse + (c / denom) * (u * v);

  // Near-singular update: invert Base - c s s^H densely with a ridge.
  CMat target = hermitian_inverse(base_inverse) - c * s * s.adjoint();
  const Eigen::Index d = target.rows();
  const double trace = std::abs(target.trace().real());
  target.diagonal().array() += kRidge * std::max(trace, 1e-300) / static_cast<double>(d);
  Eigen::FullPivLU<CMat> lu(target);
  if (!lu.isInvertible()) throw NumericError("rank-one updated block is singular");
  return lu.inverse();
}

KktOperator::KktOperator(const SubspaceProblem& problem, const StackedWeights& w,
                         InverseMode mode)
    : problem_(problem), forms_(quad_forms(problem, w)) {
  const int k_users = problem.n_users();
  const Eigen::Index d = problem.dim();
  const RVec inv_a = forms_.a.cwiseInverse();
  const RVec inv_b = forms_.b.cwiseInverse();

  a_block_ = gram_of_signal(problem.signal_vecs, inv_a);
  b_common_ = gram_of_signal(problem.signal_vecs, inv_b);
  if (problem.kind == BasisKind::kIdentity) {
    a_block_.diagonal().array() += problem.noise_ratio * inv_a.sum();
    b_common_.diagonal().array() += problem.noise_ratio * inv_b.sum();
  } else {
    a_block_ += (problem.noise_ratio * inv_a.sum()) * problem.basis_gram;
    b_common_ += (problem.noise_ratio * inv_b.sum()) * problem.basis_gram;
  }
  if (problem.has_error_terms()) {
    for (int k = 0; k < k_users; ++k) {
      a_block_ += inv_a[k] * problem.error_grams[k];
      b_common_ += inv_b[k] * problem.error_grams[k];
    }
  }

  block_inverse_.reserve(k_users);
  if (mode == InverseMode::kShermanMorrison) {
    const CMat base_inverse = hermitian_inverse(b_common_);
    for (int i = 0; i < k_users; ++i)
      block_inverse_.push_back(
          sherman_morrison_block(base_inverse, problem.signal_vecs.col(i), inv_b[i]));
  } else {
    for (int i = 0; i < k_users; ++i) {
      const CVec s = problem.signal_vecs.col(i);
      block_inverse_.push_back(hermitian_inverse(b_common_ - inv_b[i] * s * s.adjoint()));
    }
  }
  (void)d;
}

StackedWeights KktOperator::apply_a(const StackedWeights& x) const {
  const CMat X = weight_matrix(problem_, x);
  const CMat Y = a_block_ * X;
  return Eigen::Map<const CVec>(Y.data(), Y.size());
}

StackedWeights KktOperator::apply_b(const StackedWeights& x) const {
  const CMat X = weight_matrix(problem_, x);
  CMat Y = b_common_ * X;
  for (int i = 0; i < problem_.n_users(); ++i) {
    const auto s = problem_.signal_vecs.col(i);
    Y.col(i) -= s * ((s.adjoint() * X.col(i)).value() / forms_.b[i]);
  }
  return Eigen::Map<const CVec>(Y.data(), Y.size());
}

StackedWeights KktOperator::solve_b(const StackedWeights& x) const {
  const CMat X = weight_matrix(problem_, x);
  CMat Y(X.rows(), X.cols());
  for (int i = 0; i < problem_.n_users(); ++i)
    Y.col(i) = block_inverse_[i] * X.col(i);
  return Eigen::Map<const CVec>(Y.data(), Y.size());
}

StackedWeights kkt_apply(const SubspaceProblem& problem, const StackedWeights& w,
                         InverseMode mode) {
  const KktOperator op(problem, w, mode);
  return op.solve_b(op.apply_a(w));
}

double rzf_alpha(int n_users, double P, double sigma2) {
  check_power(P, sigma2);
  return n_users * sigma2 / P;
}

StackedWeights rzf_init(const SubspaceProblem& problem, const CMat& channel,
                        double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("RZF alpha must be positive");
  if (channel.rows() != problem.n_antennas() || channel.cols() != problem.n_users())
    throw std::invalid_argument("channel does not match the problem");
  const Eigen::Index k_users = channel.cols();

  CMat gram = channel.adjoint() * channel;
  gram.diagonal().array() += alpha;
  const CMat rzf_weights = hermitian_inverse(gram);  // (H^H H + alpha I)^{-1}

  CMat W;
  switch (problem.kind) {
    case BasisKind::kChannel:
      W = rzf_weights;
      break;
    case BasisKind::kIdentity:
      W = channel * rzf_weights;
      break;
    case BasisKind::kChannelWithCovariance: {
      const CMat F = channel * rzf_weights;
      CMat normal = problem.basis_gram;
      const double trace = normal.trace().real();
      normal.diagonal().array() += kRidge * trace / static_cast<double>(normal.rows());
      W = Eigen::LLT<CMat>(normal).solve(problem.basis.adjoint() * F);
      break;
    }
  }
  (void)k_users;
  const double norm = W.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw NumericError("RZF initialization is degenerate");
  W /= norm;
  return Eigen::Map<const CVec>(W.data(), W.size());
}

Precoder reconstruct_precoder(const SubspaceProblem& problem,
                              const StackedWeights& w) {
  const CMat W = weight_matrix(problem, w);
  CMat F = problem.kind == BasisKind::kIdentity ? W : CMat(problem.basis * W);
  const double norm = F.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw NumericError("reconstructed precoder is zero");
  return F / norm;
}

StackedWeights align_phase(const StackedWeights& next,
                           const StackedWeights& prev) {
  const cdouble overlap = prev.dot(next);  // prev^H next
  if (std::abs(overlap) == 0.0) return next;
  return next * std::polar(1.0, -std::arg(overlap));
}

SolverResult s_gpip(const SubspaceProblem& problem, const StackedWeights& init,
                    const SolverOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (options.t_max < 1) throw std::invalid_argument("t_max must be at least 1");
  const auto start = std::chrono::steady_clock::now();

  const double init_norm = init.norm();
  if (!(init_norm > 0.0)) throw std::invalid_argument("initial weights are zero");
  StackedWeights w = init / init_norm;

  SolverResult result;
  result.objective_trace.push_back(rayleigh_sum_se(quad_forms(problem, w)));
  for (int t = 1; t <= options.t_max; ++t) {
    StackedWeights next = kkt_apply(problem, w, options.inverse);
    const double norm = next.norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw NumericError("GPIP update produced a degenerate vector");
    next = align_phase(next / norm, w);
    const double step = (next - w).norm();
    w = std::move(next);
    result.objective_trace.push_back(rayleigh_sum_se(quad_forms(problem, w)));
    result.step_sizes.push_back(0.5);
    result.iterations = t;
    if (step <= options.tol) {
      result.converged = true;
      break;
    }
  }
  result.precoder = reconstruct_precoder(problem, w);
  result.weights = std::move(w);
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

double eigenvalue_estimate(const SubspaceProblem& problem,
                           const StackedWeights& w) {
  const QuadForms f = quad_forms(problem, w);
  return f.a.cwiseQuotient(f.b).prod();
}

double kkt_residual(const SubspaceProblem& problem, const StackedWeights& w) {
  const StackedWeights g = kkt_apply(problem, w);
  const double gnorm = g.norm();
  if (!(gnorm > 0.0)) return 1.0;
  const StackedWeights unit = w / w.norm();
  const StackedWeights perpendicular = g - unit * unit.dot(g);
  return perpendicular.norm() / gnorm;
}

}  // namespace sgpip
