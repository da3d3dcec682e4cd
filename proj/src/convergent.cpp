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

#include "sgpip/convergent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sgpip {
namespace {

void require_unit(const StackedWeights& w) {
  if (!(std::abs(w.norm() - 1.0) <= 1e-8))
    throw std::invalid_argument("weights must have unit norm");
}

StackedWeights gradient_from(const KktOperator& op, const StackedWeights& w) {
  return 2.0 * (op.apply_a(w) - op.apply_b(w));
}

// B~^{-1} grad L = 2 (B~^{-1} A~ w - w); this form avoids the cancellation
// in B~^{-1} (B~ w) when B~ is badly conditioned.
StackedWeights ascent_direction(const KktOperator& op, const StackedWeights& w) {
  return 2.0 * (op.solve_b(op.apply_a(w)) - w);
}

StackedWeights normalized(const StackedWeights& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw NumericError("ascent step produced a degenerate vector");
  return v / n;
}

double lambda_max(const CMat& M) {
  return Eigen::SelfAdjointEigenSolver<CMat>(M, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .maxCoeff();
}

double lambda_min(const CMat& M) {
  return Eigen::SelfAdjointEigenSolver<CMat>(M, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

}  // namespace

void LineSearchParams::validate() const {
  if (!(eta0 > 0.0)) throw std::invalid_argument("eta0 must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  if (!(c_armijo > 0.0 && c_armijo < 1.0))
    throw std::invalid_argument("c_armijo must lie in (0, 1)");
  if (max_halvings < 0) throw std::invalid_argument("max_halvings must be nonnegative");
}

double objective(const SubspaceProblem& problem, const StackedWeights& w) {
  return rayleigh_sum_se(quad_forms(problem, w));
}

StackedWeights gradient(const SubspaceProblem& problem, const StackedWeights& w) {
  require_unit(w);
  return gradient_from(KktOperator(problem, w), w);
}

StackedWeights g_mapping(const SubspaceProblem& problem, const StackedWeights& w) {
  require_unit(w);
  return kkt_apply(problem, w);
}

StackedWeights preconditioned_gradient(const SubspaceProblem& problem,
                                       const StackedWeights& w) {
  require_unit(w);
  const KktOperator op(problem, w);
  return op.solve_b(gradient_from(op, w));
}

StackedWeights ppga_step(const SubspaceProblem& problem, const StackedWeights& w,
                         double eta) {
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
  if (eta == 0.0) return w;
  require_unit(w);
  return normalized(w + eta * ascent_direction(KktOperator(problem, w), w));
}

PrecondBounds precond_bounds(const SubspaceProblem& problem) {
  const int k_users = problem.n_users();
  const CMat C0 = problem.kind == BasisKind::kIdentity
                      ? CMat(CMat::Identity(problem.dim(), problem.dim()))
                      : problem.basis_gram;
  const CMat noise = problem.noise_ratio * C0;
  const double c0_top = lambda_max(C0);
  const double b_min = lambda_min(noise);
  if (!(c0_top > 0.0) || !(b_min > 1e-14 * problem.noise_ratio * c0_top))
    throw NumericError("basis Gram matrix is not positive definite");

  std::vector<CMat> n_blocks;
  n_blocks.reserve(k_users);
  CMat error_sum = CMat::Zero(problem.dim(), problem.dim());
  CMat signal_sum = CMat::Zero(problem.dim(), problem.dim());
  for (int k = 0; k < k_users; ++k) {
    const auto s = problem.signal_vecs.col(k);
    CMat nk = s * s.adjoint();
    signal_sum += nk;
    if (problem.has_error_terms()) {
      nk += problem.error_grams[k];
      error_sum += problem.error_grams[k];
    }
    n_blocks.push_back(std::move(nk));
  }

  PrecondBounds out;
  out.b_min = b_min;
  out.b_max = 0.0;
  for (const CMat& nk : n_blocks) out.b_max = std::max(out.b_max, lambda_max(nk + noise));

  // Block i of sum_k B_k keeps every error term, including E_i.
  double s_top = 0.0;
  double s_bottom = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k_users; ++i) {
    const auto s = problem.signal_vecs.col(i);
    const CMat Si = signal_sum - s * s.adjoint() + error_sum +
                    static_cast<double>(k_users) * noise;
    Eigen::SelfAdjointEigenSolver<CMat> eig(Si, Eigen::EigenvaluesOnly);
    s_top = std::max(s_top, eig.eigenvalues().maxCoeff());
    s_bottom = std::min(s_bottom, eig.eigenvalues().minCoeff());
  }
  out.m = out.b_min / s_top;
  out.M = out.b_max / s_bottom;
  return out;
}

LineSearchResult backtrack_eta(const SubspaceProblem& problem,
                               const StackedWeights& w,
                               const LineSearchParams& params, double m) {
  params.validate();
  require_unit(w);
  const KktOperator op(problem, w);
  const StackedWeights grad = gradient_from(op, w);
  const StackedWeights direction = ascent_direction(op, w);
  const double base = rayleigh_sum_se(op.forms());
  const double ascent_unit = params.c_armijo * std::max(m, 0.0) * grad.squaredNorm();
  // Rounding slack so that a stationary point is accepted at once.
  const double slack = 8.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(base));

  LineSearchResult best;
  best.eta = 0.0;
  best.w_next = w;
  best.objective = base;
  best.stalled = true;

  double eta = params.eta0;
  for (int h = 0; h <= params.max_halvings; ++h) {
    StackedWeights candidate = normalized(w + eta * direction);
    const double value = rayleigh_sum_se(quad_forms(problem, candidate));
    if (value >= base + eta * ascent_unit - slack) {
      best = {eta, std::move(candidate), value, false, h};
      return best;
    }
    if (value > best.objective) {
      best.eta = eta;
      best.w_next = std::move(candidate);
      best.objective = value;
    }
    best.halvings = h;
    eta *= params.beta;
  }
  return best;
}

SolverResult convergent_s_gpip(const SubspaceProblem& problem,
                               const StackedWeights& init,
                               const SolverOptions& options,
                               const LineSearchParams& params) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (options.t_max < 1) throw std::invalid_argument("t_max must be at least 1");
  params.validate();
  const auto start = std::chrono::steady_clock::now();

  const double init_norm = init.norm();
  if (!(init_norm > 0.0)) throw std::invalid_argument("initial weights are zero");
  StackedWeights w = init / init_norm;
  // A rank-deficient basis has m = 0; the Armijo test then asks for plain ascent.
  double m = 0.0;
  try {
    m = precond_bounds(problem).m;
  } catch (const NumericError&) {
  }

  SolverResult result;
  result.objective_trace.push_back(objective(problem, w));
  for (int t = 1; t <= options.t_max; ++t) {
    LineSearchResult step = backtrack_eta(problem, w, params, m);
    StackedWeights next = align_phase(step.w_next, w);
    const double delta = (next - w).norm();
    w = std::move(next);
    result.objective_trace.push_back(step.objective);
    result.step_sizes.push_back(step.eta);
    result.iterations = t;
    if (step.stalled) {
      result.stalled = true;
      break;
    }
    if (delta <= options.tol) {
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

}  // namespace sgpip
