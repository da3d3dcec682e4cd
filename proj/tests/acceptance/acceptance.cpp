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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sgpip/baselines.hpp"
#include "sgpip/convergent.hpp"
#include "sgpip/harness.hpp"
#include "sgpip/metrics.hpp"

using namespace sgpip;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig base_config(int n, int k, double p_dbm) {
  ExperimentConfig c;
  c.n_antennas = n;
  c.n_users = k;
  c.power_dbm = p_dbm;
  c.sweep_name = "power_dbm";
  c.sweep_values = {p_dbm};
  c.timing = false;
  return c;
}

oracle::Dense dense_of(const SubspaceProblem& p, const CMat& H, const std::vector<CMat>& Phi) {
  const CMat& G = p.basis;
  std::vector<CMat> E;
  for (const CMat& phi : Phi) E.push_back(G.adjoint() * phi * G);
  return oracle::dense_forms(G.adjoint() * H, E, G.adjoint() * G, p.noise_ratio);
}

SubspaceProblem random_problem(oracle::Gen& gen, int index) {
  const int k = 1 + index % 4;
  const int n = std::max(k + 3 + index % 3, 2 * k + 1);
  const CMat H = gen.matrix(n, k);
  const double P = std::pow(10.0, gen.uniform(-1.0, 3.0));
  if (index % 2 == 0) return build_subspace_problem_perfect(H, P, 1.0);
  std::vector<CMat> phi;
  for (int u = 0; u < k; ++u) phi.push_back(0.1 * gen.psd(n, 2));
  return build_subspace_problem_cov(H, phi, 1, P, 1.0);
}

Outcome kronecker_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  oracle::Gen gen(101);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int kind = rep % 3;
    int k = 1 + rep % 4;
    int n = std::min(8, k + 1 + rep % 5);
    CMat H;
    std::vector<CMat> phi;
    SubspaceProblem p;
    if (kind == 0) {  // D = K
      H = gen.matrix(n, k);
      p = build_subspace_problem_perfect(H, gen.uniform(0.5, 100.0), 1.0);
    } else if (kind == 1) {  // D = K + rK <= 6
      k = 1 + rep % 3;
      const int r = k == 1 ? 2 : 1;
      n = std::min(8, k + r * k + rep % 3);
      H = gen.matrix(n, k);
      for (int u = 0; u < k; ++u) phi.push_back(0.2 * gen.psd(n, n));
      p = build_subspace_problem_cov(H, phi, r, gen.uniform(0.5, 100.0), 1.0);
    } else {  // D = N <= 6
      n = std::min(6, n);
      k = std::min(k, n);
      H = gen.matrix(n, k);
      for (int u = 0; u < k; ++u) phi.push_back(0.2 * gen.psd(n, 2));
      p = build_subspace_problem_fulldim(H, phi, gen.uniform(0.5, 100.0), 1.0);
    }
    const auto dense = dense_of(p, H, phi);
    const CVec w = gen.unit(p.dim() * k);
    const QuadForms f = quad_forms(p, w);
    for (int u = 0; u < k; ++u) {
      worst = std::max(worst, std::abs(f.a[u] - oracle::quad(dense.A[u], w)) / f.a[u]);
      worst = std::max(worst, std::abs(f.b[u] - oracle::quad(dense.B[u], w)) / f.b[u]);
    }
    worst = std::max(worst, oracle::rel(kkt_apply(p, w), oracle::kkt_apply(dense, w)));
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-9 && t < 10.0, fmt("max rel err %.2e over 50 instances, %.2f s", worst, t)};
}

Outcome sherman_morrison() {
  const auto t0 = std::chrono::steady_clock::now();
  oracle::Gen gen(102);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int d = 1 + rep % 16;
    const CMat base = gen.psd(d, d, 0.1);
    const CVec s = gen.vector(d);
    const CMat base_inv = base.inverse();
    const double limit = 1.0 / (s.adjoint() * base_inv * s)(0, 0).real();
    const double c = gen.uniform(-2.0, 0.95) * limit;
    const CMat direct = (base - c * s * s.adjoint()).inverse();
    worst = std::max(worst, oracle::rel(sherman_morrison_block(base_inv, s, c), direct));
  }
  // Operator blocks along a real problem.
  for (int rep = 0; rep < 10; ++rep) {
    const SubspaceProblem p = random_problem(gen, rep + 1);
    const CVec w = gen.unit(p.dim() * p.n_users());
    const KktOperator op(p, w);
    for (int i = 0; i < p.n_users(); ++i) {
      const CVec s = p.signal_vecs.col(i);
      const CMat block = op.b_common() - s * s.adjoint() / op.forms().b[i];
      worst = std::max(worst, oracle::rel(op.b_block_inverse(i), CMat(block.inverse())));
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-10 && t < 5.0, fmt("max rel err %.2e, %.2f s", worst, t)};
}

Outcome ppga_identity() {
  oracle::Gen gen(103);
  double worst = 0.0;
  for (int prob = 0; prob < 10; ++prob) {
    const SubspaceProblem p = random_problem(gen, prob);
    for (int j = 0; j < 10; ++j) {
      const CVec w = gen.unit(p.dim() * p.n_users());
      const CVec g = g_mapping(p, w);
      const CVec rhs = w + 0.5 * preconditioned_gradient(p, w);
      worst = std::max(worst, (g - rhs).norm() / g.norm());
    }
  }
  return {worst <= 1e-10, fmt("max ||g - w - B^-1 grad / 2|| / ||g|| = %.2e", worst)};
}

Outcome gradient_check() {
  oracle::Gen gen(104);
  double worst = 0.0;
  const double h = 1e-6;
  int checked = 0;
  for (int index = 0; checked < 20; ++index) {
    const SubspaceProblem p = random_problem(gen, index);
    // A single scalar weight has an identically zero gradient on the sphere.
    if (p.dim() * p.n_users() == 1) continue;
    const CVec w = gen.unit(p.dim() * p.n_users());
    const CVec grad = gradient(p, w);
    CVec fd(w.size());
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      CVec e = CVec::Zero(w.size());
      e[j] = 1.0;
      const double re = (objective(p, w + h * e) - objective(p, w - h * e)) / (2 * h);
      e[j] = cdouble(0.0, 1.0);
      const double im = (objective(p, w + h * e) - objective(p, w - h * e)) / (2 * h);
      fd[j] = std::numbers::ln2 * cdouble(re, im);
    }
    worst = std::max(worst, oracle::rel(grad, fd));
    ++checked;
  }
  return {worst <= 1e-5, fmt("max rel err vs central differences %.2e over %.0f instances", worst,
                             static_cast<double>(checked))};
}

Outcome precond_sandwich() {
  oracle::Gen gen(105);
  double low = 1e300, high = 0.0;  // min of lambda_min / m, max of lambda_max / M
  for (int prob = 0; prob < 10; ++prob) {
    const SubspaceProblem p = random_problem(gen, prob);
    const PrecondBounds b = precond_bounds(p);
    const Eigen::Index d = p.dim();
    for (int j = 0; j < 10; ++j) {
      const CVec w = gen.unit(d * p.n_users());
      const KktOperator op(p, w, InverseMode::kDirect);
      CMat inv = CMat::Zero(d * p.n_users(), d * p.n_users());
      for (int i = 0; i < p.n_users(); ++i) {
        const CVec s = p.signal_vecs.col(i);
        inv.block(i * d, i * d, d, d) = (op.b_common() - s * s.adjoint() / op.forms().b[i]).inverse();
      }
      const RVec ev = Eigen::SelfAdjointEigenSolver<CMat>(0.5 * (inv + inv.adjoint())).eigenvalues();
      low = std::min(low, ev.minCoeff() / b.m);
      high = std::max(high, ev.maxCoeff() / b.M);
    }
  }
  return {low >= 1 - 1e-9 && high <= 1 + 1e-9,
          fmt("min lambda_min/m = %.4f, max lambda_max/M = %.4f", low, high)};
}

Outcome monotone_traces() {
  double worst_drop = 0.0;
  int traces = 0;
  for (double p_dbm : {0.0, 20.0, 40.0}) {
    const ExperimentConfig c = base_config(16, 4, p_dbm);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Scenario sc = draw_scenario(c, seed, 0);
      const auto p = build_subspace_problem_perfect(sc.csit.H_hat, sc.P, sc.sigma2);
      const auto r = convergent_s_gpip(p, rzf_init(p, sc.csit.H_hat, rzf_alpha(4, sc.P, sc.sigma2)));
      for (std::size_t t = 1; t < r.objective_trace.size(); ++t)
        worst_drop = std::max(worst_drop, r.objective_trace[t - 1] - r.objective_trace[t]);
      ++traces;
    }
  }
  return {worst_drop <= 1e-12, fmt("%.0f traces, largest per-step decrease %.2e", traces, worst_drop)};
}

Outcome subspace_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  bool all_beat_rzf = true;
  double worst_median = 0.0;
  std::string detail;
  for (const auto [n, k] : {std::pair{8, 2}, std::pair{16, 4}}) {
    const ExperimentConfig c = base_config(n, k, 30.0);
    std::vector<double> s_se, f_se;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Scenario sc = draw_scenario(c, seed, 0);
      const double alpha = rzf_alpha(k, sc.P, sc.sigma2);
      const CMat& H = sc.channel.H;
      const auto ps = build_subspace_problem_perfect(H, sc.P, sc.sigma2);
      const auto pf = build_subspace_problem_fulldim(H, sc.P, sc.sigma2);
      const double se_s = sum_se(s_gpip(ps, rzf_init(ps, H, alpha)).precoder, H, sc.P, sc.sigma2);
      const double se_f = sum_se(s_gpip(pf, rzf_init(pf, H, alpha)).precoder, H, sc.P, sc.sigma2);
      const double se_r = sum_se(rzf(H, alpha), H, sc.P, sc.sigma2);
      all_beat_rzf = all_beat_rzf && se_s >= se_r;
      s_se.push_back(se_s);
      f_se.push_back(se_f);
    }
    const double gap = std::abs(oracle::median(s_se) - oracle::median(f_se)) / oracle::median(f_se);
    worst_median = std::max(worst_median, gap);
    detail += fmt("(N=%.0f,K=%.0f) median gap %.2e; ", n, k, gap);
  }
  const double t = seconds_since(t0);
  detail += all_beat_rzf ? "beats RZF on every seed" : "RZF wins on some seed";
  detail += fmt(", %.2f s", t);
  return {worst_median <= 0.01 && all_beat_rzf && t < 60.0, detail};
}

Outcome single_user() {
  double worst_cos = 1.0, worst_se = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ExperimentConfig c = base_config(16, 1, 10.0 + 2.0 * static_cast<double>(seed));
    const Scenario sc = draw_scenario(c, seed, 0);
    const CMat& H = sc.channel.H;
    const auto p = build_subspace_problem_perfect(H, sc.P, sc.sigma2);
    const auto r = s_gpip(p, rzf_init(p, H, rzf_alpha(1, sc.P, sc.sigma2)));
    const CMat m = mrt(H);
    worst_cos = std::min(worst_cos, std::abs(r.precoder.col(0).dot(m.col(0))));
    const double cap = std::log2(1.0 + sc.P * H.squaredNorm() / sc.sigma2);
    worst_se = std::max(worst_se, std::abs(sum_se(r.precoder, H, sc.P, sc.sigma2) - cap));
  }
  return {worst_cos >= 1 - 1e-6 && worst_se <= 1e-9,
          fmt("min cosine with MRT %.12f, max SE gap %.2e", worst_cos, worst_se)};
}

Outcome imperfect_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c = base_config(16, 4, 30.0);
  c.kappa = 0.3;
  ExperimentConfig r1 = c, r2 = c;
  r1.cov_rank = 1;
  r2.cov_rank = 2;
  double full = 0, cov2 = 0, cov1 = 0, rz = 0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const Scenario sc = draw_scenario(c, 2024, static_cast<std::uint64_t>(t));
    full += run_algorithm("gpip_full_cov", sc, c).sum_se / trials;
    cov2 += run_algorithm("sgpip_cov", sc, r2).sum_se / trials;
    cov1 += run_algorithm("sgpip_cov", sc, r1).sum_se / trials;
    rz += run_algorithm("rzf", sc, c).sum_se / trials;
  }
  const double t = seconds_since(t0);
  const bool ok = full >= cov2 && cov2 >= cov1 && cov1 >= rz && cov2 >= 0.97 * full && t < 300.0;
  return {ok, fmt("full %.4f, r=2 %.4f, r=1 %.4f, RZF ", full, cov2, cov1) +
                  fmt("%.4f bps/Hz, %.1f s", rz, t)};
}

Outcome structural_check() {
  ExperimentConfig c = base_config(16, 4, 30.0);
  c.kappa = 0.3;
  oracle::Gen gen(110);
  int good = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Scenario sc = draw_scenario(c, seed, 0);
    // Rank-2 truncation of each user's channel covariance.
    std::vector<CMat> phi;
    CMat basis(16, 4 + 2 * 4);
    basis.leftCols(4) = sc.csit.H_hat;
    const double scale = 2.0 - 2.0 * std::sqrt(1.0 - c.kappa * c.kappa);
    for (int k = 0; k < 4; ++k) {
      Eigen::SelfAdjointEigenSolver<CMat> eig(sc.channel.covariances[k].matrix);
      const CMat U = eig.eigenvectors().rightCols(2);
      const RVec lam = eig.eigenvalues().tail(2);
      phi.push_back(scale * U * lam.asDiagonal() * U.adjoint());
      basis.middleCols(4 + 2 * k, 2) = U;
    }
    const auto p = build_subspace_problem_fulldim(sc.csit.H_hat, phi, sc.P, sc.sigma2);
    // Generic start so that membership is not inherited from the initializer.
    const auto r = s_gpip(p, gen.unit(16 * 4), {1e-8, 5000});
    const double res = subspace_residual(r.precoder, basis);
    worst = std::max(worst, res);
    good += res <= 1e-2;
  }
  return {good >= 18, fmt("%.0f/20 seeds with residual <= 1e-2 (max %.2e)", good, worst)};
}

Outcome scaling() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c = base_config(64, 4, 30.0);
  c.sweep_name = "n_antennas";
  c.sweep_values = {64, 256};
  c.algorithms = {"sgpip", "gpip_full"};
  c.trials = 7;
  c.seed = 11;
  const BenchResult b = bench_scaling(c);
  double s64 = 0, s256 = 0, f64 = 0, f256 = 0;
  for (const auto& s : b.summary) {
    double& slot = s.algorithm == "sgpip" ? (s.n_antennas == 64 ? s64 : s256)
                                          : (s.n_antennas == 64 ? f64 : f256);
    slot = s.median_wall_time_ms;
  }
  const double rs = s256 / s64, rf = f256 / f64;
  const double t = seconds_since(t0);
  return {rs <= 8.0 && rf >= 20.0 && t < 600.0,
          fmt("sgpip ratio %.2f, gpip_full ratio %.1f (medians %.3f / %.1f ms at N=256), ", rs, rf,
              s256, f256) + fmt("%.1f s", t)};
}

Outcome ensemble_ordering() {
  ExperimentConfig c = base_config(16, 4, 30.0);
  c.trials = 50;
  c.seed = 7;
  c.algorithms = {"zfdpc_wf", "sgpip", "rzf", "mrt"};
  const auto rows = run_experiment(c);
  std::vector<double> mean(4, 0.0);
  for (const auto& r : rows) {
    const auto it = std::find(c.algorithms.begin(), c.algorithms.end(), r.algorithm);
    mean[static_cast<std::size_t>(it - c.algorithms.begin())] += r.sum_se / c.trials;
  }
  return {mean[0] >= mean[1] && mean[1] >= mean[2] && mean[2] >= mean[3],
          fmt("ZF-DPC-WF %.4f, S-GPIP %.4f, RZF %.4f, MRT %.4f", mean[0], mean[1], mean[2], mean[3])};
}

Outcome reproducibility() {
  ExperimentConfig c = base_config(16, 4, 0.0);
  c.sweep_values = {0.0, 15.0, 30.0};
  c.kappa = 0.2;
  c.trials = 6;
  c.seed = 0xdeadbeefcafeull;
  c.algorithms = {"sgpip", "sgpip_cov", "convergent_sgpip", "gpip_full_cov", "rzf", "zfdpc_wf"};
  c.threads = 1;
  const std::string serial = to_csv(run_experiment(c));
  const std::string again = to_csv(run_experiment(c));
  c.threads = 4;
  const std::string parallel = to_csv(run_experiment(c));

  // Timed run: everything except wall_time_ms still matches.
  c.timing = true;
  auto timed = run_experiment(c);
  for (auto& r : timed) r.wall_time_ms = 0.0;
  const bool same_values = to_csv(timed) == serial;
  return {serial == again && serial == parallel && same_values,
          fmt("%.0f bytes; serial/parallel identical, timed run matches on non-timing columns",
              static_cast<double>(serial.size()))};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Kronecker-oracle equivalence", kronecker_oracle},
      {"Sherman-Morrison block inverses", sherman_morrison},
      {"preconditioned-gradient identity", ppga_identity},
      {"gradient vs finite differences", gradient_check},
      {"preconditioner sandwich bounds", precond_sandwich},
      {"monotone convergent traces", monotone_traces},
      {"subspace vs full-dimension GPIP", subspace_equivalence},
      {"single-user optimality", single_user},
      {"imperfect-CSIT ordering", imperfect_ordering},
      {"covariance subspace membership", structural_check},
      {"complexity scaling in N", scaling},
      {"ensemble SE ordering", ensemble_ordering},
      {"CSV reproducibility", reproducibility},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %2zu %-34s %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
