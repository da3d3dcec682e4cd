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

#include "sgpip/gpip.hpp"

namespace sgpip {

struct LineSearchParams {
  double eta0 = 0.5;
  double beta = 0.5;
  double c_armijo = 1e-4;
  int max_halvings = 30;

  void validate() const;
};

// m I <= B~(w)^{-1} <= M I for every unit w.
struct PrecondBounds {
  double m = 0.0;
  double M = 0.0;
  double b_min = 0.0;
  double b_max = 0.0;
};

// Sum SE (bits/s/Hz) of the weights; scale invariant.
double objective(const SubspaceProblem& problem, const StackedWeights& w);

// 2 (A~(w) - B~(w)) w, the gradient of the natural-log objective.
// Requires | ||w|| - 1 | <= 1e-8.
StackedWeights gradient(const SubspaceProblem& problem, const StackedWeights& w);

// B~^{-1} A~ w (same computation as kkt_apply).
StackedWeights g_mapping(const SubspaceProblem& problem, const StackedWeights& w);

// B~^{-1} grad L(w).
StackedWeights preconditioned_gradient(const SubspaceProblem& problem,
                                       const StackedWeights& w);

// normalize(w + eta B~^{-1} grad L(w)); eta = 1/2 is one GPIP step.
StackedWeights ppga_step(const SubspaceProblem& problem, const StackedWeights& w,
                         double eta);

PrecondBounds precond_bounds(const SubspaceProblem& problem);

struct LineSearchResult {
  double eta = 0.0;
  StackedWeights w_next;
  double objective = 0.0;
  bool stalled = false;
  int halvings = 0;
};

// Backtracking from eta0 until
//   L(ppga_step(w, eta)) >= L(w) + c_armijo * eta * m * ||grad L(w)||^2.
// If no step is accepted the best iterate seen (possibly w itself, eta = 0)
// is returned with `stalled` set.
LineSearchResult backtrack_eta(const SubspaceProblem& problem,
                               const StackedWeights& w,
                               const LineSearchParams& params, double m);

// Projected preconditioned gradient ascent with backtracking. The
// objective trace is nondecreasing.
SolverResult convergent_s_gpip(const SubspaceProblem& problem,
                               const StackedWeights& init,
                               const SolverOptions& options = {},
                               const LineSearchParams& params = {});

}  // namespace sgpip
