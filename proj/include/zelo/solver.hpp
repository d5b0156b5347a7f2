// Copyright 2026 The zELO Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Maximum-likelihood scores from a sparse preference matrix.
//
// We minimize the negative log-likelihood of the judged probabilities,
//
//   L(e) = -sum_{(i,j) judged} weight_ij * w_ij * log link(e_i - e_j),
//
// where link is the logistic function (Bradley-Terry) or (1 + erf(x)) / 2
// (Thurstone, no sqrt(2) rescaling). L is invariant under e -> e + c, so the
// fit projects onto sum(e) = 0 after every step. On a connected comparison
// graph with all w strictly inside (0, 1) the constrained minimum is unique.
//
// Judged probabilities are clamped to [eps, 1 - eps]; a unanimous judgment
// would otherwise drive the corresponding score gap to infinity.
//
// Descent uses the decaying step eta_t = t^(-lr_exponent), applied to the
// gradient scaled per coordinate by 1 / (2 c D_i), where D_i is the total
// judgment weight incident to candidate i and c bounds the curvature of
// -log link. In that metric the loss is 1-smooth, so any step <= 1 decreases
// it.

#ifndef ZELO_SOLVER_HPP_
#define ZELO_SOLVER_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "zelo/core.hpp"
#include "zelo/kernels.hpp"

namespace zelo {

enum class InitKind { kZeros, kSeedRandom };

struct FitOptions {
  std::size_t max_iters = 2000;
  // Convergence threshold on the max-abs gradient component.
  double grad_tol = 1e-7;
  double lr_exponent = 0.125;
  double prob_clamp_eps = 1e-6;
  InitKind init = InitKind::kZeros;
  std::uint64_t init_seed = 0;
  // Overrides `init` when set; must have one entry per candidate.
  std::optional<std::vector<double>> warm_start;
  // When set, a disconnected matrix is fitted component by component, each
  // component centered on zero, instead of raising DisconnectedGraph.
  bool allow_disconnected = false;
  bool record_loss_history = false;

  // Throws InvalidArgument when a field is outside its domain.
  void Validate() const;
};

struct FitReport {
  EloVector elos;
  std::size_t iterations = 0;
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
  bool converged = false;
  // Loss before each step (only with record_loss_history).
  std::vector<double> loss_history;
};

// Clamped pair terms the kernels consume.
std::vector<kernels::EdgeTerm> ClampedTerms(const SparsePreferenceMatrix& w,
                                            double eps);

double NllLoss(const SparsePreferenceMatrix& w, std::span<const double> elos,
               ModelKind model, double eps = 1e-6);

std::vector<double> NllGradient(const SparsePreferenceMatrix& w,
                                std::span<const double> elos, ModelKind model,
                                double eps = 1e-6);

// Throws DisconnectedGraph (naming the components) unless allowed, NonFinite
// if the iteration leaves the finite range.
FitReport FitElos(const SparsePreferenceMatrix& w, ModelKind model,
                  const FitOptions& options = {});

// link(e_i - e_j); exactly 0.5 on the diagonal and exactly complementary
// across (i, j) / (j, i).
double PredictPreference(const EloVector& elos, std::size_t i, std::size_t j,
                         ModelKind model);

}  // namespace zelo

#endif  // ZELO_SOLVER_HPP_
