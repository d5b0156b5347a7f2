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

#include "zelo/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "zelo/error.hpp"
#include "zelo/graphs.hpp"

namespace zelo {
namespace {

void CheckDims(const SparsePreferenceMatrix& w, std::span<const double> elos) {
  if (elos.size() != w.n()) {
    throw InvalidArgument("score vector has " + std::to_string(elos.size()) +
                          " entries, matrix has n=" + std::to_string(w.n()));
  }
}

double MaxAbs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void CenterInPlace(std::span<double> v) {
  if (v.empty()) return;
  const double mean =
      std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

std::string DescribeComponents(
    const std::vector<std::vector<std::size_t>>& components) {
  std::ostringstream out;
  out << "comparison graph has " << components.size() << " components:";
  constexpr std::size_t kShown = 8;
  for (std::size_t c = 0; c < components.size() && c < kShown; ++c) {
    out << " {";
    const auto& comp = components[c];
    for (std::size_t k = 0; k < comp.size() && k < kShown; ++k) {
      out << (k ? "," : "") << comp[k];
    }
    if (comp.size() > kShown) out << ",...";
    out << "}";
  }
  if (components.size() > kShown) out << " ...";
  return out.str();
}

std::vector<double> InitialScores(std::size_t n, const FitOptions& options) {
  if (options.warm_start) {
    if (options.warm_start->size() != n) {
      throw InvalidArgument("warm start has " +
                            std::to_string(options.warm_start->size()) +
                            " entries, expected " + std::to_string(n));
    }
    return *options.warm_start;
  }
  std::vector<double> e(n, 0.0);
  if (options.init == InitKind::kSeedRandom) {
    std::mt19937_64 rng(options.init_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& x : e) x = normal(rng);
  }
  return e;
}

}  // namespace

void FitOptions::Validate() const {
  if (!(lr_exponent > 0.0 && lr_exponent <= 1.0)) {
    throw InvalidArgument("lr_exponent must lie in (0, 1]");
  }
  if (!(prob_clamp_eps > 0.0 && prob_clamp_eps < 0.5)) {
    throw InvalidArgument("prob_clamp_eps must lie in (0, 0.5)");
  }
  if (!(grad_tol >= 0.0)) throw InvalidArgument("grad_tol must be >= 0");
}

std::vector<kernels::EdgeTerm> ClampedTerms(const SparsePreferenceMatrix& w,
                                            double eps) {
  std::vector<kernels::EdgeTerm> terms;
  terms.reserve(w.pair_count());
  for (const auto& p : w.pairs()) {
    terms.push_back({p.i, p.j, std::clamp(p.w, eps, 1.0 - eps), p.weight});
  }
  return terms;
}

double NllLoss(const SparsePreferenceMatrix& w, std::span<const double> elos,
               ModelKind model, double eps) {
  CheckDims(w, elos);
  return kernels::NllLossSerial(model, ClampedTerms(w, eps), elos);
}

std::vector<double> NllGradient(const SparsePreferenceMatrix& w,
                                std::span<const double> elos, ModelKind model,
                                double eps) {
  CheckDims(w, elos);
  std::vector<double> grad(w.n(), 0.0);
  kernels::NllGradientSerial(model, ClampedTerms(w, eps), elos, grad);
  return grad;
}

FitReport FitElos(const SparsePreferenceMatrix& w, ModelKind model,
                  const FitOptions& options) {
  options.Validate();
  const std::size_t n = w.n();
  if (n == 0) throw InvalidArgument("cannot fit scores for zero candidates");

  std::vector<Edge> edges;
  edges.reserve(w.pair_count());
  for (const auto& p : w.pairs()) edges.emplace_back(p.i, p.j);
  const auto components = ConnectedComponents(n, edges);
  if (components.size() > 1 && !options.allow_disconnected) {
    throw DisconnectedGraph(DescribeComponents(components));
  }

  const auto terms = ClampedTerms(w, options.prob_clamp_eps);
  const auto incidence = kernels::BuildIncidence(n, terms);

  std::vector<double> scale(n, 0.0);
  const double curvature = kernels::NegLogLinkCurvatureBound(model);
  for (const auto& t : terms) {
    scale[t.i] += t.weight;
    scale[t.j] += t.weight;
  }
  for (double& s : scale) s = s > 0.0 ? 1.0 / (2.0 * curvature * s) : 0.0;

  std::vector<double> e = InitialScores(n, options);
  CenterInPlace(e);
  std::vector<double> grad(n, 0.0);

  const bool parallel = kernels::PreferParallel(terms.size());
  auto loss = [&] {
    return parallel ? kernels::NllLossParallel(model, terms, e)
                    : kernels::NllLossSerial(model, terms, e);
  };

  FitReport report;
  std::size_t t = 0;
  for (;;) {
    if (parallel) {
      kernels::NllGradientParallel(model, terms, incidence, e, grad);
    } else {
      kernels::NllGradientSerial(model, terms, e, grad);
    }
    const double gnorm = MaxAbs(grad);
    if (!std::isfinite(gnorm)) {
      throw NonFinite("gradient became non-finite at iteration " +
                      std::to_string(t));
    }
    if (gnorm <= options.grad_tol) {
      report.converged = true;
      break;
    }
    if (t == options.max_iters) break;
    if (options.record_loss_history) {
      report.loss_history.push_back(loss());
    }
    ++t;
    const double eta = std::pow(static_cast<double>(t), -options.lr_exponent);
    for (std::size_t v = 0; v < n; ++v) e[v] -= eta * scale[v] * grad[v];
    CenterInPlace(e);
  }

  if (options.allow_disconnected && components.size() > 1) {
    for (const auto& comp : components) {
      double mean = 0.0;
      for (std::size_t v : comp) mean += e[v];
      mean /= static_cast<double>(comp.size());
      for (std::size_t v : comp) e[v] -= mean;
    }
  }

  report.iterations = t;
  report.final_grad_norm = MaxAbs(grad);
  report.final_loss = loss();
  if (!std::isfinite(report.final_loss)) {
    throw NonFinite("loss became non-finite");
  }
  report.elos = EloVector(std::move(e));
  return report;
}

double PredictPreference(const EloVector& elos, std::size_t i, std::size_t j,
                         ModelKind model) {
  if (i >= elos.size() || j >= elos.size()) {
    throw InvalidArgument("candidate index out of range");
  }
  if (i == j) return 0.5;
  // Always evaluate the link on the (min, max) orientation so the mirror is
  // 1 - p computed from the same number.
  if (i < j) return LinkProbability(model, elos[i] - elos[j]);
  return 1.0 - LinkProbability(model, elos[j] - elos[i]);
}

}  // namespace zelo
