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

// Retrieval metrics and sparse-versus-dense convergence studies.

#ifndef ZELO_EVAL_HPP_
#define ZELO_EVAL_HPP_

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "zelo/core.hpp"
#include "zelo/graphs.hpp"
#include "zelo/solver.hpp"

namespace zelo {

struct RankedList {
  std::string query_id;
  // Ordered by descending predicted score.
  std::vector<std::string> doc_ids;
  // Graded gain per document; missing entries count as 0.
  std::map<std::string, double> relevance;

  // Throws InvalidArgument on duplicate ids or negative gains.
  void Validate() const;
  double Relevance(const std::string& doc_id) const;
};

// `degenerate` flags queries where the metric is undefined and reported as 0.
struct MetricValue {
  double value = 0.0;
  bool degenerate = false;
};

// Exponential gain 2^rel - 1, discount log2(pos + 1). The ideal ordering is
// taken over every judged document, listed or not.
MetricValue NdcgAtK(const RankedList& rl, std::size_t k = 10);

// Fraction of documents with relevance >= threshold that appear in the top k.
MetricValue RecallAtK(const RankedList& rl, std::size_t k, double relevant_threshold);

// Mean squared difference after centering both vectors.
double EloMse(std::span<const double> a, std::span<const double> b);

// Average over ordered pairs i != j of BCE(p_a(i,j), p_b(i,j)), where
// p_x(i,j) = link(x_i - x_j). `a` is the reference.
double PrefCrossEntropy(std::span<const double> a, std::span<const double> b, ModelKind model);

// PrefCrossEntropy(a, a).
double PrefEntropy(std::span<const double> a, ModelKind model);

// Cross-entropy in excess of the reference's entropy; nonnegative.
double ExcessCrossEntropy(std::span<const double> a, std::span<const double> b,
                          ModelKind model);

enum class DisconnectedPolicy {
  kExclude,            // failure, left out of the means
  kComponentCentered,  // failure, but fitted per component and kept
};

enum class HiddenDistribution { kUniform, kNormal };

struct StudyConfig {
  std::size_t n = 100;
  std::vector<GraphStrategy> strategies{GraphStrategy::kCycles, GraphStrategy::kRandom,
                                        GraphStrategy::kBipartite};
  std::vector<std::size_t> budgets{100, 200, 400, 800, 1600};
  std::size_t trials = 20;
  // Hidden scores: uniform on [-spread, spread] or normal with sd = spread.
  HiddenDistribution hidden = HiddenDistribution::kUniform;
  double hidden_spread = 2.0;
  // Ground truth per pair: the mean of this many synthetic verdicts. A few
  // verdicts saturate most pairs at 0 or 1, which sparse fits extrapolate
  // poorly; 25 approximates a continuous preference.
  std::size_t judges_per_pair = 25;
  double noise_scale = 1.0;
  ModelKind model = ModelKind::kThurstone;
  FitOptions fit = [] {
    FitOptions f;
    f.max_iters = 20000;
    return f;
  }();
  DisconnectedPolicy disconnected = DisconnectedPolicy::kExclude;
  std::size_t greedy_refit_iters = 300;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void Validate() const;
};

StudyConfig StudyConfigFromJson(const nlohmann::json& j);

struct StudyCell {
  GraphStrategy strategy = GraphStrategy::kRandom;
  std::size_t budget = 0;
  std::size_t trial_count = 0;  // trials contributing to the means
  std::size_t failures = 0;     // disconnected sparse graphs
  double mse_mean = 0.0;
  double mse_std = 0.0;
  double xent_mean = 0.0;
  double xent_std = 0.0;
};

// One row per (strategy, budget), in config order. Identical for identical
// configs regardless of thread count.
std::vector<StudyCell> ConvergenceStudy(const StudyConfig& cfg);

// Graph a strategy produces for a study budget. Budgets at or above the pair
// count give the complete graph; cycles use the largest even degree whose
// union fits the budget, bipartite the largest left side that does.
ComparisonGraph StudyGraph(GraphStrategy strategy, std::size_t n, std::size_t budget,
                           std::uint64_t seed, const PairOracle& oracle, ModelKind model,
                           std::size_t greedy_refit_iters);

void WriteStudyCsv(std::ostream& out, const std::vector<StudyCell>& cells);

}  // namespace zelo

#endif  // ZELO_EVAL_HPP_
