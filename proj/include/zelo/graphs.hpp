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

// Comparison graphs: which candidate pairs get judged.
//
// Note on naming: `k` in this header is the target vertex degree of a
// cycle-union graph (8 in the default configuration), not the length of the
// retrieved candidate list, which is `n` here.

#ifndef ZELO_GRAPHS_HPP_
#define ZELO_GRAPHS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "zelo/core.hpp"
#include "zelo/kernels.hpp"
#include "zelo/solver.hpp"

namespace zelo {

using Edge = std::pair<std::size_t, std::size_t>;

// Undirected simple graph on vertices [0, n).
class ComparisonGraph {
 public:
  ComparisonGraph() = default;
  // Normalizes each edge to (min, max), sorts and validates. Throws
  // InvalidArgument on self-loops, duplicates or out-of-range endpoints.
  ComparisonGraph(std::size_t n, std::vector<Edge> edges);

  std::size_t n() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  bool HasEdge(std::size_t a, std::size_t b) const;

  std::vector<std::size_t> Degrees() const;
  kernels::Csr Adjacency() const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

struct GraphStats {
  bool connected = false;
  std::size_t min_degree = 0;
  std::size_t max_degree = 0;
  // Longest shortest path; only set for connected graphs.
  std::optional<std::size_t> diameter;
  std::size_t edge_count = 0;
};

GraphStats ComputeGraphStats(const ComparisonGraph& g);

// Connected components as sorted vertex lists, ordered by smallest member.
std::vector<std::vector<std::size_t>> ConnectedComponents(
    std::size_t n, std::span<const Edge> edges);

// `budget` distinct pairs drawn uniformly without replacement.
ComparisonGraph SampleRandomPairs(std::size_t n, std::size_t budget,
                                  std::uint64_t seed);

// Complete bipartite graph between [0, l) and [l, n).
ComparisonGraph SampleBipartite(std::size_t n, std::size_t l);

enum class CollisionPolicy {
  // Redraw a cycle that reuses an existing edge; dedupe only if no
  // collision-free cycle turns up within the attempt bound.
  kResample,
  // Keep the first occurrence of a repeated edge.
  kDeduplicate,
};

struct CycleUnionOptions {
  CollisionPolicy collisions = CollisionPolicy::kResample;
  std::size_t max_attempts_per_cycle = 100000;
};

// Union of k/2 uniformly random Hamiltonian cycles.
ComparisonGraph SampleCycleUnion(std::size_t n, std::size_t k,
                                 std::uint64_t seed,
                                 const CycleUnionOptions& options = {});

// Judged probability that i beats j.
using PairOracle = std::function<double(std::size_t i, std::size_t j)>;

struct GreedyResult {
  ComparisonGraph graph;
  // In judgment order; the first n (or budget, if smaller) come from the
  // seeding cycle.
  std::vector<PreferenceRecord> records;
};

struct GreedyOptions {
  // Iteration cap for each warm-started refit between picks.
  std::size_t refit_iters = 300;
};

// Seeds with one random Hamiltonian cycle, then repeatedly refits and judges
// the unjudged pair with the smallest current score gap (ties: lowest (i, j)).
GreedyResult SampleEntropyGreedy(std::size_t n, std::size_t budget,
                                 const PairOracle& oracle, ModelKind model,
                                 std::uint64_t seed,
                                 const GreedyOptions& options = {});

// Asymptotic almost-sure upper bound on the diameter of a random k-regular
// graph on n vertices:
//   log_{k-1}(n) + log_{k-1}(ln n) + log_{k-1}(5/2 k (k-1)).
double BollobasDiameterBound(std::size_t n, std::size_t k);

enum class GraphStrategy { kRandom, kBipartite, kCycles, kGreedy };

std::string_view StrategyName(GraphStrategy s);
GraphStrategy ParseStrategy(std::string_view name);

// Uniform random Hamiltonian cycle as a vertex order.
std::vector<std::size_t> RandomCycleOrder(std::size_t n, std::uint64_t seed);

}  // namespace zelo

#endif  // ZELO_GRAPHS_HPP_
