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

#include "zelo/graphs.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <limits>
#include <random>
#include <string>
#include <unordered_set>

#include "zelo/error.hpp"

namespace zelo {
namespace {

std::size_t PairCount(std::size_t n) { return n * (n - (n > 0 ? 1 : 0)) / 2; }

std::uint64_t PairKey(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

kernels::Csr BuildAdjacency(std::size_t n, std::span<const Edge> edges) {
  kernels::Csr csr;
  csr.offsets.assign(n + 1, 0);
  for (const auto& [a, b] : edges) {
    ++csr.offsets[a + 1];
    ++csr.offsets[b + 1];
  }
  for (std::size_t v = 0; v < n; ++v) csr.offsets[v + 1] += csr.offsets[v];
  csr.items.resize(csr.offsets[n]);
  std::vector<std::size_t> cursor(csr.offsets.begin(), csr.offsets.end() - 1);
  for (const auto& [a, b] : edges) {
    csr.items[cursor[a]++] = b;
    csr.items[cursor[b]++] = a;
  }
  return csr;
}

// Edges of the cycle visiting `order`; path edges first, closing edge last.
std::vector<Edge> CycleEdges(const std::vector<std::size_t>& order) {
  std::vector<Edge> edges;
  const std::size_t n = order.size();
  for (std::size_t t = 0; t + 1 < n; ++t) edges.emplace_back(order[t], order[t + 1]);
  if (n >= 3) edges.emplace_back(order[n - 1], order[0]);
  return edges;
}

}  // namespace

ComparisonGraph::ComparisonGraph(std::size_t n, std::vector<Edge> edges)
    : n_(n), edges_(std::move(edges)) {
  for (auto& [a, b] : edges_) {
    if (a == b) {
      throw InvalidArgument("self-loop on vertex " + std::to_string(a));
    }
    if (a >= n_ || b >= n_) {
      throw InvalidArgument("edge (" + std::to_string(a) + "," +
                            std::to_string(b) + ") out of range for n=" +
                            std::to_string(n_));
    }
    if (a > b) std::swap(a, b);
  }
  std::sort(edges_.begin(), edges_.end());
  auto dup = std::adjacent_find(edges_.begin(), edges_.end());
  if (dup != edges_.end()) {
    throw InvalidArgument("duplicate edge (" + std::to_string(dup->first) +
                          "," + std::to_string(dup->second) + ")");
  }
}

bool ComparisonGraph::HasEdge(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{a, b});
}

std::vector<std::size_t> ComparisonGraph::Degrees() const {
  std::vector<std::size_t> deg(n_, 0);
  for (const auto& [a, b] : edges_) {
    ++deg[a];
    ++deg[b];
  }
  return deg;
}

kernels::Csr ComparisonGraph::Adjacency() const {
  return BuildAdjacency(n_, edges_);
}

GraphStats ComputeGraphStats(const ComparisonGraph& g) {
  GraphStats stats;
  stats.edge_count = g.edge_count();
  if (g.n() == 0) return stats;
  const auto deg = g.Degrees();
  const auto [lo, hi] = std::minmax_element(deg.begin(), deg.end());
  stats.min_degree = *lo;
  stats.max_degree = *hi;
  const auto ecc = kernels::AllSourcesBfsParallel(g.Adjacency());
  stats.connected = ecc.connected;
  if (ecc.connected) stats.diameter = ecc.diameter;
  return stats;
}

std::vector<std::vector<std::size_t>> ConnectedComponents(
    std::size_t n, std::span<const Edge> edges) {
  const auto adj = BuildAdjacency(n, edges);
  std::vector<bool> seen(n, false);
  std::vector<std::vector<std::size_t>> components;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp{s};
    seen[s] = true;
    for (std::size_t head = 0; head < comp.size(); ++head) {
      for (std::size_t v : adj.row(comp[head])) {
        if (!seen[v]) {
          seen[v] = true;
          comp.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

ComparisonGraph SampleRandomPairs(std::size_t n, std::size_t budget,
                                  std::uint64_t seed) {
  const std::size_t total = PairCount(n);
  if (budget > total) {
    throw InvalidArgument("budget " + std::to_string(budget) + " exceeds the " +
                          std::to_string(total) + " pairs available for n=" +
                          std::to_string(n));
  }
  // Floyd's sampling over linear pair indices.
  std::mt19937_64 rng(seed);
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(budget * 2);
  for (std::size_t j = total - budget; j < total; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::size_t> indices(chosen.begin(), chosen.end());
  std::sort(indices.begin(), indices.end());

  // Linear index enumerates (0,1), (0,2), ..., (0,n-1), (1,2), ...
  std::vector<Edge> edges;
  edges.reserve(budget);
  std::size_t row = 0;
  std::size_t row_start = 0;
  for (std::size_t idx : indices) {
    while (idx >= row_start + (n - 1 - row)) {
      row_start += n - 1 - row;
      ++row;
    }
    edges.emplace_back(row, row + 1 + (idx - row_start));
  }
  return ComparisonGraph(n, std::move(edges));
}

ComparisonGraph SampleBipartite(std::size_t n, std::size_t l) {
  if (l < 1 || l >= n) {
    throw InvalidArgument("bipartite split l=" + std::to_string(l) +
                          " must satisfy 1 <= l < n=" + std::to_string(n));
  }
  std::vector<Edge> edges;
  edges.reserve(l * (n - l));
  for (std::size_t a = 0; a < l; ++a) {
    for (std::size_t b = l; b < n; ++b) edges.emplace_back(a, b);
  }
  return ComparisonGraph(n, std::move(edges));
}

std::vector<std::size_t> RandomCycleOrder(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

ComparisonGraph SampleCycleUnion(std::size_t n, std::size_t k,
                                 std::uint64_t seed,
                                 const CycleUnionOptions& options) {
  if (k % 2 != 0) {
    throw InvalidArgument("cycle-union degree k=" + std::to_string(k) +
                          " must be even");
  }
  if (k < 2 || k >= n) {
    throw InvalidArgument("cycle-union degree k=" + std::to_string(k) +
                          " must satisfy 2 <= k < n=" + std::to_string(n));
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::unordered_set<std::uint64_t> present;
  present.reserve(k * n);
  std::vector<Edge> edges;
  edges.reserve(k * n / 2);

  for (std::size_t c = 0; c < k / 2; ++c) {
    std::vector<Edge> cycle;
    for (std::size_t attempt = 0;; ++attempt) {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      cycle = CycleEdges(order);
      if (options.collisions == CollisionPolicy::kDeduplicate ||
          attempt + 1 >= options.max_attempts_per_cycle) {
        break;
      }
      const bool collides =
          std::any_of(cycle.begin(), cycle.end(), [&](const Edge& e) {
            return present.contains(PairKey(e.first, e.second));
          });
      if (!collides) break;
    }
    for (const auto& [a, b] : cycle) {
      if (present.insert(PairKey(a, b)).second) edges.emplace_back(a, b);
    }
  }
  return ComparisonGraph(n, std::move(edges));
}

GreedyResult SampleEntropyGreedy(std::size_t n, std::size_t budget,
                                 const PairOracle& oracle, ModelKind model,
                                 std::uint64_t seed,
                                 const GreedyOptions& options) {
  if (n < 2) throw InvalidArgument("greedy sampling needs n >= 2");
  const std::size_t total = PairCount(n);
  if (budget > total) {
    throw InvalidArgument("budget " + std::to_string(budget) + " exceeds the " +
                          std::to_string(total) + " pairs available for n=" +
                          std::to_string(n));
  }

  GreedyResult result;
  std::vector<char> judged(n * n, 0);
  std::vector<Edge> edges;
  auto judge = [&](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    result.records.push_back({"", a, b, oracle(a, b), 1.0});
    judged[a * n + b] = 1;
    edges.emplace_back(a, b);
  };

  // Connectivity first: one Hamiltonian cycle (a path prefix if the budget
  // is smaller than n).
  const auto seed_edges = CycleEdges(RandomCycleOrder(n, seed));
  for (std::size_t t = 0; t < seed_edges.size() && edges.size() < budget; ++t) {
    judge(seed_edges[t].first, seed_edges[t].second);
  }

  FitOptions fit;
  fit.max_iters = options.refit_iters;
  fit.allow_disconnected = true;
  std::vector<double> elos(n, 0.0);
  while (edges.size() < budget) {
    fit.warm_start = elos;
    const auto w = BuildPreferenceMatrix(result.records, n);
    const auto report = FitElos(w, model, fit);
    elos.assign(report.elos.scores().begin(), report.elos.scores().end());

    Edge best{0, 0};
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (judged[a * n + b]) continue;
        const double gap = std::abs(elos[a] - elos[b]);
        if (gap < best_gap) {
          best_gap = gap;
          best = {a, b};
        }
      }
    }
    judge(best.first, best.second);
  }

  result.graph = ComparisonGraph(n, std::move(edges));
  return result;
}

double BollobasDiameterBound(std::size_t n, std::size_t k) {
  if (k < 3) {
    throw InvalidArgument("diameter bound needs k >= 3, got " + std::to_string(k));
  }
  if (n <= k) {
    throw InvalidArgument("diameter bound needs n > k");
  }
  const double base = std::log(static_cast<double>(k - 1));
  const double ln_n = std::log(static_cast<double>(n));
  const double kd = static_cast<double>(k);
  return ln_n / base + std::log(ln_n) / base +
         std::log(2.5 * kd * (kd - 1.0)) / base;
}

std::string_view StrategyName(GraphStrategy s) {
  switch (s) {
    case GraphStrategy::kRandom:
      return "random";
    case GraphStrategy::kBipartite:
      return "bipartite";
    case GraphStrategy::kCycles:
      return "cycles";
    case GraphStrategy::kGreedy:
      return "greedy";
  }
  return "unknown";
}

GraphStrategy ParseStrategy(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "random") return GraphStrategy::kRandom;
  if (lower == "bipartite") return GraphStrategy::kBipartite;
  if (lower == "cycles") return GraphStrategy::kCycles;
  if (lower == "greedy") return GraphStrategy::kGreedy;
  throw InvalidArgument("unknown graph strategy '" + std::string(name) +
                        "' (expected random, bipartite, cycles or greedy)");
}

}  // namespace zelo
