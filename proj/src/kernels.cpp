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

#include "zelo/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace zelo::kernels {
namespace {

// Below this many edges the parallel kernels stay on one thread; region
// startup would dominate.
constexpr std::ptrdiff_t kParallelMinEdges = 2048;
constexpr std::ptrdiff_t kParallelMinVertices = 256;

// erfc(x) underflows a little past x = 26.5; switch to the asymptotic series
// well before that.
constexpr double kErfcTail = 25.0;

// erfc(x) * exp(x^2) * x * sqrt(pi) for large x: the asymptotic series
// sum_m (-1)^m (2m-1)!! / (2x^2)^m, truncated where terms drop below 1e-16
// at x = kErfcTail.
double ErfcTailSeries(double x) {
  const double inv = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int m = 1; m <= 7; ++m) {
    term *= -(2.0 * m - 1.0) * inv;
    sum += term;
  }
  return sum;
}

// Derivative of f for one term with its complement folded in.
double PairSlope(ModelKind model, const EdgeTerm& e, double d) {
  return e.weight * (e.w * NegLogLinkSlope(model, d) -
                     (1.0 - e.w) * NegLogLinkSlope(model, -d));
}

double PairLoss(ModelKind model, const EdgeTerm& e, double d) {
  return e.weight *
         (e.w * NegLogLink(model, d) + (1.0 - e.w) * NegLogLink(model, -d));
}

}  // namespace

bool PreferParallel(std::size_t work) {
  constexpr std::size_t kGrain = 4096;
  return work >= kGrain && !omp_in_parallel() && omp_get_max_threads() > 1;
}

Csr BuildIncidence(std::size_t n, std::span<const EdgeTerm> edges) {
  Csr csr;
  csr.offsets.assign(n + 1, 0);
  for (const auto& e : edges) {
    ++csr.offsets[e.i + 1];
    ++csr.offsets[e.j + 1];
  }
  for (std::size_t v = 0; v < n; ++v) csr.offsets[v + 1] += csr.offsets[v];
  csr.items.resize(csr.offsets[n]);
  std::vector<std::size_t> cursor(csr.offsets.begin(), csr.offsets.end() - 1);
  for (std::size_t id = 0; id < edges.size(); ++id) {
    csr.items[cursor[edges[id].i]++] = id;
    csr.items[cursor[edges[id].j]++] = id;
  }
  return csr;
}

double NegLogLink(ModelKind model, double d) {
  if (model == ModelKind::kBradleyTerry) {
    if (d >= 0) return std::log1p(std::exp(-d));
    return -d + std::log1p(std::exp(d));
  }
  const double x = -d;
  if (x < kErfcTail) return -std::log(0.5 * std::erfc(x));
  return x * x + std::log(x * std::sqrt(std::numbers::pi)) -
         std::log(ErfcTailSeries(x)) + std::numbers::ln2;
}

double NegLogLinkSlope(ModelKind model, double d) {
  if (model == ModelKind::kBradleyTerry) {
    // -(1 - sigmoid(d)) = -sigmoid(-d)
    if (d >= 0) {
      const double e = std::exp(-d);
      return -e / (1.0 + e);
    }
    return -1.0 / (1.0 + std::exp(d));
  }
  const double x = -d;
  if (x < kErfcTail) {
    return -2.0 * std::exp(-x * x) /
           (std::sqrt(std::numbers::pi) * std::erfc(x));
  }
  return -2.0 * x / ErfcTailSeries(x);
}

double NegLogLinkCurvatureBound(ModelKind model) {
  // Logistic: sigmoid * (1 - sigmoid) <= 1/4. Normal: -log Phi(sqrt2 d)
  // approaches slope 2 asymptotically and its curvature increases towards 2.
  return model == ModelKind::kBradleyTerry ? 0.25 : 2.0;
}

double NllLossSerial(ModelKind model, std::span<const EdgeTerm> edges,
                     std::span<const double> elos) {
  double total = 0.0;
  for (const auto& e : edges) total += PairLoss(model, e, elos[e.i] - elos[e.j]);
  return total;
}

double NllLossParallel(ModelKind model, std::span<const EdgeTerm> edges,
                       std::span<const double> elos) {
  const auto m = static_cast<std::ptrdiff_t>(edges.size());
  std::vector<double> terms(edges.size());
#pragma omp parallel for schedule(static) if (m >= kParallelMinEdges)
  for (std::ptrdiff_t k = 0; k < m; ++k) {
    const auto& e = edges[k];
    terms[k] = PairLoss(model, e, elos[e.i] - elos[e.j]);
  }
  // Summed in edge order so the result matches the serial kernel exactly.
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

void NllGradientSerial(ModelKind model, std::span<const EdgeTerm> edges,
                       std::span<const double> elos, std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  for (const auto& e : edges) {
    const double g = PairSlope(model, e, elos[e.i] - elos[e.j]);
    grad[e.i] += g;
    grad[e.j] -= g;
  }
}

void NllGradientParallel(ModelKind model, std::span<const EdgeTerm> edges,
                         const Csr& incidence, std::span<const double> elos,
                         std::span<double> grad) {
  const auto n = static_cast<std::ptrdiff_t>(grad.size());
  const bool wide = static_cast<std::ptrdiff_t>(edges.size()) >= kParallelMinEdges;
#pragma omp parallel for schedule(dynamic, 64) if (wide)
  for (std::ptrdiff_t v = 0; v < n; ++v) {
    const auto vertex = static_cast<std::size_t>(v);
    double acc = 0.0;
    // Each pair slope is evaluated once per endpoint; the incidence rows are
    // in edge order, so acc sees the same sequence as the serial loop.
    for (std::size_t id : incidence.row(vertex)) {
      const auto& e = edges[id];
      const double g = PairSlope(model, e, elos[e.i] - elos[e.j]);
      if (e.i == vertex) {
        acc += g;
      } else {
        acc -= g;
      }
    }
    grad[vertex] = acc;
  }
}

std::vector<std::size_t> BfsDistances(const Csr& adjacency, std::size_t source) {
  std::vector<std::size_t> dist(adjacency.vertex_count(), kUnreachable);
  std::vector<std::size_t> frontier{source};
  dist[source] = 0;
  // Level-synchronous sweep.
  for (std::size_t level = 1; !frontier.empty(); ++level) {
    std::vector<std::size_t> next;
    for (std::size_t u : frontier) {
      for (std::size_t v : adjacency.row(u)) {
        if (dist[v] == kUnreachable) {
          dist[v] = level;
          next.push_back(v);
        }
      }
    }
    frontier.swap(next);
  }
  return dist;
}

namespace {

Eccentricities Eccentricity(const Csr& adjacency, std::size_t source) {
  Eccentricities out;
  for (std::size_t d : BfsDistances(adjacency, source)) {
    if (d == kUnreachable) {
      out.connected = false;
    } else {
      out.diameter = std::max(out.diameter, d);
    }
  }
  return out;
}

}  // namespace

Eccentricities AllSourcesBfsSerial(const Csr& adjacency) {
  Eccentricities out;
  for (std::size_t s = 0; s < adjacency.vertex_count(); ++s) {
    const auto e = Eccentricity(adjacency, s);
    out.connected = out.connected && e.connected;
    out.diameter = std::max(out.diameter, e.diameter);
  }
  return out;
}

Eccentricities AllSourcesBfsParallel(const Csr& adjacency) {
  const auto n = static_cast<std::ptrdiff_t>(adjacency.vertex_count());
  std::size_t diameter = 0;
  int connected = 1;
#pragma omp parallel for schedule(dynamic, 8) reduction(max : diameter) \
    reduction(&& : connected) if (n >= kParallelMinVertices)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    const auto e = Eccentricity(adjacency, static_cast<std::size_t>(s));
    connected = connected && e.connected;
    diameter = std::max(diameter, e.diameter);
  }
  return {connected != 0, diameter};
}

}  // namespace zelo::kernels
