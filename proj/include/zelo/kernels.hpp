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

// Hot loops of the toolkit. Each parallel kernel has a serial twin that
// performs the same floating-point operations in the same order per output
// element, so the two agree bit for bit; tests hold them to that and the
// benchmark target compares their speed.
//
// The NLL over a set of judged pairs is
//
//   L(e) = sum_pairs weight * [ w * f(e_i - e_j) + (1 - w) * f(e_j - e_i) ]
//
// with f(d) = -log link(d). Both ordered entries of a pair are folded into a
// single term, which is what the sparse matrix stores.

#ifndef ZELO_KERNELS_HPP_
#define ZELO_KERNELS_HPP_

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "zelo/core.hpp"

namespace zelo::kernels {

// A judged pair with its probability already clamped away from {0, 1}.
struct EdgeTerm {
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 0.5;
  double weight = 1.0;
};

// Compressed incidence / adjacency lists: the entries of vertex v are
// items[offsets[v] .. offsets[v + 1]).
struct Csr {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> items;

  std::size_t vertex_count() const {
    return offsets.empty() ? 0 : offsets.size() - 1;
  }
  std::span<const std::size_t> row(std::size_t v) const {
    return {items.data() + offsets[v], offsets[v + 1] - offsets[v]};
  }
};

// Edge ids incident to each vertex, ascending.
Csr BuildIncidence(std::size_t n, std::span<const EdgeTerm> edges);

// -log link(d), evaluated without overflow or underflow for any finite d.
double NegLogLink(ModelKind model, double d);
// d/dd of NegLogLink. Always negative.
double NegLogLinkSlope(ModelKind model, double d);
// Supremum over d of the second derivative of NegLogLink.
double NegLogLinkCurvatureBound(ModelKind model);

double NllLossSerial(ModelKind model, std::span<const EdgeTerm> edges,
                     std::span<const double> elos);
double NllLossParallel(ModelKind model, std::span<const EdgeTerm> edges,
                       std::span<const double> elos);

// Overwrites `grad` (size n) with dL/de.
void NllGradientSerial(ModelKind model, std::span<const EdgeTerm> edges,
                       std::span<const double> elos, std::span<double> grad);
void NllGradientParallel(ModelKind model, std::span<const EdgeTerm> edges,
                         const Csr& incidence, std::span<const double> elos,
                         std::span<double> grad);

// Whether `work` items justify a parallel kernel here: more than one thread is
// available and the caller is not already inside a parallel region. Serial
// and parallel kernels give identical bits, so this only affects speed.
bool PreferParallel(std::size_t work);

inline constexpr std::size_t kUnreachable =
    std::numeric_limits<std::size_t>::max();

// Hop distances from `source`; kUnreachable for other components.
std::vector<std::size_t> BfsDistances(const Csr& adjacency, std::size_t source);

struct Eccentricities {
  bool connected = true;
  // Largest finite distance seen from any source.
  std::size_t diameter = 0;
};

// Breadth-first search from every vertex.
Eccentricities AllSourcesBfsSerial(const Csr& adjacency);
Eccentricities AllSourcesBfsParallel(const Csr& adjacency);

}  // namespace zelo::kernels

#endif  // ZELO_KERNELS_HPP_
