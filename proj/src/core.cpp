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

#include "zelo/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_set>

#include "zelo/error.hpp"

namespace zelo {

void CandidateSet::Validate(std::size_t max_k) const {
  if (query_id.empty()) throw InvalidArgument("candidate set has empty query_id");
  if (k() < 2 || k() > max_k) {
    throw InvalidArgument("candidate set for query '" + query_id + "' has k=" +
                          std::to_string(k()) + ", expected 2 <= k <= " +
                          std::to_string(max_k));
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& id : doc_ids) {
    if (id.empty()) {
      throw InvalidArgument("candidate set for query '" + query_id +
                            "' contains an empty doc id");
    }
    if (!seen.insert(id).second) {
      throw InvalidArgument("candidate set for query '" + query_id +
                            "' lists doc '" + id + "' twice");
    }
  }
}

std::optional<std::size_t> CandidateSet::IndexOf(std::string_view doc_id) const {
  auto it = std::find(doc_ids.begin(), doc_ids.end(), doc_id);
  if (it == doc_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - doc_ids.begin());
}

std::string_view ModelName(ModelKind model) {
  return model == ModelKind::kBradleyTerry ? "bradley-terry" : "thurstone";
}

ModelKind ParseModel(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "bt" || lower == "bradley-terry" || lower == "bradleyterry" ||
      lower == "bradley_terry") {
    return ModelKind::kBradleyTerry;
  }
  if (lower == "thurstone") return ModelKind::kThurstone;
  throw InvalidArgument("unknown model '" + std::string(name) +
                        "' (expected bradley-terry or thurstone)");
}

double LinkProbability(ModelKind model, double diff) {
  if (model == ModelKind::kBradleyTerry) {
    // Branch keeps exp() from overflowing for large |diff|.
    if (diff >= 0) return 1.0 / (1.0 + std::exp(-diff));
    const double e = std::exp(diff);
    return e / (1.0 + e);
  }
  return 0.5 * std::erfc(-diff);
}

EloVector::EloVector(std::vector<double> scores) : scores_(std::move(scores)) {
  if (scores_.empty()) return;
  const double mean = std::accumulate(scores_.begin(), scores_.end(), 0.0) /
                      static_cast<double>(scores_.size());
  for (double& s : scores_) s -= mean;
}

double EloVector::Mean() const {
  if (scores_.empty()) return 0.0;
  return std::accumulate(scores_.begin(), scores_.end(), 0.0) /
         static_cast<double>(scores_.size());
}

std::optional<OrientedEntry> SparsePreferenceMatrix::Get(std::size_t i,
                                                         std::size_t j) const {
  if (i == j) return std::nullopt;
  const std::size_t a = std::min(i, j);
  const std::size_t b = std::max(i, j);
  auto it = std::lower_bound(
      pairs_.begin(), pairs_.end(), std::pair{a, b},
      [](const PairEntry& e, const std::pair<std::size_t, std::size_t>& key) {
        return std::pair{e.i, e.j} < key;
      });
  if (it == pairs_.end() || it->i != a || it->j != b) return std::nullopt;
  if (i == a) return OrientedEntry{it->w, it->weight};
  return OrientedEntry{1.0 - it->w, it->weight};
}

std::vector<std::pair<std::pair<std::size_t, std::size_t>, OrientedEntry>>
SparsePreferenceMatrix::OrderedEntries() const {
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, OrientedEntry>>
      out;
  out.reserve(2 * pairs_.size());
  for (const auto& e : pairs_) {
    out.push_back({{e.i, e.j}, {e.w, e.weight}});
    out.push_back({{e.j, e.i}, {1.0 - e.w, e.weight}});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  return out;
}

SparsePreferenceMatrix BuildPreferenceMatrix(
    std::span<const PreferenceRecord> records, std::size_t n) {
  struct Accum {
    double weighted_p = 0.0;
    double weight = 0.0;
  };
  // Ordered map so that iteration (and therefore the summation order below)
  // is independent of the input record order.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::pair<double, double>>>
      observations;
  for (const auto& r : records) {
    if (r.i >= n || r.j >= n) {
      throw InvalidArgument("preference record (" + std::to_string(r.i) + "," +
                            std::to_string(r.j) + ") out of range for n=" +
                            std::to_string(n));
    }
    if (r.i == r.j) {
      throw InvalidArgument("preference record compares candidate " +
                            std::to_string(r.i) + " with itself");
    }
    if (!(r.p >= 0.0 && r.p <= 1.0)) {
      throw InvalidArgument("preference probability " + std::to_string(r.p) +
                            " outside [0,1]");
    }
    if (!(r.weight > 0.0) || !std::isfinite(r.weight)) {
      throw InvalidArgument("preference weight must be positive and finite");
    }
    const bool forward = r.i < r.j;
    const auto key = forward ? std::pair{r.i, r.j} : std::pair{r.j, r.i};
    observations[key].emplace_back(forward ? r.p : 1.0 - r.p, r.weight);
  }

  SparsePreferenceMatrix m(n);
  m.pairs_.reserve(observations.size());
  for (auto& [key, obs] : observations) {
    // Sort the observations too: the merged value must not depend on the
    // order duplicates arrived in.
    std::sort(obs.begin(), obs.end());
    Accum acc;
    for (const auto& [p, w] : obs) {
      acc.weighted_p += p * w;
      acc.weight += w;
    }
    const double w = std::clamp(acc.weighted_p / acc.weight, 0.0, 1.0);
    m.pairs_.push_back({key.first, key.second, w, acc.weight});
  }
  return m;
}

DenseMatrix ImpliedDenseMatrix(const EloVector& elos, ModelKind model) {
  const std::size_t n = elos.size();
  DenseMatrix out{n, std::vector<double>(n * n, 0.5)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = LinkProbability(model, elos[i] - elos[j]);
      out(i, j) = p;
      out(j, i) = 1.0 - p;
    }
  }
  return out;
}

std::vector<PreferenceRecord> DenseRecords(const DenseMatrix& probs,
                                           std::string_view query_id) {
  std::vector<PreferenceRecord> out;
  out.reserve(probs.n * (probs.n - (probs.n > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < probs.n; ++i) {
    for (std::size_t j = i + 1; j < probs.n; ++j) {
      out.push_back({std::string(query_id), i, j, probs(i, j), 1.0});
    }
  }
  return out;
}

}  // namespace zelo
