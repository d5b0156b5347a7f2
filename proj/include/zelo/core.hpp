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

// Domain types shared by every stage of the pipeline: documents, queries,
// candidate lists, pairwise preference records and the sparse antisymmetric
// preference matrix built from them.

#ifndef ZELO_CORE_HPP_
#define ZELO_CORE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace zelo {

struct Document {
  std::string id;
  std::string text;
};

struct Query {
  std::string id;
  std::string text;
};

inline constexpr std::size_t kDefaultMaxCandidates = 100;

// A query plus its initially-retrieved documents, in retrieval order.
struct CandidateSet {
  std::string query_id;
  std::vector<std::string> doc_ids;

  std::size_t k() const { return doc_ids.size(); }

  // Throws InvalidArgument on duplicates or k outside [2, max_k].
  void Validate(std::size_t max_k = kDefaultMaxCandidates) const;

  // Position of `doc_id` in the list, if present.
  std::optional<std::size_t> IndexOf(std::string_view doc_id) const;
};

// One (possibly aggregated) judgment that candidate i beats candidate j with
// probability p.
struct PreferenceRecord {
  std::string query_id;
  std::size_t i = 0;
  std::size_t j = 0;
  double p = 0.5;
  double weight = 1.0;
};

enum class ModelKind { kBradleyTerry, kThurstone };

std::string_view ModelName(ModelKind model);
// Accepts "bt", "bradley-terry", "bradleyterry", "thurstone" (case-insensitive).
ModelKind ParseModel(std::string_view name);

// Win probability of a candidate whose score exceeds its opponent's by
// `diff`: logistic for Bradley-Terry, (1 + erf(diff)) / 2 for Thurstone.
double LinkProbability(ModelKind model, double diff);

// Mean-centered latent scores, one per candidate.
class EloVector {
 public:
  EloVector() = default;
  // Subtracts the mean of `scores`.
  explicit EloVector(std::vector<double> scores);

  std::size_t size() const { return scores_.size(); }
  double operator[](std::size_t i) const { return scores_[i]; }
  std::span<const double> scores() const { return scores_; }
  double Mean() const;

 private:
  std::vector<double> scores_;
};

// An inferred pair stored once with i < j. `w` is the probability that i
// beats j; the mirror probability is 1 - w.
struct PairEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 0.5;
  double weight = 1.0;
};

// Oriented view of a stored pair.
struct OrientedEntry {
  double w = 0.5;
  double weight = 1.0;
};

// Sparse antisymmetric matrix of win probabilities. Pairs that were never
// judged are absent; every stored pair implicitly carries its mirror.
class SparsePreferenceMatrix {
 public:
  SparsePreferenceMatrix() = default;
  explicit SparsePreferenceMatrix(std::size_t n) : n_(n) {}

  std::size_t n() const { return n_; }
  // Number of unordered pairs.
  std::size_t pair_count() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  // Unordered pairs sorted by (i, j), i < j.
  std::span<const PairEntry> pairs() const { return pairs_; }

  // Entry for the ordered pair (i, j), mirrored if stored as (j, i).
  std::optional<OrientedEntry> Get(std::size_t i, std::size_t j) const;

  // Every ordered entry (i, j) including mirrors, sorted by (i, j).
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, OrientedEntry>>
  OrderedEntries() const;

 private:
  friend SparsePreferenceMatrix BuildPreferenceMatrix(
      std::span<const PreferenceRecord>, std::size_t);

  std::size_t n_ = 0;
  std::vector<PairEntry> pairs_;
};

// Merges duplicate observations of an unordered pair by the weight-weighted
// mean of p, with records given as (j, i) contributing 1 - p.
SparsePreferenceMatrix BuildPreferenceMatrix(
    std::span<const PreferenceRecord> records, std::size_t n);

// Row-major n x n matrix.
struct DenseMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const {
    return values[i * n + j];
  }
  double& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

// Probability matrix implied by the scores: entry (i, j) = link(e_i - e_j),
// diagonal 0.5.
DenseMatrix ImpliedDenseMatrix(const EloVector& elos, ModelKind model);

// Records for every off-diagonal pair i < j of a dense probability matrix.
std::vector<PreferenceRecord> DenseRecords(const DenseMatrix& probs,
                                           std::string_view query_id = {});

}  // namespace zelo

#endif  // ZELO_CORE_HPP_
