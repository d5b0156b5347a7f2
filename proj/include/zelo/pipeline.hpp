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

// End-to-end runs: choose pairs, judge them, fit Elos, emit datasets.

#ifndef ZELO_PIPELINE_HPP_
#define ZELO_PIPELINE_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "zelo/core.hpp"
#include "zelo/ensemble.hpp"
#include "zelo/graphs.hpp"
#include "zelo/solver.hpp"

namespace zelo {

enum class Squash { kLogistic, kMinMax };

std::string_view SquashName(Squash squash);
Squash ParseSquash(std::string_view name);

struct RunConfig {
  std::filesystem::path queries;
  std::filesystem::path documents;
  std::filesystem::path candidates;
  std::filesystem::path output_dir;

  GraphStrategy strategy = GraphStrategy::kCycles;
  std::size_t cycles_k = 8;         // cycles: target degree
  std::size_t budget = 400;         // random / greedy: edges per query
  std::size_t bipartite_left = 1;   // bipartite: size of the left side

  std::vector<JudgeSpec> judges;
  int judge_retries = 1;
  ModelKind model = ModelKind::kThurstone;
  FitOptions fit;
  Squash squash = Squash::kLogistic;
  std::uint64_t seed = 0;
  std::size_t max_candidates = kDefaultMaxCandidates;

  // Throws ConfigError.
  void Validate() const;
};

// Parses a JSON config; relative paths resolve against `base_dir`.
RunConfig RunConfigFromJson(const nlohmann::json& j,
                            const std::filesystem::path& base_dir);
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Instantiated judges for a run.
class JudgePanel {
 public:
  JudgePanel() = default;
  JudgePanel(const std::vector<JudgeSpec>& specs, const std::filesystem::path& base_dir = {});
  explicit JudgePanel(std::vector<std::unique_ptr<Judge>> judges);

  std::span<const Judge* const> view() const { return view_; }
  std::size_t size() const { return owned_.size(); }
  std::uint64_t TotalCalls() const;

 private:
  std::vector<std::unique_ptr<Judge>> owned_;
  std::vector<const Judge*> view_;
};

// Documents of a candidate set, resolved, in candidate order.
struct ResolvedQuery {
  Query query;
  CandidateSet candidates;
  std::vector<Document> docs;
};

struct AnnotationResult {
  ComparisonGraph graph;
  std::vector<PreferenceRecord> records;  // one per edge, in edge order
  std::vector<std::string> warnings;
};

// Graph the run config selects for k candidates. Falls back to the complete
// graph when it has no more edges than the strategy's budget.
// Looks up the query and every candidate document; throws InvalidArgument
// naming the first missing id.
ResolvedQuery ResolveQuery(const CandidateSet& cs,
                           const std::unordered_map<std::string, Query>& queries,
                           const std::unordered_map<std::string, Document>& docs);

ComparisonGraph SelectPairs(const RunConfig& cfg, std::size_t k, std::uint64_t seed);

// Per-query seed derived from the run seed and the query id.
std::uint64_t QuerySeed(std::uint64_t run_seed, std::string_view query_id);

AnnotationResult AnnotateQuery(const ResolvedQuery& rq, const JudgePanel& judges,
                               const RunConfig& cfg, std::uint64_t query_seed);

FitReport ComputeZelo(std::span<const PreferenceRecord> records, std::size_t n,
                      ModelKind model, const FitOptions& options);

struct SftRecord {
  std::string query_id;
  std::string doc_id;
  double elo = 0.0;
  double target = 0.5;
  std::size_t rank = 0;  // 1-indexed under descending Elo
};

// Sorted by rank.
std::vector<SftRecord> EmitSft(const CandidateSet& cs, const EloVector& elos, Squash squash);

// 1-indexed ranks by descending score, ties broken by candidate order.
std::vector<std::size_t> RanksByScore(std::span<const double> scores);

struct MinedPair {
  std::string query_id;
  std::size_t human_index = 0;
  std::size_t other_index = 0;
  std::size_t human_rank = 0;
};

// When the human-preferred document ranks below `threshold`, pairs it with the
// document ranked immediately above it.
std::optional<MinedPair> MineFailure(const CandidateSet& cs, std::span<const double> scores,
                                     std::string_view human_top, std::size_t threshold);

// Dataset-keyed thresholds with a default.
struct ThresholdMap {
  std::map<std::string, std::size_t> by_dataset;
  std::size_t fallback = 5;

  std::size_t For(const std::string& dataset) const;
  // {"default": 5, "datasets": {"name": t, ...}}
  static ThresholdMap FromJson(const nlohmann::json& j);
};

nlohmann::json ToJson(const SftRecord& r);

// Runs every candidate set, writes sft.jsonl, pairs.jsonl, elos.jsonl and
// manifest.json (deterministic) plus timing.json (wall clock) into the output
// directory, and returns the manifest.
nlohmann::json RunDataset(const RunConfig& cfg);
// Same, with pre-built judges.
nlohmann::json RunDataset(const RunConfig& cfg, const JudgePanel& judges);

}  // namespace zelo

#endif  // ZELO_PIPELINE_HPP_
