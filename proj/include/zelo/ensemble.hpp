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

// Pairwise judges and the ensemble built on top of them.
//
// Raw judge scores live in [-1, 1]; negative means the first-presented
// document ("Document A") is more relevant. Verdicts are always reported in
// the canonical (d_i, d_j) orientation, so a verdict of -1 favours d_i.

#ifndef ZELO_ENSEMBLE_HPP_
#define ZELO_ENSEMBLE_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "zelo/core.hpp"

namespace zelo {

// Everything a judge sees for one call. `index_a`/`index_b` are candidate
// positions of the presented documents; `candidate_count` is k.
struct JudgeRequest {
  const Query* query = nullptr;
  const Document* doc_a = nullptr;
  const Document* doc_b = nullptr;
  std::size_t index_a = 0;
  std::size_t index_b = 0;
  std::size_t candidate_count = 0;
  std::uint64_t seed = 0;
};

struct JudgeCounters {
  std::uint64_t calls = 0;
  std::uint64_t failures = 0;
  std::uint64_t retries = 0;
};

// A judge is stateless apart from atomic counters, so one instance may serve
// many threads.
class Judge {
 public:
  explicit Judge(std::string id) : id_(std::move(id)) {}
  virtual ~Judge() = default;
  Judge(const Judge&) = delete;
  Judge& operator=(const Judge&) = delete;

  const std::string& id() const { return id_; }

  // Raw score in [-1, 1] for (doc_a, doc_b) as presented.
  double Score(const JudgeRequest& request) const;

  JudgeCounters counters() const;

 protected:
  virtual double DoScore(const JudgeRequest& request) const = 0;
  void CountRetry() const { retries_.fetch_add(1, std::memory_order_relaxed); }

 private:
  std::string id_;
  mutable std::atomic<std::uint64_t> calls_{0};
  mutable std::atomic<std::uint64_t> failures_{0};
  mutable std::atomic<std::uint64_t> retries_{0};
};

// Looks judgments up in a table keyed by (query_id, i, j). A lookup in the
// opposite orientation returns the negated score.
class ReplayJudge : public Judge {
 public:
  using Key = std::tuple<std::string, std::size_t, std::size_t>;

  ReplayJudge(std::string id, std::map<Key, double> table);
  // JSONL rows {"query_id","i","j","raw"}.
  static std::unique_ptr<ReplayJudge> FromFile(std::string id,
                                               const std::filesystem::path& path);

  std::size_t size() const { return table_.size(); }

 protected:
  double DoScore(const JudgeRequest& request) const override;

 private:
  std::map<Key, double> table_;
};

struct SyntheticJudgeOptions {
  double noise_scale = 1.0;
  // Latent draws within [-band, band] come back as 0.
  double indifference_band = 0.0;
  std::uint64_t seed = 0;
  // Hidden scores for queries absent from the explicit table are drawn
  // uniformly from [-hidden_spread, hidden_spread].
  double hidden_spread = 2.0;
  std::uint64_t hidden_seed = 0;
};

// Noisy oracle with known ground truth: for candidates with hidden scores
// e_a, e_b it answers -1 with probability (1 + erf((e_a - e_b) / s)) / 2.
class SyntheticJudge : public Judge {
 public:
  SyntheticJudge(std::string id, SyntheticJudgeOptions options,
                 std::map<std::string, std::vector<double>> hidden = {});

  // Hidden scores used for `query_id` with k candidates.
  std::vector<double> HiddenScores(const std::string& query_id, std::size_t k) const;
  const SyntheticJudgeOptions& options() const { return options_; }

 protected:
  double DoScore(const JudgeRequest& request) const override;

 private:
  SyntheticJudgeOptions options_;
  std::map<std::string, std::vector<double>> hidden_;
};

// Single draw from the synthetic noise model for a score gap `diff`.
double SyntheticVerdict(double diff, double noise_scale, double band,
                        std::uint64_t seed);

// System prompt sent to chat-completion judges unless overridden.
extern const char* const kPairwiseSystemPrompt;

struct HttpJudgeOptions {
  // Full endpoint, e.g. "https://api.example.com/v1/chat/completions".
  std::string url;
  std::string model;
  // Environment variable holding the bearer token; empty disables auth.
  std::string api_key_env;
  std::string system_prompt = kPairwiseSystemPrompt;
  double temperature = 0.0;
  double timeout_s = 60.0;
  int max_retries = 3;
  double backoff_s = 1.0;
  int max_tokens = 0;  // 0 omits the field
};

class HttpJudge : public Judge {
 public:
  HttpJudge(std::string id, HttpJudgeOptions options);

  const HttpJudgeOptions& options() const { return options_; }
  // Request body for `request`; exposed for tests.
  nlohmann::json BuildBody(const JudgeRequest& request) const;

 protected:
  double DoScore(const JudgeRequest& request) const override;

 private:
  HttpJudgeOptions options_;
};

// Last signed decimal in `text`; must lie in [-1, 1].
double ParseJudgeScore(std::string_view text);

// {"kind": "replay" | "synthetic" | "http", "id": ..., kind-specific params}.
// Relative paths resolve against `base_dir`.
struct JudgeSpec {
  std::string kind;
  nlohmann::json params;
};

JudgeSpec JudgeSpecFromJson(const nlohmann::json& j);
std::unique_ptr<Judge> MakeJudge(const JudgeSpec& spec,
                                 const std::filesystem::path& base_dir = {});

struct JudgeVerdict {
  double raw = 0.0;
  int clamped = 0;
  std::string judge_id;
  bool swapped = false;
};

struct EnsembleScore {
  double mean_raw = 0.0;
  double unit = 0.5;
  std::size_t samples = 0;
  double sem = 0.0;
  std::vector<JudgeVerdict> verdicts;
  std::vector<std::string> warnings;
};

// Nearest of {-1, 0, 1}; |raw| = 0.5 rounds to 0.
int ClampVerdict(double raw);

// (1 - mean_raw) / 2: the probability that d_i beats d_j.
double MapToUnit(double mean_raw);

// Sample standard error of the mean (n - 1 denominator); 0 for fewer than
// two samples.
double StandardError(std::span<const double> samples);

// The pair under judgment, in canonical orientation.
struct PairContext {
  const Query* query = nullptr;
  const Document* doc_i = nullptr;
  const Document* doc_j = nullptr;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t candidate_count = 0;
};

// Presents the pair in a seed-chosen order and reports the verdict for
// (d_i, d_j). `force_swap` pins the order, for testing.
JudgeVerdict DebiasedJudgment(const Judge& judge, const PairContext& pair,
                              std::uint64_t seed,
                              std::optional<bool> force_swap = std::nullopt);

struct EnsembleOptions {
  // Extra attempts per judge after a failure, before it is skipped.
  int retries = 1;
};

// One debiased verdict per judge, averaged.
EnsembleScore ScoreWithEnsemble(std::span<const Judge* const> judges,
                                const PairContext& pair, std::uint64_t seed,
                                const EnsembleOptions& options = {});

struct SemOptions {
  double sem_target = 0.1;
  std::size_t min_samples = 3;
  std::size_t max_samples = 1000;
  // Consecutive failed draws tolerated before the pool counts as unavailable.
  std::size_t max_consecutive_failures = 10;
};

// Draws judges from `pool` with replacement until the standard error of the
// clamped verdicts reaches the target.
EnsembleScore SampleUntilSem(std::span<const Judge* const> pool,
                             const PairContext& pair, std::uint64_t seed,
                             const SemOptions& options = {});

}  // namespace zelo

#endif  // ZELO_ENSEMBLE_HPP_
