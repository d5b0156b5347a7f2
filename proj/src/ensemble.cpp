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

#include "zelo/ensemble.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <regex>

#include "zelo/error.hpp"
#include "zelo/io.hpp"
#include "zelo/seed.hpp"

namespace zelo {

using nlohmann::json;

double Judge::Score(const JudgeRequest& request) const {
  calls_.fetch_add(1, std::memory_order_relaxed);
  try {
    const double raw = DoScore(request);
    if (!std::isfinite(raw) || raw < -1.0 || raw > 1.0) {
      throw MalformedJudgeOutput("judge " + id_ + " returned out-of-range score " +
                                 std::to_string(raw));
    }
    return raw;
  } catch (...) {
    failures_.fetch_add(1, std::memory_order_relaxed);
    throw;
  }
}

JudgeCounters Judge::counters() const {
  return {calls_.load(), failures_.load(), retries_.load()};
}

ReplayJudge::ReplayJudge(std::string id, std::map<Key, double> table)
    : Judge(std::move(id)), table_(std::move(table)) {
  for (const auto& [key, raw] : table_) {
    if (!(std::abs(raw) <= 1.0)) {
      throw InvalidArgument("replay score outside [-1, 1]: " + std::to_string(raw));
    }
  }
}

std::unique_ptr<ReplayJudge> ReplayJudge::FromFile(std::string id,
                                                   const std::filesystem::path& path) {
  std::map<Key, double> table;
  for (const auto& row : io::ReadJsonl(path)) {
    Key key{io::RequireString(row, "query_id"), io::RequireIndex(row, "i"),
            io::RequireIndex(row, "j")};
    table[key] = io::RequireNumber(row, "raw");
  }
  return std::make_unique<ReplayJudge>(std::move(id), std::move(table));
}

double ReplayJudge::DoScore(const JudgeRequest& request) const {
  const auto& qid = request.query->id;
  if (auto it = table_.find({qid, request.index_a, request.index_b}); it != table_.end()) {
    return it->second;
  }
  if (auto it = table_.find({qid, request.index_b, request.index_a}); it != table_.end()) {
    return -it->second;
  }
  throw JudgeTransportError("replay judge " + id() + " has no judgment for (" + qid +
                            ", " + std::to_string(request.index_a) + ", " +
                            std::to_string(request.index_b) + ")");
}

double SyntheticVerdict(double diff, double noise_scale, double band,
                        std::uint64_t seed) {
  // latent = diff / s + N(0, 1/2) exceeds 0 with probability
  // Phi(sqrt(2) diff / s) = (1 + erf(diff / s)) / 2.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(0.5));
  const double latent = diff / std::max(noise_scale, 1e-12) + noise(rng);
  if (latent > band) return -1.0;
  if (latent < -band) return 1.0;
  return 0.0;
}

SyntheticJudge::SyntheticJudge(std::string id, SyntheticJudgeOptions options,
                               std::map<std::string, std::vector<double>> hidden)
    : Judge(std::move(id)), options_(options), hidden_(std::move(hidden)) {
  if (!(options_.noise_scale >= 0.0) || !(options_.indifference_band >= 0.0) ||
      !(options_.hidden_spread >= 0.0)) {
    throw InvalidArgument("synthetic judge parameters must be nonnegative");
  }
}

std::vector<double> SyntheticJudge::HiddenScores(const std::string& query_id,
                                                 std::size_t k) const {
  if (auto it = hidden_.find(query_id); it != hidden_.end()) {
    if (it->second.size() < k) {
      throw InvalidArgument("hidden scores for " + query_id + " cover " +
                            std::to_string(it->second.size()) + " of " +
                            std::to_string(k) + " candidates");
    }
    return it->second;
  }
  std::mt19937_64 rng(DeriveSeed({options_.hidden_seed, HashString(query_id)}));
  std::uniform_real_distribution<double> u(-options_.hidden_spread, options_.hidden_spread);
  std::vector<double> scores(k);
  for (double& s : scores) s = u(rng);
  return scores;
}

double SyntheticJudge::DoScore(const JudgeRequest& request) const {
  const std::size_t k = std::max({request.candidate_count, request.index_a + 1,
                                  request.index_b + 1});
  const auto hidden = HiddenScores(request.query->id, k);
  return SyntheticVerdict(hidden[request.index_a] - hidden[request.index_b],
                          options_.noise_scale, options_.indifference_band,
                          DeriveSeed({options_.seed, request.seed}));
}

double ParseJudgeScore(std::string_view text) {
  static const std::regex kNumber(R"([-+]?(?:\d+(?:\.\d*)?|\.\d+))");
  const std::string s(text);
  std::string last;
  for (std::sregex_iterator it(s.begin(), s.end(), kNumber), end; it != end; ++it) {
    last = it->str();
  }
  if (last.empty()) throw MalformedJudgeOutput("no score in judge output");
  const double v = std::stod(last);
  if (!(std::abs(v) <= 1.0)) {
    throw MalformedJudgeOutput("judge score " + last + " outside [-1, 1]");
  }
  return v;
}

JudgeSpec JudgeSpecFromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("judge spec must be an object");
  JudgeSpec spec{j.value("kind", ""), j};
  if (spec.kind != "replay" && spec.kind != "synthetic" && spec.kind != "http") {
    throw ConfigError("unknown judge kind '" + spec.kind + "'");
  }
  return spec;
}

namespace {

std::filesystem::path Resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

template <typename T>
T Param(const json& params, const char* name, T fallback) {
  auto it = params.find(name);
  if (it == params.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("judge parameter '") + name + "' has the wrong type");
  }
}

}  // namespace

std::unique_ptr<Judge> MakeJudge(const JudgeSpec& spec,
                                 const std::filesystem::path& base_dir) {
  const json& p = spec.params;
  const std::string id = Param<std::string>(p, "id", spec.kind);
  if (spec.kind == "replay") {
    const auto path = Param<std::string>(p, "path", "");
    if (path.empty()) throw ConfigError("replay judge needs 'path'");
    return ReplayJudge::FromFile(id, Resolve(base_dir, path));
  }
  if (spec.kind == "synthetic") {
    SyntheticJudgeOptions o;
    o.noise_scale = Param<double>(p, "noise_scale", o.noise_scale);
    o.indifference_band = Param<double>(p, "indifference_band", o.indifference_band);
    o.seed = Param<std::uint64_t>(p, "seed", o.seed);
    o.hidden_spread = Param<double>(p, "hidden_spread", o.hidden_spread);
    o.hidden_seed = Param<std::uint64_t>(p, "hidden_seed", o.hidden_seed);
    std::map<std::string, std::vector<double>> hidden;
    // Optional JSONL of {"query_id", "elos": [...]}.
    if (const auto path = Param<std::string>(p, "hidden_path", ""); !path.empty()) {
      for (const auto& row : io::ReadJsonl(Resolve(base_dir, path))) {
        hidden[io::RequireString(row, "query_id")] = row.at("elos").get<std::vector<double>>();
      }
    }
    return std::make_unique<SyntheticJudge>(id, o, std::move(hidden));
  }
  if (spec.kind == "http") {
    HttpJudgeOptions o;
    o.url = Param<std::string>(p, "url", "");
    o.model = Param<std::string>(p, "model", "");
    if (o.url.empty() || o.model.empty()) throw ConfigError("http judge needs 'url' and 'model'");
    o.api_key_env = Param<std::string>(p, "api_key_env", o.api_key_env);
    o.temperature = Param<double>(p, "temperature", o.temperature);
    o.timeout_s = Param<double>(p, "timeout_s", o.timeout_s);
    o.max_retries = Param<int>(p, "max_retries", o.max_retries);
    o.backoff_s = Param<double>(p, "backoff_s", o.backoff_s);
    o.max_tokens = Param<int>(p, "max_tokens", o.max_tokens);
    if (const auto path = Param<std::string>(p, "prompt_path", ""); !path.empty()) {
      std::ifstream in(Resolve(base_dir, path));
      if (!in) throw IoError("cannot open prompt " + path);
      o.system_prompt.assign(std::istreambuf_iterator<char>(in), {});
    } else {
      o.system_prompt = Param<std::string>(p, "system_prompt", o.system_prompt);
    }
    if (o.max_retries < 0) throw ConfigError("max_retries must be >= 0");
    return std::make_unique<HttpJudge>(id, o);
  }
  throw ConfigError("unknown judge kind '" + spec.kind + "'");
}

int ClampVerdict(double raw) {
  if (!(std::abs(raw) <= 1.0)) {
    throw InvalidArgument("raw score outside [-1, 1]: " + std::to_string(raw));
  }
  if (raw > 0.5) return 1;
  if (raw < -0.5) return -1;
  return 0;
}

double MapToUnit(double mean_raw) { return (1.0 - mean_raw) / 2.0; }

double StandardError(std::span<const double> samples) {
  const std::size_t m = samples.size();
  if (m < 2) return 0.0;
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  return std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m));
}

namespace {

void CheckPair(const PairContext& pair) {
  if (!pair.query || !pair.doc_i || !pair.doc_j) {
    throw InvalidArgument("pair context is incomplete");
  }
  if (pair.i == pair.j || pair.doc_i->id == pair.doc_j->id) {
    throw InvalidArgument("cannot judge document " + pair.doc_i->id + " against itself");
  }
}

EnsembleScore Summarize(std::vector<JudgeVerdict> verdicts,
                        std::vector<std::string> warnings) {
  EnsembleScore out;
  std::vector<double> values;
  for (const auto& v : verdicts) values.push_back(v.clamped);
  double sum = 0.0;
  for (double v : values) sum += v;
  out.samples = values.size();
  out.mean_raw = values.empty() ? 0.0 : sum / static_cast<double>(values.size());
  out.unit = MapToUnit(out.mean_raw);
  out.sem = StandardError(values);
  out.verdicts = std::move(verdicts);
  out.warnings = std::move(warnings);
  return out;
}

}  // namespace

JudgeVerdict DebiasedJudgment(const Judge& judge, const PairContext& pair,
                              std::uint64_t seed, std::optional<bool> force_swap) {
  CheckPair(pair);
  std::mt19937_64 rng(seed);
  const bool swapped =
      force_swap.value_or(std::bernoulli_distribution(0.5)(rng));
  JudgeRequest req;
  req.query = pair.query;
  req.candidate_count = pair.candidate_count;
  req.seed = DeriveSeed({seed, 1});
  if (swapped) {
    req.doc_a = pair.doc_j;
    req.doc_b = pair.doc_i;
    req.index_a = pair.j;
    req.index_b = pair.i;
  } else {
    req.doc_a = pair.doc_i;
    req.doc_b = pair.doc_j;
    req.index_a = pair.i;
    req.index_b = pair.j;
  }
  const double presented = judge.Score(req);
  JudgeVerdict v;
  v.raw = swapped ? -presented : presented;
  v.clamped = ClampVerdict(v.raw);
  v.judge_id = judge.id();
  v.swapped = swapped;
  return v;
}

EnsembleScore ScoreWithEnsemble(std::span<const Judge* const> judges,
                                const PairContext& pair, std::uint64_t seed,
                                const EnsembleOptions& options) {
  if (judges.empty()) throw InvalidArgument("ensemble needs at least one judge");
  CheckPair(pair);
  std::vector<JudgeVerdict> verdicts;
  std::vector<std::string> warnings;
  for (std::size_t p = 0; p < judges.size(); ++p) {
    std::string last_error;
    bool ok = false;
    for (int attempt = 0; attempt <= options.retries && !ok; ++attempt) {
      try {
        verdicts.push_back(DebiasedJudgment(
            *judges[p], pair, DeriveSeed({seed, p, static_cast<std::uint64_t>(attempt)})));
        ok = true;
      } catch (const JudgeTransportError& e) {
        last_error = e.what();
      } catch (const MalformedJudgeOutput& e) {
        last_error = e.what();
      }
    }
    if (!ok) warnings.push_back("judge " + judges[p]->id() + " skipped: " + last_error);
  }
  const std::size_t quorum = (judges.size() + 1) / 2;
  if (verdicts.empty()) {
    throw EnsembleFailure("all judges failed for (" + pair.query->id + ", " +
                          std::to_string(pair.i) + ", " + std::to_string(pair.j) +
                          "): " + warnings.back());
  }
  if (verdicts.size() < quorum) {
    throw EnsembleFailure(std::to_string(verdicts.size()) + " of " +
                          std::to_string(judges.size()) + " judges answered for (" +
                          pair.query->id + ", " + std::to_string(pair.i) + ", " +
                          std::to_string(pair.j) + "); need " + std::to_string(quorum));
  }
  return Summarize(std::move(verdicts), std::move(warnings));
}

EnsembleScore SampleUntilSem(std::span<const Judge* const> pool,
                             const PairContext& pair, std::uint64_t seed,
                             const SemOptions& options) {
  if (pool.empty()) throw EnsembleFailure("judge pool is empty");
  if (options.min_samples < 2 || options.max_samples < options.min_samples) {
    throw InvalidArgument("need max_samples >= min_samples >= 2");
  }
  if (!(options.sem_target >= 0.0)) throw InvalidArgument("sem_target must be >= 0");
  CheckPair(pair);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<JudgeVerdict> verdicts;
  std::vector<double> values;
  std::vector<std::string> warnings;
  std::size_t consecutive_failures = 0;
  for (std::uint64_t draw = 0; verdicts.size() < options.max_samples; ++draw) {
    const Judge& judge = *pool[pick(rng)];
    try {
      verdicts.push_back(DebiasedJudgment(judge, pair, DeriveSeed({seed, draw})));
      values.push_back(verdicts.back().clamped);
      consecutive_failures = 0;
    } catch (const JudgeTransportError& e) {
      warnings.push_back(e.what());
      ++consecutive_failures;
    } catch (const MalformedJudgeOutput& e) {
      warnings.push_back(e.what());
      ++consecutive_failures;
    }
    if (consecutive_failures > options.max_consecutive_failures) {
      throw EnsembleFailure("judge pool unavailable after " +
                            std::to_string(consecutive_failures) + " failed draws");
    }
    if (values.size() >= options.min_samples &&
        StandardError(values) <= options.sem_target) {
      break;
    }
  }
  return Summarize(std::move(verdicts), std::move(warnings));
}

}  // namespace zelo
