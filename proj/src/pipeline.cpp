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

#include "zelo/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "zelo/error.hpp"
#include "zelo/io.hpp"
#include "zelo/log.hpp"
#include "zelo/seed.hpp"

namespace zelo {

using nlohmann::json;

std::string_view SquashName(Squash squash) {
  return squash == Squash::kLogistic ? "logistic" : "minmax";
}

Squash ParseSquash(std::string_view name) {
  if (name == "logistic") return Squash::kLogistic;
  if (name == "minmax") return Squash::kMinMax;
  throw InvalidArgument("unknown squash '" + std::string(name) + "'");
}

void RunConfig::Validate() const {
  if (judges.empty()) throw ConfigError("config needs at least one judge");
  if (judge_retries < 0) throw ConfigError("judge_retries must be >= 0");
  if (strategy == GraphStrategy::kCycles && (cycles_k < 2 || cycles_k % 2 != 0)) {
    throw ConfigError("cycles k must be even and >= 2, got " + std::to_string(cycles_k));
  }
  if ((strategy == GraphStrategy::kRandom || strategy == GraphStrategy::kGreedy) &&
      budget == 0) {
    throw ConfigError("budget must be positive");
  }
  if (strategy == GraphStrategy::kBipartite && bipartite_left == 0) {
    throw ConfigError("bipartite left side must be nonempty");
  }
  if (max_candidates < 2) throw ConfigError("max_candidates must be >= 2");
  try {
    fit.Validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

namespace {

std::filesystem::path ResolvePath(const std::filesystem::path& base, const json& j,
                                  const char* field, bool required) {
  auto it = j.find(field);
  if (it == j.end()) {
    if (required) throw ConfigError(std::string("config is missing '") + field + "'");
    return {};
  }
  if (!it->is_string()) throw ConfigError(std::string("'") + field + "' must be a path");
  std::filesystem::path p(it->get<std::string>());
  return p.is_relative() ? base / p : p;
}

template <typename T>
T Get(const json& j, const char* field, T fallback) {
  auto it = j.find(field);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + field + "' has the wrong type");
  }
}

}  // namespace

RunConfig RunConfigFromJson(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg;
  cfg.queries = ResolvePath(base_dir, j, "queries", true);
  cfg.documents = ResolvePath(base_dir, j, "documents", true);
  cfg.candidates = ResolvePath(base_dir, j, "candidates", true);
  cfg.output_dir = ResolvePath(base_dir, j, "output_dir", false);
  if (cfg.output_dir.empty()) cfg.output_dir = base_dir / "out";

  try {
    if (auto g = j.find("graph"); g != j.end()) {
      cfg.strategy = ParseStrategy(Get<std::string>(*g, "strategy", "cycles"));
      cfg.cycles_k = Get<std::size_t>(*g, "k", cfg.cycles_k);
      cfg.budget = Get<std::size_t>(*g, "budget", cfg.budget);
      cfg.bipartite_left = Get<std::size_t>(*g, "left", cfg.bipartite_left);
    }
    cfg.model = ParseModel(Get<std::string>(j, "model", "thurstone"));
    cfg.squash = ParseSquash(Get<std::string>(j, "squash", "logistic"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  cfg.seed = Get<std::uint64_t>(j, "seed", cfg.seed);
  cfg.judge_retries = Get<int>(j, "judge_retries", cfg.judge_retries);
  cfg.max_candidates = Get<std::size_t>(j, "max_candidates", cfg.max_candidates);
  if (auto f = j.find("fit"); f != j.end()) cfg.fit = io::FitOptionsFromJson(*f, cfg.fit);
  auto judges = j.find("judges");
  if (judges == j.end() || !judges->is_array()) {
    throw ConfigError("config needs a 'judges' array");
  }
  for (const auto& spec : *judges) {
    JudgeSpec js = JudgeSpecFromJson(spec);
    // Resolve file parameters now so the panel does not depend on the cwd.
    for (const char* key : {"path", "hidden_path", "prompt_path"}) {
      if (js.params.contains(key)) {
        js.params[key] = ResolvePath(base_dir, js.params, key, false).string();
      }
    }
    cfg.judges.push_back(std::move(js));
  }
  cfg.Validate();
  return cfg;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("config not found: " + path.string());
  const auto j = io::ReadJson(path);
  return RunConfigFromJson(j, path.parent_path().empty() ? "." : path.parent_path());
}

JudgePanel::JudgePanel(const std::vector<JudgeSpec>& specs,
                       const std::filesystem::path& base_dir) {
  for (const auto& s : specs) owned_.push_back(MakeJudge(s, base_dir));
  for (const auto& j : owned_) view_.push_back(j.get());
}

JudgePanel::JudgePanel(std::vector<std::unique_ptr<Judge>> judges)
    : owned_(std::move(judges)) {
  for (const auto& j : owned_) view_.push_back(j.get());
}

std::uint64_t JudgePanel::TotalCalls() const {
  std::uint64_t total = 0;
  for (const auto& j : owned_) total += j->counters().calls;
  return total;
}

std::uint64_t QuerySeed(std::uint64_t run_seed, std::string_view query_id) {
  return DeriveSeed({run_seed, HashString(query_id)});
}

namespace {

ComparisonGraph CompleteGraph(std::size_t k) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) edges.emplace_back(i, j);
  }
  return ComparisonGraph(k, std::move(edges));
}

}  // namespace

ComparisonGraph SelectPairs(const RunConfig& cfg, std::size_t k, std::uint64_t seed) {
  const std::size_t total = k * (k - 1) / 2;
  switch (cfg.strategy) {
    case GraphStrategy::kCycles:
      // k/2 Hamiltonian cycles need more than k vertices; below that the
      // complete graph is no larger than the cycle budget.
      if (k <= cfg.cycles_k + 1) return CompleteGraph(k);
      return SampleCycleUnion(k, cfg.cycles_k, seed);
    case GraphStrategy::kRandom:
      return SampleRandomPairs(k, std::min(cfg.budget, total), seed);
    case GraphStrategy::kBipartite:
      return SampleBipartite(k, std::min(cfg.bipartite_left, k - 1));
    case GraphStrategy::kGreedy:
      throw InvalidArgument("greedy pair selection depends on judgments");
  }
  throw InvalidArgument("unknown strategy");
}

AnnotationResult AnnotateQuery(const ResolvedQuery& rq, const JudgePanel& judges,
                               const RunConfig& cfg, std::uint64_t query_seed) {
  const std::size_t k = rq.candidates.k();
  if (k < 2) throw InvalidArgument("query " + rq.query.id + " has fewer than 2 candidates");
  if (rq.docs.size() != k) throw InvalidArgument("unresolved documents for " + rq.query.id);
  EnsembleOptions eopts;
  eopts.retries = cfg.judge_retries;
  const std::uint64_t graph_seed = DeriveSeed({query_seed, 0});
  auto pair_seed = [&](std::size_t i, std::size_t j) {
    return DeriveSeed({query_seed, 1, i, j});
  };
  auto context = [&](std::size_t i, std::size_t j) {
    return PairContext{&rq.query, &rq.docs[i], &rq.docs[j], i, j, k};
  };

  if (cfg.strategy == GraphStrategy::kGreedy) {
    std::vector<std::string> warnings;
    const auto oracle = [&](std::size_t i, std::size_t j) {
      auto s = ScoreWithEnsemble(judges.view(), context(i, j), pair_seed(i, j), eopts);
      for (auto& w : s.warnings) warnings.push_back(std::move(w));
      return s.unit;
    };
    const std::size_t budget = std::min(cfg.budget, k * (k - 1) / 2);
    auto greedy = SampleEntropyGreedy(k, budget, oracle, cfg.model, graph_seed);
    for (auto& r : greedy.records) r.query_id = rq.query.id;
    return {std::move(greedy.graph), std::move(greedy.records), std::move(warnings)};
  }

  ComparisonGraph graph = SelectPairs(cfg, k, graph_seed);
  const auto edges = graph.edges();
  const std::size_t m = edges.size();
  std::vector<EnsembleScore> scores(m);
  std::vector<std::string> errors(m);
  // Edges are independent; each has its own seed, so the schedule does not
  // affect the result.
#pragma omp parallel for schedule(dynamic)
  for (std::size_t e = 0; e < m; ++e) {
    const auto [i, j] = edges[e];
    try {
      scores[e] = ScoreWithEnsemble(judges.view(), context(i, j), pair_seed(i, j), eopts);
    } catch (const std::exception& ex) {
      errors[e] = ex.what();
    }
  }
  AnnotationResult out{std::move(graph), {}, {}};
  for (std::size_t e = 0; e < m; ++e) {
    if (!errors[e].empty()) throw EnsembleFailure(errors[e]);
    out.records.push_back({rq.query.id, edges[e].first, edges[e].second, scores[e].unit, 1.0});
    for (auto& w : scores[e].warnings) out.warnings.push_back(std::move(w));
  }
  return out;
}

FitReport ComputeZelo(std::span<const PreferenceRecord> records, std::size_t n,
                      ModelKind model, const FitOptions& options) {
  return FitElos(BuildPreferenceMatrix(records, n), model, options);
}

std::vector<std::size_t> RanksByScore(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> ranks(scores.size());
  for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = r + 1;
  return ranks;
}

std::vector<SftRecord> EmitSft(const CandidateSet& cs, const EloVector& elos, Squash squash) {
  if (elos.size() != cs.k()) {
    throw InvalidArgument("got " + std::to_string(elos.size()) + " scores for " +
                          std::to_string(cs.k()) + " candidates");
  }
  const auto e = elos.scores();
  const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
  const auto ranks = RanksByScore(e);
  std::vector<SftRecord> out(cs.k());
  for (std::size_t d = 0; d < cs.k(); ++d) {
    double target;
    if (squash == Squash::kLogistic) {
      target = 1.0 / (1.0 + std::exp(-e[d]));
    } else {
      target = *hi > *lo ? (e[d] - *lo) / (*hi - *lo) : 0.5;
    }
    out[ranks[d] - 1] = {cs.query_id, cs.doc_ids[d], e[d], target, ranks[d]};
  }
  return out;
}

std::optional<MinedPair> MineFailure(const CandidateSet& cs, std::span<const double> scores,
                                     std::string_view human_top, std::size_t threshold) {
  if (threshold < 1) throw InvalidArgument("threshold must be >= 1");
  if (scores.size() != cs.k()) {
    throw InvalidArgument("got " + std::to_string(scores.size()) + " scores for " +
                          std::to_string(cs.k()) + " candidates");
  }
  const auto human = cs.IndexOf(human_top);
  if (!human) {
    throw InvalidArgument("human-preferred document " + std::string(human_top) +
                          " is not a candidate of " + cs.query_id);
  }
  const auto ranks = RanksByScore(scores);
  const std::size_t r = ranks[*human];
  if (r <= threshold) return std::nullopt;
  const auto above = std::find(ranks.begin(), ranks.end(), r - 1) - ranks.begin();
  return MinedPair{cs.query_id, *human, static_cast<std::size_t>(above), r};
}

std::size_t ThresholdMap::For(const std::string& dataset) const {
  auto it = by_dataset.find(dataset);
  return it == by_dataset.end() ? fallback : it->second;
}

ThresholdMap ThresholdMap::FromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("threshold map must be an object");
  ThresholdMap m;
  auto read = [](const json& v, const std::string& name) {
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      throw ConfigError("threshold for '" + name + "' must be a positive integer");
    }
    return v.get<std::size_t>();
  };
  if (auto d = j.find("default"); d != j.end()) m.fallback = read(*d, "default");
  const json& table = j.contains("datasets") ? j.at("datasets") : j;
  for (const auto& [name, v] : table.items()) {
    if (name == "default" || name == "datasets") continue;
    m.by_dataset[name] = read(v, name);
  }
  return m;
}

json ToJson(const SftRecord& r) {
  return {{"query_id", r.query_id}, {"doc_id", r.doc_id}, {"elo", r.elo},
          {"target", r.target}, {"rank", r.rank}};
}

ResolvedQuery ResolveQuery(const CandidateSet& cs,
                           const std::unordered_map<std::string, Query>& queries,
                           const std::unordered_map<std::string, Document>& docs) {
  ResolvedQuery rq;
  auto q = queries.find(cs.query_id);
  if (q == queries.end()) throw InvalidArgument("unknown query " + cs.query_id);
  rq.query = q->second;
  rq.candidates = cs;
  for (const auto& id : cs.doc_ids) {
    auto d = docs.find(id);
    if (d == docs.end()) throw InvalidArgument("unknown document " + id);
    rq.docs.push_back(d->second);
  }
  return rq;
}

json RunDataset(const RunConfig& cfg) {
  const JudgePanel judges(cfg.judges);
  return RunDataset(cfg, judges);
}

json RunDataset(const RunConfig& cfg, const JudgePanel& judges) {
  cfg.Validate();
  const auto started = std::chrono::steady_clock::now();
  std::unordered_map<std::string, Query> queries;
  for (auto& q : io::ReadQueries(cfg.queries)) {
    const auto id = q.id;
    if (!queries.emplace(id, std::move(q)).second) throw ParseError("duplicate query id " + id);
  }
  std::unordered_map<std::string, Document> docs;
  for (auto& d : io::ReadDocuments(cfg.documents)) {
    const auto id = d.id;
    if (!docs.emplace(id, std::move(d)).second) throw ParseError("duplicate document id " + id);
  }
  const auto candidate_sets = io::ReadCandidateSets(cfg.candidates);

  std::vector<json> sft_rows, pair_rows, elo_rows, query_rows;
  std::set<std::string> seen;
  std::size_t ok = 0, failed = 0;
  for (const auto& cs : candidate_sets) {
    const std::uint64_t qseed = QuerySeed(cfg.seed, cs.query_id);
    json row = {{"query_id", cs.query_id}, {"seed", qseed}, {"k", cs.k()}};
    const auto calls_before = judges.TotalCalls();
    try {
      if (!seen.insert(cs.query_id).second) {
        throw InvalidArgument("query " + cs.query_id + " has more than one candidate set");
      }
      cs.Validate(cfg.max_candidates);
      const auto rq = ResolveQuery(cs, queries, docs);
      const auto ann = AnnotateQuery(rq, judges, cfg, qseed);
      const auto report = ComputeZelo(ann.records, cs.k(), cfg.model, cfg.fit);

      for (const auto& r : EmitSft(cs, report.elos, cfg.squash)) sft_rows.push_back(ToJson(r));
      for (const auto& r : ann.records) {
        pair_rows.push_back({{"query_id", r.query_id}, {"i", r.i}, {"j", r.j}, {"p", r.p},
                             {"source", "random-pair"}, {"doc_i", cs.doc_ids[r.i]},
                             {"doc_j", cs.doc_ids[r.j]}});
      }
      elo_rows.push_back(io::FitReportToJson(cs.query_id, report, cfg.model));
      row["status"] = "ok";
      row["edges"] = ann.graph.edge_count();
      row["converged"] = report.converged;
      row["iterations"] = report.iterations;
      row["final_grad_norm"] = report.final_grad_norm;
      row["warnings"] = ann.warnings;
      ++ok;
      log::Event(log::Level::kInfo, "query_done",
                 {{"query_id", cs.query_id}, {"edges", ann.graph.edge_count()},
                  {"converged", report.converged}});
    } catch (const Error& e) {
      row["status"] = "error";
      row["error_code"] = e.code();
      row["error"] = e.what();
      ++failed;
      log::Event(log::Level::kWarn, "query_failed",
                 {{"query_id", cs.query_id}, {"code", e.code()}, {"error", e.what()}});
    }
    row["judge_calls"] = judges.TotalCalls() - calls_before;
    query_rows.push_back(std::move(row));
  }

  json judge_rows = json::array();
  for (const Judge* j : judges.view()) {
    const auto c = j->counters();
    judge_rows.push_back({{"id", j->id()}, {"calls", c.calls}, {"failures", c.failures},
                          {"retries", c.retries}});
  }
  json manifest = {
      {"format_version", io::kFormatVersion},
      {"seed", cfg.seed},
      {"model", ModelName(cfg.model)},
      {"strategy", StrategyName(cfg.strategy)},
      {"squash", SquashName(cfg.squash)},
      {"queries", query_rows},
      {"judges", judge_rows},
      {"totals", {{"queries", candidate_sets.size()}, {"ok", ok}, {"failed", failed},
                  {"judgments", pair_rows.size()}, {"sft_records", sft_rows.size()}}},
      {"outputs", {"sft.jsonl", "pairs.jsonl", "elos.jsonl"}},
  };
  const auto& out = cfg.output_dir;
  io::WriteFileAtomic(out / "sft.jsonl", io::ToJsonl(sft_rows));
  io::WriteFileAtomic(out / "pairs.jsonl", io::ToJsonl(pair_rows));
  io::WriteFileAtomic(out / "elos.jsonl", io::ToJsonl(elo_rows));
  io::WriteFileAtomic(out / "manifest.json", manifest.dump(2) + "\n");
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  io::WriteFileAtomic(out / "timing.json", json{{"wall_time_s", wall}}.dump(2) + "\n");
  return manifest;
}

}  // namespace zelo
