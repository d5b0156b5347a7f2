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

#include "zelo/eval.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "zelo/ensemble.hpp"
#include "zelo/error.hpp"
#include "zelo/io.hpp"
#include "zelo/kernels.hpp"
#include "zelo/seed.hpp"

namespace zelo {

using nlohmann::json;

void RankedList::Validate() const {
  std::set<std::string> seen;
  for (const auto& id : doc_ids) {
    if (!seen.insert(id).second) {
      throw InvalidArgument("document " + id + " listed twice for " + query_id);
    }
  }
  for (const auto& [id, rel] : relevance) {
    if (!(rel >= 0.0) || !std::isfinite(rel)) {
      throw InvalidArgument("relevance of " + id + " must be a nonnegative number");
    }
  }
}

double RankedList::Relevance(const std::string& doc_id) const {
  auto it = relevance.find(doc_id);
  return it == relevance.end() ? 0.0 : it->second;
}

namespace {

double Dcg(const std::vector<double>& rels, std::size_t k) {
  double dcg = 0.0;
  for (std::size_t pos = 1; pos <= std::min(k, rels.size()); ++pos) {
    dcg += (std::pow(2.0, rels[pos - 1]) - 1.0) / std::log2(static_cast<double>(pos) + 1.0);
  }
  return dcg;
}

}  // namespace

MetricValue NdcgAtK(const RankedList& rl, std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be >= 1");
  rl.Validate();
  std::vector<double> listed;
  for (const auto& id : rl.doc_ids) listed.push_back(rl.Relevance(id));
  std::vector<double> ideal;
  for (const auto& [id, rel] : rl.relevance) ideal.push_back(rel);
  // Listed documents without a judgment still occupy slots in the ideal.
  for (const auto& id : rl.doc_ids) {
    if (!rl.relevance.count(id)) ideal.push_back(0.0);
  }
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = Dcg(ideal, k);
  if (idcg == 0.0) return {0.0, true};
  return {Dcg(listed, k) / idcg, false};
}

MetricValue RecallAtK(const RankedList& rl, std::size_t k, double relevant_threshold) {
  if (k == 0) throw InvalidArgument("k must be >= 1");
  rl.Validate();
  std::size_t relevant = 0;
  for (const auto& [id, rel] : rl.relevance) relevant += rel >= relevant_threshold;
  if (relevant == 0) return {0.0, true};
  std::size_t hits = 0;
  for (std::size_t pos = 0; pos < std::min(k, rl.doc_ids.size()); ++pos) {
    hits += rl.Relevance(rl.doc_ids[pos]) >= relevant_threshold &&
            rl.relevance.count(rl.doc_ids[pos]);
  }
  return {static_cast<double>(hits) / static_cast<double>(relevant), false};
}

namespace {

void CheckLengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("length mismatch: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
}

double MeanOf(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

double EloMse(std::span<const double> a, std::span<const double> b) {
  CheckLengths(a, b);
  if (a.empty()) throw InvalidArgument("empty score vectors");
  const double ma = MeanOf(a), mb = MeanOf(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - ma) - (b[i] - mb);
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double PrefCrossEntropy(std::span<const double> a, std::span<const double> b, ModelKind model) {
  CheckLengths(a, b);
  const std::size_t n = a.size();
  if (n < 2) throw InvalidArgument("need at least two candidates");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double p = LinkProbability(model, a[i] - a[j]);
      // -log q and -log(1 - q) without forming q.
      total += p * kernels::NegLogLink(model, b[i] - b[j]) +
               (1.0 - p) * kernels::NegLogLink(model, b[j] - b[i]);
    }
  }
  return total / static_cast<double>(n * (n - 1));
}

double PrefEntropy(std::span<const double> a, ModelKind model) {
  return PrefCrossEntropy(a, a, model);
}

double ExcessCrossEntropy(std::span<const double> a, std::span<const double> b,
                          ModelKind model) {
  CheckLengths(a, b);
  const std::size_t n = a.size();
  if (n < 2) throw InvalidArgument("need at least two candidates");
  // Sum of per-pair KL terms, each nonnegative, rather than a difference of
  // two large cross-entropies.
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double p = LinkProbability(model, a[i] - a[j]);
      const double kl = p * (kernels::NegLogLink(model, b[i] - b[j]) -
                             kernels::NegLogLink(model, a[i] - a[j])) +
                        (1.0 - p) * (kernels::NegLogLink(model, b[j] - b[i]) -
                                     kernels::NegLogLink(model, a[j] - a[i]));
      total += kl;
    }
  }
  return total / static_cast<double>(n * (n - 1));
}

void StudyConfig::Validate() const {
  if (n < 2) throw ConfigError("study needs n >= 2");
  if (trials < 1) throw ConfigError("study needs at least one trial");
  if (strategies.empty()) throw ConfigError("study needs at least one strategy");
  if (budgets.empty()) throw ConfigError("study needs at least one budget");
  const std::size_t total = n * (n - 1) / 2;
  for (auto b : budgets) {
    if (b < 1 || b > total) {
      throw ConfigError("budget " + std::to_string(b) + " outside [1, " +
                        std::to_string(total) + "]");
    }
  }
  if (judges_per_pair < 1) throw ConfigError("judges_per_pair must be >= 1");
  if (!(noise_scale >= 0.0) || !(hidden_spread >= 0.0)) {
    throw ConfigError("noise_scale and hidden spread must be nonnegative");
  }
  try {
    fit.Validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

StudyConfig StudyConfigFromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("study config must be an object");
  StudyConfig c;
  try {
    c.n = j.value("n", c.n);
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j.at("strategies")) c.strategies.push_back(ParseStrategy(s.get<std::string>()));
    }
    c.budgets = j.value("budgets", c.budgets);
    c.trials = j.value("trials", c.trials);
    if (auto h = j.find("hidden"); h != j.end()) {
      const auto dist = h->value("distribution", std::string("uniform"));
      if (dist == "uniform") {
        c.hidden = HiddenDistribution::kUniform;
      } else if (dist == "normal") {
        c.hidden = HiddenDistribution::kNormal;
      } else {
        throw ConfigError("unknown hidden distribution '" + dist + "'");
      }
      c.hidden_spread = h->value("spread", c.hidden_spread);
    }
    c.judges_per_pair = j.value("judges_per_pair", c.judges_per_pair);
    c.noise_scale = j.value("noise_scale", c.noise_scale);
    c.model = ParseModel(j.value("model", std::string(ModelName(c.model))));
    if (auto f = j.find("fit"); f != j.end()) c.fit = io::FitOptionsFromJson(*f, c.fit);
    const auto policy = j.value("disconnected", std::string("exclude"));
    if (policy == "exclude") {
      c.disconnected = DisconnectedPolicy::kExclude;
    } else if (policy == "component-centered") {
      c.disconnected = DisconnectedPolicy::kComponentCentered;
    } else {
      throw ConfigError("unknown disconnected policy '" + policy + "'");
    }
    c.greedy_refit_iters = j.value("greedy_refit_iters", c.greedy_refit_iters);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("study config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  c.Validate();
  return c;
}

namespace {

ComparisonGraph PrefixGraph(std::size_t n, std::vector<Edge> edges, std::size_t budget) {
  if (edges.size() > budget) edges.resize(budget);
  return ComparisonGraph(n, std::move(edges));
}

}  // namespace

ComparisonGraph StudyGraph(GraphStrategy strategy, std::size_t n, std::size_t budget,
                           std::uint64_t seed, const PairOracle& oracle, ModelKind model,
                           std::size_t greedy_refit_iters) {
  const std::size_t total = n * (n - 1) / 2;
  if (budget >= total) {
    std::vector<Edge> all;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) all.emplace_back(i, j);
    }
    return ComparisonGraph(n, std::move(all));
  }
  switch (strategy) {
    case GraphStrategy::kRandom:
      return SampleRandomPairs(n, budget, seed);
    case GraphStrategy::kCycles: {
      const std::size_t k = (2 * budget / n) & ~std::size_t{1};
      if (k >= 2) return SampleCycleUnion(n, k, seed);
      // Fewer edges than one cycle: a prefix of a random Hamiltonian path.
      const auto order = RandomCycleOrder(n, seed);
      std::vector<Edge> path;
      for (std::size_t t = 0; t + 1 < n; ++t) path.emplace_back(order[t], order[t + 1]);
      return PrefixGraph(n, std::move(path), budget);
    }
    case GraphStrategy::kBipartite: {
      std::size_t left = 0;
      for (std::size_t l = 1; l <= n / 2; ++l) {
        if (l * (n - l) <= budget) left = l;
      }
      if (left > 0) return SampleBipartite(n, left);
      std::vector<Edge> star;
      for (std::size_t v = 1; v < n; ++v) star.emplace_back(0, v);
      return PrefixGraph(n, std::move(star), budget);
    }
    case GraphStrategy::kGreedy: {
      GreedyOptions o;
      o.refit_iters = greedy_refit_iters;
      return SampleEntropyGreedy(n, budget, oracle, model, seed, o).graph;
    }
  }
  throw InvalidArgument("unknown strategy");
}

namespace {

struct Trial {
  std::vector<double> dense_units;  // row-major n x n, P(i beats j)
  std::vector<double> actual;       // dense fit
};

Trial MakeTrial(const StudyConfig& cfg, std::uint64_t trial_seed) {
  const std::size_t n = cfg.n;
  std::mt19937_64 rng(DeriveSeed({trial_seed, 0}));
  std::vector<double> hidden(n);
  if (cfg.hidden == HiddenDistribution::kUniform) {
    std::uniform_real_distribution<double> u(-cfg.hidden_spread, cfg.hidden_spread);
    for (double& h : hidden) h = u(rng);
  } else {
    std::normal_distribution<double> g(0.0, cfg.hidden_spread);
    for (double& h : hidden) h = g(rng);
  }
  Trial t;
  t.dense_units.assign(n * n, 0.5);
  std::vector<PreferenceRecord> records;
  records.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t p = 0; p < cfg.judges_per_pair; ++p) {
        sum += SyntheticVerdict(hidden[i] - hidden[j], cfg.noise_scale, 0.0,
                                DeriveSeed({trial_seed, 1, i, j, p}));
      }
      const double unit = MapToUnit(sum / static_cast<double>(cfg.judges_per_pair));
      t.dense_units[i * n + j] = unit;
      t.dense_units[j * n + i] = 1.0 - unit;
      records.push_back({"", i, j, unit, 1.0});
    }
  }
  const auto fit = FitElos(BuildPreferenceMatrix(records, n), cfg.model, cfg.fit);
  t.actual.assign(fit.elos.scores().begin(), fit.elos.scores().end());
  return t;
}

struct CellResult {
  bool disconnected = false;
  bool included = false;
  double mse = 0.0;
  double xent = 0.0;
};

void MeanStd(const std::vector<double>& v, double& mean, double& sd) {
  mean = sd = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<StudyCell> ConvergenceStudy(const StudyConfig& cfg) {
  cfg.Validate();
  const std::size_t n = cfg.n;
  const std::size_t ns = cfg.strategies.size(), nb = cfg.budgets.size(), nt = cfg.trials;

  std::vector<Trial> trials(nt);
  std::vector<std::string> errors(nt);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < nt; ++t) {
    try {
      trials[t] = MakeTrial(cfg, DeriveSeed({cfg.seed, t}));
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error("study_failure", e);
  }

  const std::size_t cells = ns * nb * nt;
  std::vector<CellResult> results(cells);
  std::vector<std::string> cell_errors(cells);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t s = c / (nb * nt), b = (c / nt) % nb, t = c % nt;
    try {
      const Trial& trial = trials[t];
      const auto oracle = [&](std::size_t i, std::size_t j) { return trial.dense_units[i * n + j]; };
      const auto graph = StudyGraph(cfg.strategies[s], n, cfg.budgets[b],
                                    DeriveSeed({cfg.seed, t, 2, s, cfg.budgets[b]}), oracle,
                                    cfg.model, cfg.greedy_refit_iters);
      std::vector<PreferenceRecord> records;
      for (const auto& [i, j] : graph.edges()) records.push_back({"", i, j, oracle(i, j), 1.0});
      CellResult& r = results[c];
      r.disconnected = !ComputeGraphStats(graph).connected;
      if (r.disconnected && cfg.disconnected == DisconnectedPolicy::kExclude) continue;
      FitOptions fo = cfg.fit;
      fo.allow_disconnected = true;
      const auto fit = FitElos(BuildPreferenceMatrix(records, n), cfg.model, fo);
      r.mse = EloMse(trial.actual, fit.elos.scores());
      r.xent = ExcessCrossEntropy(trial.actual, fit.elos.scores(), cfg.model);
      if (!std::isfinite(r.mse) || !std::isfinite(r.xent)) {
        throw NonFinite("non-finite study metric");
      }
      // Gibbs: the excess is a sum of KL divergences.
      if (r.xent < -1e-9) throw Error("study_failure", "negative excess cross-entropy");
      r.included = true;
    } catch (const std::exception& e) {
      cell_errors[c] = e.what();
    }
  }
  for (const auto& e : cell_errors) {
    if (!e.empty()) throw Error("study_failure", e);
  }

  std::vector<StudyCell> out;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t b = 0; b < nb; ++b) {
      StudyCell cell;
      cell.strategy = cfg.strategies[s];
      cell.budget = cfg.budgets[b];
      std::vector<double> mses, xents;
      for (std::size_t t = 0; t < nt; ++t) {
        const auto& r = results[(s * nb + b) * nt + t];
        cell.failures += r.disconnected;
        if (!r.included) continue;
        mses.push_back(r.mse);
        xents.push_back(r.xent);
      }
      cell.trial_count = mses.size();
      MeanStd(mses, cell.mse_mean, cell.mse_std);
      MeanStd(xents, cell.xent_mean, cell.xent_std);
      out.push_back(cell);
    }
  }
  return out;
}

void WriteStudyCsv(std::ostream& out, const std::vector<StudyCell>& cells) {
  out << "strategy,budget,trial_count,failures,mse_mean,mse_std,xent_mean,xent_std\n";
  char buf[256];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%zu,%.10g,%.10g,%.10g,%.10g\n",
                  std::string(StrategyName(c.strategy)).c_str(), c.budget, c.trial_count,
                  c.failures, c.mse_mean, c.mse_std, c.xent_mean, c.xent_std);
    out << buf;
  }
}

}  // namespace zelo
