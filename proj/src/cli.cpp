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

#include "zelo/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "zelo/error.hpp"
#include "zelo/eval.hpp"
#include "zelo/io.hpp"
#include "zelo/log.hpp"
#include "zelo/pipeline.hpp"
#include "zelo/seed.hpp"

#ifndef ZELO_VERSION
#define ZELO_VERSION "0.0.0"
#endif

namespace zelo::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Writes `contents` to `path`, or to `out` when no path was given.
void Emit(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    io::WriteFileAtomic(path, contents);
  }
}

// Flag combinations CLI11 cannot express; reported as usage errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> Keys(std::initializer_list<std::string_view> names) {
  return {names.begin(), names.end()};
}

// ---------------------------------------------------------------- sample-graph

struct SampleGraphArgs {
  std::string strategy;
  std::size_t n = 0;
  std::optional<std::size_t> budget, k, left;
  std::string matrix, model = "thurstone", out;
  std::uint64_t seed = 0;
};

int SampleGraph(const SampleGraphArgs& a, std::ostream& out) {
  const GraphStrategy strategy = ParseStrategy(a.strategy);
  auto need = [&](const std::optional<std::size_t>& v, const char* flag) {
    if (!v) throw UsageError(std::string(flag) + " is required for strategy " + a.strategy);
    return *v;
  };
  ComparisonGraph g(a.n, {});
  switch (strategy) {
    case GraphStrategy::kCycles:
      g = SampleCycleUnion(a.n, need(a.k, "--k"), a.seed);
      break;
    case GraphStrategy::kRandom:
      g = SampleRandomPairs(a.n, need(a.budget, "--budget"), a.seed);
      break;
    case GraphStrategy::kBipartite:
      g = SampleBipartite(a.n, need(a.left, "--left"));
      break;
    case GraphStrategy::kGreedy: {
      if (a.matrix.empty()) throw UsageError("--matrix is required for strategy greedy");
      const auto records = io::ReadPreferenceRecords(a.matrix);
      const auto w = BuildPreferenceMatrix(records, a.n);
      const PairOracle oracle = [&](std::size_t i, std::size_t j) {
        const auto e = w.Get(i, j);
        if (!e) {
          throw InvalidArgument("pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                ") missing from " + a.matrix);
        }
        return e->w;
      };
      g = SampleEntropyGreedy(a.n, need(a.budget, "--budget"), oracle, ParseModel(a.model),
                              a.seed)
              .graph;
      break;
    }
  }
  const auto stats = ComputeGraphStats(g);
  log::Event(log::Level::kInfo, "graph_sampled",
             {{"strategy", a.strategy}, {"edges", stats.edge_count},
              {"connected", stats.connected}});
  Emit(a.out, io::Dump(io::ToJson(g)) + "\n", out);
  return kExitOk;
}

// ------------------------------------------------------------------------- fit

struct FitArgs {
  std::string matrix, model = "thurstone", out, init;
  std::optional<std::size_t> n, max_iters;
  std::optional<double> grad_tol;
  bool allow_disconnected = false;
  std::uint64_t seed = 0;
};

int Fit(const FitArgs& a, std::ostream& out) {
  const ModelKind model = ParseModel(a.model);
  FitOptions opts;
  if (a.max_iters) opts.max_iters = *a.max_iters;
  if (a.grad_tol) opts.grad_tol = *a.grad_tol;
  if (!a.init.empty()) opts = io::FitOptionsFromJson({{"init", a.init}}, opts);
  opts.init_seed = a.seed;
  opts.allow_disconnected = a.allow_disconnected;

  std::map<std::string, std::vector<PreferenceRecord>> by_query;
  for (auto& r : io::ReadPreferenceRecords(a.matrix)) by_query[r.query_id].push_back(r);
  if (by_query.empty()) throw InvalidArgument(a.matrix + " holds no preference records");
  std::vector<json> rows;
  for (const auto& [qid, records] : by_query) {
    std::size_t n = 0;
    for (const auto& r : records) n = std::max({n, r.i + 1, r.j + 1});
    if (a.n) {
      if (*a.n < n) throw InvalidArgument("--n is smaller than the largest index in " + a.matrix);
      n = *a.n;
    }
    const auto report = ComputeZelo(records, n, model, opts);
    if (!report.converged) {
      log::Event(log::Level::kWarn, "fit_not_converged",
                 {{"query_id", qid}, {"grad_norm", report.final_grad_norm}});
    }
    rows.push_back(io::FitReportToJson(qid, report, model));
  }
  Emit(a.out, io::ToJsonl(rows), out);
  return kExitOk;
}

// ------------------------------------------------------- run config overrides

struct RunOverrides {
  std::string config, out_dir, strategy, model, squash;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget, k;
};

RunConfig LoadWithOverrides(const RunOverrides& o) {
  RunConfig cfg = LoadRunConfig(o.config);
  if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
  if (!o.strategy.empty()) cfg.strategy = ParseStrategy(o.strategy);
  if (!o.model.empty()) cfg.model = ParseModel(o.model);
  if (!o.squash.empty()) cfg.squash = ParseSquash(o.squash);
  if (o.seed) cfg.seed = *o.seed;
  if (o.budget) cfg.budget = *o.budget;
  if (o.k) cfg.cycles_k = *o.k;
  cfg.Validate();
  return cfg;
}

struct Corpus {
  std::unordered_map<std::string, Query> queries;
  std::unordered_map<std::string, Document> docs;
};

Corpus LoadCorpus(const RunConfig& cfg) {
  Corpus c;
  for (auto& q : io::ReadQueries(cfg.queries)) {
    const auto id = q.id;
    if (!c.queries.emplace(id, std::move(q)).second) throw ParseError("duplicate query id " + id);
  }
  for (auto& d : io::ReadDocuments(cfg.documents)) {
    const auto id = d.id;
    if (!c.docs.emplace(id, std::move(d)).second) throw ParseError("duplicate document id " + id);
  }
  return c;
}

json PairRow(const std::string& qid, std::size_t i, std::size_t j, std::optional<double> p,
             const char* source, const CandidateSet& cs) {
  json row = {{"query_id", qid}, {"i", i}, {"j", j}};
  if (p) row["p"] = *p;
  row["source"] = source;
  row["doc_i"] = cs.doc_ids[i];
  row["doc_j"] = cs.doc_ids[j];
  return row;
}

// -------------------------------------------------------------------- annotate

struct AnnotateArgs {
  RunOverrides run;
  std::vector<std::string> only;
  std::string out;
};

int Annotate(const AnnotateArgs& a, std::ostream& out) {
  const RunConfig cfg = LoadWithOverrides(a.run);
  const Corpus corpus = LoadCorpus(cfg);
  const JudgePanel judges(cfg.judges);
  std::vector<json> rows;
  for (const auto& cs : io::ReadCandidateSets(cfg.candidates)) {
    if (!a.only.empty() && std::find(a.only.begin(), a.only.end(), cs.query_id) == a.only.end()) {
      continue;
    }
    cs.Validate(cfg.max_candidates);
    const auto rq = ResolveQuery(cs, corpus.queries, corpus.docs);
    const auto ann = AnnotateQuery(rq, judges, cfg, QuerySeed(cfg.seed, cs.query_id));
    for (const auto& r : ann.records) {
      rows.push_back(PairRow(cs.query_id, r.i, r.j, r.p, "random-pair", cs));
    }
    log::Event(log::Level::kInfo, "query_annotated",
               {{"query_id", cs.query_id}, {"edges", ann.records.size()}});
  }
  Emit(a.out.empty() ? (cfg.output_dir / "annotations.jsonl").string() : a.out,
       io::ToJsonl(rows), out);
  return kExitOk;
}

// ------------------------------------------------------------------------- run

int Run(const RunOverrides& o, std::ostream& out) {
  const RunConfig cfg = LoadWithOverrides(o);
  const json manifest = RunDataset(cfg);
  out << json{{"output_dir", cfg.output_dir.string()}, {"totals", manifest["totals"]}}.dump()
      << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------------ mine

struct MineArgs {
  std::string scores, human, threshold_map, candidates, config, dataset, out;
  std::uint64_t seed = 0;
};

int Mine(const MineArgs& a, std::ostream& out) {
  const ThresholdMap thresholds = ThresholdMap::FromJson(io::ReadJson(a.threshold_map));

  std::optional<RunConfig> cfg;
  if (!a.config.empty()) {
    RunOverrides o;
    o.config = a.config;
    o.seed = a.seed;
    cfg = LoadWithOverrides(o);
  }
  std::map<std::string, CandidateSet> sets;
  auto add_set = [&](CandidateSet cs, const std::string& origin) {
    const auto id = cs.query_id;
    if (!sets.emplace(id, std::move(cs)).second) {
      throw ParseError("duplicate candidate set for " + id + " in " + origin);
    }
  };
  const std::string cand_path =
      !a.candidates.empty() ? a.candidates : (cfg ? cfg->candidates.string() : std::string());
  if (!cand_path.empty()) {
    for (auto& cs : io::ReadCandidateSets(cand_path)) add_set(std::move(cs), cand_path);
  }

  // Scores: {"query_id", "scores" | "elos": [...], optional "doc_ids"}.
  std::map<std::string, std::vector<double>> scores;
  for (const auto& row : io::ReadJsonl(a.scores)) {
    const auto qid = io::RequireString(row, "query_id");
    const char* field = row.contains("scores") ? "scores" : "elos";
    if (!row.contains(field) || !row[field].is_array()) {
      throw ParseError(a.scores + ": row for " + qid + " has neither scores nor elos");
    }
    scores[qid] = row[field].get<std::vector<double>>();
    if (row.contains("doc_ids") && !sets.count(qid)) {
      add_set(io::CandidateSetFromJson(row), a.scores);
    }
  }

  std::optional<Corpus> corpus;
  std::optional<JudgePanel> judges;
  if (cfg) {
    corpus = LoadCorpus(*cfg);
    judges.emplace(cfg->judges);
  }

  std::vector<json> rows;
  std::size_t checked = 0;
  for (const auto& h : io::ReadJsonl(a.human)) {
    const auto qid = io::RequireString(h, "query_id");
    const auto human_doc = io::RequireString(h, "doc_id");
    const auto dataset = h.value("dataset", a.dataset);
    auto cs = sets.find(qid);
    if (cs == sets.end()) throw InvalidArgument("no candidate set for query " + qid);
    auto sc = scores.find(qid);
    if (sc == scores.end()) throw InvalidArgument("no scores for query " + qid + " in " + a.scores);
    if (sc->second.size() != cs->second.k()) {
      throw InvalidArgument("score count for " + qid + " does not match its candidates");
    }
    const std::size_t t = thresholds.For(dataset);
    ++checked;
    const auto mined = MineFailure(cs->second, sc->second, human_doc, t);
    if (!mined) continue;
    std::optional<double> p;
    if (judges) {
      const auto rq = ResolveQuery(cs->second, corpus->queries, corpus->docs);
      const std::size_t i = mined->human_index, j = mined->other_index;
      EnsembleOptions eopts;
      eopts.retries = cfg->judge_retries;
      const PairContext pair{&rq.query, &rq.docs[i], &rq.docs[j], i, j, cs->second.k()};
      p = ScoreWithEnsemble(judges->view(), pair,
                            DeriveSeed({QuerySeed(cfg->seed, qid), 3, i, j}), eopts)
              .unit;
    }
    json row = PairRow(qid, mined->human_index, mined->other_index, p, "failure-mined",
                       cs->second);
    row["human_rank"] = mined->human_rank;
    row["threshold"] = t;
    rows.push_back(std::move(row));
  }
  log::Event(log::Level::kInfo, "mine_done", {{"checked", checked}, {"mined", rows.size()}});
  Emit(a.out, io::ToJsonl(rows), out);
  return kExitOk;
}

// ----------------------------------------------------------------------- study

struct StudyArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
};

int Study(const StudyArgs& a, std::ostream& out) {
  StudyConfig cfg = StudyConfigFromJson(io::ReadJson(a.config));
  if (a.seed) cfg.seed = *a.seed;
  if (a.trials) cfg.trials = *a.trials;
  cfg.Validate();
  std::ostringstream csv;
  WriteStudyCsv(csv, ConvergenceStudy(cfg));
  Emit(a.out, csv.str(), out);
  return kExitOk;
}

// ------------------------------------------------------------------------ eval

struct EvalArgs {
  std::string ranked, qrels, out;
  std::size_t k = 10;
  double relevant_threshold = 1.0;
  std::uint64_t seed = 0;
};

int Eval(const EvalArgs& a, std::ostream& out) {
  if (a.k == 0) throw UsageError("--k must be positive");
  std::map<std::string, std::map<std::string, double>> qrels;
  for (const auto& row : io::ReadJsonl(a.qrels)) {
    qrels[io::RequireString(row, "query_id")][io::RequireString(row, "doc_id")] =
        io::RequireNumber(row, "relevance");
  }
  std::vector<json> rows;
  std::set<std::string> seen;
  double ndcg_all = 0, ndcg_kept = 0, recall_all = 0, recall_kept = 0;
  std::size_t kept = 0, recall_defined = 0;
  for (const auto& row : io::ReadJsonl(a.ranked)) {
    const auto cs = io::CandidateSetFromJson(row);
    if (!seen.insert(cs.query_id).second) {
      throw ParseError("duplicate ranking for " + cs.query_id + " in " + a.ranked);
    }
    RankedList rl{cs.query_id, cs.doc_ids, {}};
    if (auto q = qrels.find(cs.query_id); q != qrels.end()) rl.relevance = q->second;
    const auto ndcg = NdcgAtK(rl, a.k);
    const auto recall = RecallAtK(rl, a.k, a.relevant_threshold);
    ndcg_all += ndcg.value;
    recall_all += recall.value;
    if (!ndcg.degenerate) {
      ndcg_kept += ndcg.value;
      ++kept;
    }
    if (!recall.degenerate) {
      recall_kept += recall.value;
      ++recall_defined;
    }
    rows.push_back({{"query_id", cs.query_id},
                    {"ndcg", ndcg.value},
                    {"recall", recall.value},
                    {"degenerate", ndcg.degenerate}});
  }
  const auto mean = [](double s, std::size_t n) { return n ? s / static_cast<double>(n) : 0.0; };
  rows.push_back({{"summary",
                   {{"k", a.k},
                    {"queries", rows.size()},
                    {"degenerate", rows.size() - kept},
                    {"ndcg_mean", mean(ndcg_all, rows.size())},
                    {"ndcg_mean_excluding_degenerate", mean(ndcg_kept, kept)},
                    {"recall_mean", mean(recall_all, rows.size())},
                    {"recall_mean_excluding_degenerate", mean(recall_kept, recall_defined)}}}});
  Emit(a.out, io::ToJsonl(rows), out);
  return kExitOk;
}

void ReportError(std::ostream& err, const std::string& command, const std::string& code,
                 const std::string& message) {
  err << json{{"error", code}, {"command", command}, {"message", message}}.dump() << "\n";
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"zelo: pairwise-preference annotation and Elo fitting for rerankers", "zelo"};
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", std::string("zelo ") + ZELO_VERSION + " (format " +
                                        std::to_string(io::kFormatVersion) + ")");
  std::string log_level = "warn";
  int workers = 0;
  app.add_option("--log-level", log_level, "Structured stderr log threshold")
      ->check(CLI::IsMember(Keys({"debug", "info", "warn", "error", "off"})))
      ->capture_default_str();
  app.add_option("--workers", workers, "Thread count (default: all cores)")
      ->check(CLI::NonNegativeNumber);

  const auto seed_help = "Seed for every random choice";
  const std::vector<std::string> strategies = Keys({"cycles", "random", "bipartite", "greedy"});
  const std::vector<std::string> models = Keys({"thurstone", "bradley-terry", "bt"});

  SampleGraphArgs sg;
  auto* sg_cmd = app.add_subcommand("sample-graph", "Sample a comparison graph");
  sg_cmd->add_option("--strategy", sg.strategy, "cycles, random, bipartite or greedy")
      ->required()
      ->check(CLI::IsMember(strategies));
  sg_cmd->add_option("--n", sg.n, "Vertex count")->required()->check(CLI::PositiveNumber);
  sg_cmd->add_option("--budget", sg.budget, "Edge budget (random, greedy)");
  sg_cmd->add_option("--k", sg.k, "Even target degree (cycles)");
  sg_cmd->add_option("--left", sg.left, "Left side size (bipartite)");
  sg_cmd->add_option("--matrix", sg.matrix, "Preference records answering greedy queries")
      ->check(CLI::ExistingFile);
  sg_cmd->add_option("--model", sg.model, "Model for greedy refits")->check(CLI::IsMember(models));
  sg_cmd->add_option("--seed", sg.seed, seed_help);
  sg_cmd->add_option("--out", sg.out, "Output file (default: stdout)");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit Elo scores to preference records");
  fit_cmd->add_option("--matrix", fit.matrix, "Preference records (JSONL)")->required();
  fit_cmd->add_option("--model", fit.model, "thurstone or bradley-terry")
      ->check(CLI::IsMember(models))
      ->capture_default_str();
  fit_cmd->add_option("--n", fit.n, "Candidate count (default: largest index + 1)");
  fit_cmd->add_option("--max-iters", fit.max_iters, "Iteration cap");
  fit_cmd->add_option("--grad-tol", fit.grad_tol, "Gradient-norm stopping tolerance");
  fit_cmd->add_option("--init", fit.init, "zeros or seed-random")
      ->check(CLI::IsMember(Keys({"zeros", "seed-random"})));
  fit_cmd->add_flag("--allow-disconnected", fit.allow_disconnected,
                    "Fit each component separately instead of failing");
  fit_cmd->add_option("--seed", fit.seed, "Seed for seed-random initialization");
  fit_cmd->add_option("--out", fit.out, "Output file (default: stdout)");

  auto add_run_options = [&](CLI::App* cmd, RunOverrides& o) {
    cmd->add_option("--config", o.config, "Run configuration (JSON)")->required();
    cmd->add_option("--seed", o.seed, seed_help);
    cmd->add_option("--out-dir", o.out_dir, "Override output_dir");
    cmd->add_option("--strategy", o.strategy, "Override graph.strategy")
        ->check(CLI::IsMember(strategies));
    cmd->add_option("--budget", o.budget, "Override graph.budget");
    cmd->add_option("--k", o.k, "Override graph.k");
    cmd->add_option("--model", o.model, "Override model")->check(CLI::IsMember(models));
    cmd->add_option("--squash", o.squash, "Override squash")
        ->check(CLI::IsMember(Keys({"logistic", "minmax"})));
  };

  AnnotateArgs ann;
  auto* ann_cmd = app.add_subcommand("annotate", "Judge the sampled pairs of every query");
  add_run_options(ann_cmd, ann.run);
  ann_cmd->add_option("--query", ann.only, "Only these query ids (repeatable)");
  ann_cmd->add_option("--out", ann.out,
                      "Output file (default: <output_dir>/annotations.jsonl, '-' for stdout)");

  RunOverrides run;
  auto* run_cmd = app.add_subcommand("run", "Annotate, fit and export a dataset");
  add_run_options(run_cmd, run);

  MineArgs mine;
  auto* mine_cmd = app.add_subcommand("mine", "Find queries where a pointwise model buries the "
                                              "human-preferred document");
  mine_cmd->add_option("--scores", mine.scores, "Per-query scores or elos (JSONL)")->required();
  mine_cmd->add_option("--human", mine.human, "Human top picks {query_id, doc_id[, dataset]}")
      ->required();
  mine_cmd->add_option("--threshold-map", mine.threshold_map, "Thresholds per dataset (JSON)")
      ->required();
  mine_cmd->add_option("--candidates", mine.candidates, "Candidate sets (JSONL)");
  mine_cmd->add_option("--config", mine.config, "Run configuration; judges each mined pair");
  mine_cmd->add_option("--dataset", mine.dataset, "Dataset name when a pick has none");
  mine_cmd->add_option("--seed", mine.seed, seed_help);
  mine_cmd->add_option("--out", mine.out, "Output file (default: stdout)");

  StudyArgs study;
  auto* study_cmd = app.add_subcommand("study", "Sparse-sampling convergence study");
  study_cmd->add_option("--config", study.config, "Study configuration (JSON)")->required();
  study_cmd->add_option("--trials", study.trials, "Override trials");
  study_cmd->add_option("--seed", study.seed, seed_help);
  study_cmd->add_option("--out", study.out, "CSV file (default: stdout)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "NDCG@k and Recall@k of ranked lists");
  eval_cmd->add_option("--ranked", ev.ranked, "Rankings {query_id, doc_ids} (JSONL)")->required();
  eval_cmd->add_option("--qrels", ev.qrels, "Judgments {query_id, doc_id, relevance} (JSONL)")
      ->required();
  eval_cmd->add_option("--k", ev.k, "Cutoff")->capture_default_str();
  eval_cmd->add_option("--relevant-threshold", ev.relevant_threshold,
                       "Minimum relevance counted by recall")
      ->capture_default_str();
  eval_cmd->add_option("--seed", ev.seed, "Accepted for uniformity; eval is deterministic");
  eval_cmd->add_option("--out", ev.out, "Output file (default: stdout)");

  if (argc > 1 && argv[1][0] != '-') {
    bool known = false;
    for (const auto* sub : app.get_subcommands({})) known = known || sub->check_name(argv[1]);
    if (!known) {
      err << "unknown subcommand '" << argv[1] << "'\n" << app.help();
      return kExitUsage;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  log::SetLevel(log::ParseLevel(log_level));
  if (workers > 0) omp_set_num_threads(workers);

  try {
    if (cmd == sg_cmd) return SampleGraph(sg, out);
    if (cmd == fit_cmd) return Fit(fit, out);
    if (cmd == ann_cmd) return Annotate(ann, out);
    if (cmd == run_cmd) return Run(run, out);
    if (cmd == mine_cmd) return Mine(mine, out);
    if (cmd == study_cmd) return Study(study, out);
    if (cmd == eval_cmd) return Eval(ev, out);
  } catch (const UsageError& e) {
    err << name << ": " << e.what() << "\n" << cmd->help();
    return kExitUsage;
  } catch (const Error& e) {
    ReportError(err, name, e.code(), e.what());
    return kExitDomainError;
  } catch (const json::exception& e) {
    ReportError(err, name, "parse_error", e.what());
    return kExitDomainError;
  } catch (const fs::filesystem_error& e) {
    ReportError(err, name, "io_error", e.what());
    return kExitDomainError;
  } catch (const std::exception& e) {
    ReportError(err, name, "internal", e.what());
    return kExitDomainError;
  }
  return kExitUsage;
}

}  // namespace zelo::cli
