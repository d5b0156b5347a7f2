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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "zelo/cli.hpp"
#include "zelo/io.hpp"

namespace zelo {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kFixtures = ZELO_FIXTURES_DIR;

struct Result {
  int rc = 0;
  std::string out, err;
};

Result Zelo(std::vector<std::string> args) {
  args.insert(args.begin(), "zelo");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = cli::Run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {rc, out.str(), err.str()};
}

std::string Fixture(const char* name) { return (kFixtures / name).string(); }

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("zelo_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
            std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::set<std::string> Listing(const fs::path& dir) {
  std::set<std::string> names;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    names.insert(fs::relative(e.path(), dir).string());
  }
  return names;
}

TEST_CASE("fit writes the scores a dense fixture encodes") {
  TempDir tmp;
  const auto out = (tmp.path / "elos.jsonl").string();
  const auto r = Zelo({"fit", "--matrix", Fixture("w.jsonl"), "--model", "thurstone", "--out", out});
  CHECK(r.rc == 0);
  CHECK(r.out.empty());
  const auto rows = io::ReadJsonl(out);
  REQUIRE(rows.size() == 1);
  const auto truth = io::ReadJson(Fixture("w_truth.json"))["elos"].get<std::vector<double>>();
  const auto elos = rows[0]["elos"].get<std::vector<double>>();
  REQUIRE(elos.size() == truth.size());
  double mean = 0.0;
  for (double t : truth) mean += t / static_cast<double>(truth.size());
  for (std::size_t i = 0; i < elos.size(); ++i) CHECK(elos[i] == doctest::Approx(truth[i] - mean).epsilon(1e-6));
  CHECK(rows[0]["converged"] == true);
  CHECK(rows[0]["query_id"] == "toy");
}

TEST_CASE("usage errors exit 2 with usage text") {
  const auto unknown = Zelo({"frobnicate"});
  CHECK(unknown.rc == 2);
  CHECK(unknown.err.find("Usage:") != std::string::npos);
  CHECK(Zelo({}).rc == 2);
  CHECK(Zelo({"fit"}).rc == 2);
  CHECK(Zelo({"fit", "--matrix", "x", "--model", "probit"}).rc == 2);
  CHECK(Zelo({"sample-graph", "--strategy", "random", "--n", "10"}).rc == 2);
  CHECK(Zelo({"eval", "--ranked", "a", "--qrels", "b", "--k", "0"}).rc == 2);
  CHECK(Zelo({"--log-level", "loud", "eval", "--ranked", "a", "--qrels", "b"}).rc == 2);
}

TEST_CASE("help and version") {
  const auto help = Zelo({"--help"});
  CHECK(help.rc == 0);
  for (const char* cmd : {"sample-graph", "fit", "annotate", "run", "mine", "study", "eval"}) {
    CHECK(help.out.find(cmd) != std::string::npos);
    const auto sub = Zelo({cmd, "--help"});
    CHECK(sub.rc == 0);
    CHECK(sub.out.find("--seed") != std::string::npos);
  }
  const auto v = Zelo({"--version"});
  CHECK(v.rc == 0);
  CHECK(v.out.find("format 1") != std::string::npos);
}

TEST_CASE("domain errors are one JSON line naming the path") {
  const auto r = Zelo({"run", "--config", "missing.json"});
  CHECK(r.rc == 1);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  const auto j = json::parse(r.err);
  CHECK(j["command"] == "run");
  CHECK(j["message"].get<std::string>().find("missing.json") != std::string::npos);

  TempDir tmp;
  const auto bad = tmp.path / "bad.jsonl";
  io::WriteFileAtomic(bad, "{\"query_id\":\"q\",\"i\":0,\"j\":1,\"p\":0.5}\n{oops\n");
  const auto f = Zelo({"fit", "--matrix", bad.string()});
  CHECK(f.rc == 1);
  const auto e = json::parse(f.err);
  CHECK(e["error"] == "parse_error");
  CHECK(e["message"].get<std::string>().find("bad.jsonl:2") != std::string::npos);
}

TEST_CASE("run is byte-reproducible and writes only to its output directory") {
  TempDir tmp;
  const auto before = Listing(kFixtures);
  std::string sft, pairs, manifest;
  for (int rep = 0; rep < 2; ++rep) {
    const auto dir = tmp.path / ("run" + std::to_string(rep));
    // Different thread counts must not change a byte.
    const auto r = Zelo({"--workers", rep == 0 ? "1" : "3", "run", "--config", Fixture("run_config.json"),
                         "--out-dir", dir.string()});
    REQUIRE(r.rc == 0);
    CHECK(json::parse(r.out)["totals"]["ok"] == 2);
    CHECK(Listing(dir) == std::set<std::string>{"sft.jsonl", "pairs.jsonl", "elos.jsonl",
                                                "manifest.json", "timing.json"});
    if (rep == 0) {
      sft = Slurp(dir / "sft.jsonl");
      pairs = Slurp(dir / "pairs.jsonl");
      manifest = Slurp(dir / "manifest.json");
    } else {
      CHECK(Slurp(dir / "sft.jsonl") == sft);
      CHECK(Slurp(dir / "pairs.jsonl") == pairs);
      CHECK(Slurp(dir / "manifest.json") == manifest);
    }
  }
  CHECK(Listing(kFixtures) == before);
  // A different seed changes the sampled graph for the 6-candidate query.
  const auto other = tmp.path / "seeded";
  REQUIRE(Zelo({"run", "--config", Fixture("run_config.json"), "--out-dir", other.string(),
                "--seed", "99"})
              .rc == 0);
  CHECK(Slurp(other / "pairs.jsonl") != pairs);
}

TEST_CASE("annotate filters queries") {
  const auto r = Zelo({"annotate", "--config", Fixture("run_config.json"), "--query", "q2",
                       "--out", "-"});
  REQUIRE(r.rc == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto j = json::parse(line);
    CHECK(j["query_id"] == "q2");
    CHECK(j["source"] == "random-pair");
    ++n;
  }
  CHECK(n == 10);  // five candidates: complete graph
}

TEST_CASE("mine flags buried human picks") {
  const auto r = Zelo({"mine", "--scores", Fixture("scores.jsonl"), "--human",
                       Fixture("human.jsonl"), "--threshold-map", Fixture("thresholds.json"),
                       "--candidates", Fixture("candidates.jsonl")});
  REQUIRE(r.rc == 0);
  const auto j = json::parse(r.out);  // exactly one line
  CHECK(j["query_id"] == "q1");
  CHECK(j["doc_i"] == "d1e");
  CHECK(j["doc_j"] == "d1d");
  CHECK(j["human_rank"] == 5);
  CHECK(j["threshold"] == 3);
  CHECK(j["source"] == "failure-mined");
  CHECK_FALSE(j.contains("p"));

  const auto judged = Zelo({"mine", "--scores", Fixture("scores.jsonl"), "--human",
                            Fixture("human.jsonl"), "--threshold-map",
                            Fixture("thresholds.json"), "--config", Fixture("run_config.json")});
  REQUIRE(judged.rc == 0);
  const auto p = json::parse(judged.out)["p"].get<double>();
  CHECK(p >= 0.0);
  CHECK(p <= 1.0);
}

TEST_CASE("eval reports per-query metrics and a summary") {
  const auto r = Zelo({"eval", "--ranked", Fixture("ranked.jsonl"), "--qrels",
                       Fixture("qrels.jsonl"), "--k", "10"});
  REQUIRE(r.rc == 0);
  std::vector<json> rows;
  std::istringstream lines(r.out);
  for (std::string line; std::getline(lines, line);) rows.push_back(json::parse(line));
  REQUIRE(rows.size() == 3);
  // q1: gains 3, 0, 1 against ideal 3, 1.
  const double q1 = (3.0 + 1.0 / 2.0) / (3.0 + 1.0 / std::log2(3.0));
  CHECK(rows[0]["ndcg"].get<double>() == doctest::Approx(q1));
  CHECK(rows[1]["degenerate"] == true);
  CHECK(rows[2]["summary"]["ndcg_mean"].get<double>() == doctest::Approx(q1 / 2));
  CHECK(rows[2]["summary"]["ndcg_mean_excluding_degenerate"].get<double>() == doctest::Approx(q1));
}

TEST_CASE("study and sample-graph are pure functions of their seed") {
  const auto a = Zelo({"study", "--config", Fixture("study.json")});
  const auto b = Zelo({"study", "--config", Fixture("study.json")});
  const auto c = Zelo({"study", "--config", Fixture("study.json"), "--seed", "8"});
  REQUIRE(a.rc == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  CHECK(a.out.rfind("strategy,budget,", 0) == 0);

  const auto g1 = Zelo({"sample-graph", "--strategy", "cycles", "--n", "30", "--k", "4", "--seed", "5"});
  const auto g2 = Zelo({"sample-graph", "--strategy", "cycles", "--n", "30", "--k", "4", "--seed", "5"});
  const auto g3 = Zelo({"sample-graph", "--strategy", "cycles", "--n", "30", "--k", "4", "--seed", "6"});
  REQUIRE(g1.rc == 0);
  CHECK(g1.out == g2.out);
  CHECK(g1.out != g3.out);
  const auto g = io::GraphFromJson(json::parse(g1.out));
  CHECK(g.n() == 30);
  CHECK(g.edge_count() == 60);

  const auto bi = Zelo({"sample-graph", "--strategy", "bipartite", "--n", "6", "--left", "2"});
  CHECK(io::GraphFromJson(json::parse(bi.out)).edge_count() == 8);
}

}  // namespace
}  // namespace zelo
