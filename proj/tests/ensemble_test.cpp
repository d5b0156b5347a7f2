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

#include "httplib.h"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "doctest.h"
#include "zelo/ensemble.hpp"
#include "zelo/error.hpp"

namespace zelo {
namespace {

// Returns a fixed raw score for every call, or throws.
class ConstantJudge : public Judge {
 public:
  ConstantJudge(std::string id, double raw, bool fail = false)
      : Judge(std::move(id)), raw_(raw), fail_(fail) {}

 protected:
  double DoScore(const JudgeRequest&) const override {
    if (fail_) throw JudgeTransportError("down");
    return raw_;
  }

 private:
  double raw_;
  bool fail_;
};

struct Fixture {
  Query q{"q1", "what is elo"};
  Document a{"da", "Elo is a rating system."};
  Document b{"db", "Bananas are yellow."};
  PairContext pair{&q, &a, &b, 0, 1, 2};
};

TEST_CASE("clamp verdict") {
  CHECK(ClampVerdict(0.0) == 0);
  CHECK(ClampVerdict(0.7) == 1);
  CHECK(ClampVerdict(-0.9) == -1);
  CHECK(ClampVerdict(0.5) == 0);
  CHECK(ClampVerdict(-0.5) == 0);
  CHECK(ClampVerdict(0.5000001) == 1);
  CHECK(ClampVerdict(1.0) == 1);
  CHECK_THROWS_AS(ClampVerdict(1.01), InvalidArgument);
  CHECK_THROWS_AS(ClampVerdict(std::nan("")), InvalidArgument);
}

TEST_CASE("map to unit") {
  CHECK(MapToUnit(-1.0) == 1.0);
  CHECK(MapToUnit(0.0) == 0.5);
  CHECK(MapToUnit(1.0) == 0.0);
  for (double x = -1.0; x <= 1.0; x += 0.125) {
    CHECK(MapToUnit(-x) == doctest::Approx(1.0 - MapToUnit(x)).epsilon(1e-15));
  }
}

TEST_CASE("standard error") {
  const std::vector<double> same{1, 1, 1};
  CHECK(StandardError(same) == 0.0);
  const std::vector<double> v{1, -1};
  // s = sqrt(2), sem = s / sqrt(2) = 1.
  CHECK(StandardError(v) == doctest::Approx(1.0));
  CHECK(StandardError(std::vector<double>{0.3}) == 0.0);
}

TEST_CASE("debiased judgment with a replay judge") {
  Fixture f;
  const ReplayJudge judge("r", {{{"q1", 0, 1}, 0.8}});
  const auto straight = DebiasedJudgment(judge, f.pair, 1, false);
  CHECK(straight.raw == 0.8);
  CHECK(straight.clamped == 1);
  CHECK_FALSE(straight.swapped);
  // Swapped: the judge sees (d_j, d_i), answers -0.8, which is negated back.
  const auto swapped = DebiasedJudgment(judge, f.pair, 1, true);
  CHECK(swapped.raw == 0.8);
  CHECK(swapped.clamped == 1);
  CHECK(swapped.swapped);

  PairContext same = f.pair;
  same.doc_j = &f.a;
  same.j = 0;
  CHECK_THROWS_AS(DebiasedJudgment(judge, same, 1), InvalidArgument);
}

TEST_CASE("debiased judgment swaps about half the time, deterministically") {
  Fixture f;
  const ReplayJudge judge("r", {{{"q1", 0, 1}, -0.3}});
  int swaps = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const auto v = DebiasedJudgment(judge, f.pair, s);
    swaps += v.swapped;
    CHECK(v.raw == -0.3);
    CHECK(DebiasedJudgment(judge, f.pair, s).swapped == v.swapped);
  }
  CHECK(std::abs(swaps - 1000) < 150);
}

TEST_CASE("replay judge misses and file loading") {
  Fixture f;
  const ReplayJudge judge("r", {{{"q2", 0, 1}, 0.1}});
  CHECK_THROWS_AS(DebiasedJudgment(judge, f.pair, 0), JudgeTransportError);
  CHECK(judge.counters().calls == 1);
  CHECK(judge.counters().failures == 1);
  CHECK_THROWS_AS(ReplayJudge("bad", {{{"q", 0, 1}, 1.5}}), InvalidArgument);
}

TEST_CASE("ensemble score examples") {
  Fixture f;
  auto score = [&](double a, double b, double c) {
    // Only used with zeros, which read the same in either order.
    const ConstantJudge j1("a", a), j2("b", b), j3("c", c);
    const Judge* judges[] = {&j1, &j2, &j3};
    return ScoreWithEnsemble(judges, f.pair, 0);
  };
  // Replay-backed judges keep orientation under swaps.
  auto replay_score = [&](std::vector<double> raws) {
    std::vector<std::unique_ptr<ReplayJudge>> owned;
    std::vector<const Judge*> judges;
    for (double r : raws) {
      owned.push_back(std::make_unique<ReplayJudge>(
          "r" + std::to_string(owned.size()),
          std::map<ReplayJudge::Key, double>{{{"q1", 0, 1}, r}}));
      judges.push_back(owned.back().get());
    }
    return ScoreWithEnsemble(judges, f.pair, 7);
  };
  const auto all_i = replay_score({-1, -1, -1});
  CHECK(all_i.mean_raw == -1.0);
  CHECK(all_i.unit == 1.0);
  CHECK(all_i.sem == 0.0);
  CHECK(score(0, 0, 0).unit == 0.5);
  const auto mixed = replay_score({1, 1, -1});
  CHECK(mixed.mean_raw == doctest::Approx(1.0 / 3.0));
  CHECK(mixed.unit == doctest::Approx(1.0 / 3.0));
  CHECK(mixed.samples == 3);
  CHECK(mixed.sem == doctest::Approx(std::sqrt(4.0 / 3.0 / 3.0)));
}

TEST_CASE("ensemble tolerates a failing minority") {
  Fixture f;
  const ConstantJudge ok1("ok1", 0.0), ok2("ok2", 0.0), bad("bad", 0.0, true);
  const Judge* three[] = {&ok1, &ok2, &bad};
  const auto s = ScoreWithEnsemble(three, f.pair, 3);
  CHECK(s.samples == 2);
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].find("bad") != std::string::npos);
  // One retry before skipping.
  CHECK(bad.counters().calls == 2);

  const ConstantJudge bad2("bad2", 0.0, true);
  const Judge* majority_down[] = {&ok1, &bad, &bad2};
  CHECK_THROWS_AS(ScoreWithEnsemble(majority_down, f.pair, 3), EnsembleFailure);
  const Judge* all_down[] = {&bad, &bad2};
  CHECK_THROWS_AS(ScoreWithEnsemble(all_down, f.pair, 3), EnsembleFailure);
  CHECK_THROWS_AS(ScoreWithEnsemble(std::span<const Judge* const>(), f.pair, 3),
                  InvalidArgument);
}

TEST_CASE("property: three judges give mean_raw in thirds") {
  Fixture f;
  SyntheticJudgeOptions o;
  o.indifference_band = 0.3;
  const SyntheticJudge j1("s1", o), j2("s2", {.seed = 1}), j3("s3", {.seed = 2});
  const Judge* judges[] = {&j1, &j2, &j3};
  for (std::uint64_t s = 0; s < 500; ++s) {
    const auto score = ScoreWithEnsemble(judges, f.pair, s);
    const double scaled = 3.0 * score.mean_raw;
    CHECK(scaled == std::round(scaled));
    CHECK(score.unit >= 0.0);
    CHECK(score.unit <= 1.0);
  }
}

TEST_CASE("synthetic judge") {
  SUBCASE("equal scores are a coin flip") {
    int minus = 0;
    for (std::uint64_t s = 0; s < 20000; ++s) minus += SyntheticVerdict(0.0, 1.0, 0.0, s) < 0;
    CHECK(std::abs(minus - 10000) < 400);
  }
  SUBCASE("noiseless limit always prefers the higher score") {
    for (std::uint64_t s = 0; s < 1000; ++s) {
      CHECK(SyntheticVerdict(0.01, 0.0, 0.0, s) == -1.0);
      CHECK(SyntheticVerdict(-0.01, 0.0, 0.0, s) == 1.0);
    }
  }
  SUBCASE("frequency of -1 matches the erf link") {
    int minus = 0;
    constexpr int kDraws = 100000;
    for (std::uint64_t s = 0; s < kDraws; ++s) minus += SyntheticVerdict(1.0, 1.0, 0.0, s) < 0;
    const double freq = static_cast<double>(minus) / kDraws;
    CHECK(std::abs(freq - (1.0 + std::erf(1.0)) / 2.0) < 0.005);
    CHECK(std::abs(freq - 0.9214) < 0.005);
  }
  SUBCASE("indifference band yields zeros") {
    int zeros = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) zeros += SyntheticVerdict(0.0, 1.0, 0.5, s) == 0.0;
    CHECK(zeros > 400);
  }
  SUBCASE("hidden scores are per query and deterministic") {
    const SyntheticJudge j("s", {.hidden_seed = 4});
    const auto h1 = j.HiddenScores("q1", 10);
    CHECK(h1 == j.HiddenScores("q1", 10));
    CHECK(h1 != j.HiddenScores("q2", 10));
    for (double x : h1) CHECK(std::abs(x) <= 2.0);
    const SyntheticJudge fixed("f", {}, {{"q1", {1.0, -1.0}}});
    CHECK(fixed.HiddenScores("q1", 2) == std::vector<double>{1.0, -1.0});
    CHECK_THROWS_AS(fixed.HiddenScores("q1", 3), InvalidArgument);
  }
  SUBCASE("swap invariance in distribution") {
    Fixture f;
    const SyntheticJudge j("s", {.noise_scale = 0.0}, {{"q1", {1.0, -1.0}}});
    for (std::uint64_t s = 0; s < 100; ++s) {
      CHECK(DebiasedJudgment(j, f.pair, s, false).clamped == -1);
      CHECK(DebiasedJudgment(j, f.pair, s, true).clamped == -1);
    }
  }
}

TEST_CASE("sample until sem") {
  Fixture f;
  SUBCASE("constant pool stops at the minimum") {
    // A replay judge keeps its canonical answer under swaps.
    const ReplayJudge r("r", {{{"q1", 0, 1}, 1.0}});
    const Judge* replay_pool[] = {&r};
    const auto s = SampleUntilSem(replay_pool, f.pair, 5);
    CHECK(s.samples == 3);
    CHECK(s.sem == 0.0);
    CHECK(s.unit == 0.0);
  }
  SUBCASE("cap is honoured") {
    const SyntheticJudge noisy("n", {});
    const Judge* pool[] = {&noisy};
    SemOptions o;
    o.max_samples = 3;
    o.sem_target = 0.0;
    CHECK(SampleUntilSem(pool, f.pair, 1, o).samples == 3);
  }
  SUBCASE("property: sem is below target whenever the cap was not hit") {
    const SyntheticJudge a("a", {.seed = 1}), b("b", {.seed = 2});
    const Judge* pool[] = {&a, &b};
    SemOptions o;
    o.max_samples = 150;
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto r = SampleUntilSem(pool, f.pair, s, o);
      if (r.samples < o.max_samples) CHECK(r.sem <= o.sem_target);
      CHECK(r.samples >= o.min_samples);
    }
  }
  SUBCASE("unavailable pool and bad options") {
    const ConstantJudge bad("bad", 0.0, true);
    const Judge* pool[] = {&bad};
    CHECK_THROWS_AS(SampleUntilSem(pool, f.pair, 1), EnsembleFailure);
    CHECK_THROWS_AS(SampleUntilSem(std::span<const Judge* const>(), f.pair, 1),
                    EnsembleFailure);
    SemOptions o;
    o.min_samples = 1;
    const ReplayJudge r("r", {{{"q1", 0, 1}, 1.0}});
    const Judge* ok[] = {&r};
    CHECK_THROWS_AS(SampleUntilSem(ok, f.pair, 1, o), InvalidArgument);
  }
}

TEST_CASE("parse judge score") {
  CHECK(ParseJudgeScore("-0.7") == -0.7);
  CHECK(ParseJudgeScore("A covers 2 points; B covers 3. Score: 0.25") == 0.25);
  CHECK(ParseJudgeScore("Final answer: -1.0.") == -1.0);
  CHECK(ParseJudgeScore("score = .5") == 0.5);
  CHECK(ParseJudgeScore("+1") == 1.0);
  CHECK_THROWS_AS(ParseJudgeScore("no number here"), MalformedJudgeOutput);
  CHECK_THROWS_AS(ParseJudgeScore("score: 7"), MalformedJudgeOutput);
}

TEST_CASE("judge specs") {
  CHECK(JudgeSpecFromJson({{"kind", "synthetic"}}).kind == "synthetic");
  CHECK_THROWS_AS(JudgeSpecFromJson({{"kind", "oracle"}}), ConfigError);
  CHECK_THROWS_AS(JudgeSpecFromJson(nlohmann::json::array()), ConfigError);
  const auto synth = MakeJudge(JudgeSpecFromJson(
      {{"kind", "synthetic"}, {"id", "s"}, {"noise_scale", 0.5}, {"seed", 3}}));
  CHECK(synth->id() == "s");
  CHECK_THROWS_AS(MakeJudge(JudgeSpecFromJson({{"kind", "replay"}})), ConfigError);
  CHECK_THROWS_AS(MakeJudge(JudgeSpecFromJson({{"kind", "http"}, {"url", "x"}})),
                  ConfigError);
  CHECK_THROWS_AS(
      MakeJudge(JudgeSpecFromJson(
          {{"kind", "synthetic"}, {"noise_scale", "loud"}})),
      ConfigError);
  const auto http = MakeJudge(JudgeSpecFromJson({{"kind", "http"},
                                                 {"url", "http://localhost:1/v1"},
                                                 {"model", "m"},
                                                 {"max_retries", 0}}));
  CHECK(dynamic_cast<HttpJudge*>(http.get()) != nullptr);
}

// Minimal chat-completion endpoint on localhost.
class FakeEndpoint {
 public:
  explicit FakeEndpoint(std::function<void(const httplib::Request&, httplib::Response&)> h) {
    server_.Post("/v1/chat/completions", std::move(h));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }
  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string Reply(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}
      .dump();
}

TEST_CASE("http judge against a local endpoint") {
  Fixture f;
  nlohmann::json seen;
  std::string auth;
  FakeEndpoint endpoint([&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(Reply("Document A is on topic. Score: -0.8"), "application/json");
  });
  ::setenv("ZELO_TEST_KEY", "secret", 1);
  HttpJudgeOptions o;
  o.url = endpoint.url();
  o.model = "judge-model";
  o.api_key_env = "ZELO_TEST_KEY";
  o.temperature = 0.2;
  const HttpJudge judge("h", o);
  const auto v = DebiasedJudgment(judge, f.pair, 0, false);
  CHECK(v.raw == -0.8);
  CHECK(v.clamped == -1);
  CHECK(auth == "Bearer secret");
  CHECK(seen["model"] == "judge-model");
  CHECK(seen["temperature"] == 0.2);
  REQUIRE(seen["messages"].size() == 2);
  const auto system = seen["messages"][0]["content"].get<std::string>();
  CHECK(system.rfind("Task\n\nYou are a relevance scoring system.", 0) == 0);
  CHECK(system.find("You can pick any number from -1.0 to 1.0.") != std::string::npos);
  const auto user = seen["messages"][1]["content"].get<std::string>();
  CHECK(user == "Query: what is elo\n\nDocument A: Elo is a rating system.\n\n"
                "Document B: Bananas are yellow.");
  // Swapped presentation puts d_j first and negates the answer.
  const auto sw = DebiasedJudgment(judge, f.pair, 0, true);
  CHECK(seen["messages"][1]["content"].get<std::string>().find(
            "Document A: Bananas") != std::string::npos);
  CHECK(sw.raw == 0.8);
}

TEST_CASE("http judge retries server errors and reports failures") {
  Fixture f;
  std::atomic<int> hits{0};
  FakeEndpoint endpoint([&](const httplib::Request&, httplib::Response& res) {
    const int n = ++hits;
    if (n <= 2) {
      res.status = n == 1 ? 503 : 429;
      return;
    }
    res.set_content(Reply("0.1"), "application/json");
  });
  HttpJudgeOptions o;
  o.url = endpoint.url();
  o.model = "m";
  o.backoff_s = 0.001;
  o.max_retries = 3;
  const HttpJudge judge("h", o);
  CHECK(DebiasedJudgment(judge, f.pair, 0, false).raw == doctest::Approx(0.1));
  CHECK(hits == 3);
  CHECK(judge.counters().retries == 2);

  hits = 0;
  o.max_retries = 1;
  const HttpJudge impatient("h2", o);
  CHECK_THROWS_AS(DebiasedJudgment(impatient, f.pair, 0, false), JudgeTransportError);
  CHECK(hits == 2);
}

TEST_CASE("http judge rejects malformed replies and client errors") {
  Fixture f;
  std::string mode;
  FakeEndpoint endpoint([&](const httplib::Request&, httplib::Response& res) {
    if (mode == "text") res.set_content(Reply("I cannot decide."), "application/json");
    if (mode == "json") res.set_content("{\"oops\": 1}", "application/json");
    if (mode == "range") res.set_content(Reply("Score: 3"), "application/json");
    if (mode == "401") res.status = 401;
  });
  HttpJudgeOptions o;
  o.url = endpoint.url();
  o.model = "m";
  o.backoff_s = 0.001;
  const HttpJudge judge("h", o);
  for (const char* m : {"text", "json", "range"}) {
    mode = m;
    CHECK_THROWS_AS(DebiasedJudgment(judge, f.pair, 0, false), MalformedJudgeOutput);
  }
  mode = "401";
  CHECK_THROWS_AS(DebiasedJudgment(judge, f.pair, 0, false), JudgeTransportError);
}

TEST_CASE("http judge transport failure on a closed port") {
  Fixture f;
  HttpJudgeOptions o;
  o.url = "http://127.0.0.1:1/v1/chat/completions";
  o.model = "m";
  o.max_retries = 1;
  o.backoff_s = 0.001;
  o.timeout_s = 1.0;
  const HttpJudge judge("h", o);
  CHECK_THROWS_AS(DebiasedJudgment(judge, f.pair, 0, false), JudgeTransportError);
  CHECK(judge.counters().retries == 1);
  o.api_key_env = "ZELO_TEST_UNSET_KEY";
  ::unsetenv("ZELO_TEST_UNSET_KEY");
  const HttpJudge keyless("k", o);
  CHECK_THROWS_AS(DebiasedJudgment(keyless, f.pair, 0, false), JudgeTransportError);
}

}  // namespace
}  // namespace zelo
