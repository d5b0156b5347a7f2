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
#include <random>

#include "doctest.h"
#include "zelo/core.hpp"
#include "zelo/error.hpp"

namespace zelo {
namespace {

// logistic(1) and (1 + erf(1)) / 2, evaluated with Python's math module.
constexpr double kLogisticOne = 0.7310585786300049;
constexpr double kThurstoneOne = 0.9213503964748575;

TEST_CASE("single record materializes its mirror") {
  std::vector<PreferenceRecord> records{{"q", 0, 1, 0.8, 1.0}};
  const auto m = BuildPreferenceMatrix(records, 2);
  CHECK(m.n() == 2);
  CHECK(m.pair_count() == 1);
  CHECK(m.Get(0, 1)->w == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(m.Get(1, 0)->w == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_FALSE(m.Get(0, 0).has_value());
}

TEST_CASE("opposite orientations merge by weighted mean") {
  std::vector<PreferenceRecord> records{{"q", 0, 1, 0.8, 1.0},
                                        {"q", 1, 0, 0.8, 1.0}};
  const auto m = BuildPreferenceMatrix(records, 2);
  CHECK(m.pair_count() == 1);
  CHECK(m.Get(0, 1)->w == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.Get(0, 1)->weight == 2.0);
}

TEST_CASE("weights skew the merge") {
  std::vector<PreferenceRecord> records{{"q", 2, 0, 1.0, 3.0},
                                        {"q", 0, 2, 1.0, 1.0}};
  const auto m = BuildPreferenceMatrix(records, 3);
  // (0,2) sees p=0 with weight 3 and p=1 with weight 1.
  CHECK(m.Get(0, 2)->w == doctest::Approx(0.25));
  CHECK(m.Get(2, 0)->w == doctest::Approx(0.75));
}

TEST_CASE("empty record list keeps n") {
  const auto m = BuildPreferenceMatrix({}, 7);
  CHECK(m.n() == 7);
  CHECK(m.empty());
  CHECK(m.OrderedEntries().empty());
}

TEST_CASE("invalid records are rejected") {
  std::vector<PreferenceRecord> out_of_range{{"q", 0, 3, 0.5, 1.0}};
  CHECK_THROWS_AS(BuildPreferenceMatrix(out_of_range, 3), InvalidArgument);
  std::vector<PreferenceRecord> diagonal{{"q", 1, 1, 0.5, 1.0}};
  CHECK_THROWS_AS(BuildPreferenceMatrix(diagonal, 3), InvalidArgument);
  std::vector<PreferenceRecord> bad_p{{"q", 0, 1, 1.5, 1.0}};
  CHECK_THROWS_AS(BuildPreferenceMatrix(bad_p, 3), InvalidArgument);
  std::vector<PreferenceRecord> bad_weight{{"q", 0, 1, 0.5, 0.0}};
  CHECK_THROWS_AS(BuildPreferenceMatrix(bad_weight, 3), InvalidArgument);
}

std::vector<PreferenceRecord> RandomRecords(std::mt19937_64& rng, std::size_t n,
                                            std::size_t count) {
  std::uniform_int_distribution<std::size_t> idx(0, n - 1);
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  std::uniform_int_distribution<int> weight(1, 4);
  std::vector<PreferenceRecord> out;
  while (out.size() < count) {
    const auto i = idx(rng);
    const auto j = idx(rng);
    if (i == j) continue;
    out.push_back({"q", i, j, prob(rng), static_cast<double>(weight(rng))});
  }
  return out;
}

TEST_CASE("property: every ordered entry sums to one with its mirror") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto records = RandomRecords(rng, 12, 40);
    const auto m = BuildPreferenceMatrix(records, 12);
    for (const auto& [key, entry] : m.OrderedEntries()) {
      const auto mirror = m.Get(key.second, key.first);
      REQUIRE(mirror.has_value());
      CHECK(entry.w + mirror->w == 1.0);
      CHECK(entry.weight == mirror->weight);
      CHECK(key.first != key.second);
    }
  }
}

TEST_CASE("property: merge is invariant under record permutation") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto records = RandomRecords(rng, 6, 30);
    const auto reference = BuildPreferenceMatrix(records, 6);
    std::shuffle(records.begin(), records.end(), rng);
    const auto shuffled = BuildPreferenceMatrix(records, 6);
    REQUIRE(shuffled.pair_count() == reference.pair_count());
    for (std::size_t e = 0; e < reference.pair_count(); ++e) {
      CHECK(shuffled.pairs()[e].i == reference.pairs()[e].i);
      CHECK(shuffled.pairs()[e].j == reference.pairs()[e].j);
      CHECK(shuffled.pairs()[e].w == reference.pairs()[e].w);
      CHECK(shuffled.pairs()[e].weight == reference.pairs()[e].weight);
    }
  }
}

TEST_CASE("implied dense matrix") {
  SUBCASE("zero scores give one half everywhere") {
    const auto p = ImpliedDenseMatrix(EloVector(std::vector<double>(4, 0.0)),
                                      ModelKind::kThurstone);
    for (double v : p.values) CHECK(v == 0.5);
  }
  SUBCASE("Bradley-Terry at a gap of one") {
    const auto p = ImpliedDenseMatrix(EloVector({0.5, -0.5}),
                                      ModelKind::kBradleyTerry);
    CHECK(p(0, 1) == doctest::Approx(kLogisticOne).epsilon(1e-14));
    CHECK(p(0, 0) == 0.5);
  }
  SUBCASE("Thurstone at a gap of one") {
    const auto p =
        ImpliedDenseMatrix(EloVector({0.5, -0.5}), ModelKind::kThurstone);
    CHECK(p(0, 1) == doctest::Approx(kThurstoneOne).epsilon(1e-14));
  }
  SUBCASE("property: P + P^T is all ones") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 2.0);
    for (auto model : {ModelKind::kBradleyTerry, ModelKind::kThurstone}) {
      for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> s(9);
        for (double& x : s) x = normal(rng);
        const auto p = ImpliedDenseMatrix(EloVector(s), model);
        for (std::size_t i = 0; i < p.n; ++i) {
          for (std::size_t j = 0; j < p.n; ++j) {
            CHECK(std::abs(p(i, j) + p(j, i) - 1.0) <= 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("EloVector centers its input") {
  EloVector e({3.0, 4.0, 5.0});
  CHECK(e[0] == doctest::Approx(-1.0));
  CHECK(e[2] == doctest::Approx(1.0));
  CHECK(std::abs(e.Mean()) < 1e-15);
}

TEST_CASE("candidate set validation") {
  CandidateSet ok{"q", {"a", "b", "c"}};
  CHECK_NOTHROW(ok.Validate());
  CHECK(ok.IndexOf("c") == 2u);
  CHECK_FALSE(ok.IndexOf("z").has_value());
  CandidateSet dup{"q", {"a", "b", "a"}};
  CHECK_THROWS_AS(dup.Validate(), InvalidArgument);
  CandidateSet tiny{"q", {"a"}};
  CHECK_THROWS_AS(tiny.Validate(), InvalidArgument);
  CandidateSet big{"q", {}};
  for (int i = 0; i < 101; ++i) big.doc_ids.push_back("d" + std::to_string(i));
  CHECK_THROWS_AS(big.Validate(), InvalidArgument);
  CHECK_NOTHROW(big.Validate(200));
}

TEST_CASE("model names") {
  CHECK(ParseModel("Thurstone") == ModelKind::kThurstone);
  CHECK(ParseModel("bt") == ModelKind::kBradleyTerry);
  CHECK(ParseModel(ModelName(ModelKind::kBradleyTerry)) ==
        ModelKind::kBradleyTerry);
  CHECK_THROWS_AS(ParseModel("plackett-luce"), InvalidArgument);
}

}  // namespace
}  // namespace zelo
