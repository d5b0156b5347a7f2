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

// Flat-file formats. Every dataset file is JSON Lines; blank lines are
// skipped and parse errors carry the file name and line number.

#ifndef ZELO_IO_HPP_
#define ZELO_IO_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "zelo/core.hpp"
#include "zelo/graphs.hpp"
#include "zelo/solver.hpp"

namespace zelo::io {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

std::vector<json> ReadJsonl(const std::filesystem::path& path);
json ReadJson(const std::filesystem::path& path);

// Writes to `path` through a temporary sibling and a rename, so readers never
// see a half-written file.
void WriteFileAtomic(const std::filesystem::path& path, const std::string& contents);
std::string ToJsonl(const std::vector<json>& rows);

// Numbers are written with round-trip precision.
std::string Dump(const json& j);

json ToJson(const Query& q);
json ToJson(const Document& d);
json ToJson(const CandidateSet& c);
json ToJson(const PreferenceRecord& r);
json ToJson(const ComparisonGraph& g);

Query QueryFromJson(const json& j);
Document DocumentFromJson(const json& j);
CandidateSet CandidateSetFromJson(const json& j);
PreferenceRecord PreferenceRecordFromJson(const json& j);
ComparisonGraph GraphFromJson(const json& j);

std::vector<Query> ReadQueries(const std::filesystem::path& path);
std::vector<Document> ReadDocuments(const std::filesystem::path& path);
std::vector<CandidateSet> ReadCandidateSets(const std::filesystem::path& path);
std::vector<PreferenceRecord> ReadPreferenceRecords(const std::filesystem::path& path);

// {"query_id","elos":[...],"model","converged","iterations"}
json FitReportToJson(std::string_view query_id, const FitReport& report,
                     ModelKind model);

// Overlays {"max_iters","grad_tol","lr_exponent","prob_clamp_eps","init",
// "init_seed"} on `defaults`; throws ConfigError.
FitOptions FitOptionsFromJson(const json& j, FitOptions defaults = {});

// Required-field accessors that raise ParseError naming the field.
std::string RequireString(const json& j, const char* field);
double RequireNumber(const json& j, const char* field);
std::size_t RequireIndex(const json& j, const char* field);

}  // namespace zelo::io

#endif  // ZELO_IO_HPP_
