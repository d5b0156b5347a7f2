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

#include "zelo/io.hpp"

#include <fstream>
#include <sstream>

#include "zelo/error.hpp"

namespace zelo::io {

std::vector<json> ReadJsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<json> rows;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " +
                       e.what());
    }
  }
  return rows;
}

json ReadJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void WriteFileAtomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string Dump(const json& j) { return j.dump(); }

std::string ToJsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += Dump(r);
    out += '\n';
  }
  return out;
}

std::string RequireString(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    throw ParseError(std::string("missing string field '") + field + "' in " + j.dump());
  }
  return it->get<std::string>();
}

double RequireNumber(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_number()) {
    throw ParseError(std::string("missing numeric field '") + field + "' in " + j.dump());
  }
  return it->get<double>();
}

std::size_t RequireIndex(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_number_integer() || it->get<long long>() < 0) {
    throw ParseError(std::string("missing index field '") + field + "' in " + j.dump());
  }
  return it->get<std::size_t>();
}

json ToJson(const Query& q) { return {{"id", q.id}, {"text", q.text}}; }
json ToJson(const Document& d) { return {{"id", d.id}, {"text", d.text}}; }
json ToJson(const CandidateSet& c) {
  return {{"query_id", c.query_id}, {"doc_ids", c.doc_ids}};
}
json ToJson(const PreferenceRecord& r) {
  return {{"query_id", r.query_id}, {"i", r.i}, {"j", r.j}, {"p", r.p}, {"weight", r.weight}};
}
json ToJson(const ComparisonGraph& g) {
  json edges = json::array();
  for (const auto& [a, b] : g.edges()) edges.push_back({a, b});
  return {{"n", g.n()}, {"edges", std::move(edges)}};
}

Query QueryFromJson(const json& j) {
  Query q{RequireString(j, "id"), j.value("text", "")};
  if (q.id.empty()) throw ParseError("query with empty id");
  return q;
}

Document DocumentFromJson(const json& j) {
  Document d{RequireString(j, "id"), j.value("text", "")};
  if (d.id.empty()) throw ParseError("document with empty id");
  return d;
}

CandidateSet CandidateSetFromJson(const json& j) {
  CandidateSet c;
  c.query_id = RequireString(j, "query_id");
  auto it = j.find("doc_ids");
  if (it == j.end() || !it->is_array()) {
    throw ParseError("candidate set without a doc_ids array: " + j.dump());
  }
  for (const auto& d : *it) {
    if (!d.is_string()) throw ParseError("non-string doc id in " + j.dump());
    c.doc_ids.push_back(d.get<std::string>());
  }
  return c;
}

PreferenceRecord PreferenceRecordFromJson(const json& j) {
  PreferenceRecord r;
  r.query_id = j.value("query_id", "");
  r.i = RequireIndex(j, "i");
  r.j = RequireIndex(j, "j");
  r.p = RequireNumber(j, "p");
  r.weight = j.contains("weight") ? RequireNumber(j, "weight") : 1.0;
  return r;
}

ComparisonGraph GraphFromJson(const json& j) {
  const auto n = RequireIndex(j, "n");
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw ParseError("malformed edge " + e.dump());
    edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
  }
  return ComparisonGraph(n, std::move(edges));
}

namespace {

template <typename T, typename F>
std::vector<T> ReadAll(const std::filesystem::path& path, F from_json) {
  std::vector<T> out;
  for (const auto& row : ReadJsonl(path)) out.push_back(from_json(row));
  return out;
}

}  // namespace

std::vector<Query> ReadQueries(const std::filesystem::path& path) {
  return ReadAll<Query>(path, QueryFromJson);
}
std::vector<Document> ReadDocuments(const std::filesystem::path& path) {
  return ReadAll<Document>(path, DocumentFromJson);
}
std::vector<CandidateSet> ReadCandidateSets(const std::filesystem::path& path) {
  return ReadAll<CandidateSet>(path, CandidateSetFromJson);
}
std::vector<PreferenceRecord> ReadPreferenceRecords(const std::filesystem::path& path) {
  return ReadAll<PreferenceRecord>(path, PreferenceRecordFromJson);
}

FitOptions FitOptionsFromJson(const json& j, FitOptions f) {
  if (!j.is_object()) throw ConfigError("fit options must be an object");
  try {
    f.max_iters = j.value("max_iters", f.max_iters);
    f.grad_tol = j.value("grad_tol", f.grad_tol);
    f.lr_exponent = j.value("lr_exponent", f.lr_exponent);
    f.prob_clamp_eps = j.value("prob_clamp_eps", f.prob_clamp_eps);
    f.init_seed = j.value("init_seed", f.init_seed);
    const auto init = j.value("init", std::string(f.init == InitKind::kZeros ? "zeros" : "seed-random"));
    if (init == "zeros") {
      f.init = InitKind::kZeros;
    } else if (init == "seed-random") {
      f.init = InitKind::kSeedRandom;
    } else {
      throw ConfigError("unknown init '" + init + "'");
    }
  } catch (const json::type_error& e) {
    throw ConfigError(std::string("fit options: ") + e.what());
  }
  return f;
}

json FitReportToJson(std::string_view query_id, const FitReport& report,
                     ModelKind model) {
  return {{"query_id", query_id},
          {"elos", std::vector<double>(report.elos.scores().begin(),
                                       report.elos.scores().end())},
          {"model", ModelName(model)},
          {"converged", report.converged},
          {"iterations", report.iterations}};
}

}  // namespace zelo::io
