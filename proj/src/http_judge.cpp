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

// Chat-completion judge over HTTP(S).

#include "httplib.h"

#include <chrono>
#include <cstdlib>
#include <thread>

#include "zelo/ensemble.hpp"
#include "zelo/error.hpp"

namespace zelo {

using nlohmann::json;

const char* const kPairwiseSystemPrompt =
    "Task\n\n"
    "You are a relevance scoring system. Given a query and two documents (A and B), "
    "your job is to decide which document is more relevant to the given query. You "
    "should think carefully, considering the pros and cons between each document. "
    "For your first few sentences, consider the pros and cons of Document A. Then, "
    "spend some time thinking about Document B. Then, at the end, compare, and make "
    "a decision as to which one is more relevant. Do NOT make a decision in the "
    "beginning of your thoughts, stay open-minded until the last 1-2 sentences of "
    "your thoughts.\n\n"
    "Scoring\n\n"
    "The score should range from -1.0 to 1.0, where negative means document A is "
    "more relevant, and positive means Document B is more relevant. You can pick any "
    "number from -1.0 to 1.0.";

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint SplitUrl(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("judge url needs a scheme: " + url);
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported judge url scheme: " + scheme);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool Retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpJudge::HttpJudge(std::string id, HttpJudgeOptions options)
    : Judge(std::move(id)), options_(std::move(options)) {
  SplitUrl(options_.url);
  if (options_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (!(options_.timeout_s > 0.0)) throw ConfigError("timeout_s must be positive");
}

json HttpJudge::BuildBody(const JudgeRequest& request) const {
  const std::string user = "Query: " + request.query->text + "\n\nDocument A: " +
                           request.doc_a->text + "\n\nDocument B: " +
                           request.doc_b->text;
  json body = {{"model", options_.model},
               {"temperature", options_.temperature},
               {"messages",
                json::array({{{"role", "system"}, {"content", options_.system_prompt}},
                             {{"role", "user"}, {"content", user}}})}};
  if (options_.max_tokens > 0) body["max_tokens"] = options_.max_tokens;
  return body;
}

double HttpJudge::DoScore(const JudgeRequest& request) const {
  const auto endpoint = SplitUrl(options_.url);
  httplib::Client client(endpoint.origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(options_.timeout_s));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!options_.api_key_env.empty()) {
    const char* key = std::getenv(options_.api_key_env.c_str());
    if (!key || !*key) {
      throw JudgeTransportError("environment variable " + options_.api_key_env +
                                " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string body = BuildBody(request).dump();

  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      CountRetry();
      std::this_thread::sleep_for(std::chrono::duration<double>(
          options_.backoff_s * static_cast<double>(1 << std::min(attempt - 1, 10))));
    }
    auto res = client.Post(endpoint.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (Retryable(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw JudgeTransportError("judge " + id() + " got HTTP " +
                                std::to_string(res->status) + ": " +
                                res->body.substr(0, 200));
    }
    json reply;
    try {
      reply = json::parse(res->body);
      const auto& content = reply.at("choices").at(0).at("message").at("content");
      return ParseJudgeScore(content.get<std::string>());
    } catch (const json::exception& e) {
      throw MalformedJudgeOutput("judge " + id() + " sent an unexpected reply: " +
                                 e.what());
    }
  }
  throw JudgeTransportError("judge " + id() + " failed after " +
                            std::to_string(options_.max_retries + 1) +
                            " attempts: " + last_error);
}

}  // namespace zelo
