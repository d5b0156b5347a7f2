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

#ifndef ZELO_ERROR_HPP_
#define ZELO_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace zelo {

// Base for every domain failure. `code()` is a stable machine-readable tag
// that the CLI prints alongside the message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error("invalid_argument", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message)
      : Error("parse_error", message) {}
};

class DisconnectedGraph : public Error {
 public:
  explicit DisconnectedGraph(const std::string& message)
      : Error("disconnected_graph", message) {}
};

class NonFinite : public Error {
 public:
  explicit NonFinite(const std::string& message)
      : Error("non_finite", message) {}
};

class JudgeTransportError : public Error {
 public:
  explicit JudgeTransportError(const std::string& message)
      : Error("judge_transport", message) {}
};

class MalformedJudgeOutput : public Error {
 public:
  explicit MalformedJudgeOutput(const std::string& message)
      : Error("judge_malformed_output", message) {}
};

class EnsembleFailure : public Error {
 public:
  explicit EnsembleFailure(const std::string& message)
      : Error("ensemble_failure", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error("config_error", message) {}
};

}  // namespace zelo

#endif  // ZELO_ERROR_HPP_
