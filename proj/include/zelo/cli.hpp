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

// The `zelo` command line: sample-graph, fit, annotate, run, mine, study, eval.

#ifndef ZELO_CLI_HPP_
#define ZELO_CLI_HPP_

#include <ostream>

namespace zelo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

// Parses `argv` and runs one subcommand. Data goes to `out` unless a flag
// names an output file; domain errors are a single JSON line on `err`.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace zelo::cli

#endif  // ZELO_CLI_HPP_
