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

// Structured logging: one JSON object per line on standard error.

#ifndef ZELO_LOG_HPP_
#define ZELO_LOG_HPP_

#include <string_view>

#include "json.hpp"

namespace zelo::log {

enum class Level { kDebug, kInfo, kWarn, kError, kOff };

// Accepts debug, info, warn, error, off.
Level ParseLevel(std::string_view name);
void SetLevel(Level level);

// Emits {"level": ..., "event": ..., <fields>}.
void Event(Level level, std::string_view event, nlohmann::json fields = nlohmann::json::object());

}  // namespace zelo::log

#endif  // ZELO_LOG_HPP_
