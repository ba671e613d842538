// Copyright 2026 The lmkit Authors
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

#ifndef LMKIT_REPORT_HPP
#define LMKIT_REPORT_HPP

#include <string>

#include "json.hpp"

namespace lmkit {

// Machine-readable run report. Every CLI invocation emits exactly one;
// serialization is deterministic (insertion-ordered keys, shortest
// round-trip numbers), which is what the byte-identical-reruns contract
// relies on.
struct ReportDocument {
  std::string schema_version = "1.0";
  std::string command;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  nlohmann::ordered_json error;  // {name, message} when the run failed

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json doc;
    doc["schema_version"] = schema_version;
    doc["command"] = command;
    doc["params"] = params;
    if (!error.is_null()) {
      doc["error"] = error;
      return doc;
    }
    doc["metrics"] = metrics;
    if (!rows.empty()) doc["rows"] = rows;
    return doc;
  }

  std::string serialize() const { return to_json().dump(2) + "\n"; }
};

}  // namespace lmkit

#endif  // LMKIT_REPORT_HPP
