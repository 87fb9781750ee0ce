// Copyright 2026 The Relay Authors.
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

#include "relay/server_config.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "json.hpp"
#include "relay/status_macros.h"

namespace relay {

namespace {

using json = nlohmann::json;

absl::Status Bad(absl::string_view where, absl::string_view what) {
  return absl::InvalidArgumentError(
      absl::StrCat("server config: ", where, ": ", what));
}

absl::Status CheckKeys(const json& object, absl::string_view where,
                       std::initializer_list<absl::string_view> allowed) {
  if (!object.is_object()) return Bad(where, "expected an object");
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (absl::string_view name : allowed) known |= key == name;
    if (!known) {
      return Bad(where, absl::StrCat("unknown key '", key, "' (allowed: ",
                                     absl::StrJoin(allowed, ", "), ")"));
    }
  }
  return absl::OkStatus();
}

template <typename T>
absl::StatusOr<T> Get(const json& object, const char* key,
                      absl::string_view where) {
  if (!object.contains(key)) {
    return Bad(where, absl::StrCat("missing '", key, "'"));
  }
  try {
    return object.at(key).get<T>();
  } catch (const json::exception& e) {
    return Bad(where, absl::StrCat("'", key, "': ", e.what()));
  }
}

template <typename T>
absl::StatusOr<T> GetOr(const json& object, const char* key, T fallback,
                        absl::string_view where) {
  if (!object.contains(key)) return fallback;
  return Get<T>(object, key, where);
}

absl::StatusOr<SelectorOptions> ParseSelector(const json& j,
                                              absl::string_view where) {
  RELAY_RETURN_IF_ERROR(CheckKeys(j, where, {"type", "priority_exponent"}));
  RELAY_ASSIGN_OR_RETURN(std::string type, Get<std::string>(j, "type", where));
  SelectorOptions options;
  RELAY_ASSIGN_OR_RETURN(options.type, SelectorTypeFromName(type));
  RELAY_ASSIGN_OR_RETURN(options.priority_exponent,
                         GetOr<double>(j, "priority_exponent", 1.0, where));
  if (options.type != SelectorType::kPrioritized &&
      j.contains("priority_exponent")) {
    return Bad(where, "priority_exponent only applies to 'prioritized'");
  }
  return options;
}

absl::StatusOr<RateLimiterConfig> ParseRateLimiter(const json& j,
                                                   absl::string_view where) {
  if (!j.is_object()) return Bad(where, "expected an object");
  RELAY_ASSIGN_OR_RETURN(std::string type, Get<std::string>(j, "type", where));
  if (type == "sample_to_insert_ratio") {
    RELAY_RETURN_IF_ERROR(CheckKeys(j, where,
                                    {"type", "min_size_to_sample",
                                     "samples_per_insert", "error_buffer"}));
    RELAY_ASSIGN_OR_RETURN(int64_t min_size,
                           Get<int64_t>(j, "min_size_to_sample", where));
    RELAY_ASSIGN_OR_RETURN(double spi,
                           Get<double>(j, "samples_per_insert", where));
    RELAY_ASSIGN_OR_RETURN(double buffer, Get<double>(j, "error_buffer", where));
    return RateLimiterConfig::SampleToInsertRatio(min_size, spi, buffer);
  }
  if (type == "min_size") {
    RELAY_RETURN_IF_ERROR(CheckKeys(j, where, {"type", "min_size"}));
    RELAY_ASSIGN_OR_RETURN(int64_t min_size, Get<int64_t>(j, "min_size", where));
    return RateLimiterConfig::MinSize(min_size);
  }
  if (type == "queue") {
    RELAY_RETURN_IF_ERROR(CheckKeys(j, where, {"type", "queue_size"}));
    RELAY_ASSIGN_OR_RETURN(int64_t size, Get<int64_t>(j, "queue_size", where));
    return RateLimiterConfig::Queue(size);
  }
  if (type == "raw") {
    RELAY_RETURN_IF_ERROR(CheckKeys(j, where,
                                    {"type", "min_size_to_sample",
                                     "samples_per_insert", "min_diff",
                                     "max_diff"}));
    RateLimiterConfig config;
    RELAY_ASSIGN_OR_RETURN(config.min_size_to_sample,
                           Get<int64_t>(j, "min_size_to_sample", where));
    RELAY_ASSIGN_OR_RETURN(config.samples_per_insert,
                           Get<double>(j, "samples_per_insert", where));
    RELAY_ASSIGN_OR_RETURN(config.min_diff, Get<double>(j, "min_diff", where));
    RELAY_ASSIGN_OR_RETURN(config.max_diff, Get<double>(j, "max_diff", where));
    RELAY_RETURN_IF_ERROR(config.Validate());
    return config;
  }
  return Bad(where, absl::StrCat("unknown rate_limiter type '", type, "'"));
}

absl::StatusOr<Signature> ParseSignature(const json& j,
                                         absl::string_view where) {
  if (!j.is_array()) return Bad(where, "signature must be an array");
  std::vector<ColumnSpec> columns;
  for (const json& column : j) {
    RELAY_RETURN_IF_ERROR(CheckKeys(column, where, {"path", "dtype", "shape"}));
    ColumnSpec spec;
    RELAY_ASSIGN_OR_RETURN(spec.path, Get<std::string>(column, "path", where));
    RELAY_ASSIGN_OR_RETURN(std::string dtype,
                           Get<std::string>(column, "dtype", where));
    RELAY_ASSIGN_OR_RETURN(spec.dtype, DtypeFromName(dtype));
    RELAY_ASSIGN_OR_RETURN(spec.shape,
                           GetOr<Shape>(column, "shape", Shape{}, where));
    columns.push_back(std::move(spec));
  }
  return Signature::Create(std::move(columns));
}

absl::StatusOr<TableConfig> ParseTable(const json& j, size_t index) {
  std::string where = absl::StrCat("tables[", index, "]");
  RELAY_RETURN_IF_ERROR(
      CheckKeys(j, where,
                {"name", "sampler", "remover", "max_size", "max_times_sampled",
                 "rate_limiter", "signature", "extensions", "seed"}));
  TableConfig config;
  RELAY_ASSIGN_OR_RETURN(config.name, Get<std::string>(j, "name", where));
  where = absl::StrCat(where, " '", config.name, "'");
  if (j.contains("sampler")) {
    RELAY_ASSIGN_OR_RETURN(config.sampler,
                           ParseSelector(j["sampler"], where + " sampler"));
  }
  if (j.contains("remover")) {
    RELAY_ASSIGN_OR_RETURN(config.remover,
                           ParseSelector(j["remover"], where + " remover"));
  }
  if (!j.contains("rate_limiter")) return Bad(where, "missing 'rate_limiter'");
  RELAY_ASSIGN_OR_RETURN(
      config.rate_limiter,
      ParseRateLimiter(j["rate_limiter"], where + " rate_limiter"));
  // A queue's capacity is its queue_size unless stated otherwise.
  int64_t default_max_size = -1;
  if (j["rate_limiter"].value("type", "") == "queue") {
    default_max_size = static_cast<int64_t>(config.rate_limiter.max_diff);
  }
  RELAY_ASSIGN_OR_RETURN(config.max_size,
                         GetOr<int64_t>(j, "max_size", default_max_size, where));
  if (config.max_size < 0) return Bad(where, "missing 'max_size'");
  RELAY_ASSIGN_OR_RETURN(config.max_times_sampled,
                         GetOr<int32_t>(j, "max_times_sampled", 0, where));
  RELAY_ASSIGN_OR_RETURN(config.rng_seed,
                         GetOr<uint64_t>(j, "seed", 0, where));
  RELAY_ASSIGN_OR_RETURN(
      config.extensions,
      GetOr<std::vector<std::string>>(j, "extensions", {}, where));
  if (j.contains("signature")) {
    RELAY_ASSIGN_OR_RETURN(config.signature,
                           ParseSignature(j["signature"], where));
  }
  RELAY_RETURN_IF_ERROR(config.Validate());
  return config;
}

}  // namespace

absl::Status ServerConfig::Validate() const {
  if (tables.empty()) {
    return absl::InvalidArgumentError("server config: no tables configured");
  }
  absl::flat_hash_set<std::string> names;
  for (const auto& table : tables) {
    RELAY_RETURN_IF_ERROR(table.Validate());
    if (!names.insert(table.name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("server config: duplicate table '", table.name, "'"));
    }
  }
  if (checkpoint_keep < 1) {
    return absl::InvalidArgumentError("server config: checkpoint_keep < 1");
  }
  if (max_message_bytes < 64) {
    return absl::InvalidArgumentError("server config: max_message_bytes < 64");
  }
  if (max_concurrent_streams < 1) {
    return absl::InvalidArgumentError(
        "server config: max_concurrent_streams < 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<ServerConfig> ParseServerConfig(absl::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("server config: ", e.what()));
  }
  RELAY_RETURN_IF_ERROR(CheckKeys(root, "root",
                                  {"address", "tables", "checkpoint_dir",
                                   "checkpoint_keep", "max_message_bytes",
                                   "max_concurrent_streams"}));
  ServerConfig config;
  RELAY_ASSIGN_OR_RETURN(config.address, GetOr<std::string>(root, "address",
                                                             config.address,
                                                             "root"));
  RELAY_ASSIGN_OR_RETURN(config.checkpoint_dir,
                         GetOr<std::string>(root, "checkpoint_dir", "", "root"));
  RELAY_ASSIGN_OR_RETURN(config.checkpoint_keep,
                         GetOr<int>(root, "checkpoint_keep", 1, "root"));
  RELAY_ASSIGN_OR_RETURN(
      config.max_message_bytes,
      GetOr<size_t>(root, "max_message_bytes", config.max_message_bytes,
                    "root"));
  RELAY_ASSIGN_OR_RETURN(
      config.max_concurrent_streams,
      GetOr<int>(root, "max_concurrent_streams", config.max_concurrent_streams,
                 "root"));
  if (!root.contains("tables") || !root["tables"].is_array()) {
    return Bad("root", "'tables' must be an array");
  }
  for (size_t i = 0; i < root["tables"].size(); ++i) {
    RELAY_ASSIGN_OR_RETURN(TableConfig table, ParseTable(root["tables"][i], i));
    config.tables.push_back(std::move(table));
  }
  RELAY_RETURN_IF_ERROR(config.Validate());
  return config;
}

absl::StatusOr<ServerConfig> LoadServerConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream text;
  text << in.rdbuf();
  RELAY_ASSIGN_OR_RETURN(ServerConfig config, ParseServerConfig(text.str()));
  ApplyEnvironmentOverrides(&config);
  return config;
}

void ApplyEnvironmentOverrides(ServerConfig* config) {
  if (const char* address = std::getenv(kListenAddressEnv);
      address != nullptr && *address != '\0') {
    config->address = address;
  }
}

}  // namespace relay
