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

#ifndef RELAY_SERVER_CONFIG_H_
#define RELAY_SERVER_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "relay/table.h"
#include "relay/wire.h"

namespace relay {

// Overrides the configured listen address when set.
inline constexpr char kListenAddressEnv[] = "RELAY_LISTEN_ADDRESS";

struct ServerConfig {
  std::string address = "127.0.0.1:0";
  std::vector<TableConfig> tables;
  // Empty disables the Checkpoint call.
  std::string checkpoint_dir;
  int checkpoint_keep = 1;
  size_t max_message_bytes = kDefaultMaxMessageBytes;
  // Open connections beyond this are refused with ResourceExhausted.
  int max_concurrent_streams = 4096;

  absl::Status Validate() const;
};

// JSON document; see README for the schema. Unknown keys are rejected so
// that typos do not silently fall back to defaults.
absl::StatusOr<ServerConfig> ParseServerConfig(absl::string_view json);

// Reads and parses `path`, then applies the listen address override.
absl::StatusOr<ServerConfig> LoadServerConfig(const std::string& path);

void ApplyEnvironmentOverrides(ServerConfig* config);

}  // namespace relay

#endif  // RELAY_SERVER_CONFIG_H_
