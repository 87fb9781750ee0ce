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

#ifndef RELAY_CLIENT_H_
#define RELAY_CLIENT_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/base/thread_annotations.h"
#include "absl/status/statusor.h"
#include "absl/synchronization/mutex.h"
#include "relay/checkpoint.h"
#include "relay/sampler.h"
#include "relay/socket.h"
#include "relay/writer.h"

namespace relay {

// Comma-separated host:port list used when no endpoints are given.
inline constexpr char kEndpointsEnv[] = "RELAY_ENDPOINTS";

absl::StatusOr<std::vector<std::string>> EndpointsFromEnv();

// One server. Unary calls share a cached connection; writers and samplers
// open their own.
class Client {
 public:
  explicit Client(std::string endpoint,
                  absl::Duration connect_timeout = absl::Seconds(5));

  const std::string& endpoint() const { return endpoint_; }

  absl::StatusOr<std::unique_ptr<Writer>> NewWriter(WriterOptions options);
  absl::StatusOr<std::unique_ptr<Sampler>> NewSampler(SamplerOptions options);

  // Returns the number of keys that were present and updated.
  absl::StatusOr<int64_t> UpdatePriorities(
      const std::string& table,
      std::span<const std::pair<ItemKey, double>> updates);
  absl::StatusOr<CheckpointInfo> Checkpoint();
  absl::StatusOr<std::vector<TableInfo>> ServerInfo();

 private:
  // Sends `request` and returns the reply; a server Error becomes a status.
  // Reconnects once if the cached connection turned out to be dead.
  absl::StatusOr<Message> Call(const Message& request);

  const std::string endpoint_;
  const absl::Duration connect_timeout_;
  absl::Mutex mu_;
  Socket socket_ ABSL_GUARDED_BY(mu_);
};

struct PriorityUpdate {
  // Item keys are only unique per server.
  std::string endpoint;
  ItemKey key = 0;
  double priority = 0;
};

// Independent servers behind one handle: round-robin writes, merged samples.
class ServerPool {
 public:
  explicit ServerPool(std::vector<std::string> endpoints);
  // Endpoints from RELAY_ENDPOINTS.
  static absl::StatusOr<ServerPool> FromEnv();

  const std::vector<std::string>& endpoints() const { return endpoints_; }
  size_t size() const { return endpoints_.size(); }
  Client& client(size_t i) { return *clients_[i]; }

  absl::StatusOr<std::unique_ptr<PooledWriter>> NewWriter(
      WriterOptions options);
  // One stream set per endpoint, merged in arrival order.
  absl::StatusOr<std::unique_ptr<Sampler>> NewSampler(SamplerOptions options);

  absl::StatusOr<int64_t> UpdatePriorities(
      const std::string& table, std::span<const PriorityUpdate> updates);
  // Checkpoints every server independently.
  absl::StatusOr<std::vector<CheckpointInfo>> Checkpoint();

 private:
  std::vector<std::string> endpoints_;
  std::vector<std::unique_ptr<Client>> clients_;
};

}  // namespace relay

#endif  // RELAY_CLIENT_H_
