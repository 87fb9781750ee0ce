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

#ifndef RELAY_SERVER_H_
#define RELAY_SERVER_H_

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "absl/base/thread_annotations.h"
#include "absl/container/flat_hash_map.h"
#include "absl/status/statusor.h"
#include "absl/synchronization/mutex.h"
#include "relay/checkpoint.h"
#include "relay/chunk_store.h"
#include "relay/server_config.h"
#include "relay/socket.h"
#include "relay/table.h"

namespace relay {

struct ServerStats {
  int64_t connections_accepted = 0;
  int64_t connections_refused = 0;
  int64_t open_connections = 0;
  int64_t insert_chunk_frames = 0;
  int64_t create_item_frames = 0;
  int64_t sample_responses = 0;
  // Highest number of unacknowledged responses seen on any sample stream.
  int64_t max_unacked_responses = 0;
};

// TCP server: one handler thread per connection. A connection processes
// frames in order and may mix writer, sampler and unary traffic.
class Server {
 public:
  // Restores tables from `restore_from` (a checkpoint file or directory) when
  // given; the checkpoint's table configs then replace config.tables.
  static absl::StatusOr<std::unique_ptr<Server>> Start(
      ServerConfig config,
      std::optional<std::string> restore_from = std::nullopt);

  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Closes every table (blocked calls end with Cancelled), disconnects all
  // clients and joins the handlers. Idempotent.
  void Stop();

  // Blocks until Stop is called from another thread.
  void Wait();

  uint16_t port() const { return listener_.port(); }
  // Loopback address clients in this process can dial.
  std::string address() const;

  Table* table(absl::string_view name) const;
  std::vector<Table*> tables() const;
  const std::shared_ptr<ChunkStore>& store() const { return store_; }

  absl::StatusOr<CheckpointInfo> Checkpoint();
  ServerStats stats() const;

 private:
  struct Connection;
  friend class Session;

  Server(ServerConfig config, std::shared_ptr<ChunkStore> store,
         std::vector<std::unique_ptr<Table>> tables, Listener listener,
         ItemKey first_item_key);

  void AcceptLoop();
  void Handle(uint64_t id, Connection* connection);
  // Joins handler threads that have finished.
  void Reap();

  const ServerConfig config_;
  const std::shared_ptr<ChunkStore> store_;
  const std::vector<std::unique_ptr<Table>> tables_;
  absl::flat_hash_map<std::string, Table*> by_name_;
  std::unique_ptr<Checkpointer> checkpointer_;
  Listener listener_;
  std::thread accept_thread_;

  std::atomic<ItemKey> next_item_key_;
  std::atomic<bool> stopping_{false};

  mutable absl::Mutex mu_;
  absl::flat_hash_map<uint64_t, std::shared_ptr<Connection>> connections_
      ABSL_GUARDED_BY(mu_);
  std::vector<uint64_t> finished_ ABSL_GUARDED_BY(mu_);
  uint64_t next_connection_id_ ABSL_GUARDED_BY(mu_) = 0;
  bool stopped_ ABSL_GUARDED_BY(mu_) = false;

  std::atomic<int64_t> connections_accepted_{0};
  std::atomic<int64_t> connections_refused_{0};
  std::atomic<int64_t> insert_chunk_frames_{0};
  std::atomic<int64_t> create_item_frames_{0};
  std::atomic<int64_t> sample_responses_{0};
  std::atomic<int64_t> max_unacked_responses_{0};
};

}  // namespace relay

#endif  // RELAY_SERVER_H_
