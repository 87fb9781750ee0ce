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

#ifndef RELAY_CHECKPOINT_H_
#define RELAY_CHECKPOINT_H_

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "relay/chunk_store.h"
#include "relay/codec.h"
#include "relay/table.h"

namespace relay {

inline constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointMetadata {
  Codec codec = kDefaultCodec;
  int64_t created_unix_millis = 0;
};

// Decoded file contents. Every TableSnapshot::chunks holds pointers into one
// shared chunk section, so a chunk referenced by several tables is decoded
// once.
struct CheckpointData {
  CheckpointMetadata metadata;
  std::vector<TableSnapshot> tables;
};

// magic (8 bytes), version (u32), metadata, table blocks, chunk block, then a
// SHA-256 over everything before it.
std::vector<uint8_t> EncodeCheckpoint(const CheckpointData& data);
absl::StatusOr<CheckpointData> DecodeCheckpoint(std::span<const uint8_t> bytes);

absl::StatusOr<CheckpointData> ReadCheckpointFile(const std::string& path);

// Accepts a checkpoint file or a directory; for a directory the newest
// checkpoint inside it is chosen.
absl::StatusOr<std::string> ResolveCheckpointPath(const std::string& path);

// Builds tables from decoded contents. The store's key counter is advanced
// past every restored chunk key.
absl::StatusOr<std::vector<std::unique_ptr<Table>>> RestoreTables(
    CheckpointData data, std::shared_ptr<ChunkStore> store);

struct CheckpointInfo {
  std::string id;
  std::string path;
};

class Checkpointer {
 public:
  explicit Checkpointer(std::string directory, int keep_latest = 1);

  // Locks every table in name order, snapshots and writes while holding the
  // locks, then releases them. Writes go to a temporary file that is renamed
  // into place; on failure nothing is left behind.
  absl::StatusOr<CheckpointInfo> Save(std::span<Table* const> tables);

  const std::string& directory() const { return directory_; }

 private:
  absl::Status WriteAtomically(const std::string& path,
                               std::span<const uint8_t> bytes);
  void PruneOld();

  const std::string directory_;
  const int keep_latest_;
  std::atomic<uint32_t> sequence_{0};
};

}  // namespace relay

#endif  // RELAY_CHECKPOINT_H_
