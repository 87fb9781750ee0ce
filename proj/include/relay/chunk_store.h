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

#ifndef RELAY_CHUNK_STORE_H_
#define RELAY_CHUNK_STORE_H_

#include <atomic>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "absl/base/thread_annotations.h"
#include "absl/container/flat_hash_map.h"
#include "absl/status/statusor.h"
#include "absl/synchronization/mutex.h"
#include "relay/chunk.h"

namespace relay {

// Owns every chunk referenced by at least one item across all tables.
//
// Refcounts count item references only. When a count drops to zero the entry
// leaves the map immediately, but the payload is handed to a background
// reclaimer so that memory is never freed inside a table critical section.
class ChunkStore {
 public:
  struct Options {
    int num_shards = 16;
    // When false, released payloads stay queued until Reclaim() is called.
    bool background_reclaimer = true;
  };

  ChunkStore();
  explicit ChunkStore(Options options);
  ~ChunkStore();

  ChunkStore(const ChunkStore&) = delete;
  ChunkStore& operator=(const ChunkStore&) = delete;

  // Server-wide unique key; never reused within the process.
  ChunkKey NewKey() { return next_key_.fetch_add(1) + 1; }

  // Registers `chunk` with refcount 0 unless the key is already present.
  void Insert(std::shared_ptr<const Chunk> chunk);

  // Insert-if-absent followed by AddRef, atomically.
  int64_t Acquire(const std::shared_ptr<const Chunk>& chunk);

  // NotFound if the key is absent.
  absl::StatusOr<int64_t> AddRef(ChunkKey key);

  // Returns the new count. Releasing an absent key or a key whose count is
  // already zero is a broken invariant and aborts the process.
  int64_t ReleaseRef(ChunkKey key);

  // NotFound for any absent key; that always indicates a refcounting bug.
  absl::StatusOr<std::vector<std::shared_ptr<const Chunk>>> Get(
      std::span<const ChunkKey> keys) const;

  bool Contains(ChunkKey key) const;
  std::optional<int64_t> RefCount(ChunkKey key) const;
  size_t size() const;

  // Drops all entries that are still at refcount zero among `keys` (chunks
  // inserted for an item that was never created).
  void PruneUnreferenced(std::span<const ChunkKey> keys);

  // Blocks until every payload queued for reclamation has been freed.
  void WaitForReclamation();

  // Frees queued payloads on the calling thread.
  void Reclaim();

  int64_t reclaimed_count() const { return reclaimed_.load(); }
  size_t pending_reclamation() const;

  // Bumps the key counter past keys restored from a checkpoint.
  void AdvanceKeysPast(ChunkKey key);

 private:
  struct Entry {
    std::shared_ptr<const Chunk> chunk;
    int64_t refs = 0;
  };
  struct Shard {
    mutable absl::Mutex mu;
    absl::flat_hash_map<ChunkKey, Entry> entries ABSL_GUARDED_BY(mu);
  };

  Shard& ShardFor(ChunkKey key) const { return shards_[key % shards_.size()]; }
  void Drop(std::shared_ptr<const Chunk> chunk);
  void ReclaimerLoop();

  Options options_;
  mutable std::vector<Shard> shards_;
  std::atomic<uint64_t> next_key_{0};

  mutable absl::Mutex drop_mu_;
  std::deque<std::shared_ptr<const Chunk>> drop_queue_ ABSL_GUARDED_BY(drop_mu_);
  int64_t in_reclaim_ ABSL_GUARDED_BY(drop_mu_) = 0;
  bool stopping_ ABSL_GUARDED_BY(drop_mu_) = false;
  std::atomic<int64_t> reclaimed_{0};
  std::thread reclaimer_;
};

}  // namespace relay

#endif  // RELAY_CHUNK_STORE_H_
