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

#include "relay/chunk_store.h"

#include "absl/strings/str_cat.h"
#include "relay/status_macros.h"

namespace relay {

ChunkStore::ChunkStore() : ChunkStore(Options()) {}

ChunkStore::ChunkStore(Options options)
    : options_(options), shards_(std::max(1, options.num_shards)) {
  if (options_.background_reclaimer) {
    reclaimer_ = std::thread([this] { ReclaimerLoop(); });
  }
}

ChunkStore::~ChunkStore() {
  {
    absl::MutexLock lock(&drop_mu_);
    stopping_ = true;
  }
  if (reclaimer_.joinable()) reclaimer_.join();
  Reclaim();
}

void ChunkStore::Insert(std::shared_ptr<const Chunk> chunk) {
  const ChunkKey key = chunk->key();
  Shard& shard = ShardFor(key);
  absl::MutexLock lock(&shard.mu);
  shard.entries.try_emplace(key, Entry{std::move(chunk), 0});
}

int64_t ChunkStore::Acquire(const std::shared_ptr<const Chunk>& chunk) {
  Shard& shard = ShardFor(chunk->key());
  absl::MutexLock lock(&shard.mu);
  auto [it, inserted] = shard.entries.try_emplace(chunk->key(), Entry{chunk, 0});
  return ++it->second.refs;
}

absl::StatusOr<int64_t> ChunkStore::AddRef(ChunkKey key) {
  Shard& shard = ShardFor(key);
  absl::MutexLock lock(&shard.mu);
  auto it = shard.entries.find(key);
  if (it == shard.entries.end()) {
    return absl::NotFoundError(absl::StrCat("chunk ", key, " not in store"));
  }
  return ++it->second.refs;
}

int64_t ChunkStore::ReleaseRef(ChunkKey key) {
  std::shared_ptr<const Chunk> dropped;
  int64_t remaining;
  {
    Shard& shard = ShardFor(key);
    absl::MutexLock lock(&shard.mu);
    auto it = shard.entries.find(key);
    RELAY_CHECK(it != shard.entries.end());
    RELAY_CHECK(it->second.refs > 0);
    remaining = --it->second.refs;
    if (remaining == 0) {
      dropped = std::move(it->second.chunk);
      shard.entries.erase(it);
    }
  }
  if (dropped) Drop(std::move(dropped));
  return remaining;
}

absl::StatusOr<std::vector<std::shared_ptr<const Chunk>>> ChunkStore::Get(
    std::span<const ChunkKey> keys) const {
  std::vector<std::shared_ptr<const Chunk>> out;
  out.reserve(keys.size());
  for (ChunkKey key : keys) {
    Shard& shard = ShardFor(key);
    absl::MutexLock lock(&shard.mu);
    auto it = shard.entries.find(key);
    if (it == shard.entries.end()) {
      return absl::NotFoundError(absl::StrCat("chunk ", key, " not in store"));
    }
    out.push_back(it->second.chunk);
  }
  return out;
}

bool ChunkStore::Contains(ChunkKey key) const {
  Shard& shard = ShardFor(key);
  absl::MutexLock lock(&shard.mu);
  return shard.entries.contains(key);
}

std::optional<int64_t> ChunkStore::RefCount(ChunkKey key) const {
  Shard& shard = ShardFor(key);
  absl::MutexLock lock(&shard.mu);
  auto it = shard.entries.find(key);
  if (it == shard.entries.end()) return std::nullopt;
  return it->second.refs;
}

size_t ChunkStore::size() const {
  size_t total = 0;
  for (auto& shard : shards_) {
    absl::MutexLock lock(&shard.mu);
    total += shard.entries.size();
  }
  return total;
}

void ChunkStore::PruneUnreferenced(std::span<const ChunkKey> keys) {
  for (ChunkKey key : keys) {
    std::shared_ptr<const Chunk> dropped;
    {
      Shard& shard = ShardFor(key);
      absl::MutexLock lock(&shard.mu);
      auto it = shard.entries.find(key);
      if (it != shard.entries.end() && it->second.refs == 0) {
        dropped = std::move(it->second.chunk);
        shard.entries.erase(it);
      }
    }
    if (dropped) Drop(std::move(dropped));
  }
}

void ChunkStore::AdvanceKeysPast(ChunkKey key) {
  uint64_t current = next_key_.load();
  while (current < key && !next_key_.compare_exchange_weak(current, key)) {
  }
}

void ChunkStore::Drop(std::shared_ptr<const Chunk> chunk) {
  absl::MutexLock lock(&drop_mu_);
  drop_queue_.push_back(std::move(chunk));
}

size_t ChunkStore::pending_reclamation() const {
  absl::MutexLock lock(&drop_mu_);
  return drop_queue_.size() + in_reclaim_;
}

void ChunkStore::Reclaim() {
  std::deque<std::shared_ptr<const Chunk>> batch;
  {
    absl::MutexLock lock(&drop_mu_);
    batch.swap(drop_queue_);
    in_reclaim_ += batch.size();
  }
  const int64_t n = batch.size();
  batch.clear();
  reclaimed_.fetch_add(n);
  absl::MutexLock lock(&drop_mu_);
  in_reclaim_ -= n;
}

void ChunkStore::WaitForReclamation() {
  if (!options_.background_reclaimer) {
    Reclaim();
    return;
  }
  auto drained = [this]() ABSL_SHARED_LOCKS_REQUIRED(drop_mu_) {
    return drop_queue_.empty() && in_reclaim_ == 0;
  };
  absl::MutexLock lock(&drop_mu_);
  drop_mu_.Await(absl::Condition(&drained));
}

void ChunkStore::ReclaimerLoop() {
  auto ready = [this]() ABSL_SHARED_LOCKS_REQUIRED(drop_mu_) {
    return stopping_ || !drop_queue_.empty();
  };
  while (true) {
    {
      absl::MutexLock lock(&drop_mu_);
      drop_mu_.Await(absl::Condition(&ready));
      if (stopping_ && drop_queue_.empty()) return;
    }
    Reclaim();
  }
}

}  // namespace relay
