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

#ifndef RELAY_TABLE_H_
#define RELAY_TABLE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/base/thread_annotations.h"
#include "absl/container/flat_hash_map.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "absl/synchronization/mutex.h"
#include "absl/time/time.h"
#include "relay/byte_io.h"
#include "relay/chunk_store.h"
#include "relay/rate_limiter.h"
#include "relay/selectors.h"
#include "relay/table_extension.h"

namespace relay {

struct TableConfig {
  std::string name;
  SelectorOptions sampler = SelectorOptions::Uniform();
  SelectorOptions remover = SelectorOptions::Fifo();
  int64_t max_size = 1;
  // 0 means items can be sampled any number of times.
  int32_t max_times_sampled = 0;
  RateLimiterConfig rate_limiter;
  // When set, every inserted chunk must carry exactly this signature.
  std::optional<Signature> signature;
  // Built-in extensions by name, instantiated in order.
  std::vector<std::string> extensions;
  uint64_t rng_seed = 0;

  absl::Status Validate() const;
  bool operator==(const TableConfig& other) const = default;
};

// Binary encodings shared by checkpoints and the wire protocol.
void EncodeSelectorOptions(const SelectorOptions& options, ByteWriter* writer);
absl::StatusOr<SelectorOptions> DecodeSelectorOptions(ByteReader* reader);
void EncodeRateLimiterConfig(const RateLimiterConfig& config,
                             ByteWriter* writer);
absl::StatusOr<RateLimiterConfig> DecodeRateLimiterConfig(ByteReader* reader);
void EncodeTableConfig(const TableConfig& config, ByteWriter* writer);
absl::StatusOr<TableConfig> DecodeTableConfig(ByteReader* reader);
void EncodeItem(const Item& item, ByteWriter* writer);
absl::StatusOr<Item> DecodeItem(ByteReader* reader);

// An item plus the chunks it references, as handed to InsertOrAssign.
struct TableItem {
  Item item;
  std::vector<std::shared_ptr<const Chunk>> chunks;
};

struct SampledItem {
  // Priority at sample time and times_sampled after the increment.
  Item item;
  double probability = 0;
  // Table size when the item was selected.
  int64_t table_size = 0;
  // True if this sample hit max_times_sampled and removed the item.
  bool retired = false;
  std::vector<std::shared_ptr<const Chunk>> chunks;
};

struct TableInfo {
  TableConfig config;
  int64_t size = 0;
  RateLimiterCounters counters;
  double diff = 0;
  int64_t blocked_inserts = 0;
  int64_t blocked_samples = 0;
};

// Everything needed to rebuild a table: produced under the table lock by the
// checkpointer and consumed by Table::Restore.
struct TableSnapshot {
  TableConfig config;
  RateLimiterCounters counters;
  // Insertion order.
  std::vector<Item> items;
  std::vector<std::pair<ItemKey, double>> sampler_entries;
  std::vector<std::pair<ItemKey, double>> remover_entries;
  // Every chunk referenced by `items`, each once.
  std::vector<std::shared_ptr<const Chunk>> chunks;
};

// A keyed collection of items guarded by one mutex. Sampling and removal are
// delegated to two selectors, admission to a rate limiter; both wait on the
// table's condition variables with an optional deadline.
class Table {
 public:
  static absl::StatusOr<std::unique_ptr<Table>> Create(
      TableConfig config, std::shared_ptr<ChunkStore> store,
      std::vector<std::shared_ptr<TableExtension>> extra_extensions = {});

  // Rebuilds a table from a snapshot; chunk refcounts are re-acquired and the
  // RNG is re-seeded from the config.
  static absl::StatusOr<std::unique_ptr<Table>> Restore(
      TableSnapshot snapshot, std::shared_ptr<ChunkStore> store,
      std::vector<std::shared_ptr<TableExtension>> extra_extensions = {});

  ~Table();

  Table(const Table&) = delete;
  Table& operator=(const Table&) = delete;

  const std::string& name() const { return config_.name; }
  const TableConfig& config() const { return config_; }

  // New key: waits for the rate limiter, evicts through the remover if the
  // table is full, then inserts. Existing key: updates the priority in place
  // without consulting the limiter. DeadlineExceeded leaves the table
  // unchanged.
  absl::Status InsertOrAssign(TableItem item,
                              absl::Duration timeout = absl::InfiniteDuration());

  // Selects `n` items, each selection individually atomic. On timeout the
  // items collected so far stay in `out` and DeadlineExceeded is returned.
  absl::Status Sample(int64_t n, absl::Duration timeout,
                      std::vector<SampledItem>* out);

  absl::StatusOr<SampledItem> SampleOne(
      absl::Duration timeout = absl::InfiniteDuration());

  // Unknown keys are skipped. Returns how many updates were applied.
  absl::StatusOr<int64_t> UpdatePriorities(
      std::span<const std::pair<ItemKey, double>> updates);

  absl::Status Delete(ItemKey key);

  int64_t size() const;
  TableInfo info() const;
  std::vector<Item> Copy() const;
  bool Contains(ItemKey key) const;

  // Checks selector key sets against the table, chunk residency and the
  // size == inserts - deletes identity.
  absl::Status Audit() const;

  // Wakes every blocked call with Cancelled and rejects new ones.
  void Close();

  // Checkpoint protocol: lock, snapshot, unlock. While locked, every mutating
  // call blocks on the table mutex.
  void LockForCheckpoint() ABSL_EXCLUSIVE_LOCK_FUNCTION(mu_);
  TableSnapshot SnapshotLocked() const ABSL_EXCLUSIVE_LOCKS_REQUIRED(mu_);
  void UnlockAfterCheckpoint() ABSL_UNLOCK_FUNCTION(mu_);

  std::shared_ptr<TableExtension> extension(absl::string_view name) const;

  // Direct selector access for consistency tests. Bypasses the lock.
  Selector* TestOnlySampler() { return sampler_.get(); }

 private:
  struct Record {
    Item item;
    uint64_t seq;
  };

  Table(TableConfig config, std::shared_ptr<ChunkStore> store,
        std::unique_ptr<Selector> sampler, std::unique_ptr<Selector> remover,
        std::vector<std::shared_ptr<TableExtension>> extensions);

  absl::Status ValidateItem(const TableItem& item) const;
  double NextDraw() ABSL_EXCLUSIVE_LOCKS_REQUIRED(mu_);
  TableEvent MakeEvent(const Item& item,
                       std::span<const std::shared_ptr<const Chunk>> chunks)
      const ABSL_EXCLUSIVE_LOCKS_REQUIRED(mu_);
  void InsertLocked(TableItem item) ABSL_EXCLUSIVE_LOCKS_REQUIRED(mu_);
  absl::Status DeleteLocked(ItemKey key) ABSL_EXCLUSIVE_LOCKS_REQUIRED(mu_);
  absl::Status AssignLocked(const Item& item) ABSL_EXCLUSIVE_LOCKS_REQUIRED(mu_);

  const TableConfig config_;
  const std::shared_ptr<ChunkStore> store_;

  mutable absl::Mutex mu_;
  absl::CondVar insert_cv_;
  absl::CondVar sample_cv_;
  std::unique_ptr<Selector> sampler_ ABSL_GUARDED_BY(mu_);
  std::unique_ptr<Selector> remover_ ABSL_GUARDED_BY(mu_);
  RateLimiter limiter_ ABSL_GUARDED_BY(mu_);
  absl::flat_hash_map<ItemKey, Record> items_ ABSL_GUARDED_BY(mu_);
  uint64_t next_seq_ ABSL_GUARDED_BY(mu_) = 0;
  std::mt19937_64 rng_ ABSL_GUARDED_BY(mu_);
  int64_t blocked_inserts_ ABSL_GUARDED_BY(mu_) = 0;
  int64_t blocked_samples_ ABSL_GUARDED_BY(mu_) = 0;
  bool closed_ ABSL_GUARDED_BY(mu_) = false;
  const std::vector<std::shared_ptr<TableExtension>> extensions_;
};

}  // namespace relay

#endif  // RELAY_TABLE_H_
