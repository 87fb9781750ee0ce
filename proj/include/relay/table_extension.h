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

#ifndef RELAY_TABLE_EXTENSION_H_
#define RELAY_TABLE_EXTENSION_H_

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "relay/chunk.h"
#include "relay/rate_limiter.h"
#include "relay/selectors.h"

namespace relay {

struct Item {
  ItemKey key = 0;
  double priority = 0;
  std::vector<ChunkKey> chunk_keys;
  // Rows skipped in the first chunk.
  int64_t offset = 0;
  // Total rows spanned across the chunks.
  int64_t length = 0;
  int32_t times_sampled = 0;

  bool operator==(const Item& other) const = default;
};

// What an extension sees. Counters and size already include the effect of
// the operation that triggered the callback.
struct TableEvent {
  const Item& item;
  // Chunk payloads for insert and sample events; empty otherwise.
  std::span<const std::shared_ptr<const Chunk>> chunks;
  int64_t table_size;
  RateLimiterCounters counters;
  double diff;
};

// Hooks executed atomically with the triggering table operation, while the
// table mutex is held. Implementations must be fast and must never call
// back into the table.
class TableExtension {
 public:
  virtual ~TableExtension() = default;

  virtual absl::string_view name() const = 0;

  virtual void OnInsert(const TableEvent&) {}
  virtual void OnSample(const TableEvent&) {}
  virtual void OnUpdate(const TableEvent&) {}
  virtual void OnDelete(const TableEvent&) {}
};

// Counts items and steps flowing through a table.
class StatsExtension : public TableExtension {
 public:
  struct Stats {
    int64_t items_inserted = 0;
    int64_t items_sampled = 0;
    int64_t items_updated = 0;
    int64_t items_deleted = 0;
    int64_t steps_inserted = 0;
    int64_t steps_sampled = 0;
    int64_t bytes_sampled = 0;
  };

  static constexpr absl::string_view kName = "stats";

  absl::string_view name() const override { return kName; }
  void OnInsert(const TableEvent& event) override;
  void OnSample(const TableEvent& event) override;
  void OnUpdate(const TableEvent& event) override;
  void OnDelete(const TableEvent& event) override;

  Stats stats() const;

 private:
  std::atomic<int64_t> items_inserted_{0};
  std::atomic<int64_t> items_sampled_{0};
  std::atomic<int64_t> items_updated_{0};
  std::atomic<int64_t> items_deleted_{0};
  std::atomic<int64_t> steps_inserted_{0};
  std::atomic<int64_t> steps_sampled_{0};
  std::atomic<int64_t> bytes_sampled_{0};
};

// Instantiates a built-in extension by its config name ("stats").
absl::StatusOr<std::shared_ptr<TableExtension>> MakeExtension(
    absl::string_view name);

}  // namespace relay

#endif  // RELAY_TABLE_EXTENSION_H_
