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

#include "relay/table_extension.h"

#include "absl/strings/str_cat.h"

namespace relay {

void StatsExtension::OnInsert(const TableEvent& event) {
  items_inserted_.fetch_add(1, std::memory_order_relaxed);
  steps_inserted_.fetch_add(event.item.length, std::memory_order_relaxed);
}

void StatsExtension::OnSample(const TableEvent& event) {
  items_sampled_.fetch_add(1, std::memory_order_relaxed);
  steps_sampled_.fetch_add(event.item.length, std::memory_order_relaxed);
  int64_t bytes = 0;
  for (const auto& chunk : event.chunks) bytes += chunk->compressed_bytes();
  bytes_sampled_.fetch_add(bytes, std::memory_order_relaxed);
}

void StatsExtension::OnUpdate(const TableEvent&) {
  items_updated_.fetch_add(1, std::memory_order_relaxed);
}

void StatsExtension::OnDelete(const TableEvent&) {
  items_deleted_.fetch_add(1, std::memory_order_relaxed);
}

StatsExtension::Stats StatsExtension::stats() const {
  Stats s;
  s.items_inserted = items_inserted_.load();
  s.items_sampled = items_sampled_.load();
  s.items_updated = items_updated_.load();
  s.items_deleted = items_deleted_.load();
  s.steps_inserted = steps_inserted_.load();
  s.steps_sampled = steps_sampled_.load();
  s.bytes_sampled = bytes_sampled_.load();
  return s;
}

absl::StatusOr<std::shared_ptr<TableExtension>> MakeExtension(
    absl::string_view name) {
  if (name == StatsExtension::kName) return std::make_shared<StatsExtension>();
  return absl::InvalidArgumentError(
      absl::StrCat("unknown table extension '", name, "'"));
}

}  // namespace relay
