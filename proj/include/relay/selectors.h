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

#ifndef RELAY_SELECTORS_H_
#define RELAY_SELECTORS_H_

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace relay {

using ItemKey = uint64_t;

// Numeric values are used as checkpoint type tags.
enum class SelectorType : uint8_t {
  kFifo = 0,
  kLifo = 1,
  kUniform = 2,
  kMaxHeap = 3,
  kMinHeap = 4,
  kPrioritized = 5,
};

struct SelectorOptions {
  SelectorType type = SelectorType::kUniform;
  // Exponent C applied to priorities; only read by kPrioritized.
  double priority_exponent = 1.0;

  static SelectorOptions Fifo() { return {SelectorType::kFifo}; }
  static SelectorOptions Lifo() { return {SelectorType::kLifo}; }
  static SelectorOptions Uniform() { return {SelectorType::kUniform}; }
  static SelectorOptions MaxHeap() { return {SelectorType::kMaxHeap}; }
  static SelectorOptions MinHeap() { return {SelectorType::kMinHeap}; }
  static SelectorOptions Prioritized(double exponent = 1.0) {
    return {SelectorType::kPrioritized, exponent};
  }

  std::string DebugString() const;
  bool operator==(const SelectorOptions& other) const = default;
};

absl::string_view SelectorTypeName(SelectorType type);
absl::StatusOr<SelectorType> SelectorTypeFromName(absl::string_view name);
absl::StatusOr<SelectorType> SelectorTypeFromCode(uint8_t code);

struct SelectorEvent {
  enum class Kind { kInserted, kUpdated, kDeleted };
  Kind kind;
  ItemKey key;
  double priority = 0;  // Ignored for kDeleted.
};

struct SelectionResult {
  ItemKey key;
  // Exact selection probability under the state at selection time; 1.0 for
  // the deterministic strategies.
  double probability;
};

// Strategy that picks one key out of a table's key set. The state is built
// solely from observed table operations (keys, priorities, insertion order),
// never from item contents. Not thread-safe: the owning table serializes
// all calls.
class Selector {
 public:
  virtual ~Selector() = default;

  // Insert fails on duplicate keys; Update/Delete fail on unknown keys. Both
  // are internal-consistency errors. Priorities must be finite and >= 0.
  virtual absl::Status Insert(ItemKey key, double priority) = 0;
  virtual absl::Status Update(ItemKey key, double priority) = 0;
  virtual absl::Status Delete(ItemKey key) = 0;

  absl::Status Observe(const SelectorEvent& event);

  // `draw` is uniform in [0, 1). FailedPrecondition when empty.
  virtual absl::StatusOr<SelectionResult> Select(double draw) const = 0;

  virtual size_t size() const = 0;
  virtual bool Contains(ItemKey key) const = 0;

  // (key, priority) pairs in insertion order.
  virtual std::vector<std::pair<ItemKey, double>> Entries() const = 0;

  virtual void Clear() = 0;

  const SelectorOptions& options() const { return options_; }

 protected:
  explicit Selector(SelectorOptions options) : options_(options) {}

  const SelectorOptions options_;
};

absl::StatusOr<std::unique_ptr<Selector>> MakeSelector(
    const SelectorOptions& options);

}  // namespace relay

#endif  // RELAY_SELECTORS_H_
