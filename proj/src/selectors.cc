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

#include "relay/selectors.h"

#include <algorithm>
#include <cmath>
#include <list>
#include <set>

#include "absl/container/flat_hash_map.h"
#include "absl/strings/str_cat.h"
#include "relay/status_macros.h"

namespace relay {

namespace {

constexpr absl::string_view kTypeNames[] = {"fifo",     "lifo",     "uniform",
                                           "max_heap", "min_heap", "prioritized"};

absl::Status CheckPriority(double priority) {
  if (!std::isfinite(priority) || priority < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("priority must be finite and >= 0, got ", priority));
  }
  return absl::OkStatus();
}

absl::Status DuplicateKey(ItemKey key) {
  return absl::InternalError(absl::StrCat("selector already holds key ", key));
}

absl::Status UnknownKey(ItemKey key) {
  return absl::InternalError(absl::StrCat("selector has no key ", key));
}

absl::Status Empty() {
  return absl::FailedPreconditionError("select called on an empty selector");
}

size_t ScaleDraw(double draw, size_t n) {
  return std::min(n - 1, static_cast<size_t>(draw * static_cast<double>(n)));
}

// FIFO and LIFO share one ordered list; they differ only in which end
// Select reads.
class OrderedSelector : public Selector {
 public:
  OrderedSelector(SelectorOptions options, bool newest_first)
      : Selector(options), newest_first_(newest_first) {}

  absl::Status Insert(ItemKey key, double priority) override {
    RELAY_RETURN_IF_ERROR(CheckPriority(priority));
    if (index_.contains(key)) return DuplicateKey(key);
    order_.push_back(key);
    index_.emplace(key, Slot{std::prev(order_.end()), priority});
    return absl::OkStatus();
  }

  absl::Status Update(ItemKey key, double priority) override {
    RELAY_RETURN_IF_ERROR(CheckPriority(priority));
    auto it = index_.find(key);
    if (it == index_.end()) return UnknownKey(key);
    it->second.priority = priority;
    return absl::OkStatus();
  }

  absl::Status Delete(ItemKey key) override {
    auto it = index_.find(key);
    if (it == index_.end()) return UnknownKey(key);
    order_.erase(it->second.pos);
    index_.erase(it);
    return absl::OkStatus();
  }

  absl::StatusOr<SelectionResult> Select(double) const override {
    if (order_.empty()) return Empty();
    return SelectionResult{newest_first_ ? order_.back() : order_.front(), 1.0};
  }

  size_t size() const override { return order_.size(); }
  bool Contains(ItemKey key) const override { return index_.contains(key); }

  std::vector<std::pair<ItemKey, double>> Entries() const override {
    std::vector<std::pair<ItemKey, double>> out;
    out.reserve(order_.size());
    for (ItemKey key : order_) out.emplace_back(key, index_.at(key).priority);
    return out;
  }

  void Clear() override {
    order_.clear();
    index_.clear();
  }

 private:
  struct Slot {
    std::list<ItemKey>::iterator pos;
    double priority;
  };

  const bool newest_first_;
  std::list<ItemKey> order_;
  absl::flat_hash_map<ItemKey, Slot> index_;
};

// Shared bookkeeping for the strategies whose internal order is not the
// insertion order: remembers each key's priority and insertion sequence.
class SequencedSelector : public Selector {
 protected:
  using Selector::Selector;

  struct Meta {
    double priority;
    uint64_t seq;
  };

  std::vector<std::pair<ItemKey, double>> SortedEntries() const {
    std::vector<std::pair<uint64_t, std::pair<ItemKey, double>>> tmp;
    tmp.reserve(meta_.size());
    for (const auto& [key, m] : meta_) tmp.push_back({m.seq, {key, m.priority}});
    std::sort(tmp.begin(), tmp.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<ItemKey, double>> out;
    out.reserve(tmp.size());
    for (auto& [seq, entry] : tmp) out.push_back(entry);
    return out;
  }

  absl::flat_hash_map<ItemKey, Meta> meta_;
  uint64_t next_seq_ = 0;
};

class UniformSelector : public SequencedSelector {
 public:
  explicit UniformSelector(SelectorOptions options)
      : SequencedSelector(options) {}

  absl::Status Insert(ItemKey key, double priority) override {
    RELAY_RETURN_IF_ERROR(CheckPriority(priority));
    if (meta_.contains(key)) return DuplicateKey(key);
    meta_.emplace(key, Meta{priority, next_seq_++});
    position_.emplace(key, keys_.size());
    keys_.push_back(key);
    return absl::OkStatus();
  }

  absl::Status Update(ItemKey key, double priority) override {
    RELAY_RETURN_IF_ERROR(CheckPriority(priority));
    auto it = meta_.find(key);
    if (it == meta_.end()) return UnknownKey(key);
    it->second.priority = priority;
    return absl::OkStatus();
  }

  absl::Status Delete(ItemKey key) override {
    auto it = position_.find(key);
    if (it == position_.end()) return UnknownKey(key);
    const size_t pos = it->second;
    const ItemKey last = keys_.back();
    keys_[pos] = last;
    position_[last] = pos;
    keys_.pop_back();
    position_.erase(key);
    meta_.erase(key);
    return absl::OkStatus();
  }

  absl::StatusOr<SelectionResult> Select(double draw) const override {
    if (keys_.empty()) return Empty();
    return SelectionResult{keys_[ScaleDraw(draw, keys_.size())],
                           1.0 / static_cast<double>(keys_.size())};
  }

  size_t size() const override { return keys_.size(); }
  bool Contains(ItemKey key) const override { return meta_.contains(key); }
  std::vector<std::pair<ItemKey, double>> Entries() const override {
    return SortedEntries();
  }

  void Clear() override {
    keys_.clear();
    position_.clear();
    meta_.clear();
  }

 private:
  std::vector<ItemKey> keys_;
  absl::flat_hash_map<ItemKey, size_t> position_;
};

// Max- or min-priority first; equal priorities resolve to the oldest insert.
class HeapSelector : public SequencedSelector {
 public:
  HeapSelector(SelectorOptions options, bool max_first)
      : SequencedSelector(options), heap_(Order{max_first}) {}

  absl::Status Insert(ItemKey key, double priority) override {
    RELAY_RETURN_IF_ERROR(CheckPriority(priority));
    if (meta_.contains(key)) return DuplicateKey(key);
    const uint64_t seq = next_seq_++;
    meta_.emplace(key, Meta{priority, seq});
    heap_.insert(Node{priority, seq, key});
    return absl::OkStatus();
  }

  absl::Status Update(ItemKey key, double priority) override {
    RELAY_RETURN_IF_ERROR(CheckPriority(priority));
    auto it = meta_.find(key);
    if (it == meta_.end()) return UnknownKey(key);
    heap_.erase(Node{it->second.priority, it->second.seq, key});
    it->second.priority = priority;
    heap_.insert(Node{priority, it->second.seq, key});
    return absl::OkStatus();
  }

  absl::Status Delete(ItemKey key) override {
    auto it = meta_.find(key);
    if (it == meta_.end()) return UnknownKey(key);
    heap_.erase(Node{it->second.priority, it->second.seq, key});
    meta_.erase(it);
    return absl::OkStatus();
  }

  absl::StatusOr<SelectionResult> Select(double) const override {
    if (heap_.empty()) return Empty();
    return SelectionResult{heap_.begin()->key, 1.0};
  }

  size_t size() const override { return heap_.size(); }
  bool Contains(ItemKey key) const override { return meta_.contains(key); }
  std::vector<std::pair<ItemKey, double>> Entries() const override {
    return SortedEntries();
  }

  void Clear() override {
    heap_.clear();
    meta_.clear();
  }

 private:
  struct Node {
    double priority;
    uint64_t seq;
    ItemKey key;
  };
  struct Order {
    bool max_first;
    bool operator()(const Node& a, const Node& b) const {
      if (a.priority != b.priority) {
        return max_first ? a.priority > b.priority : a.priority < b.priority;
      }
      return a.seq < b.seq;
    }
  };

  std::set<Node, Order> heap_;
};

// Sum tree over priority^C. Leaves are dense slots [0, n); deleting moves the
// last slot into the hole so the tree never fragments.
class PrioritizedSelector : public SequencedSelector {
 public:
  explicit PrioritizedSelector(SelectorOptions options)
      : SequencedSelector(options), tree_(2 * capacity_, 0.0) {}

  absl::Status Insert(ItemKey key, double priority) override {
    RELAY_RETURN_IF_ERROR(CheckPriority(priority));
    if (meta_.contains(key)) return DuplicateKey(key);
    if (slots_.size() == capacity_) Grow();
    meta_.emplace(key, Meta{priority, next_seq_++});
    slot_of_.emplace(key, slots_.size());
    slots_.push_back(key);
    SetWeight(slots_.size() - 1, Weight(priority));
    return absl::OkStatus();
  }

  absl::Status Update(ItemKey key, double priority) override {
    RELAY_RETURN_IF_ERROR(CheckPriority(priority));
    auto it = meta_.find(key);
    if (it == meta_.end()) return UnknownKey(key);
    it->second.priority = priority;
    SetWeight(slot_of_.at(key), Weight(priority));
    return absl::OkStatus();
  }

  absl::Status Delete(ItemKey key) override {
    auto it = slot_of_.find(key);
    if (it == slot_of_.end()) return UnknownKey(key);
    const size_t hole = it->second;
    const size_t last = slots_.size() - 1;
    if (hole != last) {
      const ItemKey moved = slots_[last];
      slots_[hole] = moved;
      slot_of_[moved] = hole;
      SetWeight(hole, tree_[capacity_ + last]);
    }
    SetWeight(last, 0.0);
    slots_.pop_back();
    slot_of_.erase(it);
    meta_.erase(key);
    return absl::OkStatus();
  }

  absl::StatusOr<SelectionResult> Select(double draw) const override {
    if (slots_.empty()) return Empty();
    const double total = tree_[1];
    if (!(total > 0)) {
      // Every priority is zero: fall back to uniform.
      return SelectionResult{slots_[ScaleDraw(draw, slots_.size())],
                             1.0 / static_cast<double>(slots_.size())};
    }
    double target = draw * total;
    size_t node = 1;
    while (node < capacity_) {
      const size_t left = 2 * node;
      if (target < tree_[left] || !(tree_[left + 1] > 0)) {
        node = left;
      } else {
        target -= tree_[left];
        node = left + 1;
      }
    }
    const size_t slot = node - capacity_;
    return SelectionResult{slots_[slot], tree_[node] / total};
  }

  size_t size() const override { return slots_.size(); }
  bool Contains(ItemKey key) const override { return meta_.contains(key); }
  std::vector<std::pair<ItemKey, double>> Entries() const override {
    return SortedEntries();
  }

  void Clear() override {
    slots_.clear();
    slot_of_.clear();
    meta_.clear();
    std::fill(tree_.begin(), tree_.end(), 0.0);
  }

 private:
  // Zero priorities stay unselectable even when C == 0.
  double Weight(double priority) const {
    if (priority == 0) return 0.0;
    return std::pow(priority, options_.priority_exponent);
  }

  void SetWeight(size_t slot, double weight) {
    size_t node = capacity_ + slot;
    tree_[node] = weight;
    for (node /= 2; node >= 1; node /= 2) {
      tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
    }
  }

  void Grow() {
    const size_t old_capacity = capacity_;
    capacity_ *= 2;
    std::vector<double> tree(2 * capacity_, 0.0);
    std::copy(tree_.begin() + old_capacity, tree_.begin() + 2 * old_capacity,
              tree.begin() + capacity_);
    for (size_t node = capacity_ - 1; node >= 1; --node) {
      tree[node] = tree[2 * node] + tree[2 * node + 1];
    }
    tree_ = std::move(tree);
  }

  size_t capacity_ = 16;
  std::vector<double> tree_;
  std::vector<ItemKey> slots_;
  absl::flat_hash_map<ItemKey, size_t> slot_of_;
};

}  // namespace

absl::string_view SelectorTypeName(SelectorType type) {
  return kTypeNames[static_cast<uint8_t>(type)];
}

absl::StatusOr<SelectorType> SelectorTypeFromName(absl::string_view name) {
  for (uint8_t i = 0; i < std::size(kTypeNames); ++i) {
    if (kTypeNames[i] == name) return static_cast<SelectorType>(i);
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown selector type '", name, "'"));
}

absl::StatusOr<SelectorType> SelectorTypeFromCode(uint8_t code) {
  if (code >= std::size(kTypeNames)) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown selector type code ", code));
  }
  return static_cast<SelectorType>(code);
}

std::string SelectorOptions::DebugString() const {
  if (type == SelectorType::kPrioritized) {
    return absl::StrCat(SelectorTypeName(type), "(", priority_exponent, ")");
  }
  return std::string(SelectorTypeName(type));
}

absl::Status Selector::Observe(const SelectorEvent& event) {
  switch (event.kind) {
    case SelectorEvent::Kind::kInserted:
      return Insert(event.key, event.priority);
    case SelectorEvent::Kind::kUpdated:
      return Update(event.key, event.priority);
    case SelectorEvent::Kind::kDeleted:
      return Delete(event.key);
  }
  return absl::InternalError("unknown selector event");
}

absl::StatusOr<std::unique_ptr<Selector>> MakeSelector(
    const SelectorOptions& options) {
  switch (options.type) {
    case SelectorType::kFifo:
      return std::make_unique<OrderedSelector>(options, false);
    case SelectorType::kLifo:
      return std::make_unique<OrderedSelector>(options, true);
    case SelectorType::kUniform:
      return std::make_unique<UniformSelector>(options);
    case SelectorType::kMaxHeap:
      return std::make_unique<HeapSelector>(options, true);
    case SelectorType::kMinHeap:
      return std::make_unique<HeapSelector>(options, false);
    case SelectorType::kPrioritized:
      if (!std::isfinite(options.priority_exponent) ||
          options.priority_exponent < 0) {
        return absl::InvalidArgumentError(
            absl::StrCat("priority exponent must be finite and >= 0, got ",
                         options.priority_exponent));
      }
      return std::make_unique<PrioritizedSelector>(options);
  }
  return absl::InvalidArgumentError("unknown selector type");
}

}  // namespace relay
