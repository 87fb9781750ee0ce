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

#include <cmath>
#include <map>
#include <random>

#include "gtest/gtest.h"

namespace relay {
namespace {

std::unique_ptr<Selector> Make(SelectorOptions options) {
  auto s = MakeSelector(options);
  EXPECT_TRUE(s.ok()) << s.status();
  return *std::move(s);
}

const SelectorOptions kAll[] = {
    SelectorOptions::Fifo(),    SelectorOptions::Lifo(),
    SelectorOptions::Uniform(), SelectorOptions::MaxHeap(),
    SelectorOptions::MinHeap(), SelectorOptions::Prioritized(0.7),
};

TEST(SelectorTest, NamesRoundTrip) {
  for (const auto& o : kAll) {
    auto t = SelectorTypeFromName(SelectorTypeName(o.type));
    ASSERT_TRUE(t.ok());
    EXPECT_EQ(*t, o.type);
    EXPECT_EQ(*SelectorTypeFromCode(static_cast<uint8_t>(o.type)), o.type);
  }
  EXPECT_FALSE(SelectorTypeFromName("random").ok());
  EXPECT_FALSE(SelectorTypeFromCode(6).ok());
}

TEST(SelectorTest, InsertThenDeleteEmpties) {
  for (const auto& o : kAll) {
    auto s = Make(o);
    ASSERT_TRUE(s->Insert(1, 1).ok());
    ASSERT_TRUE(s->Delete(1).ok());
    EXPECT_EQ(s->size(), 0);
    EXPECT_EQ(s->Select(0.5).status().code(),
              absl::StatusCode::kFailedPrecondition);
  }
}

TEST(SelectorTest, ConsistencyErrors) {
  for (const auto& o : kAll) {
    auto s = Make(o);
    ASSERT_TRUE(s->Insert(1, 1).ok());
    EXPECT_EQ(s->Insert(1, 2).code(), absl::StatusCode::kInternal);
    EXPECT_EQ(s->Update(2, 2).code(), absl::StatusCode::kInternal);
    EXPECT_EQ(s->Delete(2).code(), absl::StatusCode::kInternal);
    EXPECT_FALSE(s->Insert(3, -1).ok());
    EXPECT_FALSE(s->Insert(3, std::nan("")).ok());
    EXPECT_FALSE(s->Update(1, INFINITY).ok());
    EXPECT_EQ(s->size(), 1);
  }
}

TEST(SelectorTest, ObserveDispatches) {
  auto s = Make(SelectorOptions::Prioritized());
  using K = SelectorEvent::Kind;
  ASSERT_TRUE(s->Observe({K::kInserted, 5, 2}).ok());
  ASSERT_TRUE(s->Observe({K::kUpdated, 5, 5}).ok());
  ASSERT_EQ(s->Entries().size(), 1);
  EXPECT_EQ(s->Entries()[0].second, 5);
  ASSERT_TRUE(s->Observe({K::kDeleted, 5}).ok());
  EXPECT_EQ(s->size(), 0);
}

TEST(SelectorTest, FifoAndLifo) {
  auto fifo = Make(SelectorOptions::Fifo());
  auto lifo = Make(SelectorOptions::Lifo());
  for (ItemKey k : {1, 2, 3}) {
    ASSERT_TRUE(fifo->Insert(k, 0).ok());
    ASSERT_TRUE(lifo->Insert(k, 0).ok());
  }
  EXPECT_EQ(fifo->Select(0.9)->key, 1);
  EXPECT_EQ(fifo->Select(0.9)->probability, 1.0);
  EXPECT_EQ(lifo->Select(0.1)->key, 3);
  ASSERT_TRUE(fifo->Delete(1).ok());
  ASSERT_TRUE(lifo->Delete(3).ok());
  EXPECT_EQ(fifo->Select(0)->key, 2);
  EXPECT_EQ(lifo->Select(0)->key, 2);
  // Updating a priority does not move an item in insertion order.
  ASSERT_TRUE(fifo->Update(2, 100).ok());
  EXPECT_EQ(fifo->Select(0)->key, 2);
}

TEST(SelectorTest, HeapsWithTies) {
  auto max = Make(SelectorOptions::MaxHeap());
  auto min = Make(SelectorOptions::MinHeap());
  const std::pair<ItemKey, double> items[] = {{1, 1}, {2, 3}, {3, 2}, {4, 3}, {5, 1}};
  for (auto [k, p] : items) {
    ASSERT_TRUE(max->Insert(k, p).ok());
    ASSERT_TRUE(min->Insert(k, p).ok());
  }
  EXPECT_EQ(max->Select(0.5)->key, 2);
  EXPECT_EQ(min->Select(0.5)->key, 1);
  ASSERT_TRUE(max->Delete(2).ok());
  EXPECT_EQ(max->Select(0.5)->key, 4);
  ASSERT_TRUE(max->Update(5, 10).ok());
  EXPECT_EQ(max->Select(0.5)->key, 5);
  ASSERT_TRUE(min->Update(1, 10).ok());
  EXPECT_EQ(min->Select(0.5)->key, 5);
}

TEST(SelectorTest, UniformExactProbability) {
  auto s = Make(SelectorOptions::Uniform());
  for (ItemKey k = 1; k <= 4; ++k) ASSERT_TRUE(s->Insert(k, k).ok());
  std::map<ItemKey, int> seen;
  for (int i = 0; i < 4; ++i) {
    auto r = s->Select((i + 0.5) / 4);
    EXPECT_EQ(r->probability, 0.25);
    seen[r->key]++;
  }
  EXPECT_EQ(seen.size(), 4);
}

// Oracle: direct evaluation of p_i^C / sum_k p_k^C.
std::map<ItemKey, double> Formula(
    const std::vector<std::pair<ItemKey, double>>& items, double c) {
  double total = 0;
  for (auto [k, p] : items) total += std::pow(p, c);
  std::map<ItemKey, double> out;
  for (auto [k, p] : items) out[k] = std::pow(p, c) / total;
  return out;
}

TEST(PrioritizedTest, TwoItemsExact) {
  auto s = Make(SelectorOptions::Prioritized(1.0));
  ASSERT_TRUE(s->Insert(1, 1).ok());
  ASSERT_TRUE(s->Insert(2, 3).ok());
  EXPECT_NEAR(s->Select(0.9)->probability, 0.75, 1e-12);
  EXPECT_EQ(s->Select(0.9)->key, 2);
  EXPECT_EQ(s->Select(0.1)->key, 1);
  EXPECT_NEAR(s->Select(0.1)->probability, 0.25, 1e-12);
}

TEST(PrioritizedTest, MonteCarloWithinThreeSigma) {
  for (double c : {1.0, 0.5, 2.0, 0.0}) {
    auto s = Make(SelectorOptions::Prioritized(c));
    std::vector<std::pair<ItemKey, double>> items;
    std::mt19937_64 rng(c * 100 + 1);
    std::uniform_real_distribution<double> pri(0.1, 10);
    for (ItemKey k = 1; k <= 12; ++k) {
      items.push_back({k, pri(rng)});
      ASSERT_TRUE(s->Insert(k, items.back().second).ok());
    }
    auto expected = Formula(items, c);
    constexpr int kDraws = 100000;
    std::map<ItemKey, int> counts;
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < kDraws; ++i) {
      auto r = s->Select(u(rng));
      ASSERT_TRUE(r.ok());
      ASSERT_NEAR(r->probability, expected[r->key], 1e-9);
      counts[r->key]++;
    }
    for (auto [k, p] : expected) {
      double sigma = std::sqrt(p * (1 - p) / kDraws);
      EXPECT_NEAR(counts[k] / double{kDraws}, p, 3 * sigma)
          << "key " << k << " C=" << c;
    }
  }
}

TEST(PrioritizedTest, ZeroPriorityUnselectableUnlessAllZero) {
  auto s = Make(SelectorOptions::Prioritized());
  ASSERT_TRUE(s->Insert(1, 0).ok());
  ASSERT_TRUE(s->Insert(2, 0).ok());
  // All zero: uniform fallback.
  EXPECT_EQ(s->Select(0.1)->key, 1);
  EXPECT_EQ(s->Select(0.9)->key, 2);
  EXPECT_EQ(s->Select(0.9)->probability, 0.5);
  ASSERT_TRUE(s->Insert(3, 2).ok());
  for (double d = 0; d < 1; d += 0.01) {
    auto r = s->Select(d);
    EXPECT_EQ(r->key, 3);
    EXPECT_EQ(r->probability, 1.0);
  }
}

TEST(PrioritizedTest, UpdateChangesDistribution) {
  auto s = Make(SelectorOptions::Prioritized());
  ASSERT_TRUE(s->Insert(1, 5).ok());
  ASSERT_TRUE(s->Insert(2, 1).ok());
  ASSERT_TRUE(s->Update(2, 5).ok());
  EXPECT_NEAR(s->Select(0.2)->probability, 0.5, 1e-12);
}

// Many updates must not let floating-point drift creep into the tree sums.
TEST(PrioritizedTest, LongUpdateSequenceStaysExact) {
  auto s = Make(SelectorOptions::Prioritized());
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> pri(0, 1e6);
  for (ItemKey k = 1; k <= 100; ++k) ASSERT_TRUE(s->Insert(k, pri(rng)).ok());
  for (int i = 0; i < 200000; ++i) {
    ASSERT_TRUE(s->Update(1 + rng() % 100, pri(rng)).ok());
  }
  for (ItemKey k = 1; k <= 100; ++k) ASSERT_TRUE(s->Update(k, k < 100 ? 0 : 1).ok());
  EXPECT_EQ(s->Select(0.3)->key, 100);
  EXPECT_NEAR(s->Select(0.3)->probability, 1.0, 1e-9);
}

TEST(SelectorTest, DeterministicGivenDraws) {
  for (const auto& o : kAll) {
    auto a = Make(o);
    auto b = Make(o);
    std::mt19937_64 ops(9);
    std::mt19937_64 draws_a(3), draws_b(3);
    std::uniform_real_distribution<double> u(0, 1);
    ItemKey next = 1;
    for (int i = 0; i < 5000; ++i) {
      int kind = ops() % 4;
      if (kind == 0 || a->size() < 3) {
        double p = ops() % 50;
        ASSERT_TRUE(a->Insert(next, p).ok());
        ASSERT_TRUE(b->Insert(next, p).ok());
        ++next;
      } else if (kind == 1) {
        auto victim = a->Select(u(draws_a))->key;
        b->Select(u(draws_b));
        ASSERT_TRUE(a->Delete(victim).ok());
        ASSERT_TRUE(b->Delete(victim).ok());
      } else {
        auto ra = a->Select(u(draws_a));
        auto rb = b->Select(u(draws_b));
        ASSERT_EQ(ra->key, rb->key);
        ASSERT_EQ(ra->probability, rb->probability);
      }
    }
    EXPECT_EQ(a->Entries(), b->Entries());
  }
}

TEST(SelectorTest, EntriesInInsertionOrder) {
  for (const auto& o : kAll) {
    auto s = Make(o);
    for (ItemKey k : {5, 3, 9, 1}) ASSERT_TRUE(s->Insert(k, k).ok());
    ASSERT_TRUE(s->Delete(3).ok());
    ASSERT_TRUE(s->Update(9, 2).ok());
    std::vector<std::pair<ItemKey, double>> want = {{5, 5}, {9, 2}, {1, 1}};
    EXPECT_EQ(s->Entries(), want) << SelectorTypeName(o.type);
  }
}

}  // namespace
}  // namespace relay
