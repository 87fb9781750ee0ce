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

#include <map>
#include <random>
#include <thread>

#include "gtest/gtest.h"
#include "relay/instrumentation.h"
#include "test_util.h"

namespace relay {
namespace {

using ::relay::testing::MakeChunk;

TEST(ChunkStoreTest, RefcountAlgebra) {
  ChunkStore store;
  store.Insert(MakeChunk(1, 2));
  EXPECT_EQ(store.RefCount(1), 0);
  EXPECT_EQ(*store.AddRef(1), 1);
  EXPECT_EQ(*store.AddRef(1), 2);
  EXPECT_EQ(store.ReleaseRef(1), 1);
  EXPECT_TRUE(store.Contains(1));
  EXPECT_EQ(store.ReleaseRef(1), 0);
  EXPECT_FALSE(store.Contains(1));
  EXPECT_EQ(store.size(), 0);
  store.WaitForReclamation();
  EXPECT_EQ(store.pending_reclamation(), 0);
}

TEST(ChunkStoreTest, SharedChunkSurvivesOneRelease) {
  ChunkStore store;
  auto chunk = MakeChunk(1, 4);
  EXPECT_EQ(store.Acquire(chunk), 1);
  EXPECT_EQ(store.Acquire(chunk), 2);
  store.ReleaseRef(1);
  auto got = store.Get(std::vector<ChunkKey>{1});
  ASSERT_TRUE(got.ok());
  EXPECT_EQ((*got)[0]->key(), 1);
}

TEST(ChunkStoreTest, GetAbsentIsNotFound) {
  ChunkStore store;
  store.Insert(MakeChunk(1, 1));
  auto got = store.Get(std::vector<ChunkKey>{1, 2});
  EXPECT_EQ(got.status().code(), absl::StatusCode::kNotFound);
  EXPECT_EQ(store.AddRef(3).status().code(), absl::StatusCode::kNotFound);
}

TEST(ChunkStoreDeathTest, ReleaseBelowZeroAborts) {
  EXPECT_DEATH(
      {
        ChunkStore store;
        store.Insert(MakeChunk(1, 1));
        store.ReleaseRef(1);
      },
      "");
  EXPECT_DEATH(
      {
        ChunkStore store;
        store.ReleaseRef(77);
      },
      "");
}

TEST(ChunkStoreTest, KeysNeverReused) {
  ChunkStore store;
  ChunkKey a = store.NewKey();
  ChunkKey b = store.NewKey();
  EXPECT_LT(a, b);
  store.AdvanceKeysPast(1000);
  EXPECT_GT(store.NewKey(), 1000);
  store.AdvanceKeysPast(5);
  EXPECT_GT(store.NewKey(), 1001);
}

TEST(ChunkStoreTest, PruneOnlyDropsUnreferenced) {
  ChunkStore store;
  store.Insert(MakeChunk(1, 1));
  store.Acquire(MakeChunk(2, 1));
  std::vector<ChunkKey> keys = {1, 2, 3};
  store.PruneUnreferenced(keys);
  EXPECT_FALSE(store.Contains(1));
  EXPECT_TRUE(store.Contains(2));
}

TEST(ChunkStoreTest, DeferredReclamationWithoutBackgroundThread) {
  ChunkStore store(ChunkStore::Options{.num_shards = 4,
                                       .background_reclaimer = false});
  store.Acquire(MakeChunk(1, 1));
  store.ReleaseRef(1);
  EXPECT_EQ(store.pending_reclamation(), 1);
  store.Reclaim();
  EXPECT_EQ(store.pending_reclamation(), 0);
  EXPECT_EQ(store.reclaimed_count(), 1);
}

TEST(ChunkStoreTest, ReleaseUnderTableLockDoesNotFree) {
  const int64_t before = ChunkDeallocationsUnderTableLock();
  ChunkStore store(ChunkStore::Options{.num_shards = 4,
                                       .background_reclaimer = false});
  {
    std::shared_ptr<const Chunk> chunk = MakeChunk(1, 8);
    store.Acquire(chunk);
    chunk.reset();
  }
  {
    TableLockMarker marker;
    store.ReleaseRef(1);
  }
  store.Reclaim();
  EXPECT_EQ(ChunkDeallocationsUnderTableLock(), before);
}

TEST(ChunkStoreTest, InstrumentationCountsFreesUnderMarker) {
  const int64_t before = ChunkDeallocationsUnderTableLock();
  {
    auto chunk = MakeChunk(1, 1);
    TableLockMarker marker;
    chunk.reset();
  }
  EXPECT_EQ(ChunkDeallocationsUnderTableLock(), before + 1);
}

// Random insert/add_ref/release_ref sequences against a map model.
TEST(ChunkStoreTest, RefcountProperty) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    ChunkStore store;
    std::map<ChunkKey, int64_t> model;
    ChunkKey next = 1;
    for (int op = 0; op < 2000; ++op) {
      int kind = rng() % 3;
      if (kind == 0 || model.empty()) {
        ChunkKey key = next++;
        store.Acquire(MakeChunk(key, 1));
        model[key] = 1;
      } else {
        auto it = model.begin();
        std::advance(it, rng() % model.size());
        if (kind == 1) {
          ASSERT_EQ(*store.AddRef(it->first), ++it->second);
        } else {
          ASSERT_EQ(store.ReleaseRef(it->first), --it->second);
          if (it->second == 0) model.erase(it);
        }
      }
    }
    store.WaitForReclamation();
    ASSERT_EQ(store.size(), model.size());
    for (const auto& [key, refs] : model) {
      EXPECT_EQ(store.RefCount(key), refs);
    }
  }
}

TEST(ChunkStoreTest, ConcurrentRefs) {
  ChunkStore store;
  constexpr int kThreads = 8;
  constexpr int kKeys = 64;
  for (ChunkKey k = 1; k <= kKeys; ++k) store.Acquire(MakeChunk(k, 1));
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&store, t] {
      for (int i = 0; i < 2000; ++i) {
        ChunkKey key = 1 + (i * 7 + t) % kKeys;
        ASSERT_TRUE(store.AddRef(key).ok());
        std::vector<ChunkKey> keys = {key};
        ASSERT_TRUE(store.Get(keys).ok());
        store.ReleaseRef(key);
      }
    });
  }
  for (auto& t : threads) t.join();
  for (ChunkKey k = 1; k <= kKeys; ++k) EXPECT_EQ(store.RefCount(k), 1);
}

}  // namespace
}  // namespace relay
