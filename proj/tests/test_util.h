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

#ifndef RELAY_TESTS_TEST_UTIL_H_
#define RELAY_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "gtest/gtest.h"
#include "relay/chunk.h"
#include "relay/chunk_store.h"
#include "relay/table.h"
#include "relay/tensor.h"

#define RELAY_ASSERT_OK(expr)                        \
  do {                                               \
    const absl::Status _st = (expr);                 \
    ASSERT_TRUE(_st.ok()) << _st;                    \
  } while (0)

#define RELAY_EXPECT_OK(expr)                        \
  do {                                               \
    const absl::Status _st = (expr);                 \
    EXPECT_TRUE(_st.ok()) << _st;                    \
  } while (0)

#define RELAY_ASSERT_OK_AND_ASSIGN(lhs, expr)        \
  auto RELAY_TEST_CONCAT(_so_, __LINE__) = (expr);   \
  ASSERT_TRUE(RELAY_TEST_CONCAT(_so_, __LINE__).ok()) \
      << RELAY_TEST_CONCAT(_so_, __LINE__).status(); \
  lhs = std::move(RELAY_TEST_CONCAT(_so_, __LINE__)).value()

#define RELAY_TEST_CONCAT_INNER(a, b) a##b
#define RELAY_TEST_CONCAT(a, b) RELAY_TEST_CONCAT_INNER(a, b)

namespace relay::testing {

// Step with a single float32 leaf "obs" of shape [width] filled with `value`.
Step ScalarObsStep(float value, int64_t width = 2);

// Step {obs: float32[width], reward: float64[]} with random contents.
Step RandomStep(std::mt19937_64& rng, int64_t width = 3);

Signature ObsSignature(int64_t width = 2);

// Chunk of `rows` ScalarObsSteps whose values are first_value, +1, ...
std::shared_ptr<const Chunk> MakeChunk(ChunkKey key, int rows,
                                       float first_value = 0,
                                       int64_t width = 2);

// Item spanning all rows of the given chunks.
TableItem ItemOver(ItemKey key, double priority,
                   std::vector<std::shared_ptr<const Chunk>> chunks,
                   int64_t offset = 0, int64_t length = -1);

// Table over a fresh store; aborts on config errors.
TableConfig SimpleConfig(std::string name, SelectorOptions sampler,
                         SelectorOptions remover, int64_t max_size,
                         RateLimiterConfig limiter,
                         int32_t max_times_sampled = 0);

// Fresh temporary directory removed by the destructor.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace relay::testing

#endif  // RELAY_TESTS_TEST_UTIL_H_
