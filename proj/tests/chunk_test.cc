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


#include "relay/chunk.h"

#include <random>

#include "gtest/gtest.h"
#include "relay/codec.h"
#include "test_util.h"

namespace relay {
namespace {

using ::relay::testing::RandomStep;
using ::relay::testing::ScalarObsStep;

std::vector<uint8_t> RandomBytes(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<uint8_t> out(n);
  for (auto& b : out) b = static_cast<uint8_t>(rng());
  return out;
}

TEST(CodecTest, RoundTripBothCodecs) {
  for (Codec codec : {Codec::kNone, Codec::kLz4}) {
    for (size_t n : {0, 1, 17, 4096, 100000}) {
      auto raw = RandomBytes(n, n);
      auto packed = Compress(codec, raw);
      auto back = Decompress(codec, packed, n);
      ASSERT_TRUE(back.ok()) << back.status();
      EXPECT_EQ(*back, raw);
    }
  }
}

TEST(CodecTest, WrongRawSizeRejected) {
  auto raw = RandomBytes(1000, 1);
  auto packed = Compress(Codec::kLz4, raw);
  EXPECT_FALSE(Decompress(Codec::kLz4, packed, 999).ok());
  EXPECT_FALSE(Decompress(Codec::kLz4, packed, 1001).ok());
  EXPECT_FALSE(Decompress(Codec::kNone, raw, 999).ok());
}

TEST(CodecTest, GarbageRejected) {
  auto garbage = RandomBytes(64, 9);
  EXPECT_FALSE(Decompress(Codec::kLz4, garbage, 4096).ok());
  EXPECT_FALSE(CodecFromCode(7).ok());
}

TEST(ChunkTest, SingleStep) {
  Step step = ScalarObsStep(3.5);
  auto chunk = BuildChunk(1, std::span<const Step>(&step, 1),
                          *SignatureOf(step));
  ASSERT_TRUE(chunk.ok());
  EXPECT_EQ(chunk->num_rows(), 1);
  auto steps = DecodeSteps(*chunk);
  ASSERT_TRUE(steps.ok());
  ASSERT_EQ(steps->size(), 1);
  EXPECT_TRUE((*steps)[0] == step);
}

TEST(ChunkTest, EmptyAndMismatchRejected) {
  Signature sig = testing::ObsSignature(2);
  EXPECT_FALSE(BuildChunk(1, {}, sig).ok());
  std::vector<Step> steps = {ScalarObsStep(1, 2), ScalarObsStep(1, 3)};
  EXPECT_FALSE(BuildChunk(1, steps, sig).ok());
}

TEST(ChunkTest, ColumnsAreRowConcatenations) {
  std::vector<Step> steps;
  for (int i = 0; i < 3; ++i) steps.push_back(ScalarObsStep(i, 2));
  auto chunk = BuildChunk(5, steps, testing::ObsSignature(2), Codec::kNone);
  ASSERT_TRUE(chunk.ok());
  ASSERT_EQ(chunk->num_columns(), 1);
  auto col = chunk->column(0);
  ASSERT_EQ(col.size(), 3 * 2 * sizeof(float));
  std::vector<float> values(6);
  std::memcpy(values.data(), col.data(), col.size());
  EXPECT_EQ(values, (std::vector<float>{0, 0, 1, 1, 2, 2}));
}

TEST(ChunkTest, DecodeBuildIdentityProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    int rows = 1 + trial % 9;
    std::vector<Step> steps;
    for (int i = 0; i < rows; ++i) steps.push_back(RandomStep(rng, 1 + trial % 5));
    Codec codec = trial % 2 ? Codec::kLz4 : Codec::kNone;
    auto chunk = BuildChunk(trial, steps, *SignatureOf(steps[0]), codec);
    ASSERT_TRUE(chunk.ok());
    auto back = DecodeSteps(*chunk);
    ASSERT_TRUE(back.ok());
    EXPECT_EQ(*back, steps);
    // A sub-range decodes to the matching flattened rows.
    auto rows_out = DecodeRows(*chunk, rows / 2, rows - rows / 2);
    ASSERT_TRUE(rows_out.ok());
    for (size_t i = 0; i < rows_out->size(); ++i) {
      auto flat = Flatten(steps[rows / 2 + i]);
      EXPECT_EQ((*rows_out)[i], flat->columns);
    }
  }
}

TEST(ChunkTest, DecodeRowsOutOfRange) {
  auto chunk = testing::MakeChunk(1, 4);
  EXPECT_FALSE(DecodeRows(*chunk, 3, 2).ok());
  EXPECT_FALSE(DecodeRows(*chunk, 4, 1).ok());
  EXPECT_TRUE(DecodeRows(*chunk, 3, 1).ok());
}

TEST(ChunkTest, EncodeDecode) {
  std::mt19937_64 rng(5);
  std::vector<Step> steps;
  for (int i = 0; i < 4; ++i) steps.push_back(RandomStep(rng));
  auto chunk = BuildChunk(99, steps, *SignatureOf(steps[0]));
  ASSERT_TRUE(chunk.ok());
  ByteWriter w;
  chunk->Encode(&w);
  ByteReader r(w.buffer());
  auto back = Chunk::Decode(&r);
  ASSERT_TRUE(back.ok());
  EXPECT_TRUE(r.AtEnd());
  EXPECT_EQ(back->key(), 99);
  EXPECT_EQ(back->num_rows(), 4);
  EXPECT_EQ(*DecodeSteps(*back), steps);

  // Every strict prefix is rejected rather than over-read.
  for (size_t cut = 0; cut < w.buffer().size(); cut += 7) {
    ByteReader partial(std::span<const uint8_t>(w.buffer().data(), cut));
    EXPECT_FALSE(Chunk::Decode(&partial).ok()) << cut;
  }
}

TEST(ChunkTest, WithKeyKeepsPayload) {
  auto chunk = testing::MakeChunk(1, 3, 10);
  Chunk copy = *chunk;
  Chunk moved = std::move(copy).WithKey(42);
  EXPECT_EQ(moved.key(), 42);
  EXPECT_EQ(*DecodeSteps(moved), *DecodeSteps(*chunk));
}

// The threshold is frozen from a measurement: all-identical 84x84 float32
// frames compress far below 15% with LZ4 (about 0.4% when last checked).
TEST(ChunkTest, IdenticalFramesCompress) {
  std::vector<float> frame(84 * 84);
  std::mt19937_64 rng(2);
  for (auto& x : frame) x = static_cast<float>(rng() % 256);
  Step step({{"frame", Tensor::FromValues<float>({84, 84}, frame)}});
  std::vector<Step> steps(4, step);
  auto chunk = BuildChunk(1, steps, *SignatureOf(step));
  ASSERT_TRUE(chunk.ok());
  double ratio = static_cast<double>(chunk->compressed_bytes()) /
                 chunk->uncompressed_bytes();
  EXPECT_LE(ratio, 0.15);
}

TEST(ChunkTest, RandomFloatsStayNearRaw) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(0, 1);
  std::vector<Step> steps;
  for (int i = 0; i < 4; ++i) {
    std::vector<float> v(84 * 84);
    for (auto& x : v) x = u(rng);
    steps.push_back(Step({{"frame", Tensor::FromValues<float>({84, 84}, v)}}));
  }
  auto chunk = BuildChunk(1, steps, *SignatureOf(steps[0]));
  ASSERT_TRUE(chunk.ok());
  double ratio = static_cast<double>(chunk->compressed_bytes()) /
                 chunk->uncompressed_bytes();
  EXPECT_GT(ratio, 0.95);
  EXPECT_LT(ratio, 1.05);
  EXPECT_EQ(*DecodeSteps(*chunk), steps);
}

}  // namespace
}  // namespace relay
