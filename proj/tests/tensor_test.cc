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


#include "relay/tensor.h"

#include <random>

#include "gtest/gtest.h"
#include "test_util.h"

namespace relay {
namespace {

using ::relay::testing::RandomStep;

TEST(DtypeTest, WidthsAndNames) {
  EXPECT_EQ(DtypeSize(Dtype::kFloat32), 4);
  EXPECT_EQ(DtypeSize(Dtype::kFloat64), 8);
  EXPECT_EQ(DtypeSize(Dtype::kInt8), 1);
  EXPECT_EQ(DtypeSize(Dtype::kUint16), 2);
  EXPECT_EQ(DtypeSize(Dtype::kInt64), 8);
  EXPECT_EQ(DtypeSize(Dtype::kBool), 1);
  for (int code = 0; code < kNumDtypes; ++code) {
    auto dtype = DtypeFromCode(code);
    ASSERT_TRUE(dtype.ok());
    auto round = DtypeFromName(DtypeName(*dtype));
    ASSERT_TRUE(round.ok());
    EXPECT_EQ(*round, *dtype);
  }
  EXPECT_FALSE(DtypeFromCode(kNumDtypes).ok());
  EXPECT_FALSE(DtypeFromName("complex64").ok());
}

TEST(TensorTest, CreateChecksByteLength) {
  EXPECT_TRUE(Tensor::Create(Dtype::kInt16, {2, 3}, std::vector<uint8_t>(12)).ok());
  EXPECT_FALSE(Tensor::Create(Dtype::kInt16, {2, 3}, std::vector<uint8_t>(11)).ok());
  EXPECT_FALSE(Tensor::Create(Dtype::kInt16, {-1}, {}).ok());
  EXPECT_TRUE(Tensor::Create(Dtype::kFloat64, {0, 5}, {}).ok());
}

TEST(TensorTest, ScalarIsRankZero) {
  Tensor t = Tensor::Scalar<int32_t>(-7);
  EXPECT_TRUE(t.shape().empty());
  EXPECT_EQ(t.num_elements(), 1);
  EXPECT_EQ(t.values<int32_t>(), std::vector<int32_t>{-7});
}

TEST(TensorTest, BytesAreLittleEndian) {
  Tensor t = Tensor::Scalar<uint32_t>(0x01020304u);
  ASSERT_EQ(t.byte_size(), 4);
  EXPECT_EQ(t.bytes()[0], 0x04);
  EXPECT_EQ(t.bytes()[3], 0x01);
}

TEST(FlattenTest, SingleLeaf) {
  Step step({{"obs", Tensor::FromValues<float>({2}, {1, 2})}});
  auto flat = Flatten(step);
  ASSERT_TRUE(flat.ok());
  ASSERT_EQ(flat->signature.size(), 1);
  EXPECT_EQ(flat->signature[0].path, "obs");
  EXPECT_EQ(flat->signature[0].dtype, Dtype::kFloat32);
  EXPECT_EQ(flat->signature[0].shape, Shape{2});
}

TEST(FlattenTest, NestedDepthFirst) {
  // Hand-enumerated: visit ts, descend into obs then reward, then action.
  Step step({{"ts",
              Step({{"obs", Tensor::FromValues<float>({2}, {1, 2})},
                    {"reward", Tensor::Scalar<float>(0.5)}})},
             {"action", Tensor::Scalar<int32_t>(3)}});
  auto flat = Flatten(step);
  ASSERT_TRUE(flat.ok());
  ASSERT_EQ(flat->signature.size(), 3);
  EXPECT_EQ(flat->signature[0].path, "ts/obs");
  EXPECT_EQ(flat->signature[1].path, "ts/reward");
  EXPECT_EQ(flat->signature[2].path, "action");
  EXPECT_EQ(flat->columns[2].values<int32_t>(), std::vector<int32_t>{3});
}

TEST(FlattenTest, BareRootLeafHasEmptyPath) {
  auto flat = Flatten(Step(Tensor::Scalar<double>(1.0)));
  ASSERT_TRUE(flat.ok());
  ASSERT_EQ(flat->signature.size(), 1);
  EXPECT_EQ(flat->signature[0].path, "");
}

TEST(FlattenTest, SignatureIgnoresContents) {
  std::mt19937_64 rng(1);
  Step a = RandomStep(rng);
  Step b = RandomStep(rng);
  ASSERT_FALSE(a == b);
  auto sa = SignatureOf(a);
  auto sb = SignatureOf(b);
  ASSERT_TRUE(sa.ok() && sb.ok());
  EXPECT_EQ(*sa, *sb);
}

TEST(FlattenTest, RejectsMalformedTrees) {
  Tensor t = Tensor::Scalar<float>(1);
  EXPECT_FALSE(Flatten(Step({{"a", t}, {"a", t}})).ok());
  EXPECT_FALSE(Flatten(Step({{"", t}})).ok());
  EXPECT_FALSE(Flatten(Step({{"a/b", t}})).ok());
  EXPECT_FALSE(Flatten(Step({{"a", Step(std::vector<StepField>{})}})).ok());
}

TEST(FlattenTest, RoundTripProperty) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> dtype_dist(0, kNumDtypes - 1);
  std::uniform_int_distribution<int> dim(0, 3);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<StepField> inner;
    std::vector<StepField> outer;
    for (int i = 0; i < 4; ++i) {
      Dtype dtype = *DtypeFromCode(dtype_dist(rng));
      Shape shape;
      for (int r = dim(rng); r > 0; --r) shape.push_back(dim(rng));
      std::vector<uint8_t> data(DtypeSize(dtype) * NumElements(shape));
      for (auto& b : data) {
        b = dtype == Dtype::kBool ? byte(rng) & 1 : byte(rng);
      }
      Tensor leaf = *Tensor::Create(dtype, shape, std::move(data));
      StepField field{"f" + std::to_string(i), leaf};
      (i % 2 ? inner : outer).push_back(field);
    }
    outer.push_back({"nested", Step(inner)});
    Step step(outer);
    auto flat = Flatten(step);
    ASSERT_TRUE(flat.ok());
    auto back = Unflatten(flat->columns, flat->signature);
    ASSERT_TRUE(back.ok()) << back.status();
    EXPECT_TRUE(*back == step);
  }
}

TEST(CheckSignatureTest, MatchesOwnSignature) {
  std::mt19937_64 rng(3);
  Step step = RandomStep(rng);
  EXPECT_TRUE(CheckSignature(step, *SignatureOf(step)).ok());
}

TEST(CheckSignatureTest, ShapeMismatchNamesColumn) {
  Step step({{"obs", Tensor::FromValues<float>({2}, {1, 2})}});
  Signature expected = *Signature::Create({{"obs", Dtype::kFloat32, {3}}});
  absl::Status s = CheckSignature(step, expected);
  ASSERT_FALSE(s.ok());
  EXPECT_EQ(s.code(), absl::StatusCode::kInvalidArgument);
  EXPECT_NE(s.message().find("obs"), absl::string_view::npos) << s;
  EXPECT_NE(s.message().find("[3]"), absl::string_view::npos) << s;
  EXPECT_NE(s.message().find("[2]"), absl::string_view::npos) << s;
}

TEST(CheckSignatureTest, DtypeMismatch) {
  Step step({{"obs", Tensor::FromValues<double>({2}, {1, 2})}});
  Signature expected = *Signature::Create({{"obs", Dtype::kFloat32, {2}}});
  absl::Status s = CheckSignature(step, expected);
  ASSERT_FALSE(s.ok());
  EXPECT_NE(s.message().find("float32"), absl::string_view::npos) << s;
}

TEST(CheckSignatureTest, ExtraLeaf) {
  Tensor t = Tensor::Scalar<float>(1);
  Step step({{"a", t}, {"b", t}});
  Signature expected = *Signature::Create({{"a", Dtype::kFloat32, {}}});
  EXPECT_FALSE(CheckSignature(step, expected).ok());
}

TEST(SignatureTest, RejectsDuplicatePaths) {
  EXPECT_FALSE(Signature::Create({{"a", Dtype::kFloat32, {}},
                                  {"a", Dtype::kInt8, {}}})
                   .ok());
}

TEST(SignatureTest, EncodeDecode) {
  Signature sig = *Signature::Create(
      {{"ts/obs", Dtype::kUint8, {84, 84}}, {"r", Dtype::kFloat64, {}}});
  ByteWriter w;
  sig.Encode(&w);
  // count + ("ts/obs": 4+6, dtype, rank, 2 dims) + ("r": 4+1, dtype, rank).
  EXPECT_EQ(w.buffer().size(), 4 + (10 + 1 + 1 + 8) + (5 + 1 + 1));
  ByteReader r(w.buffer());
  auto back = Signature::Decode(&r);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, sig);
}

}  // namespace
}  // namespace relay
