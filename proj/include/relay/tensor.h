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

#ifndef RELAY_TENSOR_H_
#define RELAY_TENSOR_H_

#include <cstdint>
#include <cstring>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "relay/byte_io.h"
#include "relay/status_macros.h"

namespace relay {

// Numeric codes are part of the wire and checkpoint formats.
enum class Dtype : uint8_t {
  kFloat32 = 0,
  kFloat64 = 1,
  kInt8 = 2,
  kInt16 = 3,
  kInt32 = 4,
  kInt64 = 5,
  kUint8 = 6,
  kUint16 = 7,
  kUint32 = 8,
  kUint64 = 9,
  kBool = 10,
};

inline constexpr int kNumDtypes = 11;

size_t DtypeSize(Dtype dtype);
absl::string_view DtypeName(Dtype dtype);
absl::StatusOr<Dtype> DtypeFromCode(uint8_t code);
absl::StatusOr<Dtype> DtypeFromName(absl::string_view name);

template <typename T>
constexpr Dtype DtypeOf() {
  if constexpr (std::is_same_v<T, float>) return Dtype::kFloat32;
  else if constexpr (std::is_same_v<T, double>) return Dtype::kFloat64;
  else if constexpr (std::is_same_v<T, int8_t>) return Dtype::kInt8;
  else if constexpr (std::is_same_v<T, int16_t>) return Dtype::kInt16;
  else if constexpr (std::is_same_v<T, int32_t>) return Dtype::kInt32;
  else if constexpr (std::is_same_v<T, int64_t>) return Dtype::kInt64;
  else if constexpr (std::is_same_v<T, uint8_t>) return Dtype::kUint8;
  else if constexpr (std::is_same_v<T, uint16_t>) return Dtype::kUint16;
  else if constexpr (std::is_same_v<T, uint32_t>) return Dtype::kUint32;
  else if constexpr (std::is_same_v<T, uint64_t>) return Dtype::kUint64;
  else if constexpr (std::is_same_v<T, bool>) return Dtype::kBool;
  else static_assert(sizeof(T) == 0, "unsupported element type");
}

// Fully static shape; an empty shape is a scalar.
using Shape = std::vector<int64_t>;

int64_t NumElements(const Shape& shape);
std::string ShapeString(const Shape& shape);

// Immutable dense tensor. Copies share the underlying buffer.
class Tensor {
 public:
  // Zero-element float32 tensor of shape [0].
  Tensor();

  // Fails unless data.size() == DtypeSize(dtype) * NumElements(shape) and
  // every dimension is non-negative.
  static absl::StatusOr<Tensor> Create(Dtype dtype, Shape shape,
                                       std::vector<uint8_t> data);

  static Tensor Zeros(Dtype dtype, Shape shape);

  template <typename T>
  static Tensor FromValues(Shape shape, const std::vector<T>& values);

  template <typename T>
  static Tensor Scalar(T value) {
    return FromValues<T>({}, std::vector<T>{value});
  }

  Dtype dtype() const { return dtype_; }
  const Shape& shape() const { return shape_; }
  int64_t num_elements() const { return NumElements(shape_); }
  size_t byte_size() const { return data_->size(); }
  std::span<const uint8_t> bytes() const { return *data_; }

  template <typename T>
  std::vector<T> values() const;

  std::string DebugString() const;

  // Byte-for-byte equality, including dtype and shape.
  bool operator==(const Tensor& other) const;

 private:
  Tensor(Dtype dtype, Shape shape,
         std::shared_ptr<const std::vector<uint8_t>> data)
      : dtype_(dtype), shape_(std::move(shape)), data_(std::move(data)) {}

  Dtype dtype_;
  Shape shape_;
  std::shared_ptr<const std::vector<uint8_t>> data_;
};

struct StepField;

// One data element: an ordered tree of named nodes whose leaves are tensors.
// A well-formed tree has non-empty, '/'-free field names that are unique
// among siblings, and no empty interior nodes.
class Step {
 public:
  Step();
  Step(Tensor leaf);  // NOLINT: implicit by design of the nesting syntax.
  Step(std::vector<StepField> fields);  // NOLINT
  Step(std::initializer_list<StepField> fields);

  bool is_leaf() const { return std::holds_alternative<Tensor>(node_); }
  const Tensor& tensor() const { return std::get<Tensor>(node_); }
  const std::vector<StepField>& fields() const {
    return std::get<std::vector<StepField>>(node_);
  }

  bool operator==(const Step& other) const;

 private:
  std::variant<Tensor, std::vector<StepField>> node_;
};

struct StepField {
  std::string name;
  Step value;

  bool operator==(const StepField& other) const = default;
};

struct ColumnSpec {
  std::string path;
  Dtype dtype = Dtype::kFloat32;
  Shape shape;

  // Bytes occupied by one row (one step) of this column.
  size_t row_bytes() const { return DtypeSize(dtype) * NumElements(shape); }
  bool operator==(const ColumnSpec& other) const = default;
};

// Per-stream schema: one column per leaf, in depth-first order. Column paths
// are slash-joined field names ("ts/obs"); a bare leaf at the root has the
// empty path.
class Signature {
 public:
  Signature() = default;

  // Fails if two columns share a path.
  static absl::StatusOr<Signature> Create(std::vector<ColumnSpec> columns);

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  size_t size() const { return columns_.size(); }
  const ColumnSpec& operator[](size_t i) const { return columns_[i]; }
  size_t row_bytes() const;

  std::string DebugString() const;
  bool operator==(const Signature& other) const = default;

  // count (u32), then per column: path (u32 length + bytes), dtype code (u8),
  // rank (u8), dims (u32 each).
  void Encode(ByteWriter* writer) const;
  static absl::StatusOr<Signature> Decode(ByteReader* reader);

 private:
  explicit Signature(std::vector<ColumnSpec> columns)
      : columns_(std::move(columns)) {}

  std::vector<ColumnSpec> columns_;
};

struct FlatStep {
  std::vector<Tensor> columns;
  Signature signature;
};

absl::Status ValidateStep(const Step& step);

// Leaves in depth-first order plus the derived signature.
absl::StatusOr<FlatStep> Flatten(const Step& step);

// Signature only; pure function of structure, dtypes and shapes.
absl::StatusOr<Signature> SignatureOf(const Step& step);

// Inverse of Flatten: rebuilds the tree from the column paths.
absl::StatusOr<Step> Unflatten(std::span<const Tensor> columns,
                               const Signature& signature);

// OK iff Flatten(step) yields exactly `expected`. Otherwise InvalidArgument
// naming the first offending column and the expected vs actual dtype/shape.
absl::Status CheckSignature(const Step& step, const Signature& expected);

template <typename T>
Tensor Tensor::FromValues(Shape shape, const std::vector<T>& values) {
  constexpr Dtype dtype = DtypeOf<T>();
  RELAY_CHECK(static_cast<int64_t>(values.size()) == NumElements(shape));
  auto data = std::make_shared<std::vector<uint8_t>>(values.size() * sizeof(T));
  if constexpr (std::is_same_v<T, bool>) {
    for (size_t i = 0; i < values.size(); ++i) (*data)[i] = values[i] ? 1 : 0;
  } else if (!values.empty()) {
    std::memcpy(data->data(), values.data(), data->size());
  }
  return Tensor(dtype, std::move(shape), std::move(data));
}

template <typename T>
std::vector<T> Tensor::values() const {
  std::vector<T> out(num_elements());
  if (DtypeOf<T>() != dtype_) return {};
  if constexpr (std::is_same_v<T, bool>) {
    for (size_t i = 0; i < out.size(); ++i) out[i] = (*data_)[i] != 0;
  } else if (!out.empty()) {
    std::memcpy(out.data(), data_->data(), data_->size());
  }
  return out;
}

}  // namespace relay

#endif  // RELAY_TENSOR_H_
