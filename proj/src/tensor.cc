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

#include <algorithm>
#include <limits>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"

namespace relay {

namespace {

constexpr absl::string_view kDtypeNames[kNumDtypes] = {
    "float32", "float64", "int8",   "int16",  "int32", "int64",
    "uint8",   "uint16",  "uint32", "uint64", "bool",
};
constexpr size_t kDtypeSizes[kNumDtypes] = {4, 8, 1, 2, 4, 8, 1, 2, 4, 8, 1};

std::string JoinPath(absl::string_view prefix, absl::string_view name) {
  if (prefix.empty()) return std::string(name);
  return absl::StrCat(prefix, "/", name);
}

absl::Status ValidateNode(const Step& node, const std::string& path) {
  if (node.is_leaf()) return absl::OkStatus();
  const auto& fields = node.fields();
  if (fields.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "empty nested structure at '", path, "'; leaves must be tensors"));
  }
  absl::flat_hash_set<absl::string_view> seen;
  for (const auto& field : fields) {
    if (field.name.empty() || field.name.find('/') != std::string::npos) {
      return absl::InvalidArgumentError(absl::StrCat(
          "invalid field name '", field.name, "' under '", path,
          "': names must be non-empty and must not contain '/'"));
    }
    if (!seen.insert(field.name).second) {
      return absl::InvalidArgumentError(absl::StrCat(
          "duplicate field name '", field.name, "' under '", path, "'"));
    }
    RELAY_RETURN_IF_ERROR(ValidateNode(field.value, JoinPath(path, field.name)));
  }
  return absl::OkStatus();
}

void FlattenInto(const Step& node, const std::string& path, FlatStep* out,
                 std::vector<ColumnSpec>* specs) {
  if (node.is_leaf()) {
    const Tensor& t = node.tensor();
    out->columns.push_back(t);
    specs->push_back(ColumnSpec{path, t.dtype(), t.shape()});
    return;
  }
  for (const auto& field : node.fields()) {
    FlattenInto(field.value, JoinPath(path, field.name), out, specs);
  }
}

using SplitPaths = std::vector<std::vector<absl::string_view>>;

absl::StatusOr<Step> BuildNode(std::span<const Tensor> columns,
                               const SplitPaths& parts, size_t begin,
                               size_t end, size_t depth) {
  std::vector<StepField> fields;
  absl::flat_hash_set<absl::string_view> seen;
  size_t i = begin;
  while (i < end) {
    if (parts[i].size() <= depth) {
      return absl::InvalidArgumentError(
          "column path is both a leaf and an interior node");
    }
    absl::string_view name = parts[i][depth];
    if (!seen.insert(name).second) {
      return absl::InvalidArgumentError(absl::StrCat(
          "columns under '", name, "' are not contiguous in the signature"));
    }
    size_t j = i + 1;
    while (j < end && parts[j].size() > depth && parts[j][depth] == name) ++j;
    if (parts[i].size() == depth + 1) {
      if (j != i + 1) {
        return absl::InvalidArgumentError(absl::StrCat(
            "column '", name, "' is both a leaf and an interior node"));
      }
      fields.push_back(StepField{std::string(name), Step(columns[i])});
    } else {
      RELAY_ASSIGN_OR_RETURN(Step child,
                             BuildNode(columns, parts, i, j, depth + 1));
      fields.push_back(StepField{std::string(name), std::move(child)});
    }
    i = j;
  }
  return Step(std::move(fields));
}

}  // namespace

size_t DtypeSize(Dtype dtype) {
  return kDtypeSizes[static_cast<uint8_t>(dtype)];
}

absl::string_view DtypeName(Dtype dtype) {
  return kDtypeNames[static_cast<uint8_t>(dtype)];
}

absl::StatusOr<Dtype> DtypeFromCode(uint8_t code) {
  if (code >= kNumDtypes) {
    return absl::InvalidArgumentError(absl::StrCat("unknown dtype code ", code));
  }
  return static_cast<Dtype>(code);
}

absl::StatusOr<Dtype> DtypeFromName(absl::string_view name) {
  for (int i = 0; i < kNumDtypes; ++i) {
    if (kDtypeNames[i] == name) return static_cast<Dtype>(i);
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown dtype '", name, "'"));
}

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape& shape) {
  return absl::StrCat("[", absl::StrJoin(shape, ","), "]");
}

Tensor::Tensor()
    : dtype_(Dtype::kFloat32),
      shape_({0}),
      data_(std::make_shared<const std::vector<uint8_t>>()) {}

absl::StatusOr<Tensor> Tensor::Create(Dtype dtype, Shape shape,
                                      std::vector<uint8_t> data) {
  for (int64_t d : shape) {
    if (d < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("negative dimension in shape ", ShapeString(shape)));
    }
  }
  const size_t expected = DtypeSize(dtype) * NumElements(shape);
  if (data.size() != expected) {
    return absl::InvalidArgumentError(absl::StrCat(
        "tensor ", DtypeName(dtype), ShapeString(shape), " needs ", expected,
        " bytes, got ", data.size()));
  }
  return Tensor(dtype, std::move(shape),
                std::make_shared<const std::vector<uint8_t>>(std::move(data)));
}

Tensor Tensor::Zeros(Dtype dtype, Shape shape) {
  const size_t n = DtypeSize(dtype) * NumElements(shape);
  return Tensor(dtype, std::move(shape),
                std::make_shared<const std::vector<uint8_t>>(n, 0));
}

std::string Tensor::DebugString() const {
  return absl::StrCat(DtypeName(dtype_), ShapeString(shape_));
}

bool Tensor::operator==(const Tensor& other) const {
  if (dtype_ != other.dtype_ || shape_ != other.shape_) return false;
  return data_ == other.data_ || *data_ == *other.data_;
}

Step::Step() : node_(std::vector<StepField>{}) {}
Step::Step(Tensor leaf) : node_(std::move(leaf)) {}
Step::Step(std::vector<StepField> fields) : node_(std::move(fields)) {}
Step::Step(std::initializer_list<StepField> fields)
    : node_(std::vector<StepField>(fields)) {}

bool Step::operator==(const Step& other) const { return node_ == other.node_; }

absl::StatusOr<Signature> Signature::Create(std::vector<ColumnSpec> columns) {
  absl::flat_hash_set<absl::string_view> paths;
  for (const auto& column : columns) {
    if (!paths.insert(column.path).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate column path '", column.path, "'"));
    }
    for (int64_t d : column.shape) {
      if (d < 0) {
        return absl::InvalidArgumentError(absl::StrCat(
            "column '", column.path, "' has a negative dimension"));
      }
    }
  }
  return Signature(std::move(columns));
}

size_t Signature::row_bytes() const {
  size_t total = 0;
  for (const auto& c : columns_) total += c.row_bytes();
  return total;
}

std::string Signature::DebugString() const {
  std::vector<std::string> parts;
  parts.reserve(columns_.size());
  for (const auto& c : columns_) {
    parts.push_back(absl::StrCat(c.path, ":", DtypeName(c.dtype),
                                 ShapeString(c.shape)));
  }
  return absl::StrCat("{", absl::StrJoin(parts, ", "), "}");
}

void Signature::Encode(ByteWriter* writer) const {
  writer->PutU32(static_cast<uint32_t>(columns_.size()));
  for (const auto& c : columns_) {
    writer->PutString(c.path);
    writer->PutU8(static_cast<uint8_t>(c.dtype));
    writer->PutU8(static_cast<uint8_t>(c.shape.size()));
    for (int64_t d : c.shape) writer->PutU32(static_cast<uint32_t>(d));
  }
}

absl::StatusOr<Signature> Signature::Decode(ByteReader* reader) {
  RELAY_ASSIGN_OR_RETURN(uint32_t count, reader->ReadU32());
  // Each column needs at least 6 bytes; reject bogus counts before reserving.
  if (count > reader->remaining() / 6) {
    return absl::InvalidArgumentError(
        absl::StrCat("signature column count ", count, " exceeds input"));
  }
  std::vector<ColumnSpec> columns;
  columns.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    ColumnSpec spec;
    RELAY_ASSIGN_OR_RETURN(spec.path, reader->ReadString(4096));
    RELAY_ASSIGN_OR_RETURN(uint8_t code, reader->ReadU8());
    RELAY_ASSIGN_OR_RETURN(spec.dtype, DtypeFromCode(code));
    RELAY_ASSIGN_OR_RETURN(uint8_t rank, reader->ReadU8());
    for (uint8_t r = 0; r < rank; ++r) {
      RELAY_ASSIGN_OR_RETURN(uint32_t dim, reader->ReadU32());
      spec.shape.push_back(dim);
    }
    columns.push_back(std::move(spec));
  }
  return Create(std::move(columns));
}

absl::Status ValidateStep(const Step& step) { return ValidateNode(step, ""); }

absl::StatusOr<FlatStep> Flatten(const Step& step) {
  RELAY_RETURN_IF_ERROR(ValidateStep(step));
  FlatStep out;
  std::vector<ColumnSpec> specs;
  FlattenInto(step, "", &out, &specs);
  RELAY_ASSIGN_OR_RETURN(out.signature, Signature::Create(std::move(specs)));
  return out;
}

absl::StatusOr<Signature> SignatureOf(const Step& step) {
  RELAY_ASSIGN_OR_RETURN(FlatStep flat, Flatten(step));
  return std::move(flat.signature);
}

absl::StatusOr<Step> Unflatten(std::span<const Tensor> columns,
                               const Signature& signature) {
  if (columns.size() != signature.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("unflatten: ", columns.size(), " tensors for ",
                     signature.size(), " signature columns"));
  }
  for (size_t i = 0; i < columns.size(); ++i) {
    const auto& spec = signature[i];
    if (columns[i].dtype() != spec.dtype || columns[i].shape() != spec.shape) {
      return absl::InvalidArgumentError(absl::StrCat(
          "unflatten: column '", spec.path, "' expects ", DtypeName(spec.dtype),
          ShapeString(spec.shape), ", got ", columns[i].DebugString()));
    }
  }
  if (signature.size() == 1 && signature[0].path.empty()) {
    return Step(columns[0]);
  }
  SplitPaths parts;
  parts.reserve(signature.size());
  for (const auto& spec : signature.columns()) {
    if (spec.path.empty()) {
      return absl::InvalidArgumentError(
          "empty column path in a multi-column signature");
    }
    parts.push_back(absl::StrSplit(spec.path, '/'));
  }
  return BuildNode(columns, parts, 0, columns.size(), 0);
}

absl::Status CheckSignature(const Step& step, const Signature& expected) {
  RELAY_ASSIGN_OR_RETURN(FlatStep flat, Flatten(step));
  const auto& actual = flat.signature;
  const size_t common = std::min(actual.size(), expected.size());
  for (size_t i = 0; i < common; ++i) {
    const auto& a = actual[i];
    const auto& e = expected[i];
    if (a.path != e.path) {
      return absl::InvalidArgumentError(absl::StrCat(
          "signature mismatch at column ", i, ": expected path '", e.path,
          "', got '", a.path, "'"));
    }
    if (a.dtype != e.dtype || a.shape != e.shape) {
      return absl::InvalidArgumentError(absl::StrCat(
          "signature mismatch at '", e.path, "': expected ",
          DtypeName(e.dtype), ShapeString(e.shape), ", got ",
          DtypeName(a.dtype), ShapeString(a.shape)));
    }
  }
  if (actual.size() != expected.size()) {
    const auto& first_extra =
        actual.size() > expected.size() ? actual[common] : expected[common];
    return absl::InvalidArgumentError(absl::StrCat(
        "signature mismatch: expected ", expected.size(), " columns, got ",
        actual.size(), " (first differing column '", first_extra.path, "')"));
  }
  return absl::OkStatus();
}

}  // namespace relay
