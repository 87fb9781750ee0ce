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

#include <atomic>
#include <cstring>

#include "absl/strings/str_cat.h"
#include "relay/instrumentation.h"
#include "relay/status_macros.h"

namespace relay {

thread_local int TableLockMarker::depth_ = 0;

namespace {
std::atomic<int64_t> dealloc_under_lock{0};
}  // namespace

int64_t ChunkDeallocationsUnderTableLock() { return dealloc_under_lock.load(); }

void RecordChunkDeallocation() {
  if (TableLockMarker::depth() > 0) dealloc_under_lock.fetch_add(1);
}

Chunk::Chunk(ChunkKey key, Signature signature, uint32_t num_rows, Codec codec,
             std::vector<std::vector<uint8_t>> columns)
    : key_(key),
      signature_(std::move(signature)),
      num_rows_(num_rows),
      codec_(codec),
      columns_(std::move(columns)) {}

Chunk::~Chunk() {
  if (!columns_.empty()) RecordChunkDeallocation();
}

size_t Chunk::compressed_bytes() const {
  size_t total = 0;
  for (const auto& c : columns_) total += c.size();
  return total;
}

Chunk Chunk::WithKey(ChunkKey key) && {
  Chunk out(std::move(*this));
  out.key_ = key;
  return out;
}

void Chunk::Encode(ByteWriter* writer) const {
  writer->PutU64(key_);
  writer->PutU32(num_rows_);
  writer->PutU8(static_cast<uint8_t>(codec_));
  signature_.Encode(writer);
  for (const auto& column : columns_) {
    writer->PutU64(column.size());
    writer->PutBytes(column);
  }
}

absl::StatusOr<Chunk> Chunk::Decode(ByteReader* reader) {
  RELAY_ASSIGN_OR_RETURN(uint64_t key, reader->ReadU64());
  RELAY_ASSIGN_OR_RETURN(uint32_t num_rows, reader->ReadU32());
  RELAY_ASSIGN_OR_RETURN(uint8_t codec_code, reader->ReadU8());
  RELAY_ASSIGN_OR_RETURN(Codec codec, CodecFromCode(codec_code));
  RELAY_ASSIGN_OR_RETURN(Signature signature, Signature::Decode(reader));
  if (num_rows == 0) {
    return absl::InvalidArgumentError("chunk has zero rows");
  }
  std::vector<std::vector<uint8_t>> columns;
  columns.reserve(signature.size());
  for (size_t i = 0; i < signature.size(); ++i) {
    RELAY_ASSIGN_OR_RETURN(uint64_t length, reader->ReadU64());
    RELAY_ASSIGN_OR_RETURN(auto bytes, reader->ReadBytes(length));
    if (codec == Codec::kNone &&
        length != static_cast<uint64_t>(num_rows) * signature[i].row_bytes()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "uncompressed column '", signature[i].path, "' has wrong length"));
    }
    columns.emplace_back(bytes.begin(), bytes.end());
  }
  return Chunk(key, std::move(signature), num_rows, codec, std::move(columns));
}

absl::StatusOr<Chunk> BuildChunkFromRows(ChunkKey key,
                                         std::span<const FlatRow> rows,
                                         const Signature& signature,
                                         Codec codec) {
  if (rows.empty()) {
    return absl::InvalidArgumentError("a chunk needs at least one step");
  }
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != signature.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("step ", r, " has ", rows[r].size(), " columns, expected ",
                       signature.size()));
    }
    for (size_t c = 0; c < signature.size(); ++c) {
      const auto& spec = signature[c];
      if (rows[r][c].dtype() != spec.dtype || rows[r][c].shape() != spec.shape) {
        return absl::InvalidArgumentError(absl::StrCat(
            "step ", r, " column '", spec.path, "': expected ",
            DtypeName(spec.dtype), ShapeString(spec.shape), ", got ",
            rows[r][c].DebugString()));
      }
    }
  }
  std::vector<std::vector<uint8_t>> columns;
  columns.reserve(signature.size());
  std::vector<uint8_t> raw;
  for (size_t c = 0; c < signature.size(); ++c) {
    const size_t row_bytes = signature[c].row_bytes();
    raw.resize(row_bytes * rows.size());
    for (size_t r = 0; r < rows.size(); ++r) {
      if (row_bytes > 0) {
        std::memcpy(raw.data() + r * row_bytes, rows[r][c].bytes().data(),
                    row_bytes);
      }
    }
    columns.push_back(Compress(codec, raw));
  }
  return Chunk(key, signature, static_cast<uint32_t>(rows.size()), codec,
               std::move(columns));
}

absl::StatusOr<Chunk> BuildChunk(ChunkKey key, std::span<const Step> steps,
                                 const Signature& signature, Codec codec) {
  std::vector<FlatRow> rows;
  rows.reserve(steps.size());
  for (const auto& step : steps) {
    RELAY_RETURN_IF_ERROR(CheckSignature(step, signature));
    RELAY_ASSIGN_OR_RETURN(FlatStep flat, Flatten(step));
    rows.push_back(std::move(flat.columns));
  }
  return BuildChunkFromRows(key, rows, signature, codec);
}

absl::StatusOr<std::vector<FlatRow>> DecodeRows(const Chunk& chunk,
                                                size_t begin, size_t count) {
  if (begin + count > chunk.num_rows()) {
    return absl::OutOfRangeError(absl::StrCat(
        "rows [", begin, ", ", begin + count, ") outside chunk of ",
        chunk.num_rows(), " rows"));
  }
  const Signature& signature = chunk.signature();
  std::vector<FlatRow> rows(count);
  for (auto& row : rows) row.reserve(signature.size());
  for (size_t c = 0; c < signature.size(); ++c) {
    const auto& spec = signature[c];
    const size_t row_bytes = spec.row_bytes();
    RELAY_ASSIGN_OR_RETURN(
        std::vector<uint8_t> raw,
        Decompress(chunk.codec(), chunk.column(c), row_bytes * chunk.num_rows()));
    for (size_t r = 0; r < count; ++r) {
      const uint8_t* p = raw.data() + (begin + r) * row_bytes;
      RELAY_ASSIGN_OR_RETURN(
          Tensor t, Tensor::Create(spec.dtype, spec.shape,
                                   std::vector<uint8_t>(p, p + row_bytes)));
      rows[r].push_back(std::move(t));
    }
  }
  return rows;
}

absl::StatusOr<std::vector<Step>> DecodeSteps(const Chunk& chunk) {
  RELAY_ASSIGN_OR_RETURN(auto rows, DecodeRows(chunk, 0, chunk.num_rows()));
  std::vector<Step> steps;
  steps.reserve(rows.size());
  for (const auto& row : rows) {
    RELAY_ASSIGN_OR_RETURN(Step step, Unflatten(row, chunk.signature()));
    steps.push_back(std::move(step));
  }
  return steps;
}

}  // namespace relay
