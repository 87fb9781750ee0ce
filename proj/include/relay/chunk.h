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

#ifndef RELAY_CHUNK_H_
#define RELAY_CHUNK_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "relay/byte_io.h"
#include "relay/codec.h"
#include "relay/tensor.h"

namespace relay {

using ChunkKey = uint64_t;

// K consecutive steps stored column-wise: the rows of each signature column
// are concatenated in step order and compressed as one block.
class Chunk {
 public:
  Chunk(ChunkKey key, Signature signature, uint32_t num_rows, Codec codec,
        std::vector<std::vector<uint8_t>> columns);
  ~Chunk();

  Chunk(Chunk&&) = default;
  Chunk& operator=(Chunk&&) = default;
  Chunk(const Chunk&) = default;
  Chunk& operator=(const Chunk&) = default;

  ChunkKey key() const { return key_; }
  const Signature& signature() const { return signature_; }
  uint32_t num_rows() const { return num_rows_; }
  Codec codec() const { return codec_; }
  size_t num_columns() const { return columns_.size(); }
  std::span<const uint8_t> column(size_t i) const { return columns_[i]; }

  size_t uncompressed_bytes() const { return num_rows_ * signature_.row_bytes(); }
  size_t compressed_bytes() const;

  // Same payload under a different key (server-side key remapping).
  Chunk WithKey(ChunkKey key) &&;

  // key (u64), num_rows (u32), codec id (u8), signature block, then per
  // column: compressed length (u64) + bytes.
  void Encode(ByteWriter* writer) const;
  static absl::StatusOr<Chunk> Decode(ByteReader* reader);

 private:
  ChunkKey key_;
  Signature signature_;
  uint32_t num_rows_;
  Codec codec_;
  std::vector<std::vector<uint8_t>> columns_;
};

// One decoded row: the flattened columns of a single step.
using FlatRow = std::vector<Tensor>;

// Fails without producing a chunk if `steps` is empty or any step does not
// match `signature`.
absl::StatusOr<Chunk> BuildChunk(ChunkKey key, std::span<const Step> steps,
                                 const Signature& signature,
                                 Codec codec = kDefaultCodec);

absl::StatusOr<Chunk> BuildChunkFromRows(ChunkKey key,
                                         std::span<const FlatRow> rows,
                                         const Signature& signature,
                                         Codec codec = kDefaultCodec);

// Rows [begin, begin + count) of the chunk.
absl::StatusOr<std::vector<FlatRow>> DecodeRows(const Chunk& chunk,
                                                size_t begin, size_t count);

absl::StatusOr<std::vector<Step>> DecodeSteps(const Chunk& chunk);

}  // namespace relay

#endif  // RELAY_CHUNK_H_
