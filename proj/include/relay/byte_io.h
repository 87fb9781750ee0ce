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

#ifndef RELAY_BYTE_IO_H_
#define RELAY_BYTE_IO_H_

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace relay {

// All multi-byte integers and floats on the wire and on disk are
// little-endian. Raw tensor payloads are copied verbatim, so the host must be
// little-endian too.
static_assert(std::endian::native == std::endian::little,
              "relay requires a little-endian host");

class ByteWriter {
 public:
  ByteWriter() = default;

  void PutU8(uint8_t v) { buffer_.push_back(v); }
  void PutU16(uint16_t v) { PutRaw(&v, sizeof(v)); }
  void PutU32(uint32_t v) { PutRaw(&v, sizeof(v)); }
  void PutU64(uint64_t v) { PutRaw(&v, sizeof(v)); }
  void PutI64(int64_t v) { PutRaw(&v, sizeof(v)); }
  void PutF64(double v) { PutRaw(&v, sizeof(v)); }
  void PutBytes(std::span<const uint8_t> bytes) {
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  }
  // u32 length prefix followed by the raw characters.
  void PutString(absl::string_view s);

  // Overwrites four bytes at `offset` (used to back-patch length fields).
  void PatchU32(size_t offset, uint32_t v);

  size_t size() const { return buffer_.size(); }
  const std::vector<uint8_t>& buffer() const { return buffer_; }
  std::vector<uint8_t> Release() { return std::move(buffer_); }

 private:
  void PutRaw(const void* data, size_t n);

  std::vector<uint8_t> buffer_;
};

// Bounds-checked cursor over an immutable byte range. Every read fails with
// InvalidArgument instead of running past the end.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  absl::StatusOr<uint8_t> ReadU8();
  absl::StatusOr<uint16_t> ReadU16();
  absl::StatusOr<uint32_t> ReadU32();
  absl::StatusOr<uint64_t> ReadU64();
  absl::StatusOr<int64_t> ReadI64();
  absl::StatusOr<double> ReadF64();
  absl::StatusOr<std::span<const uint8_t>> ReadBytes(size_t n);
  absl::StatusOr<std::string> ReadString(size_t max_length = 1 << 20);

  size_t position() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }
  bool AtEnd() const { return pos_ == data_.size(); }

 private:
  absl::Status Need(size_t n) const;

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

}  // namespace relay

#endif  // RELAY_BYTE_IO_H_
