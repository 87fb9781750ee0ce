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

#include "relay/byte_io.h"

#include <cstring>

#include "absl/strings/str_cat.h"

namespace relay {

void ByteWriter::PutRaw(const void* data, size_t n) {
  const auto* p = static_cast<const uint8_t*>(data);
  buffer_.insert(buffer_.end(), p, p + n);
}

void ByteWriter::PutString(absl::string_view s) {
  PutU32(static_cast<uint32_t>(s.size()));
  PutRaw(s.data(), s.size());
}

void ByteWriter::PatchU32(size_t offset, uint32_t v) {
  std::memcpy(buffer_.data() + offset, &v, sizeof(v));
}

absl::Status ByteReader::Need(size_t n) const {
  if (n > remaining()) {
    return absl::InvalidArgumentError(
        absl::StrCat("truncated input: need ", n, " bytes at offset ", pos_,
                     ", only ", remaining(), " remain"));
  }
  return absl::OkStatus();
}

namespace {

template <typename T>
absl::StatusOr<T> ReadScalar(ByteReader& reader) {
  auto bytes = reader.ReadBytes(sizeof(T));
  if (!bytes.ok()) return bytes.status();
  T value;
  std::memcpy(&value, bytes->data(), sizeof(T));
  return value;
}

}  // namespace

absl::StatusOr<uint8_t> ByteReader::ReadU8() { return ReadScalar<uint8_t>(*this); }
absl::StatusOr<uint16_t> ByteReader::ReadU16() { return ReadScalar<uint16_t>(*this); }
absl::StatusOr<uint32_t> ByteReader::ReadU32() { return ReadScalar<uint32_t>(*this); }
absl::StatusOr<uint64_t> ByteReader::ReadU64() { return ReadScalar<uint64_t>(*this); }
absl::StatusOr<int64_t> ByteReader::ReadI64() { return ReadScalar<int64_t>(*this); }
absl::StatusOr<double> ByteReader::ReadF64() { return ReadScalar<double>(*this); }

absl::StatusOr<std::span<const uint8_t>> ByteReader::ReadBytes(size_t n) {
  if (auto status = Need(n); !status.ok()) return status;
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

absl::StatusOr<std::string> ByteReader::ReadString(size_t max_length) {
  auto length = ReadU32();
  if (!length.ok()) return length.status();
  if (*length > max_length) {
    return absl::InvalidArgumentError(
        absl::StrCat("string length ", *length, " exceeds limit ", max_length));
  }
  auto bytes = ReadBytes(*length);
  if (!bytes.ok()) return bytes.status();
  return std::string(reinterpret_cast<const char*>(bytes->data()), bytes->size());
}

}  // namespace relay
