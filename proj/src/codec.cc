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

#include "relay/codec.h"

#include <limits>

#include "absl/strings/str_cat.h"
#include "lz4.h"

namespace relay {

absl::string_view CodecName(Codec codec) {
  switch (codec) {
    case Codec::kNone:
      return "none";
    case Codec::kLz4:
      return "lz4";
  }
  return "unknown";
}

absl::StatusOr<Codec> CodecFromCode(uint8_t code) {
  switch (code) {
    case 0:
      return Codec::kNone;
    case 1:
      return Codec::kLz4;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown codec id ", code));
}

std::vector<uint8_t> Compress(Codec codec, std::span<const uint8_t> raw) {
  if (codec == Codec::kNone || raw.empty()) {
    return std::vector<uint8_t>(raw.begin(), raw.end());
  }
  const int bound = LZ4_compressBound(static_cast<int>(raw.size()));
  std::vector<uint8_t> out(bound);
  const int n = LZ4_compress_default(
      reinterpret_cast<const char*>(raw.data()),
      reinterpret_cast<char*>(out.data()), static_cast<int>(raw.size()), bound);
  out.resize(n);
  return out;
}

absl::StatusOr<std::vector<uint8_t>> Decompress(
    Codec codec, std::span<const uint8_t> compressed, size_t raw_size) {
  if (codec == Codec::kNone || raw_size == 0) {
    if (compressed.size() != raw_size) {
      return absl::DataLossError(absl::StrCat(
          "column block is ", compressed.size(), " bytes, expected ", raw_size));
    }
    return std::vector<uint8_t>(compressed.begin(), compressed.end());
  }
  if (raw_size > static_cast<size_t>(std::numeric_limits<int>::max()) ||
      compressed.size() > static_cast<size_t>(std::numeric_limits<int>::max())) {
    return absl::InvalidArgumentError("column block too large for lz4");
  }
  std::vector<uint8_t> out(raw_size);
  const int n = LZ4_decompress_safe(
      reinterpret_cast<const char*>(compressed.data()),
      reinterpret_cast<char*>(out.data()), static_cast<int>(compressed.size()),
      static_cast<int>(raw_size));
  if (n < 0 || static_cast<size_t>(n) != raw_size) {
    return absl::DataLossError(absl::StrCat(
        "lz4 block failed to decode to ", raw_size, " bytes (result ", n, ")"));
  }
  return out;
}

}  // namespace relay
