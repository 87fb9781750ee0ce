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

#ifndef RELAY_CODEC_H_
#define RELAY_CODEC_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace relay {

// Lossless block codecs applied per chunk column. The id travels with every
// encoded chunk so checkpoints stay readable if the default changes.
enum class Codec : uint8_t {
  kNone = 0,
  kLz4 = 1,
};

inline constexpr Codec kDefaultCodec = Codec::kLz4;

absl::string_view CodecName(Codec codec);
absl::StatusOr<Codec> CodecFromCode(uint8_t code);

std::vector<uint8_t> Compress(Codec codec, std::span<const uint8_t> raw);

// `raw_size` is known from the chunk signature and row count; a block that
// does not decode to exactly that many bytes is rejected.
absl::StatusOr<std::vector<uint8_t>> Decompress(
    Codec codec, std::span<const uint8_t> compressed, size_t raw_size);

}  // namespace relay

#endif  // RELAY_CODEC_H_
