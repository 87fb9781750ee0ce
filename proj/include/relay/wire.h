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

#ifndef RELAY_WIRE_H_
#define RELAY_WIRE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "relay/chunk.h"
#include "relay/table.h"

namespace relay {

// Frame: u32 little-endian length of (tag + payload), u8 tag, payload.
inline constexpr size_t kFrameHeaderBytes = 4;
inline constexpr size_t kDefaultMaxMessageBytes = 64 << 20;

enum class MessageTag : uint8_t {
  kInsertChunk = 0x01,
  kCreateItem = 0x02,
  kInsertAck = 0x03,
  kSampleRequest = 0x10,
  kSampleResponse = 0x11,
  kSampleAck = 0x12,
  kSampleEnd = 0x13,
  kUpdatePriorities = 0x20,
  kUpdatePrioritiesReply = 0x21,
  kCheckpoint = 0x22,
  kCheckpointReply = 0x23,
  kServerInfo = 0x24,
  kServerInfoReply = 0x25,
  kError = 0x7F,
};

struct InsertChunkMsg {
  // Client-side keys below this are no longer referenced by future items;
  // the server may forget its mapping for them.
  ChunkKey keep_from = 0;
  std::shared_ptr<const Chunk> chunk;
};

struct CreateItemMsg {
  std::string table;
  std::vector<ChunkKey> chunk_keys;
  int64_t offset = 0;
  int64_t length = 0;
  double priority = 0;
};

struct InsertAckMsg {
  // Items confirmed on this stream so far, including this one.
  uint64_t confirmed_items = 0;
  ItemKey item_key = 0;
  // Chunks with client keys below this are safe to drop client-side.
  ChunkKey watermark = 0;
};

struct SampleRequestMsg {
  std::string table;
  uint32_t max_in_flight = 1;
  // -1 streams until the client goes away or the table times out.
  int64_t num_samples = -1;
  // -1 waits forever.
  int64_t timeout_ms = -1;
};

struct SampleResponseMsg {
  // Priority at sample time, times_sampled after the increment.
  Item item;
  double probability = 0;
  int64_t table_size = 0;
  std::vector<std::shared_ptr<const Chunk>> chunks;
};

struct SampleAckMsg {
  uint32_t credits = 1;
};

enum class SampleEndReason : uint8_t { kCompleted = 0, kTimeout = 1 };

struct SampleEndMsg {
  SampleEndReason reason = SampleEndReason::kCompleted;
};

struct UpdatePrioritiesMsg {
  std::string table;
  std::vector<std::pair<ItemKey, double>> updates;
};

struct UpdatePrioritiesReplyMsg {
  int64_t applied = 0;
};

struct CheckpointMsg {};

struct CheckpointReplyMsg {
  std::string id;
  std::string path;
};

struct ServerInfoMsg {};

struct ServerInfoReplyMsg {
  std::vector<TableInfo> tables;
};

struct ErrorMsg {
  absl::StatusCode code = absl::StatusCode::kUnknown;
  std::string detail;
};

using Message =
    std::variant<InsertChunkMsg, CreateItemMsg, InsertAckMsg, SampleRequestMsg,
                 SampleResponseMsg, SampleAckMsg, SampleEndMsg,
                 UpdatePrioritiesMsg, UpdatePrioritiesReplyMsg, CheckpointMsg,
                 CheckpointReplyMsg, ServerInfoMsg, ServerInfoReplyMsg,
                 ErrorMsg>;

MessageTag TagOf(const Message& message);
absl::string_view MessageName(MessageTag tag);

// Whole frame including the length prefix.
std::vector<uint8_t> EncodeFrame(const Message& message);

// Decodes one frame body (tag + payload). Trailing bytes are an error.
absl::StatusOr<Message> DecodeMessage(std::span<const uint8_t> body);

ErrorMsg ErrorFromStatus(const absl::Status& status);
absl::Status StatusFromError(const ErrorMsg& error);

// Incremental decoder for a byte stream. Frames larger than the limit are
// rejected from the header alone, before any payload is buffered. Errors are
// sticky.
class FrameDecoder {
 public:
  explicit FrameDecoder(size_t max_message_bytes = kDefaultMaxMessageBytes)
      : max_message_bytes_(max_message_bytes) {}

  void Feed(std::span<const uint8_t> bytes);

  // nullopt when the buffered bytes do not yet hold a whole frame.
  absl::StatusOr<std::optional<Message>> Next();

  size_t buffered() const { return buffer_.size() - consumed_; }

 private:
  const size_t max_message_bytes_;
  std::vector<uint8_t> buffer_;
  size_t consumed_ = 0;
  absl::Status error_;
};

}  // namespace relay

#endif  // RELAY_WIRE_H_
