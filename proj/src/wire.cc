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

#include "relay/wire.h"

#include <cstring>
#include <type_traits>

#include "absl/strings/str_cat.h"
#include "relay/byte_io.h"
#include "relay/status_macros.h"

namespace relay {

namespace {

template <class>
inline constexpr bool kAlwaysFalse = false;

absl::Status Malformed(absl::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat("malformed frame: ", what));
}

void EncodeChunkList(const std::vector<std::shared_ptr<const Chunk>>& chunks,
                     ByteWriter* writer) {
  writer->PutU32(chunks.size());
  for (const auto& chunk : chunks) chunk->Encode(writer);
}

absl::StatusOr<std::vector<std::shared_ptr<const Chunk>>> DecodeChunkList(
    ByteReader* reader) {
  RELAY_ASSIGN_OR_RETURN(uint32_t count, reader->ReadU32());
  if (count > reader->remaining()) return Malformed("chunk count");
  std::vector<std::shared_ptr<const Chunk>> chunks;
  chunks.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    RELAY_ASSIGN_OR_RETURN(Chunk chunk, Chunk::Decode(reader));
    chunks.push_back(std::make_shared<const Chunk>(std::move(chunk)));
  }
  return chunks;
}

void EncodeTableInfo(const TableInfo& info, ByteWriter* writer) {
  EncodeTableConfig(info.config, writer);
  writer->PutI64(info.size);
  writer->PutI64(info.counters.inserts);
  writer->PutI64(info.counters.samples);
  writer->PutI64(info.counters.deletes);
  writer->PutF64(info.diff);
  writer->PutI64(info.blocked_inserts);
  writer->PutI64(info.blocked_samples);
}

absl::StatusOr<TableInfo> DecodeTableInfo(ByteReader* reader) {
  TableInfo info;
  RELAY_ASSIGN_OR_RETURN(info.config, DecodeTableConfig(reader));
  RELAY_ASSIGN_OR_RETURN(info.size, reader->ReadI64());
  RELAY_ASSIGN_OR_RETURN(info.counters.inserts, reader->ReadI64());
  RELAY_ASSIGN_OR_RETURN(info.counters.samples, reader->ReadI64());
  RELAY_ASSIGN_OR_RETURN(info.counters.deletes, reader->ReadI64());
  RELAY_ASSIGN_OR_RETURN(info.diff, reader->ReadF64());
  RELAY_ASSIGN_OR_RETURN(info.blocked_inserts, reader->ReadI64());
  RELAY_ASSIGN_OR_RETURN(info.blocked_samples, reader->ReadI64());
  return info;
}

void EncodePayload(const Message& message, ByteWriter* w) {
  std::visit(
      [w](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, InsertChunkMsg>) {
          w->PutU64(m.keep_from);
          m.chunk->Encode(w);
        } else if constexpr (std::is_same_v<T, CreateItemMsg>) {
          w->PutString(m.table);
          w->PutU32(m.chunk_keys.size());
          for (ChunkKey key : m.chunk_keys) w->PutU64(key);
          w->PutI64(m.offset);
          w->PutI64(m.length);
          w->PutF64(m.priority);
        } else if constexpr (std::is_same_v<T, InsertAckMsg>) {
          w->PutU64(m.confirmed_items);
          w->PutU64(m.item_key);
          w->PutU64(m.watermark);
        } else if constexpr (std::is_same_v<T, SampleRequestMsg>) {
          w->PutString(m.table);
          w->PutU32(m.max_in_flight);
          w->PutI64(m.num_samples);
          w->PutI64(m.timeout_ms);
        } else if constexpr (std::is_same_v<T, SampleResponseMsg>) {
          EncodeItem(m.item, w);
          w->PutF64(m.probability);
          w->PutI64(m.table_size);
          EncodeChunkList(m.chunks, w);
        } else if constexpr (std::is_same_v<T, SampleAckMsg>) {
          w->PutU32(m.credits);
        } else if constexpr (std::is_same_v<T, SampleEndMsg>) {
          w->PutU8(static_cast<uint8_t>(m.reason));
        } else if constexpr (std::is_same_v<T, UpdatePrioritiesMsg>) {
          w->PutString(m.table);
          w->PutU32(m.updates.size());
          for (const auto& [key, priority] : m.updates) {
            w->PutU64(key);
            w->PutF64(priority);
          }
        } else if constexpr (std::is_same_v<T, UpdatePrioritiesReplyMsg>) {
          w->PutI64(m.applied);
        } else if constexpr (std::is_same_v<T, CheckpointMsg> ||
                             std::is_same_v<T, ServerInfoMsg>) {
        } else if constexpr (std::is_same_v<T, CheckpointReplyMsg>) {
          w->PutString(m.id);
          w->PutString(m.path);
        } else if constexpr (std::is_same_v<T, ServerInfoReplyMsg>) {
          w->PutU32(m.tables.size());
          for (const auto& info : m.tables) EncodeTableInfo(info, w);
        } else if constexpr (std::is_same_v<T, ErrorMsg>) {
          w->PutU32(static_cast<uint32_t>(m.code));
          w->PutString(m.detail);
        } else {
          static_assert(kAlwaysFalse<T>, "unhandled message");
        }
      },
      message);
}

absl::StatusOr<Message> DecodePayload(MessageTag tag, ByteReader* r) {
  switch (tag) {
    case MessageTag::kInsertChunk: {
      InsertChunkMsg m;
      RELAY_ASSIGN_OR_RETURN(m.keep_from, r->ReadU64());
      RELAY_ASSIGN_OR_RETURN(Chunk chunk, Chunk::Decode(r));
      m.chunk = std::make_shared<const Chunk>(std::move(chunk));
      return m;
    }
    case MessageTag::kCreateItem: {
      CreateItemMsg m;
      RELAY_ASSIGN_OR_RETURN(m.table, r->ReadString());
      RELAY_ASSIGN_OR_RETURN(uint32_t count, r->ReadU32());
      if (count > r->remaining() / 8) return Malformed("chunk key count");
      for (uint32_t i = 0; i < count; ++i) {
        RELAY_ASSIGN_OR_RETURN(ChunkKey key, r->ReadU64());
        m.chunk_keys.push_back(key);
      }
      RELAY_ASSIGN_OR_RETURN(m.offset, r->ReadI64());
      RELAY_ASSIGN_OR_RETURN(m.length, r->ReadI64());
      RELAY_ASSIGN_OR_RETURN(m.priority, r->ReadF64());
      return m;
    }
    case MessageTag::kInsertAck: {
      InsertAckMsg m;
      RELAY_ASSIGN_OR_RETURN(m.confirmed_items, r->ReadU64());
      RELAY_ASSIGN_OR_RETURN(m.item_key, r->ReadU64());
      RELAY_ASSIGN_OR_RETURN(m.watermark, r->ReadU64());
      return m;
    }
    case MessageTag::kSampleRequest: {
      SampleRequestMsg m;
      RELAY_ASSIGN_OR_RETURN(m.table, r->ReadString());
      RELAY_ASSIGN_OR_RETURN(m.max_in_flight, r->ReadU32());
      RELAY_ASSIGN_OR_RETURN(m.num_samples, r->ReadI64());
      RELAY_ASSIGN_OR_RETURN(m.timeout_ms, r->ReadI64());
      if (m.max_in_flight < 1) return Malformed("max_in_flight must be >= 1");
      if (m.num_samples < -1 || m.num_samples == 0) {
        return Malformed("num_samples must be positive or -1");
      }
      if (m.timeout_ms < -1) return Malformed("timeout_ms must be >= -1");
      return m;
    }
    case MessageTag::kSampleResponse: {
      SampleResponseMsg m;
      RELAY_ASSIGN_OR_RETURN(m.item, DecodeItem(r));
      RELAY_ASSIGN_OR_RETURN(m.probability, r->ReadF64());
      RELAY_ASSIGN_OR_RETURN(m.table_size, r->ReadI64());
      RELAY_ASSIGN_OR_RETURN(m.chunks, DecodeChunkList(r));
      if (m.chunks.size() != m.item.chunk_keys.size()) {
        return Malformed("sample response chunk count");
      }
      for (size_t i = 0; i < m.chunks.size(); ++i) {
        if (m.chunks[i]->key() != m.item.chunk_keys[i]) {
          return Malformed("sample response chunk keys");
        }
      }
      return m;
    }
    case MessageTag::kSampleAck: {
      SampleAckMsg m;
      RELAY_ASSIGN_OR_RETURN(m.credits, r->ReadU32());
      if (m.credits < 1) return Malformed("ack with zero credits");
      return m;
    }
    case MessageTag::kSampleEnd: {
      RELAY_ASSIGN_OR_RETURN(uint8_t reason, r->ReadU8());
      if (reason > 1) return Malformed("unknown end reason");
      return SampleEndMsg{static_cast<SampleEndReason>(reason)};
    }
    case MessageTag::kUpdatePriorities: {
      UpdatePrioritiesMsg m;
      RELAY_ASSIGN_OR_RETURN(m.table, r->ReadString());
      RELAY_ASSIGN_OR_RETURN(uint32_t count, r->ReadU32());
      if (count > r->remaining() / 16) return Malformed("update count");
      for (uint32_t i = 0; i < count; ++i) {
        RELAY_ASSIGN_OR_RETURN(ItemKey key, r->ReadU64());
        RELAY_ASSIGN_OR_RETURN(double priority, r->ReadF64());
        m.updates.emplace_back(key, priority);
      }
      return m;
    }
    case MessageTag::kUpdatePrioritiesReply: {
      UpdatePrioritiesReplyMsg m;
      RELAY_ASSIGN_OR_RETURN(m.applied, r->ReadI64());
      return m;
    }
    case MessageTag::kCheckpoint:
      return CheckpointMsg{};
    case MessageTag::kCheckpointReply: {
      CheckpointReplyMsg m;
      RELAY_ASSIGN_OR_RETURN(m.id, r->ReadString());
      RELAY_ASSIGN_OR_RETURN(m.path, r->ReadString());
      return m;
    }
    case MessageTag::kServerInfo:
      return ServerInfoMsg{};
    case MessageTag::kServerInfoReply: {
      ServerInfoReplyMsg m;
      RELAY_ASSIGN_OR_RETURN(uint32_t count, r->ReadU32());
      if (count > r->remaining()) return Malformed("table count");
      for (uint32_t i = 0; i < count; ++i) {
        RELAY_ASSIGN_OR_RETURN(TableInfo info, DecodeTableInfo(r));
        m.tables.push_back(std::move(info));
      }
      return m;
    }
    case MessageTag::kError: {
      ErrorMsg m;
      RELAY_ASSIGN_OR_RETURN(uint32_t code, r->ReadU32());
      if (code == 0 || code > 16) return Malformed("error code");
      m.code = static_cast<absl::StatusCode>(code);
      RELAY_ASSIGN_OR_RETURN(m.detail, r->ReadString());
      return m;
    }
  }
  return Malformed(
      absl::StrCat("unknown tag 0x", absl::Hex(static_cast<uint8_t>(tag))));
}

}  // namespace

MessageTag TagOf(const Message& message) {
  static constexpr MessageTag kTags[] = {
      MessageTag::kInsertChunk,      MessageTag::kCreateItem,
      MessageTag::kInsertAck,        MessageTag::kSampleRequest,
      MessageTag::kSampleResponse,   MessageTag::kSampleAck,
      MessageTag::kSampleEnd,        MessageTag::kUpdatePriorities,
      MessageTag::kUpdatePrioritiesReply, MessageTag::kCheckpoint,
      MessageTag::kCheckpointReply,  MessageTag::kServerInfo,
      MessageTag::kServerInfoReply,  MessageTag::kError,
  };
  static_assert(std::size(kTags) == std::variant_size_v<Message>);
  return kTags[message.index()];
}

absl::string_view MessageName(MessageTag tag) {
  switch (tag) {
    case MessageTag::kInsertChunk: return "InsertChunk";
    case MessageTag::kCreateItem: return "CreateItem";
    case MessageTag::kInsertAck: return "InsertAck";
    case MessageTag::kSampleRequest: return "SampleRequest";
    case MessageTag::kSampleResponse: return "SampleResponse";
    case MessageTag::kSampleAck: return "SampleAck";
    case MessageTag::kSampleEnd: return "SampleEnd";
    case MessageTag::kUpdatePriorities: return "UpdatePriorities";
    case MessageTag::kUpdatePrioritiesReply: return "UpdatePrioritiesReply";
    case MessageTag::kCheckpoint: return "Checkpoint";
    case MessageTag::kCheckpointReply: return "CheckpointReply";
    case MessageTag::kServerInfo: return "ServerInfo";
    case MessageTag::kServerInfoReply: return "ServerInfoReply";
    case MessageTag::kError: return "Error";
  }
  return "Unknown";
}

std::vector<uint8_t> EncodeFrame(const Message& message) {
  ByteWriter writer;
  writer.PutU32(0);
  writer.PutU8(static_cast<uint8_t>(TagOf(message)));
  EncodePayload(message, &writer);
  writer.PatchU32(0, writer.size() - kFrameHeaderBytes);
  return writer.Release();
}

absl::StatusOr<Message> DecodeMessage(std::span<const uint8_t> body) {
  if (body.empty()) return Malformed("empty body");
  ByteReader reader(body);
  const auto tag = static_cast<MessageTag>(*reader.ReadU8());
  auto message = DecodePayload(tag, &reader);
  if (!message.ok()) {
    return absl::InvalidArgumentError(absl::StrCat(
        MessageName(tag), ": ", message.status().message()));
  }
  if (!reader.AtEnd()) {
    return Malformed(absl::StrCat(reader.remaining(), " trailing bytes after ",
                                  MessageName(tag)));
  }
  return message;
}

ErrorMsg ErrorFromStatus(const absl::Status& status) {
  return ErrorMsg{status.code(), std::string(status.message())};
}

absl::Status StatusFromError(const ErrorMsg& error) {
  return absl::Status(error.code, error.detail);
}

void FrameDecoder::Feed(std::span<const uint8_t> bytes) {
  if (!error_.ok()) return;
  if (consumed_ > 0 && consumed_ == buffer_.size()) {
    buffer_.clear();
    consumed_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

absl::StatusOr<std::optional<Message>> FrameDecoder::Next() {
  if (!error_.ok()) return error_;
  if (buffered() < kFrameHeaderBytes) return std::nullopt;
  uint32_t length;
  std::memcpy(&length, buffer_.data() + consumed_, sizeof(length));
  if (length == 0) {
    error_ = Malformed("zero-length frame");
    return error_;
  }
  if (length > max_message_bytes_) {
    error_ = absl::ResourceExhaustedError(
        absl::StrCat("frame of ", length, " bytes exceeds the limit of ",
                     max_message_bytes_));
    return error_;
  }
  if (buffered() - kFrameHeaderBytes < length) return std::nullopt;
  std::span<const uint8_t> body(buffer_.data() + consumed_ + kFrameHeaderBytes,
                                length);
  auto message = DecodeMessage(body);
  if (!message.ok()) {
    error_ = message.status();
    return error_;
  }
  consumed_ += kFrameHeaderBytes + length;
  if (consumed_ > (1 << 20) && consumed_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + consumed_);
    consumed_ = 0;
  }
  return std::optional<Message>(std::move(message).value());
}

}  // namespace relay
