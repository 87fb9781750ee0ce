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

#include "relay/writer.h"

#include <algorithm>

#include "absl/strings/str_cat.h"
#include "absl/time/clock.h"
#include "relay/status_macros.h"
#include "relay/wire.h"

namespace relay {

absl::Status WriterOptions::Validate() const {
  if (chunk_length < 1) {
    return absl::InvalidArgumentError("chunk_length must be >= 1");
  }
  if (max_sequence_length < chunk_length) {
    return absl::InvalidArgumentError(absl::StrCat(
        "max_sequence_length (", max_sequence_length,
        ") must be >= chunk_length (", chunk_length, ")"));
  }
  if (max_pending_items < 1) {
    return absl::InvalidArgumentError("max_pending_items must be >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::unique_ptr<Writer>> Writer::Open(
    const std::string& endpoint, WriterOptions options) {
  RELAY_RETURN_IF_ERROR(options.Validate());
  RELAY_ASSIGN_OR_RETURN(Socket socket,
                         Socket::Connect(endpoint, options.connect_timeout));
  return std::unique_ptr<Writer>(new Writer(std::move(socket), options));
}

Writer::Writer(Socket socket, WriterOptions options)
    : socket_(std::move(socket)), options_(options) {}

Writer::~Writer() { socket_.Close(); }

absl::Status Writer::CheckUsable() const {
  if (!deferred_error_.ok()) return deferred_error_;
  if (closed_) return absl::FailedPreconditionError("writer is closed");
  return absl::OkStatus();
}

absl::Status Writer::Append(const Step& step) {
  RELAY_RETURN_IF_ERROR(CheckUsable());
  RELAY_ASSIGN_OR_RETURN(FlatStep flat, Flatten(step));
  if (!signature_.has_value()) {
    signature_ = flat.signature;
  } else if (!(flat.signature == *signature_)) {
    return CheckSignature(step, *signature_);
  }
  pending_rows_.push_back(std::move(flat.columns));
  ++total_steps_;
  if (static_cast<int>(pending_rows_.size()) == options_.chunk_length) {
    return SendPendingChunk();
  }
  return absl::OkStatus();
}

absl::Status Writer::SendPendingChunk() {
  const int64_t rows = pending_rows_.size();
  const int64_t first_step = total_steps_ - rows;
  const ChunkKey key = next_chunk_key_++;
  RELAY_ASSIGN_OR_RETURN(
      Chunk chunk,
      BuildChunkFromRows(key, pending_rows_, *signature_, options_.codec));
  pending_rows_.clear();

  // Chunks wholly outside the referenceable window are never needed again.
  const int64_t window_start = total_steps_ - options_.max_sequence_length;
  while (!chunks_.empty() &&
         chunks_.front().first_step + chunks_.front().num_rows <= window_start) {
    chunks_.pop_front();
  }
  chunks_.push_back({key, first_step, rows});

  InsertChunkMsg message;
  message.keep_from = chunks_.front().key;
  message.chunk = std::make_shared<const Chunk>(std::move(chunk));
  RELAY_RETURN_IF_ERROR(socket_.Send(message));
  ++chunks_sent_;
  rows_sent_ += rows;
  return absl::OkStatus();
}

absl::Status Writer::CreateItem(const std::string& table, int num_timesteps,
                                double priority) {
  RELAY_RETURN_IF_ERROR(CheckUsable());
  if (num_timesteps < 1) {
    return absl::InvalidArgumentError("num_timesteps must be >= 1");
  }
  if (num_timesteps > total_steps_) {
    return absl::InvalidArgumentError(
        absl::StrCat("num_timesteps ", num_timesteps, " exceeds the ",
                     total_steps_, " appended steps"));
  }
  if (num_timesteps > options_.max_sequence_length) {
    return absl::InvalidArgumentError(
        absl::StrCat("num_timesteps ", num_timesteps,
                     " exceeds max_sequence_length ",
                     options_.max_sequence_length));
  }
  if (!pending_rows_.empty()) RELAY_RETURN_IF_ERROR(SendPendingChunk());

  const int64_t first = total_steps_ - num_timesteps;
  CreateItemMsg message;
  message.table = table;
  message.length = num_timesteps;
  message.priority = priority;
  for (const SentChunk& chunk : chunks_) {
    if (chunk.first_step + chunk.num_rows <= first) continue;
    if (message.chunk_keys.empty()) message.offset = first - chunk.first_step;
    message.chunk_keys.push_back(chunk.key);
  }
  RELAY_CHECK(!message.chunk_keys.empty());

  while (items_sent_ - items_confirmed_ >= options_.max_pending_items) {
    RELAY_RETURN_IF_ERROR(ReadAck(absl::InfiniteDuration()));
  }
  RELAY_RETURN_IF_ERROR(socket_.Send(message));
  ++items_sent_;
  return DrainAcks();
}

absl::Status Writer::ReadAck(absl::Duration timeout) {
  if (timeout != absl::InfiniteDuration()) {
    RELAY_ASSIGN_OR_RETURN(bool readable, socket_.WaitReadable(timeout));
    if (!readable) {
      return absl::DeadlineExceededError("timed out waiting for InsertAck");
    }
  }
  auto received = socket_.Receive(options_.max_message_bytes);
  if (!received.ok()) {
    deferred_error_ = received.status();
    return deferred_error_;
  }
  if (auto* error = std::get_if<ErrorMsg>(&*received)) {
    deferred_error_ = StatusFromError(*error);
    return deferred_error_;
  }
  auto* ack = std::get_if<InsertAckMsg>(&*received);
  if (ack == nullptr) {
    deferred_error_ = absl::InternalError(absl::StrCat(
        "writer received unexpected ", MessageName(TagOf(*received))));
    return deferred_error_;
  }
  items_confirmed_ = ack->confirmed_items;
  confirmed_keys_.push_back(ack->item_key);
  return absl::OkStatus();
}

absl::Status Writer::DrainAcks() {
  while (items_confirmed_ < items_sent_) {
    RELAY_ASSIGN_OR_RETURN(bool readable,
                           socket_.WaitReadable(absl::ZeroDuration()));
    if (!readable) break;
    RELAY_RETURN_IF_ERROR(ReadAck(absl::InfiniteDuration()));
  }
  return absl::OkStatus();
}

absl::Status Writer::Flush(absl::Duration timeout) {
  RELAY_RETURN_IF_ERROR(CheckUsable());
  const absl::Time deadline = timeout == absl::InfiniteDuration()
                                  ? absl::InfiniteFuture()
                                  : absl::Now() + timeout;
  while (items_confirmed_ < items_sent_) {
    const absl::Duration remaining =
        deadline == absl::InfiniteFuture()
            ? absl::InfiniteDuration()
            : std::max(absl::ZeroDuration(), deadline - absl::Now());
    RELAY_RETURN_IF_ERROR(ReadAck(remaining));
  }
  return absl::OkStatus();
}

absl::Status Writer::Close() {
  if (closed_) return deferred_error_;
  absl::Status status = Flush();
  closed_ = true;
  socket_.Close();
  return status;
}

absl::StatusOr<std::unique_ptr<PooledWriter>> PooledWriter::Open(
    const std::vector<std::string>& endpoints, WriterOptions options) {
  if (endpoints.empty()) {
    return absl::InvalidArgumentError("endpoint list is empty");
  }
  std::vector<std::unique_ptr<Writer>> writers;
  for (const auto& endpoint : endpoints) {
    RELAY_ASSIGN_OR_RETURN(auto writer, Writer::Open(endpoint, options));
    writers.push_back(std::move(writer));
  }
  return std::unique_ptr<PooledWriter>(
      new PooledWriter(std::move(writers), options));
}

PooledWriter::PooledWriter(std::vector<std::unique_ptr<Writer>> writers,
                           WriterOptions options)
    : writers_(std::move(writers)),
      options_(options),
      sent_until_(writers_.size(), 0) {}

absl::Status PooledWriter::Append(const Step& step) {
  RELAY_ASSIGN_OR_RETURN(Signature signature, SignatureOf(step));
  if (!signature_.has_value()) {
    signature_ = std::move(signature);
  } else if (!(signature == *signature_)) {
    return CheckSignature(step, *signature_);
  }
  steps_.push_back(step);
  ++total_steps_;
  while (static_cast<int64_t>(steps_.size()) > options_.max_sequence_length) {
    steps_.pop_front();
    ++first_step_;
  }
  return absl::OkStatus();
}

absl::Status PooledWriter::CreateItem(const std::string& table,
                                      int num_timesteps, double priority) {
  if (num_timesteps < 1 || num_timesteps > static_cast<int64_t>(steps_.size())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "num_timesteps ", num_timesteps, " outside [1, ", steps_.size(), "]"));
  }
  const size_t target = cursor_;
  cursor_ = (cursor_ + 1) % writers_.size();
  Writer& writer = *writers_[target];
  // A server that missed part of the window starts a fresh run at the
  // window's first step; its own trailing steps then match the item exactly.
  const int64_t window_start = total_steps_ - num_timesteps;
  int64_t from = std::max(sent_until_[target], window_start);
  for (int64_t s = from; s < total_steps_; ++s) {
    RELAY_RETURN_IF_ERROR(writer.Append(steps_[s - first_step_]));
  }
  sent_until_[target] = total_steps_;
  return writer.CreateItem(table, num_timesteps, priority);
}

absl::Status PooledWriter::Flush() {
  absl::Status status;
  for (auto& writer : writers_) status.Update(writer->Flush());
  return status;
}

absl::Status PooledWriter::Close() {
  absl::Status status;
  for (auto& writer : writers_) status.Update(writer->Close());
  return status;
}

}  // namespace relay
