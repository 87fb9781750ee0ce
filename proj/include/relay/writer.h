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

#ifndef RELAY_WRITER_H_
#define RELAY_WRITER_H_

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/time/time.h"
#include "relay/chunk.h"
#include "relay/codec.h"
#include "relay/socket.h"
#include "relay/tensor.h"

namespace relay {

struct WriterOptions {
  // Steps per chunk (K).
  int chunk_length = 1;
  // Items may reference at most this many trailing steps.
  int max_sequence_length = 1;
  // Unacknowledged CreateItem frames before CreateItem blocks on the server.
  int max_pending_items = 256;
  Codec codec = kDefaultCodec;
  absl::Duration connect_timeout = absl::Seconds(5);
  size_t max_message_bytes = kDefaultMaxMessageBytes;

  absl::Status Validate() const;
};

// Streams steps to one server. Every chunk_length appends a chunk is built
// and sent; CreateItem references the trailing steps, first flushing a short
// chunk if the newest step is not chunked yet. Single owner at a time.
class Writer {
 public:
  static absl::StatusOr<std::unique_ptr<Writer>> Open(
      const std::string& endpoint, WriterOptions options);

  ~Writer();
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  // The first step fixes the signature. A mismatching step is rejected and
  // the writer stays usable.
  absl::Status Append(const Step& step);

  // Queues an item over the last `num_timesteps` steps. Blocks while
  // max_pending_items items await acknowledgement.
  absl::Status CreateItem(const std::string& table, int num_timesteps,
                          double priority);

  // Waits until every item sent so far is acknowledged. Surfaces deferred
  // server errors.
  absl::Status Flush(absl::Duration timeout = absl::InfiniteDuration());

  // Flush, then disconnect. Further calls fail.
  absl::Status Close();

  int64_t steps_appended() const { return total_steps_; }
  int64_t chunks_sent() const { return chunks_sent_; }
  int64_t rows_sent() const { return rows_sent_; }
  int64_t items_sent() const { return items_sent_; }
  int64_t items_confirmed() const { return items_confirmed_; }
  // Server-assigned keys of acknowledged items, in send order.
  const std::vector<uint64_t>& confirmed_keys() const { return confirmed_keys_; }
  const std::optional<Signature>& signature() const { return signature_; }

 private:
  struct SentChunk {
    ChunkKey key;
    int64_t first_step;
    int64_t num_rows;
  };

  Writer(Socket socket, WriterOptions options);

  absl::Status SendPendingChunk();
  absl::Status ReadAck(absl::Duration timeout);
  absl::Status DrainAcks();
  absl::Status CheckUsable() const;

  Socket socket_;
  const WriterOptions options_;
  std::optional<Signature> signature_;
  std::vector<FlatRow> pending_rows_;
  std::deque<SentChunk> chunks_;
  ChunkKey next_chunk_key_ = 1;
  int64_t total_steps_ = 0;

  int64_t chunks_sent_ = 0;
  int64_t rows_sent_ = 0;
  int64_t items_sent_ = 0;
  int64_t items_confirmed_ = 0;
  std::vector<uint64_t> confirmed_keys_;
  absl::Status deferred_error_;
  bool closed_ = false;
};

// Round-robin writer over independent servers. Steps are buffered locally;
// each server receives only the steps its items need, so an item's trailing
// window is resent to a server that missed part of it.
class PooledWriter {
 public:
  static absl::StatusOr<std::unique_ptr<PooledWriter>> Open(
      const std::vector<std::string>& endpoints, WriterOptions options);

  absl::Status Append(const Step& step);
  absl::Status CreateItem(const std::string& table, int num_timesteps,
                          double priority);
  absl::Status Flush();
  absl::Status Close();

  size_t num_servers() const { return writers_.size(); }
  Writer& writer(size_t i) { return *writers_[i]; }
  // Index of the server that receives the next CreateItem.
  size_t next_server() const { return cursor_; }

 private:
  explicit PooledWriter(std::vector<std::unique_ptr<Writer>> writers,
                        WriterOptions options);

  std::vector<std::unique_ptr<Writer>> writers_;
  const WriterOptions options_;
  std::optional<Signature> signature_;
  // The last max_sequence_length steps; steps_[0] has index first_step_.
  std::deque<Step> steps_;
  int64_t first_step_ = 0;
  int64_t total_steps_ = 0;
  // Steps [0, sent_until_[i]) have been handed to writer i.
  std::vector<int64_t> sent_until_;
  size_t cursor_ = 0;
};

}  // namespace relay

#endif  // RELAY_WRITER_H_
