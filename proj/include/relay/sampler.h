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

#ifndef RELAY_SAMPLER_H_
#define RELAY_SAMPLER_H_

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "absl/base/thread_annotations.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/synchronization/mutex.h"
#include "absl/time/time.h"
#include "relay/chunk.h"
#include "relay/table_extension.h"
#include "relay/tensor.h"
#include "relay/wire.h"

namespace relay {

struct RetryPolicy {
  // Connection attempts per stream before the endpoint is given up on.
  int max_attempts = 5;
  absl::Duration initial_backoff = absl::Milliseconds(20);
  absl::Duration max_backoff = absl::Seconds(1);
  double multiplier = 2.0;
  // Each delay is scaled by a uniform factor in [1 - jitter, 1 + jitter].
  double jitter = 0.2;

  absl::Duration Backoff(int attempt, std::mt19937_64* rng) const;
};

struct SamplerOptions {
  std::string table;
  int max_in_flight_samples_per_worker = 1;
  // Streams per endpoint.
  int num_workers = 1;
  // Server-side wait for the rate limiter per sample; -1 waits forever. On
  // expiry the stream ends and, once every stream has ended, Next returns
  // end-of-data.
  int64_t timeout_ms = -1;
  // Samples per stream; -1 is unbounded.
  int64_t num_samples_per_worker = -1;
  RetryPolicy retry;
  absl::Duration connect_timeout = absl::Seconds(5);
  size_t max_message_bytes = kDefaultMaxMessageBytes;
  uint64_t seed = 0;

  absl::Status Validate() const;
};

struct Sample {
  // Priority at sample time, times_sampled after the increment, server-side
  // chunk keys.
  Item item;
  double probability = 0;
  int64_t table_size = 0;
  std::string endpoint;
  // The item's steps, unflattened.
  std::vector<Step> steps;
  // Rows carried by the response's chunks (>= item.length).
  int64_t transmitted_rows = 0;
};

// Decodes the item's [offset, offset + length) rows from its chunks.
absl::StatusOr<std::vector<Step>> DecodeItemSteps(
    const Item& item, std::span<const std::shared_ptr<const Chunk>> chunks);

// Prefetching iterator over one or more servers. Each worker owns a stream
// and keeps up to max_in_flight unacknowledged samples; a sample is
// acknowledged when Next hands it out. Results from several endpoints are
// merged in arrival order.
class Sampler {
 public:
  static absl::StatusOr<std::unique_ptr<Sampler>> Open(
      std::vector<std::string> endpoints, SamplerOptions options);

  ~Sampler();
  Sampler(const Sampler&) = delete;
  Sampler& operator=(const Sampler&) = delete;

  // nullopt is end-of-data: every stream ended (timeout or num_samples) and
  // nothing is buffered. With `timeout`, DeadlineExceeded if nothing arrives
  // in time. An error is returned when every endpoint failed.
  absl::StatusOr<std::optional<Sample>> Next(
      std::optional<absl::Duration> timeout = std::nullopt);

  void Close();

  int64_t reconnects() const;

 private:
  struct Worker;
  struct Queued {
    Sample sample;
    Worker* worker;
    uint64_t generation;
  };

  Sampler(std::vector<std::string> endpoints, SamplerOptions options);

  void Run(Worker* worker);
  // One connection's lifetime. Returns OK when the stream ended normally.
  absl::Status Stream(Worker* worker, int64_t* remaining);
  void Acknowledge(Worker* worker, uint64_t generation);

  const SamplerOptions options_;
  std::vector<std::unique_ptr<Worker>> workers_;

  mutable absl::Mutex mu_;
  std::deque<Queued> queue_ ABSL_GUARDED_BY(mu_);
  int active_workers_ ABSL_GUARDED_BY(mu_) = 0;
  int ended_cleanly_ ABSL_GUARDED_BY(mu_) = 0;
  absl::Status last_error_ ABSL_GUARDED_BY(mu_);
  absl::Status fatal_error_ ABSL_GUARDED_BY(mu_);
  int64_t reconnects_ ABSL_GUARDED_BY(mu_) = 0;
  bool closing_ ABSL_GUARDED_BY(mu_) = false;
};

}  // namespace relay

#endif  // RELAY_SAMPLER_H_
