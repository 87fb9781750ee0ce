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

#include "relay/sampler.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/time/clock.h"
#include "relay/socket.h"
#include "relay/status_macros.h"

namespace relay {

namespace {

bool Retryable(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kUnavailable:
    case absl::StatusCode::kDeadlineExceeded:
    case absl::StatusCode::kCancelled:
    case absl::StatusCode::kInternal:
    case absl::StatusCode::kResourceExhausted:
      return true;
    default:
      return false;
  }
}

}  // namespace

absl::Duration RetryPolicy::Backoff(int attempt, std::mt19937_64* rng) const {
  double seconds = absl::ToDoubleSeconds(initial_backoff) *
                   std::pow(multiplier, std::max(0, attempt - 1));
  seconds = std::min(seconds, absl::ToDoubleSeconds(max_backoff));
  std::uniform_real_distribution<double> factor(1.0 - jitter, 1.0 + jitter);
  return absl::Seconds(seconds * factor(*rng));
}

absl::Status SamplerOptions::Validate() const {
  if (table.empty()) return absl::InvalidArgumentError("table is empty");
  if (max_in_flight_samples_per_worker < 1) {
    return absl::InvalidArgumentError(
        "max_in_flight_samples_per_worker must be >= 1");
  }
  if (num_workers < 1) {
    return absl::InvalidArgumentError("num_workers must be >= 1");
  }
  if (timeout_ms < -1) {
    return absl::InvalidArgumentError("timeout_ms must be >= -1");
  }
  if (num_samples_per_worker == 0 || num_samples_per_worker < -1) {
    return absl::InvalidArgumentError(
        "num_samples_per_worker must be positive or -1");
  }
  if (retry.max_attempts < 1) {
    return absl::InvalidArgumentError("retry.max_attempts must be >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<Step>> DecodeItemSteps(
    const Item& item, std::span<const std::shared_ptr<const Chunk>> chunks) {
  std::vector<Step> steps;
  steps.reserve(item.length);
  int64_t chunk_start = 0;
  const int64_t begin = item.offset;
  const int64_t end = item.offset + item.length;
  for (const auto& chunk : chunks) {
    const int64_t chunk_end = chunk_start + chunk->num_rows();
    const int64_t lo = std::max(begin, chunk_start);
    const int64_t hi = std::min(end, chunk_end);
    if (lo < hi) {
      RELAY_ASSIGN_OR_RETURN(
          std::vector<FlatRow> rows,
          DecodeRows(*chunk, lo - chunk_start, hi - lo));
      for (const FlatRow& row : rows) {
        RELAY_ASSIGN_OR_RETURN(Step step, Unflatten(row, chunk->signature()));
        steps.push_back(std::move(step));
      }
    }
    chunk_start = chunk_end;
  }
  if (static_cast<int64_t>(steps.size()) != item.length) {
    return absl::DataLossError(absl::StrCat(
        "item ", item.key, " spans ", item.length, " rows but its chunks hold ",
        steps.size(), " of them"));
  }
  return steps;
}

struct Sampler::Worker {
  std::string endpoint;
  std::thread thread;
  std::mt19937_64 rng;

  absl::Mutex mu;
  Socket socket ABSL_GUARDED_BY(mu);
  uint64_t generation ABSL_GUARDED_BY(mu) = 0;
};

absl::StatusOr<std::unique_ptr<Sampler>> Sampler::Open(
    std::vector<std::string> endpoints, SamplerOptions options) {
  RELAY_RETURN_IF_ERROR(options.Validate());
  if (endpoints.empty()) {
    return absl::InvalidArgumentError("endpoint list is empty");
  }
  auto sampler = std::unique_ptr<Sampler>(
      new Sampler(std::move(endpoints), std::move(options)));
  for (auto& worker : sampler->workers_) {
    Worker* w = worker.get();
    w->thread = std::thread([s = sampler.get(), w] { s->Run(w); });
  }
  return sampler;
}

Sampler::Sampler(std::vector<std::string> endpoints, SamplerOptions options)
    : options_(std::move(options)) {
  std::seed_seq seed{options_.seed};
  std::mt19937_64 seeder(seed);
  for (const auto& endpoint : endpoints) {
    for (int i = 0; i < options_.num_workers; ++i) {
      auto worker = std::make_unique<Worker>();
      worker->endpoint = endpoint;
      worker->rng.seed(seeder());
      workers_.push_back(std::move(worker));
    }
  }
  active_workers_ = workers_.size();
}

Sampler::~Sampler() { Close(); }

void Sampler::Close() {
  {
    absl::MutexLock lock(&mu_);
    if (closing_) return;
    closing_ = true;
  }
  for (auto& worker : workers_) {
    absl::MutexLock lock(&worker->mu);
    worker->socket.Shutdown();
  }
  for (auto& worker : workers_) {
    if (worker->thread.joinable()) worker->thread.join();
  }
  absl::MutexLock lock(&mu_);
  queue_.clear();
}

int64_t Sampler::reconnects() const {
  absl::MutexLock lock(&mu_);
  return reconnects_;
}

void Sampler::Run(Worker* worker) {
  int64_t remaining = options_.num_samples_per_worker;
  int failures = 0;
  absl::Status status;
  while (true) {
    const int64_t before = remaining;
    status = Stream(worker, &remaining);
    if (status.ok()) break;
    {
      absl::MutexLock lock(&mu_);
      if (closing_) break;
    }
    if (!Retryable(status)) break;
    // A stream that delivered something was healthy; start counting afresh.
    if (remaining != before) failures = 0;
    if (++failures >= options_.retry.max_attempts) break;
    absl::MutexLock lock(&mu_);
    ++reconnects_;
    const bool* closing = &closing_;
    mu_.AwaitWithTimeout(absl::Condition(closing),
                         options_.retry.Backoff(failures, &worker->rng));
    if (closing_) break;
  }
  {
    absl::MutexLock lock(&worker->mu);
    worker->socket.Close();
    ++worker->generation;
  }
  absl::MutexLock lock(&mu_);
  --active_workers_;
  if (status.ok()) {
    ++ended_cleanly_;
  } else if (!Retryable(status)) {
    fatal_error_ = status;
  } else if (!closing_) {
    last_error_ = absl::Status(
        status.code(), absl::StrCat(worker->endpoint, ": ", status.message()));
  }
}

absl::Status Sampler::Stream(Worker* worker, int64_t* remaining) {
  RELAY_ASSIGN_OR_RETURN(
      Socket socket,
      Socket::Connect(worker->endpoint, options_.connect_timeout));
  uint64_t generation;
  {
    absl::MutexLock lock(&worker->mu);
    worker->socket = std::move(socket);
    generation = ++worker->generation;
  }
  {
    // Close may have run between connecting and publishing the socket.
    absl::MutexLock lock(&mu_);
    if (closing_) return absl::CancelledError("sampler closed");
  }
  SampleRequestMsg request;
  request.table = options_.table;
  request.max_in_flight = options_.max_in_flight_samples_per_worker;
  request.num_samples = *remaining;
  request.timeout_ms = options_.timeout_ms;
  {
    absl::MutexLock lock(&worker->mu);
    RELAY_RETURN_IF_ERROR(worker->socket.Send(request));
  }
  // Only this thread replaces the socket, so reading through the pointer
  // without the lock is safe; acks are sent concurrently under the lock.
  Socket* stream;
  {
    absl::MutexLock lock(&worker->mu);
    stream = &worker->socket;
  }
  while (true) {
    RELAY_ASSIGN_OR_RETURN(Message message,
                           stream->Receive(options_.max_message_bytes));
    if (auto* response = std::get_if<SampleResponseMsg>(&message)) {
      Queued queued;
      queued.worker = worker;
      queued.generation = generation;
      Sample& sample = queued.sample;
      RELAY_ASSIGN_OR_RETURN(sample.steps,
                             DecodeItemSteps(response->item, response->chunks));
      for (const auto& chunk : response->chunks) {
        sample.transmitted_rows += chunk->num_rows();
      }
      sample.item = std::move(response->item);
      sample.probability = response->probability;
      sample.table_size = response->table_size;
      sample.endpoint = worker->endpoint;
      if (*remaining > 0) --*remaining;
      absl::MutexLock lock(&mu_);
      queue_.push_back(std::move(queued));
    } else if (std::holds_alternative<SampleEndMsg>(message)) {
      return absl::OkStatus();
    } else if (auto* error = std::get_if<ErrorMsg>(&message)) {
      return StatusFromError(*error);
    } else {
      return absl::InternalError(absl::StrCat(
          "sampler received unexpected ", MessageName(TagOf(message))));
    }
  }
}

void Sampler::Acknowledge(Worker* worker, uint64_t generation) {
  absl::MutexLock lock(&worker->mu);
  // Credits belong to the stream that delivered the sample.
  if (worker->generation != generation || !worker->socket.valid()) return;
  worker->socket.Send(SampleAckMsg{1}).IgnoreError();
}

absl::StatusOr<std::optional<Sample>> Sampler::Next(
    std::optional<absl::Duration> timeout) {
  Queued queued;
  {
    absl::MutexLock lock(&mu_);
    auto ready = [this]() ABSL_EXCLUSIVE_LOCKS_REQUIRED(mu_) {
      return !queue_.empty() || active_workers_ == 0 || closing_ ||
             !fatal_error_.ok();
    };
    if (timeout.has_value()) {
      if (!mu_.AwaitWithTimeout(absl::Condition(&ready), *timeout)) {
        return absl::DeadlineExceededError("no sample within the timeout");
      }
    } else {
      mu_.Await(absl::Condition(&ready));
    }
    if (queue_.empty()) {
      if (closing_) return absl::CancelledError("sampler closed");
      if (!fatal_error_.ok()) return fatal_error_;
      if (ended_cleanly_ > 0) return std::nullopt;
      return last_error_;
    }
    queued = std::move(queue_.front());
    queue_.pop_front();
  }
  Acknowledge(queued.worker, queued.generation);
  return std::optional<Sample>(std::move(queued.sample));
}

}  // namespace relay
