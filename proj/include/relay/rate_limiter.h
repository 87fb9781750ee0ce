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

#ifndef RELAY_RATE_LIMITER_H_
#define RELAY_RATE_LIMITER_H_

#include <cstdint>
#include <string>

#include "absl/status/statusor.h"

namespace relay {

// Admission bounds expressed on the cursor
//   diff = samples_per_insert * inserts - samples.
// An insert moves the cursor up by samples_per_insert, a sample moves it down
// by one.
struct RateLimiterConfig {
  int64_t min_size_to_sample = 1;
  double samples_per_insert = 1.0;
  double min_diff = -1.7976931348623157e308;
  double max_diff = 1.7976931348623157e308;

  // Bounds diff to [-error_buffer, +error_buffer].
  static absl::StatusOr<RateLimiterConfig> SampleToInsertRatio(
      int64_t min_size_to_sample, double samples_per_insert,
      double error_buffer);

  // Gates sampling on table size only; the cursor bounds are unbounded.
  static absl::StatusOr<RateLimiterConfig> MinSize(int64_t min_size);

  // samples_per_insert = 1 and diff in [0, queue_size]: diff equals the number
  // of inserted items that have not been sampled yet.
  static absl::StatusOr<RateLimiterConfig> Queue(int64_t queue_size);

  absl::Status Validate() const;
  std::string DebugString() const;
  bool operator==(const RateLimiterConfig& other) const = default;
};

struct RateLimiterCounters {
  int64_t inserts = 0;
  int64_t samples = 0;
  // Informational; deletions and evictions never move the cursor.
  int64_t deletes = 0;

  bool operator==(const RateLimiterCounters& other) const = default;
};

// Pure admission state machine. The owning table calls it under its lock and
// implements the blocking.
class RateLimiter {
 public:
  explicit RateLimiter(RateLimiterConfig config) : config_(config) {}

  bool CanInsert(int64_t table_size) const;
  bool CanSample(int64_t table_size) const;

  void RecordInsert() { ++counters_.inserts; }
  void RecordSample() { ++counters_.samples; }
  void RecordDelete() { ++counters_.deletes; }

  double diff() const {
    return config_.samples_per_insert * static_cast<double>(counters_.inserts) -
           static_cast<double>(counters_.samples);
  }

  const RateLimiterConfig& config() const { return config_; }
  const RateLimiterCounters& counters() const { return counters_; }
  void Restore(const RateLimiterCounters& counters) { counters_ = counters; }

 private:
  RateLimiterConfig config_;
  RateLimiterCounters counters_;
};

}  // namespace relay

#endif  // RELAY_RATE_LIMITER_H_
