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

#ifndef RELAY_BENCH_H_
#define RELAY_BENCH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace relay {

inline constexpr char kBenchDisclaimer[] =
    "desk-scale measurement: all clients share one host and loopback; "
    "absolute numbers are not comparable to multi-machine deployments";

enum class BenchMode { kInsert, kSample, kMixed, kSharded };

absl::StatusOr<BenchMode> BenchModeFromName(const std::string& name);
std::string BenchModeName(BenchMode mode);

struct BenchConfig {
  BenchMode mode = BenchMode::kInsert;
  // Per step; realised as a float32 vector so it must be a multiple of 4.
  int64_t payload_bytes = 4000;
  int clients = 1;
  int tables = 1;
  double duration_s = 10;
  // Steps per chunk and per item.
  int chunk_length = 1;
  uint64_t seed = 0;
  // Line-delimited JSON records; empty skips the file.
  std::string out;
  int max_in_flight = 8;
  // host:port of a running server; empty starts one in-process.
  std::string server;
  // Items inserted per table before a sample run starts timing.
  int64_t prefill_items = 1000;

  absl::Status Validate() const;
};

struct LatencySummary {
  int64_t count = 0;
  double p50_ms = 0;
  double p95_ms = 0;
  double p99_ms = 0;
};

struct BenchSecond {
  int second = 0;
  int64_t items = 0;
  int64_t bytes = 0;
  std::vector<int64_t> per_client_items;
};

struct BenchResult {
  BenchConfig config;
  std::vector<BenchSecond> series;
  std::vector<int64_t> per_client_items;
  int64_t total_items = 0;
  int64_t total_bytes = 0;
  double elapsed_s = 0;
  double qps = 0;
  double bps = 0;
  LatencySummary latency;
  // Limiter counters summed over the bench tables after the run.
  int64_t server_inserts = 0;
  int64_t server_samples = 0;
};

// Runs one measurement. Insert clients each own a writer and round-robin
// their items over the tables; sample clients each own a one-stream sampler.
// Mixed splits the clients evenly. Sharded behaves like insert.
absl::StatusOr<BenchResult> RunBench(const BenchConfig& config);

// Sharded sweep: one insert run per table count.
absl::StatusOr<std::vector<BenchResult>> RunShardedSweep(
    BenchConfig config, const std::vector<int>& table_counts);

// Nearest-rank percentile over unsorted samples.
double Percentile(std::vector<double> values, double p);

// One "second" record per series entry then one "summary" record.
std::string ResultToJsonLines(const BenchResult& result);
std::string SummaryTable(const std::vector<BenchResult>& results);
absl::Status AppendResultFile(const std::string& path,
                              const BenchResult& result);

}  // namespace relay

#endif  // RELAY_BENCH_H_
