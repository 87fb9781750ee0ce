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

#include "relay/bench.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <memory>
#include <random>
#include <thread>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/synchronization/mutex.h"
#include "absl/synchronization/notification.h"
#include "absl/time/clock.h"
#include "json.hpp"
#include "relay/client.h"
#include "relay/sampler.h"
#include "relay/server.h"
#include "relay/status_macros.h"
#include "relay/writer.h"

namespace relay {

namespace {

using json = nlohmann::json;

constexpr int kPayloadVariants = 8;
constexpr int64_t kMemoryBudgetBytes = 256 << 20;

std::string TableName(int i) { return absl::StrCat("bench_", i); }

std::vector<Step> RandomSteps(int64_t payload_bytes, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uniform(0.0f, 1.0f);
  std::vector<Step> steps;
  for (int v = 0; v < kPayloadVariants; ++v) {
    std::vector<float> values(payload_bytes / 4);
    for (float& x : values) x = uniform(rng);
    steps.emplace_back(Tensor::FromValues<float>(
        {static_cast<int64_t>(values.size())}, values));
  }
  return steps;
}

struct ClientCounters {
  std::atomic<int64_t> items{0};
  std::atomic<int64_t> bytes{0};
  std::vector<double> latencies_ms;
};

class FirstError {
 public:
  void Record(absl::Status status) {
    absl::MutexLock lock(&mu_);
    if (status_.ok()) status_ = std::move(status);
  }
  absl::Status Get() {
    absl::MutexLock lock(&mu_);
    return status_;
  }

 private:
  absl::Mutex mu_;
  absl::Status status_;
};

double Ms(absl::Duration d) { return absl::ToDoubleMilliseconds(d); }

absl::Status Prefill(const std::string& endpoint, const BenchConfig& config) {
  WriterOptions options;
  options.chunk_length = config.chunk_length;
  options.max_sequence_length = config.chunk_length;
  RELAY_ASSIGN_OR_RETURN(auto writer, Writer::Open(endpoint, options));
  auto steps = RandomSteps(config.payload_bytes, config.seed ^ 0x9e3779b9);
  int64_t n = 0;
  for (int t = 0; t < config.tables; ++t) {
    for (int64_t i = 0; i < config.prefill_items; ++i) {
      for (int k = 0; k < config.chunk_length; ++k) {
        RELAY_RETURN_IF_ERROR(writer->Append(steps[n++ % steps.size()]));
      }
      RELAY_RETURN_IF_ERROR(
          writer->CreateItem(TableName(t), config.chunk_length, 1.0));
    }
  }
  return writer->Close();
}

}  // namespace

absl::StatusOr<BenchMode> BenchModeFromName(const std::string& name) {
  if (name == "insert") return BenchMode::kInsert;
  if (name == "sample") return BenchMode::kSample;
  if (name == "mixed") return BenchMode::kMixed;
  if (name == "sharded") return BenchMode::kSharded;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown mode '", name, "' (insert, sample, mixed, sharded)"));
}

std::string BenchModeName(BenchMode mode) {
  switch (mode) {
    case BenchMode::kInsert: return "insert";
    case BenchMode::kSample: return "sample";
    case BenchMode::kMixed: return "mixed";
    case BenchMode::kSharded: return "sharded";
  }
  return "unknown";
}

absl::Status BenchConfig::Validate() const {
  if (payload_bytes < 4 || payload_bytes % 4 != 0) {
    return absl::InvalidArgumentError(
        "payload_bytes must be a positive multiple of 4");
  }
  if (clients < 1) return absl::InvalidArgumentError("clients must be >= 1");
  if (tables < 1) return absl::InvalidArgumentError("tables must be >= 1");
  if (!(duration_s > 0)) {
    return absl::InvalidArgumentError("duration must be positive");
  }
  if (chunk_length < 1) {
    return absl::InvalidArgumentError("chunk_length must be >= 1");
  }
  if (max_in_flight < 1) {
    return absl::InvalidArgumentError("max_in_flight must be >= 1");
  }
  if (mode == BenchMode::kMixed && clients < 2) {
    return absl::InvalidArgumentError("mixed mode needs at least 2 clients");
  }
  return absl::OkStatus();
}

double Percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0;
  const size_t rank = static_cast<size_t>(
      std::ceil(p / 100.0 * static_cast<double>(values.size())));
  const size_t index = std::clamp<size_t>(rank, 1, values.size()) - 1;
  std::nth_element(values.begin(), values.begin() + index, values.end());
  return values[index];
}

absl::StatusOr<BenchResult> RunBench(const BenchConfig& config) {
  RELAY_RETURN_IF_ERROR(config.Validate());
  std::unique_ptr<Server> server;
  std::string endpoint = config.server;
  if (endpoint.empty()) {
    ServerConfig server_config;
    server_config.address = "127.0.0.1:0";
    const int64_t item_bytes = config.payload_bytes * config.chunk_length;
    const int64_t max_size = std::clamp<int64_t>(
        kMemoryBudgetBytes / item_bytes / config.tables, 100, 100000);
    for (int t = 0; t < config.tables; ++t) {
      TableConfig table;
      table.name = TableName(t);
      table.sampler = SelectorOptions::Uniform();
      table.remover = SelectorOptions::Fifo();
      table.max_size = std::max<int64_t>(max_size, config.prefill_items);
      RELAY_ASSIGN_OR_RETURN(table.rate_limiter, RateLimiterConfig::MinSize(1));
      table.rng_seed = config.seed + t;
      server_config.tables.push_back(std::move(table));
    }
    RELAY_ASSIGN_OR_RETURN(server, Server::Start(std::move(server_config)));
    endpoint = server->address();
  }

  int inserters = 0;
  int samplers = 0;
  switch (config.mode) {
    case BenchMode::kInsert:
    case BenchMode::kSharded:
      inserters = config.clients;
      break;
    case BenchMode::kSample:
      samplers = config.clients;
      break;
    case BenchMode::kMixed:
      samplers = config.clients / 2;
      inserters = config.clients - samplers;
      break;
  }
  if (samplers > 0) RELAY_RETURN_IF_ERROR(Prefill(endpoint, config));

  Client info_client(endpoint);
  RELAY_ASSIGN_OR_RETURN(auto before, info_client.ServerInfo());
  auto sum_counters = [&config](const std::vector<TableInfo>& infos,
                                int64_t* inserts, int64_t* samples) {
    *inserts = *samples = 0;
    for (const auto& info : infos) {
      for (int t = 0; t < config.tables; ++t) {
        if (info.config.name == TableName(t)) {
          *inserts += info.counters.inserts;
          *samples += info.counters.samples;
        }
      }
    }
  };
  int64_t inserts_before, samples_before;
  sum_counters(before, &inserts_before, &samples_before);

  const int n = config.clients;
  std::vector<std::unique_ptr<ClientCounters>> counters;
  for (int i = 0; i < n; ++i) {
    counters.push_back(std::make_unique<ClientCounters>());
  }
  std::atomic<int> ready{0};
  absl::Notification go;
  std::atomic<bool> stop{false};
  FirstError errors;
  const int64_t item_bytes = config.payload_bytes * config.chunk_length;

  auto insert_client = [&](int index) {
    ClientCounters& c = *counters[index];
    WriterOptions options;
    options.chunk_length = config.chunk_length;
    options.max_sequence_length = config.chunk_length;
    auto writer = Writer::Open(endpoint, options);
    auto steps = RandomSteps(config.payload_bytes, config.seed * 7919 + index);
    ++ready;
    if (!writer.ok()) {
      errors.Record(writer.status());
      return;
    }
    go.WaitForNotification();
    int64_t step = 0;
    int64_t item = 0;
    while (!stop.load(std::memory_order_relaxed)) {
      const absl::Time start = absl::Now();
      for (int k = 0; k < config.chunk_length; ++k) {
        absl::Status status = (*writer)->Append(steps[step++ % steps.size()]);
        if (!status.ok()) return errors.Record(status);
      }
      const int table = (index + item++) % config.tables;
      absl::Status status =
          (*writer)->CreateItem(TableName(table), config.chunk_length, 1.0);
      if (!status.ok()) return errors.Record(status);
      c.latencies_ms.push_back(Ms(absl::Now() - start));
      c.items.fetch_add(1, std::memory_order_relaxed);
      c.bytes.fetch_add(item_bytes, std::memory_order_relaxed);
    }
    absl::Status status = (*writer)->Close();
    if (!status.ok()) errors.Record(status);
  };

  auto sample_client = [&](int index) {
    ClientCounters& c = *counters[index];
    SamplerOptions options;
    options.table = TableName(index % config.tables);
    options.max_in_flight_samples_per_worker = config.max_in_flight;
    options.num_workers = 1;
    options.seed = config.seed + index;
    auto sampler = Sampler::Open({endpoint}, options);
    ++ready;
    if (!sampler.ok()) {
      errors.Record(sampler.status());
      return;
    }
    go.WaitForNotification();
    while (!stop.load(std::memory_order_relaxed)) {
      const absl::Time start = absl::Now();
      auto sample = (*sampler)->Next(absl::Seconds(1));
      if (!sample.ok()) {
        if (absl::IsDeadlineExceeded(sample.status())) continue;
        return errors.Record(sample.status());
      }
      if (!sample->has_value()) {
        return errors.Record(absl::InternalError("sample stream ended"));
      }
      c.latencies_ms.push_back(Ms(absl::Now() - start));
      c.items.fetch_add(1, std::memory_order_relaxed);
      c.bytes.fetch_add((*sample)->item.length * config.payload_bytes,
                        std::memory_order_relaxed);
    }
    (*sampler)->Close();
  };

  std::vector<std::thread> threads;
  for (int i = 0; i < n; ++i) {
    if (i < inserters) {
      threads.emplace_back(insert_client, i);
    } else {
      threads.emplace_back(sample_client, i);
    }
  }
  while (ready.load() < n) absl::SleepFor(absl::Milliseconds(1));

  BenchResult result;
  result.config = config;
  const absl::Time start = absl::Now();
  const absl::Time end = start + absl::Seconds(config.duration_s);
  go.Notify();
  std::vector<int64_t> last_items(n, 0);
  std::vector<int64_t> last_bytes(n, 0);
  for (int second = 1;; ++second) {
    const absl::Time tick = std::min(end, start + absl::Seconds(second));
    absl::SleepFor(tick - absl::Now());
    BenchSecond record;
    record.second = second;
    for (int i = 0; i < n; ++i) {
      const int64_t items = counters[i]->items.load();
      const int64_t bytes = counters[i]->bytes.load();
      record.per_client_items.push_back(items - last_items[i]);
      record.items += items - last_items[i];
      record.bytes += bytes - last_bytes[i];
      last_items[i] = items;
      last_bytes[i] = bytes;
    }
    result.series.push_back(std::move(record));
    if (tick >= end) break;
  }
  stop = true;
  result.elapsed_s = absl::ToDoubleSeconds(absl::Now() - start);
  for (auto& thread : threads) thread.join();
  RELAY_RETURN_IF_ERROR(errors.Get());

  // Totals cover the timed window; the few operations completing after the
  // stop flag are excluded so QPS is items per measured second.
  std::vector<double> latencies;
  for (int i = 0; i < n; ++i) {
    result.per_client_items.push_back(last_items[i]);
    result.total_items += last_items[i];
    result.total_bytes += last_bytes[i];
    latencies.insert(latencies.end(), counters[i]->latencies_ms.begin(),
                     counters[i]->latencies_ms.end());
  }
  result.qps = result.total_items / result.elapsed_s;
  result.bps = result.total_bytes / result.elapsed_s;
  result.latency.count = latencies.size();
  result.latency.p50_ms = Percentile(latencies, 50);
  result.latency.p95_ms = Percentile(latencies, 95);
  result.latency.p99_ms = Percentile(latencies, 99);

  RELAY_ASSIGN_OR_RETURN(auto after, info_client.ServerInfo());
  int64_t inserts_after, samples_after;
  sum_counters(after, &inserts_after, &samples_after);
  result.server_inserts = inserts_after - inserts_before;
  result.server_samples = samples_after - samples_before;
  if (server != nullptr) server->Stop();
  if (!config.out.empty()) {
    RELAY_RETURN_IF_ERROR(AppendResultFile(config.out, result));
  }
  return result;
}

absl::StatusOr<std::vector<BenchResult>> RunShardedSweep(
    BenchConfig config, const std::vector<int>& table_counts) {
  std::vector<BenchResult> results;
  for (int tables : table_counts) {
    config.tables = tables;
    config.mode = BenchMode::kSharded;
    RELAY_ASSIGN_OR_RETURN(BenchResult result, RunBench(config));
    results.push_back(std::move(result));
  }
  return results;
}

std::string ResultToJsonLines(const BenchResult& result) {
  const BenchConfig& c = result.config;
  std::string out;
  for (const auto& second : result.series) {
    json record = {{"type", "second"},
                   {"mode", BenchModeName(c.mode)},
                   {"t", second.second},
                   {"items", second.items},
                   {"bytes", second.bytes},
                   {"per_client_items", second.per_client_items}};
    out += record.dump() + "\n";
  }
  json summary = {
      {"type", "summary"},
      {"mode", BenchModeName(c.mode)},
      {"payload_bytes", c.payload_bytes},
      {"clients", c.clients},
      {"tables", c.tables},
      {"duration_s", c.duration_s},
      {"chunk_length", c.chunk_length},
      {"max_in_flight", c.max_in_flight},
      {"seed", c.seed},
      {"elapsed_s", result.elapsed_s},
      {"total_items", result.total_items},
      {"total_bytes", result.total_bytes},
      {"qps", result.qps},
      {"bps", result.bps},
      {"per_client_items", result.per_client_items},
      {"latency_ms",
       {{"count", result.latency.count},
        {"p50", result.latency.p50_ms},
        {"p95", result.latency.p95_ms},
        {"p99", result.latency.p99_ms}}},
      {"server_inserts", result.server_inserts},
      {"server_samples", result.server_samples},
      {"disclaimer", kBenchDisclaimer},
  };
  out += summary.dump() + "\n";
  return out;
}

std::string SummaryTable(const std::vector<BenchResult>& results) {
  std::string out = absl::StrFormat("%-8s %7s %6s %9s %12s %14s %9s %9s %9s\n",
                                    "mode", "clients", "tables", "payload",
                                    "qps", "MB/s", "p50_ms", "p95_ms",
                                    "p99_ms");
  for (const auto& r : results) {
    absl::StrAppendFormat(
        &out, "%-8s %7d %6d %9d %12.1f %14.2f %9.3f %9.3f %9.3f\n",
        BenchModeName(r.config.mode), r.config.clients, r.config.tables,
        r.config.payload_bytes, r.qps, r.bps / 1e6, r.latency.p50_ms,
        r.latency.p95_ms, r.latency.p99_ms);
  }
  absl::StrAppend(&out, "note: ", kBenchDisclaimer, "\n");
  return out;
}

absl::Status AppendResultFile(const std::string& path,
                              const BenchResult& result) {
  std::ofstream out(path, std::ios::app);
  if (!out) return absl::InternalError(absl::StrCat("cannot open ", path));
  out << ResultToJsonLines(result);
  if (!out) return absl::InternalError(absl::StrCat("cannot write ", path));
  return absl::OkStatus();
}

}  // namespace relay
