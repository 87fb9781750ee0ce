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


// Acceptance checks for the replay system. Prints one PASS/FAIL line per
// criterion and exits non-zero if any failed.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/time/clock.h"
#include "absl/time/time.h"
#include "relay/bench.h"
#include "relay/checkpoint.h"
#include "relay/chunk.h"
#include "relay/chunk_store.h"
#include "relay/rate_limiter.h"
#include "relay/sampler.h"
#include "relay/selectors.h"
#include "relay/server.h"
#include "relay/server_config.h"
#include "relay/socket.h"
#include "relay/table.h"
#include "relay/tensor.h"
#include "relay/wire.h"
#include "relay/writer.h"
#include "test_util.h"

namespace relay {
namespace {

using testing::ItemOver;
using testing::MakeChunk;
using testing::ScalarObsStep;
using testing::SimpleConfig;

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome Fail(std::string detail) { return {false, std::move(detail)}; }

RateLimiterConfig MinSize(int64_t n) {
  auto config = RateLimiterConfig::MinSize(n);
  RELAY_CHECK(config.ok());
  return *config;
}

double Seconds(absl::Time start) {
  return absl::ToDoubleSeconds(absl::Now() - start);
}

std::unique_ptr<Server> StartOrDie(std::vector<TableConfig> tables) {
  ServerConfig config;
  config.tables = std::move(tables);
  auto server = Server::Start(std::move(config));
  RELAY_CHECK(server.ok());
  return *std::move(server);
}

// ---------------------------------------------------------------------------
// 1. Prioritized sampling distribution.

Outcome PrioritizedDistribution(double exponent,
                                const std::vector<double>& targets) {
  const absl::Time start = absl::Now();
  auto store = std::make_shared<ChunkStore>();
  auto table = Table::Create(
      SimpleConfig("p", SelectorOptions::Prioritized(exponent),
                   SelectorOptions::Fifo(), 10, MinSize(1)),
      store);
  if (!table.ok()) return Fail(table.status().ToString());
  const std::vector<double> priorities = {1, 2, 3, 4};
  auto chunk = MakeChunk(1, 1);
  for (int i = 0; i < 4; ++i) {
    absl::Status status =
        (*table)->InsertOrAssign(ItemOver(i + 1, priorities[i], {chunk}));
    if (!status.ok()) return Fail(status.ToString());
  }
  constexpr int kSamples = 100000;
  std::vector<int64_t> counts(4, 0);
  double worst_reported = 0;
  for (int s = 0; s < kSamples; ++s) {
    auto sample = (*table)->SampleOne(absl::ZeroDuration());
    if (!sample.ok()) return Fail(sample.status().ToString());
    const int index = static_cast<int>(sample->item.key) - 1;
    ++counts[index];
    worst_reported = std::max(
        worst_reported, std::abs(sample->probability - targets[index]));
  }
  double worst = 0;
  std::vector<std::string> parts;
  for (int i = 0; i < 4; ++i) {
    const double freq = static_cast<double>(counts[i]) / kSamples;
    worst = std::max(worst, std::abs(freq - targets[i]));
    parts.push_back(absl::StrFormat("%.4f(%.4f)", freq, targets[i]));
  }
  const double elapsed = Seconds(start);
  Outcome out;
  out.pass = worst <= 0.01 && worst_reported < 1e-9 && elapsed < 30;
  out.detail = absl::StrFormat(
      "C=%.1f freq(target) %s; max |err| %.4f (tol 0.01); reported "
      "probability max |err| %.2g; %.1f s",
      exponent, absl::StrJoin(parts, " "), worst, worst_reported, elapsed);
  return out;
}

Outcome CheckPrioritized() {
  Outcome literal = PrioritizedDistribution(1.0, {0.1, 0.2, 0.3, 0.4});
  // Direct evaluation of p_i^C / sum_j p_j^C for C = 0.5.
  std::vector<double> oracle;
  double z = 0;
  for (double p : {1.0, 2.0, 3.0, 4.0}) z += std::sqrt(p);
  for (double p : {1.0, 2.0, 3.0, 4.0}) oracle.push_back(std::sqrt(p) / z);
  Outcome half = PrioritizedDistribution(0.5, oracle);
  return {literal.pass && half.pass,
          absl::StrCat(literal.detail, " | ", half.detail)};
}

// ---------------------------------------------------------------------------
// 2. SPI enforcement under stress.

// Checks the diff bound at every completed insert and sample. Runs under the
// table lock, so plain members are enough.
class SpiMonitor : public TableExtension {
 public:
  SpiMonitor(double spi, double bound) : spi_(spi), bound_(bound) {}
  absl::string_view name() const override { return "spi_monitor"; }
  void OnInsert(const TableEvent& event) override { Check(event); }
  void OnSample(const TableEvent& event) override { Check(event); }

  int64_t violations() const { return violations_; }
  int64_t checks() const { return checks_; }
  double worst() const { return worst_; }

 private:
  void Check(const TableEvent& event) {
    const double diff = spi_ * static_cast<double>(event.counters.inserts) -
                        static_cast<double>(event.counters.samples);
    ++checks_;
    worst_ = std::max(worst_, std::abs(diff));
    if (std::abs(diff) > bound_) ++violations_;
  }

  const double spi_;
  const double bound_;
  int64_t violations_ = 0;
  int64_t checks_ = 0;
  double worst_ = 0;
};

struct StressResult {
  int64_t violations = 0;
  int64_t checks = 0;
  int64_t inserts = 0;
  int64_t samples = 0;
  double worst = 0;
  std::string error;
};

StressResult SpiStress(int64_t min_size, absl::Duration duration) {
  auto limiter = RateLimiterConfig::SampleToInsertRatio(min_size, 4.0, 40);
  RELAY_CHECK(limiter.ok());
  auto monitor = std::make_shared<SpiMonitor>(4.0, 40.0 + 4.0);
  auto store = std::make_shared<ChunkStore>();
  auto table = Table::Create(SimpleConfig("spi", SelectorOptions::Uniform(),
                                          SelectorOptions::Fifo(), 1000,
                                          *limiter),
                             store, {monitor});
  RELAY_CHECK(table.ok());
  auto chunk = MakeChunk(1, 1);
  std::atomic<bool> stop{false};
  std::atomic<uint64_t> next_key{1};
  absl::Mutex error_mu;
  std::string error;
  auto record = [&](const absl::Status& status) {
    absl::MutexLock lock(&error_mu);
    if (error.empty()) error = status.ToString();
  };
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&] {
      while (!stop.load()) {
        absl::Status status = (*table)->InsertOrAssign(
            ItemOver(next_key++, 1, {chunk}), absl::Milliseconds(100));
        if (!status.ok() && !absl::IsDeadlineExceeded(status)) {
          return record(status);
        }
      }
    });
  }
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      while (!stop.load()) {
        auto sample = (*table)->SampleOne(absl::Milliseconds(100));
        if (!sample.ok() && !absl::IsDeadlineExceeded(sample.status())) {
          return record(sample.status());
        }
      }
    });
  }
  absl::SleepFor(duration);
  stop = true;
  for (auto& thread : threads) thread.join();
  const TableInfo info = (*table)->info();
  StressResult result;
  result.violations = monitor->violations();
  result.checks = monitor->checks();
  result.worst = monitor->worst();
  result.inserts = info.counters.inserts;
  result.samples = info.counters.samples;
  result.error = error;
  return result;
}

std::string Describe(const StressResult& r, int64_t min_size, int seconds) {
  return absl::StrFormat(
      "min_size=%d spi=4 buffer=40, 4 inserters/8 samplers for %d s: %d "
      "inserts, %d samples, %d checked events, %d violations, max "
      "|4*inserts-samples| %.0f (bound 44)%s",
      min_size, seconds, r.inserts, r.samples, r.checks, r.violations,
      r.worst, r.error.empty() ? "" : absl::StrCat("; error ", r.error));
}

Outcome CheckSpi() {
  StressResult r = SpiStress(100, absl::Seconds(60));
  Outcome out;
  // Zero violations only means something if the stress actually ran; a
  // workload that stalls after its first few inserts proves nothing.
  out.pass = r.error.empty() && r.violations == 0 && r.samples > 0;
  out.detail = Describe(r, 100, 60);
  if (r.samples == 0) {
    absl::StrAppend(
        &out.detail,
        "; no sample was ever admitted: inserts stop once diff reaches 40 "
        "(10 items), so size never reaches min_size 100 and samples wait "
        "forever (deadlock of the configuration, not a bound violation)");
  }
  return out;
}

Outcome CheckSpiReachable() {
  StressResult r = SpiStress(10, absl::Seconds(10));
  return {r.error.empty() && r.violations == 0 && r.samples > 0,
          Describe(r, 10, 10)};
}

// ---------------------------------------------------------------------------
// 3. Queue exactness.

Outcome CheckQueue() {
  auto limiter = RateLimiterConfig::Queue(1000);
  RELAY_CHECK(limiter.ok());
  auto store = std::make_shared<ChunkStore>();
  auto table = Table::Create(
      SimpleConfig("q", SelectorOptions::Fifo(), SelectorOptions::Fifo(), 1000,
                   *limiter, 1),
      store);
  if (!table.ok()) return Fail(table.status().ToString());
  constexpr int kItems = 10000;
  auto chunk = MakeChunk(1, 1);
  absl::Status producer_status;
  std::thread producer([&] {
    for (int k = 1; k <= kItems; ++k) {
      absl::Status status = (*table)->InsertOrAssign(
          ItemOver(k, 1, {chunk}), absl::Seconds(30));
      if (!status.ok()) {
        producer_status = status;
        return;
      }
    }
  });
  std::vector<ItemKey> sampled;
  absl::Status consumer_status;
  for (int i = 0; i < kItems; ++i) {
    auto sample = (*table)->SampleOne(absl::Seconds(30));
    if (!sample.ok()) {
      consumer_status = sample.status();
      break;
    }
    sampled.push_back(sample->item.key);
  }
  producer.join();
  if (!producer_status.ok()) return Fail(producer_status.ToString());
  if (!consumer_status.ok()) return Fail(consumer_status.ToString());
  int64_t mismatches = 0;
  for (int i = 0; i < kItems; ++i) {
    if (sampled[i] != static_cast<ItemKey>(i + 1)) ++mismatches;
  }
  const int64_t size = (*table)->size();
  return {mismatches == 0 && size == 0,
          absl::StrFormat("%d items, %d out-of-order samples, final size %d",
                          kItems, mismatches, size)};
}

// ---------------------------------------------------------------------------
// 4. Chunk reference counting.

// Independent model of the writer's chunking rule: a chunk closes after K
// rows, or early when an item is created while rows are still pending.
class ReferenceChunker {
 public:
  explicit ReferenceChunker(int k) : k_(k) {}

  void Append() {
    ++steps_;
    if (steps_ - open_ == k_) Close();
  }

  struct Ref {
    std::vector<int> chunks;
    int64_t offset = 0;
  };

  Ref Item(int n) {
    if (steps_ > open_) Close();
    const int64_t first = steps_ - n;
    Ref ref;
    for (size_t i = 0; i < spans_.size(); ++i) {
      if (spans_[i].second <= first) continue;
      if (ref.chunks.empty()) ref.offset = first - spans_[i].first;
      ref.chunks.push_back(static_cast<int>(i));
    }
    return ref;
  }

 private:
  void Close() {
    spans_.push_back({open_, steps_});
    open_ = steps_;
  }

  const int k_;
  int64_t steps_ = 0;
  int64_t open_ = 0;
  std::vector<std::pair<int64_t, int64_t>> spans_;
};

bool WaitForStoreSize(ChunkStore* store, size_t want) {
  const absl::Time deadline = absl::Now() + absl::Seconds(10);
  while (true) {
    store->WaitForReclamation();
    if (store->size() == want) return true;
    if (absl::Now() > deadline) return false;
    absl::SleepFor(absl::Milliseconds(10));
  }
}

Outcome CheckRefcounting() {
  constexpr int kK = 4, kN = 4, kStride = 1, kSteps = 100;
  auto server = StartOrDie(
      {SimpleConfig("a", SelectorOptions::Uniform(), SelectorOptions::Fifo(),
                    1000, MinSize(1)),
       SimpleConfig("b", SelectorOptions::Uniform(), SelectorOptions::Fifo(),
                    1000, MinSize(1))});
  WriterOptions options;
  options.chunk_length = kK;
  options.max_sequence_length = kN;
  auto writer = Writer::Open(server->address(), options);
  if (!writer.ok()) return Fail(writer.status().ToString());
  ReferenceChunker model(kK);
  std::vector<ReferenceChunker::Ref> refs;
  for (int t = 1; t <= kSteps; ++t) {
    absl::Status status = (*writer)->Append(ScalarObsStep(t));
    model.Append();
    if (!status.ok()) return Fail(status.ToString());
    if (t >= kN && (t - kN) % kStride == 0) {
      for (const char* table : {"a", "b"}) {
        status = (*writer)->CreateItem(table, kN, 1.0);
        if (!status.ok()) return Fail(status.ToString());
      }
      refs.push_back(model.Item(kN));
    }
  }
  absl::Status status = (*writer)->Close();
  if (!status.ok()) return Fail(status.ToString());

  std::set<int> live;
  for (const auto& ref : refs) live.insert(ref.chunks.begin(), ref.chunks.end());
  ChunkStore* store = server->store().get();
  const bool settled = WaitForStoreSize(store, live.size());
  const size_t stored = store->size();

  // Per-item shape and per-chunk reference counts against the model.
  std::map<ChunkKey, int64_t> expected_refs;
  int64_t shape_mismatches = 0;
  for (const char* name : {"a", "b"}) {
    std::vector<Item> items = server->table(name)->Copy();
    std::sort(items.begin(), items.end(),
              [](const Item& x, const Item& y) { return x.key < y.key; });
    if (items.size() != refs.size()) {
      return Fail(absl::StrCat("table ", name, " holds ", items.size(),
                               " items, expected ", refs.size()));
    }
    for (size_t i = 0; i < items.size(); ++i) {
      if (items[i].chunk_keys.size() != refs[i].chunks.size() ||
          items[i].offset != refs[i].offset) {
        ++shape_mismatches;
      }
      for (ChunkKey key : items[i].chunk_keys) ++expected_refs[key];
    }
  }
  int64_t refcount_mismatches = 0;
  for (const auto& [key, count] : expected_refs) {
    if (store->RefCount(key) != count) ++refcount_mismatches;
  }
  const bool no_orphans = expected_refs.size() == stored;

  for (const char* name : {"a", "b"}) {
    Table* table = server->table(name);
    for (const Item& item : table->Copy()) {
      status = table->Delete(item.key);
      if (!status.ok()) return Fail(status.ToString());
    }
  }
  const bool drained = WaitForStoreSize(store, 0);
  const size_t after = store->size();
  server->Stop();
  return {settled && shape_mismatches == 0 && refcount_mismatches == 0 &&
              no_orphans && drained,
          absl::StrFormat(
              "K=4 n=4 stride 1 over 100 steps into 2 tables: %d items/table, "
              "store %d chunks (reference %d), %d item shape mismatches, %d "
              "refcount mismatches, store size after deleting all items %d",
              refs.size(), stored, live.size(), shape_mismatches,
              refcount_mismatches, after)};
}

// ---------------------------------------------------------------------------
// 5. Rows transmitted per sampled item.

Outcome CheckTransmittedRows() {
  auto server = StartOrDie(
      {SimpleConfig("n4", SelectorOptions::Fifo(), SelectorOptions::Fifo(), 10,
                    MinSize(1), 1),
       SimpleConfig("n2", SelectorOptions::Fifo(), SelectorOptions::Fifo(), 10,
                    MinSize(1), 1)});
  std::vector<std::string> parts;
  bool pass = true;
  for (const auto& [n, table] :
       std::vector<std::pair<int, std::string>>{{4, "n4"}, {2, "n2"}}) {
    WriterOptions options;
    options.chunk_length = 4;
    options.max_sequence_length = 4;
    auto writer = Writer::Open(server->address(), options);
    if (!writer.ok()) return Fail(writer.status().ToString());
    for (int t = 0; t < 4; ++t) {
      absl::Status status = (*writer)->Append(ScalarObsStep(t));
      if (!status.ok()) return Fail(status.ToString());
    }
    absl::Status status = (*writer)->CreateItem(table, n, 1.0);
    if (status.ok()) status = (*writer)->Close();
    if (!status.ok()) return Fail(status.ToString());

    auto socket = Socket::Connect(server->address());
    if (!socket.ok()) return Fail(socket.status().ToString());
    SampleRequestMsg request;
    request.table = table;
    request.num_samples = 1;
    request.timeout_ms = 5000;
    status = socket->Send(request);
    if (!status.ok()) return Fail(status.ToString());
    auto received = socket->Receive(kDefaultMaxMessageBytes);
    if (!received.ok()) return Fail(received.status().ToString());
    auto* response = std::get_if<SampleResponseMsg>(&*received);
    if (response == nullptr) {
      return Fail(absl::StrCat("expected SampleResponse, got ",
                               MessageName(TagOf(*received))));
    }
    int64_t rows = 0;
    for (const auto& chunk : response->chunks) {
      auto steps = DecodeSteps(*chunk);
      if (!steps.ok()) return Fail(steps.status().ToString());
      rows += steps->size();
    }
    pass = pass && rows == 4 && response->item.length == n;
    parts.push_back(absl::StrFormat("K=4 n=%d: item length %d, %d rows on the "
                                    "wire (expected 4)",
                                    n, response->item.length, rows));
  }
  server->Stop();
  return {pass, absl::StrJoin(parts, "; ")};
}

// ---------------------------------------------------------------------------
// 6. Checkpoint round trip.

struct World {
  std::shared_ptr<ChunkStore> store;
  std::vector<std::unique_ptr<Table>> tables;

  Table* table(const std::string& name) const {
    for (const auto& t : tables) {
      if (t->name() == name) return t.get();
    }
    return nullptr;
  }
};

const std::vector<std::string> kWorldTables = {"fifo", "heap", "lifo"};

World MakeWorld() {
  auto ratio = RateLimiterConfig::SampleToInsertRatio(1, 2.0, 30);
  auto queue = RateLimiterConfig::Queue(25);
  RELAY_CHECK(ratio.ok() && queue.ok());
  World world;
  world.store = std::make_shared<ChunkStore>();
  for (TableConfig config :
       {SimpleConfig("fifo", SelectorOptions::Fifo(), SelectorOptions::Fifo(),
                     40, MinSize(1), 3),
        SimpleConfig("heap", SelectorOptions::MaxHeap(),
                     SelectorOptions::MinHeap(), 30, *ratio),
        SimpleConfig("lifo", SelectorOptions::Lifo(), SelectorOptions::Fifo(),
                     25, *queue, 2)}) {
    auto table = Table::Create(config, world.store);
    RELAY_CHECK(table.ok());
    world.tables.push_back(*std::move(table));
  }
  return world;
}

std::shared_ptr<const Chunk> ChunkFor(const World& world, ChunkKey key) {
  const ChunkKey keys[] = {key};
  auto got = world.store->Get(keys);
  if (got.ok()) return got->front();
  return MakeChunk(key, 3, static_cast<float>(key * 10));
}

std::string ItemString(const Item& item) {
  return absl::StrCat(item.key, "/", item.priority, "/", item.times_sampled,
                      "/", item.offset, "+", item.length, "@",
                      absl::StrJoin(item.chunk_keys, ","));
}

// One scripted operation; returns its observable output.
std::string ApplyScriptedOp(const World& world, std::mt19937_64& rng,
                            ItemKey* next_key) {
  std::uniform_int_distribution<int> pick_table(0, 2);
  std::uniform_int_distribution<int> pick_op(0, 99);
  std::uniform_int_distribution<int> pick_priority(1, 6);
  Table* table = world.table(kWorldTables[pick_table(rng)]);
  const int op = pick_op(rng);
  const double priority = pick_priority(rng) / 2.0;
  auto existing = [&] {
    std::vector<ItemKey> keys;
    for (const Item& item : table->Copy()) keys.push_back(item.key);
    std::sort(keys.begin(), keys.end());
    return keys;
  };
  std::string out = absl::StrCat(table->name(), " ");
  if (op < 40) {
    std::uniform_int_distribution<int> pick_chunk(1, 12);
    std::uniform_int_distribution<int> pick_offset(0, 2);
    const ChunkKey first = pick_chunk(rng);
    const int64_t offset = pick_offset(rng);
    TableItem item;
    if (first < 12 && rng() % 2 == 0) {
      std::uniform_int_distribution<int64_t> pick_length(4 - offset,
                                                         6 - offset);
      item = ItemOver(*next_key, priority,
                      {ChunkFor(world, first), ChunkFor(world, first + 1)},
                      offset, pick_length(rng));
    } else {
      std::uniform_int_distribution<int64_t> pick_length(1, 3 - offset);
      item = ItemOver(*next_key, priority, {ChunkFor(world, first)}, offset,
                      pick_length(rng));
    }
    ++*next_key;
    absl::StrAppend(&out, "insert ", ItemString(item.item), " -> ",
                    table->InsertOrAssign(item, absl::ZeroDuration()).ToString());
  } else if (op < 75) {
    auto sample = table->SampleOne(absl::ZeroDuration());
    if (sample.ok()) {
      absl::StrAppend(&out, "sample ", ItemString(sample->item), " size ",
                      sample->table_size, sample->retired ? " retired" : "");
    } else {
      absl::StrAppend(&out, "sample -> ",
                      absl::StatusCodeToString(sample.status().code()));
    }
  } else if (op < 90) {
    auto keys = existing();
    if (keys.empty()) return out + "update none";
    const ItemKey key = keys[rng() % keys.size()];
    const std::pair<ItemKey, double> update[] = {{key, priority}};
    auto applied = table->UpdatePriorities(update);
    absl::StrAppend(&out, "update ", key, "=", priority, " -> ",
                    applied.ok() ? absl::StrCat(*applied)
                                 : applied.status().ToString());
  } else {
    auto keys = existing();
    if (keys.empty()) return out + "delete none";
    const ItemKey key = keys[rng() % keys.size()];
    absl::StrAppend(&out, "delete ", key, " -> ",
                    table->Delete(key).ToString());
  }
  return out;
}

std::vector<std::string> StateOf(const World& world) {
  std::vector<std::string> out;
  for (const std::string& name : kWorldTables) {
    Table* table = world.table(name);
    std::vector<Item> items = table->Copy();
    std::sort(items.begin(), items.end(),
              [](const Item& x, const Item& y) { return x.key < y.key; });
    std::string line = absl::StrCat(name, " items");
    for (const Item& item : items) absl::StrAppend(&line, " ", ItemString(item));
    const TableInfo info = table->info();
    absl::StrAppend(&line, " | counters ", info.counters.inserts, "/",
                    info.counters.samples, "/", info.counters.deletes,
                    " | sampler order");
    for (const auto& [key, priority] : table->TestOnlySampler()->Entries()) {
      absl::StrAppend(&line, " ", key, ":", priority);
    }
    absl::Status audit = table->Audit();
    if (!audit.ok()) absl::StrAppend(&line, " | audit ", audit.ToString());
    out.push_back(std::move(line));
  }
  return out;
}

std::vector<std::string> RunScript(const World& world, uint64_t seed,
                                   ItemKey first_key, int ops) {
  std::mt19937_64 rng(seed);
  ItemKey next_key = first_key;
  std::vector<std::string> out;
  for (int i = 0; i < ops; ++i) out.push_back(ApplyScriptedOp(world, rng, &next_key));
  return out;
}

Outcome CheckCheckpointRoundTrip() {
  constexpr uint64_t kSetupSeed = 2024, kScriptSeed = 99;
  World uninterrupted = MakeWorld();
  World saved = MakeWorld();
  RunScript(uninterrupted, kSetupSeed, 1000, 400);
  RunScript(saved, kSetupSeed, 1000, 400);
  const std::vector<std::string> before = StateOf(saved);

  testing::TempDir dir;
  Checkpointer checkpointer(dir.path());
  std::vector<Table*> tables;
  for (const auto& t : saved.tables) tables.push_back(t.get());
  auto info = checkpointer.Save(tables);
  if (!info.ok()) return Fail(info.status().ToString());
  auto data = ReadCheckpointFile(info->path);
  if (!data.ok()) return Fail(data.status().ToString());
  World restored;
  restored.store = std::make_shared<ChunkStore>();
  auto restored_tables = RestoreTables(*std::move(data), restored.store);
  if (!restored_tables.ok()) return Fail(restored_tables.status().ToString());
  restored.tables = *std::move(restored_tables);
  saved.tables.clear();
  const size_t restored_chunks = restored.store->size();
  if (StateOf(restored) != before) {
    return Fail("restored state differs from the saved state");
  }

  const auto expected = RunScript(uninterrupted, kScriptSeed, 5000, 500);
  const auto actual = RunScript(restored, kScriptSeed, 5000, 500);
  int64_t differing = 0;
  std::string first_difference;
  for (size_t i = 0; i < expected.size(); ++i) {
    if (expected[i] != actual[i]) {
      if (differing++ == 0) {
        first_difference = absl::StrCat("; first at op ", i, ": '",
                                        expected[i], "' vs '", actual[i], "'");
      }
    }
  }
  const bool same_state = StateOf(uninterrupted) == StateOf(restored);
  int64_t samples = 0, retired = 0;
  for (const auto& line : expected) {
    if (line.find(" sample ") != std::string::npos) ++samples;
    if (line.find("retired") != std::string::npos) ++retired;
  }
  return {differing == 0 && same_state,
          absl::StrFormat("3 tables after 400 setup ops, %d chunks "
                          "checkpointed; 500 scripted ops (%d samples, %d "
                          "retirements): %d differing outputs, final state %s%s",
                          restored_chunks, samples, retired, differing,
                          same_state ? "identical" : "DIFFERENT",
                          first_difference)};
}

// ---------------------------------------------------------------------------
// 7. End-to-end byte identity.

Tensor RandomTensor(Dtype dtype, Shape shape, std::mt19937_64& rng) {
  std::vector<uint8_t> bytes(DtypeSize(dtype) * NumElements(shape));
  for (auto& b : bytes) b = static_cast<uint8_t>(rng());
  if (dtype == Dtype::kBool) {
    for (auto& b : bytes) b &= 1;
  }
  auto tensor = Tensor::Create(dtype, std::move(shape), std::move(bytes));
  RELAY_CHECK(tensor.ok());
  return *std::move(tensor);
}

// Four different nestings, including a bare leaf; float payloads are raw
// random bits so NaN patterns must survive too.
Step RandomTrajectoryStep(int kind, std::mt19937_64& rng) {
  switch (kind) {
    case 0:
      return Step({{"obs",
                    Step({{"pixels", RandomTensor(Dtype::kUint8, {4, 4}, rng)},
                          {"vec", RandomTensor(Dtype::kFloat32, {3}, rng)}})},
                   {"action", RandomTensor(Dtype::kInt64, {}, rng)},
                   {"reward", RandomTensor(Dtype::kFloat64, {}, rng)},
                   {"done", RandomTensor(Dtype::kBool, {}, rng)}});
    case 1:
      return Step({{"state", RandomTensor(Dtype::kFloat64, {2, 2}, rng)},
                   {"mask", RandomTensor(Dtype::kBool, {5}, rng)}});
    case 2:
      return Step(RandomTensor(Dtype::kInt32, {7}, rng));
    default:
      return Step(
          {{"a", Step({{"b", Step({{"c", RandomTensor(Dtype::kFloat32, {1},
                                                      rng)}})}})},
           {"d", RandomTensor(Dtype::kUint16, {3}, rng)},
           {"e", RandomTensor(Dtype::kInt8, {2, 3}, rng)}});
  }
}

bool BitIdentical(const Step& a, const Step& b) {
  auto fa = Flatten(a);
  auto fb = Flatten(b);
  if (!fa.ok() || !fb.ok()) return false;
  if (!(fa->signature == fb->signature)) return false;
  for (size_t i = 0; i < fa->columns.size(); ++i) {
    const Tensor& x = fa->columns[i];
    const Tensor& y = fb->columns[i];
    if (x.dtype() != y.dtype() || x.shape() != y.shape() ||
        !std::equal(x.bytes().begin(), x.bytes().end(), y.bytes().begin(),
                    y.bytes().end())) {
      return false;
    }
  }
  return true;
}

Outcome CheckByteIdentity() {
  constexpr int kTrajectories = 1000;
  auto server = StartOrDie({SimpleConfig("traj", SelectorOptions::Fifo(),
                                         SelectorOptions::Fifo(), 2000,
                                         MinSize(1), 1)});
  std::mt19937_64 rng(77);
  std::vector<std::vector<Step>> inputs;
  const int chunk_lengths[] = {2, 3, 5, 4};
  for (int kind = 0; kind < 4; ++kind) {
    WriterOptions options;
    options.chunk_length = chunk_lengths[kind];
    options.max_sequence_length = 12;
    auto writer = Writer::Open(server->address(), options);
    if (!writer.ok()) return Fail(writer.status().ToString());
    std::uniform_int_distribution<int> pick_length(1, 12);
    for (int i = 0; i < kTrajectories / 4; ++i) {
      const int length = pick_length(rng);
      std::vector<Step> steps;
      for (int t = 0; t < length; ++t) {
        steps.push_back(RandomTrajectoryStep(kind, rng));
        absl::Status status = (*writer)->Append(steps.back());
        if (!status.ok()) return Fail(status.ToString());
      }
      // Priority carries the trajectory index back to the reader.
      absl::Status status = (*writer)->CreateItem(
          "traj", length, static_cast<double>(inputs.size() + 1));
      if (!status.ok()) return Fail(status.ToString());
      inputs.push_back(std::move(steps));
    }
    absl::Status status = (*writer)->Close();
    if (!status.ok()) return Fail(status.ToString());
  }

  SamplerOptions options;
  options.table = "traj";
  options.max_in_flight_samples_per_worker = 16;
  options.num_samples_per_worker = kTrajectories;
  auto sampler = Sampler::Open({server->address()}, options);
  if (!sampler.ok()) return Fail(sampler.status().ToString());
  int64_t mismatched = 0, out_of_order = 0, tensors = 0;
  std::vector<bool> seen(kTrajectories, false);
  for (int i = 0; i < kTrajectories; ++i) {
    auto sample = (*sampler)->Next(absl::Seconds(30));
    if (!sample.ok()) return Fail(sample.status().ToString());
    if (!sample->has_value()) return Fail("stream ended early");
    const int index = static_cast<int>((*sample)->item.priority) - 1;
    if (index < 0 || index >= kTrajectories || seen[index]) {
      return Fail(absl::StrCat("unexpected item priority ",
                               (*sample)->item.priority));
    }
    seen[index] = true;
    if (index != i) ++out_of_order;
    const auto& got = (*sample)->steps;
    const auto& want = inputs[index];
    bool same = got.size() == want.size();
    for (size_t t = 0; same && t < got.size(); ++t) {
      same = BitIdentical(got[t], want[t]);
      tensors += Flatten(want[t])->columns.size();
    }
    if (!same) ++mismatched;
  }
  (*sampler)->Close();
  server->Stop();
  return {mismatched == 0 && out_of_order == 0,
          absl::StrFormat("%d trajectories over 4 nestings (%d tensors "
                          "compared): %d not bit-identical, %d out of order",
                          kTrajectories, tensors, mismatched, out_of_order)};
}

// ---------------------------------------------------------------------------
// 8. Sampler timeout semantics.

Outcome CheckTimeouts() {
  auto server = StartOrDie(
      {SimpleConfig("idle", SelectorOptions::Uniform(), SelectorOptions::Fifo(),
                    10, MinSize(1)),
       SimpleConfig("live", SelectorOptions::Uniform(), SelectorOptions::Fifo(),
                    10, MinSize(1))});
  SamplerOptions options;
  options.timeout_ms = 100;

  options.table = "idle";
  absl::Time start = absl::Now();
  auto idle = Sampler::Open({server->address()}, options);
  if (!idle.ok()) return Fail(idle.status().ToString());
  auto ended = (*idle)->Next();
  const double idle_ms = Seconds(start) * 1000;
  const bool idle_ok = ended.ok() && !ended->has_value() && idle_ms >= 100 &&
                       idle_ms <= 500;
  std::string idle_result =
      !ended.ok() ? ended.status().ToString()
                  : (ended->has_value() ? "sample" : "end-of-data");

  options.table = "live";
  start = absl::Now();
  absl::Status writer_status;
  std::thread late_writer([&] {
    absl::SleepFor(absl::Milliseconds(50));
    auto writer = Writer::Open(server->address(), WriterOptions());
    if (!writer.ok()) {
      writer_status = writer.status();
      return;
    }
    writer_status = (*writer)->Append(ScalarObsStep(1));
    if (writer_status.ok()) writer_status = (*writer)->CreateItem("live", 1, 1);
    if (writer_status.ok()) writer_status = (*writer)->Close();
  });
  auto live = Sampler::Open({server->address()}, options);
  if (!live.ok()) {
    late_writer.join();
    return Fail(live.status().ToString());
  }
  auto delivered = (*live)->Next();
  const double live_ms = Seconds(start) * 1000;
  late_writer.join();
  const bool live_ok =
      writer_status.ok() && delivered.ok() && delivered->has_value();
  std::string live_result =
      !delivered.ok() ? delivered.status().ToString()
                      : (delivered->has_value() ? "sample" : "end-of-data");
  (*idle)->Close();
  (*live)->Close();
  server->Stop();
  return {idle_ok && live_ok,
          absl::StrFormat("blocked table: %s after %.0f ms (window 100-500); "
                          "writer at 50 ms: %s after %.0f ms%s",
                          idle_result, idle_ms, live_result, live_ms,
                          writer_status.ok()
                              ? ""
                              : absl::StrCat(" writer ",
                                             writer_status.ToString()))};
}

// ---------------------------------------------------------------------------
// 9 and 10. Throughput shape.

absl::StatusOr<double> Qps(BenchMode mode, int clients, int tables) {
  BenchConfig config;
  config.mode = mode;
  config.clients = clients;
  config.tables = tables;
  config.payload_bytes = 1000;
  config.duration_s = 3;
  config.prefill_items = 1000;
  config.seed = 1;
  auto result = RunBench(config);
  if (!result.ok()) return result.status();
  return result->qps;
}

Outcome CheckScaling() {
  const absl::Time start = absl::Now();
  bool pass = true;
  std::vector<std::string> parts;
  for (BenchMode mode : {BenchMode::kInsert, BenchMode::kSample}) {
    std::map<int, double> qps;
    for (int clients : {1, 4, 8, 16}) {
      auto q = Qps(mode, clients, 1);
      if (!q.ok()) return Fail(q.status().ToString());
      qps[clients] = *q;
    }
    const double speedup = qps[4] / qps[1];
    const double plateau_change = std::abs(qps[16] - qps[8]) / qps[8];
    pass = pass && speedup >= 1.8 && plateau_change < 0.10;
    parts.push_back(absl::StrFormat(
        "%s QPS 1/4/8/16 clients = %.0f/%.0f/%.0f/%.0f, 4v1 %.2fx (need "
        ">= 1.8), 16v8 change %.1f%% (need < 10%%)",
        BenchModeName(mode), qps[1], qps[4], qps[8], qps[16], speedup,
        plateau_change * 100));
  }
  const double elapsed = Seconds(start);
  pass = pass && elapsed < 300;
  parts.push_back(absl::StrFormat("%.0f s, %d hardware threads", elapsed,
                                  std::thread::hardware_concurrency()));
  return {pass, absl::StrJoin(parts, "; ")};
}

Outcome CheckSharding() {
  auto one = Qps(BenchMode::kSharded, 8, 1);
  if (!one.ok()) return Fail(one.status().ToString());
  auto eight = Qps(BenchMode::kSharded, 8, 8);
  if (!eight.ok()) return Fail(eight.status().ToString());
  const double ratio = *eight / *one;
  return {ratio >= 1.2,
          absl::StrFormat("8 inserters: 1 table %.0f QPS, 8 tables %.0f QPS, "
                          "ratio %.2fx (need >= 1.2), %d hardware threads",
                          *one, *eight, ratio,
                          std::thread::hardware_concurrency())};
}

// ---------------------------------------------------------------------------
// 11. Compression direction.

absl::StatusOr<double> CompressionRatio(const std::vector<Step>& steps) {
  RELAY_ASSIGN_OR_RETURN(Signature signature, SignatureOf(steps.front()));
  RELAY_ASSIGN_OR_RETURN(Chunk chunk, BuildChunk(1, steps, signature));
  return static_cast<double>(chunk.compressed_bytes()) /
         static_cast<double>(chunk.uncompressed_bytes());
}

Outcome CheckCompression() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> uniform(0, 1);
  auto frame = [&] {
    std::vector<float> v(84 * 84);
    for (auto& x : v) x = uniform(rng);
    return Step({{"frame", Tensor::FromValues<float>({84, 84}, v)}});
  };
  const Step same = frame();
  std::vector<Step> identical(40, same);
  std::vector<Step> random;
  for (int i = 0; i < 40; ++i) random.push_back(frame());
  auto a = CompressionRatio(identical);
  auto b = CompressionRatio(random);
  if (!a.ok()) return Fail(a.status().ToString());
  if (!b.ok()) return Fail(b.status().ToString());
  return {*a <= 0.15 && *b >= 0.95 && *b <= 1.05,
          absl::StrFormat("codec %s: 40 identical 84x84 float32 frames -> "
                          "%.2f%% of raw (need <= 15%%); 40 random frames -> "
                          "%.2f%% (need 95-105%%)",
                          CodecName(kDefaultCodec), *a * 100, *b * 100)};
}

// ---------------------------------------------------------------------------
// 12. Selector/table audit against a brute-force model.

struct LoggedEvent {
  char kind;  // i, s, u, d
  ItemKey key;
};

class EventLog : public TableExtension {
 public:
  absl::string_view name() const override { return "event_log"; }
  void OnInsert(const TableEvent& e) override { events.push_back({'i', e.item.key}); }
  void OnSample(const TableEvent& e) override { events.push_back({'s', e.item.key}); }
  void OnUpdate(const TableEvent& e) override { events.push_back({'u', e.item.key}); }
  void OnDelete(const TableEvent& e) override { events.push_back({'d', e.item.key}); }
  std::vector<LoggedEvent> events;
};

struct LoggedOp {
  enum Kind { kInsert, kSample, kUpdate, kDelete } kind;
  ItemKey key = 0;
  double priority = 0;
  absl::StatusCode code = absl::StatusCode::kOk;
  std::vector<LoggedEvent> events;
};

class BruteForceModel {
 public:
  BruteForceModel(SelectorOptions sampler, SelectorOptions remover,
                  int64_t max_size, int32_t max_times_sampled)
      : sampler_(sampler),
        remover_(remover),
        max_size_(max_size),
        max_times_(max_times_sampled) {}

  // Replays one logged operation; returns an explanation on divergence.
  std::string Apply(const LoggedOp& op) {
    const auto& ev = op.events;
    auto expect = [&](std::vector<LoggedEvent> want) -> std::string {
      bool same = want.size() == ev.size();
      for (size_t i = 0; same && i < want.size(); ++i) {
        same = want[i].kind == ev[i].kind && want[i].key == ev[i].key;
      }
      if (same) return "";
      std::string got;
      for (const auto& e : ev) {
        absl::StrAppend(&got, std::string(1, e.kind), e.key, " ");
      }
      return absl::StrCat("unexpected events [", got, "]");
    };
    switch (op.kind) {
      case LoggedOp::kInsert: {
        if (op.code != absl::StatusCode::kOk) return "insert failed";
        if (items_.contains(op.key)) {
          items_[op.key].priority = op.priority;
          return expect({{'u', op.key}});
        }
        std::vector<LoggedEvent> want;
        if (static_cast<int64_t>(items_.size()) >= max_size_) {
          if (ev.empty() || ev[0].kind != 'd') return "missing eviction";
          if (!Legal(remover_).contains(ev[0].key)) {
            return absl::StrCat("illegal eviction of ", ev[0].key);
          }
          want.push_back(ev[0]);
          items_.erase(ev[0].key);
        }
        want.push_back({'i', op.key});
        items_[op.key] = {op.priority, 0, seq_++};
        return expect(want);
      }
      case LoggedOp::kSample: {
        if (items_.empty()) {
          if (op.code != absl::StatusCode::kDeadlineExceeded) {
            return "sample from empty table did not time out";
          }
          return expect({});
        }
        if (op.code != absl::StatusCode::kOk || ev.empty()) {
          return "sample failed on a non-empty table";
        }
        const ItemKey key = ev[0].key;
        if (!Legal(sampler_).contains(key)) {
          return absl::StrCat("illegal selection of ", key);
        }
        if (++items_[key].times_sampled >= max_times_) {
          items_.erase(key);
          return expect({{'s', key}, {'d', key}});
        }
        return expect({{'s', key}});
      }
      case LoggedOp::kUpdate: {
        if (!items_.contains(op.key)) return expect({});
        items_[op.key].priority = op.priority;
        return expect({{'u', op.key}});
      }
      case LoggedOp::kDelete: {
        if (!items_.contains(op.key)) {
          if (op.code != absl::StatusCode::kNotFound) {
            return "delete of absent key did not report NotFound";
          }
          return expect({});
        }
        items_.erase(op.key);
        return expect({{'d', op.key}});
      }
    }
    return "unknown op";
  }

  struct Entry {
    double priority;
    int32_t times_sampled;
    uint64_t seq;
  };
  const std::map<ItemKey, Entry>& items() const { return items_; }

  std::vector<ItemKey> InsertionOrder() const {
    std::vector<std::pair<uint64_t, ItemKey>> order;
    for (const auto& [key, e] : items_) order.push_back({e.seq, key});
    std::sort(order.begin(), order.end());
    std::vector<ItemKey> out;
    for (const auto& [seq, key] : order) out.push_back(key);
    return out;
  }

 private:
  // Keys the selector may legitimately pick in the current state.
  std::set<ItemKey> Legal(const SelectorOptions& selector) const {
    std::set<ItemKey> out;
    auto extreme = [&](auto better) {
      const std::pair<const ItemKey, Entry>* best = nullptr;
      for (const auto& kv : items_) {
        if (best == nullptr || better(kv.second, best->second)) best = &kv;
      }
      out.insert(best->first);
    };
    switch (selector.type) {
      case SelectorType::kFifo:
        extreme([](const Entry& a, const Entry& b) { return a.seq < b.seq; });
        break;
      case SelectorType::kLifo:
        extreme([](const Entry& a, const Entry& b) { return a.seq > b.seq; });
        break;
      case SelectorType::kMaxHeap:
        extreme([](const Entry& a, const Entry& b) {
          return a.priority > b.priority ||
                 (a.priority == b.priority && a.seq < b.seq);
        });
        break;
      case SelectorType::kMinHeap:
        extreme([](const Entry& a, const Entry& b) {
          return a.priority < b.priority ||
                 (a.priority == b.priority && a.seq < b.seq);
        });
        break;
      case SelectorType::kUniform:
        for (const auto& [key, e] : items_) out.insert(key);
        break;
      case SelectorType::kPrioritized:
        for (const auto& [key, e] : items_) {
          if (e.priority > 0) out.insert(key);
        }
        if (out.empty()) {
          for (const auto& [key, e] : items_) out.insert(key);
        }
        break;
    }
    return out;
  }

  const SelectorOptions sampler_;
  const SelectorOptions remover_;
  const int64_t max_size_;
  const int32_t max_times_;
  std::map<ItemKey, Entry> items_;
  uint64_t seq_ = 0;
};

std::string AuditPair(const SelectorOptions& sampler,
                      const SelectorOptions& remover, int ops, uint64_t seed) {
  constexpr int64_t kMaxSize = 64;
  constexpr int32_t kMaxTimes = 3;
  auto log = std::make_shared<EventLog>();
  auto store = std::make_shared<ChunkStore>();
  TableConfig config =
      SimpleConfig("audit", sampler, remover, kMaxSize, MinSize(1), kMaxTimes);
  config.rng_seed = seed;
  auto table = Table::Create(config, store, {log});
  if (!table.ok()) return table.status().ToString();
  auto chunk = MakeChunk(1, 1);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_op(0, 99);
  std::uniform_int_distribution<ItemKey> pick_key(1, 150);
  const double priorities[] = {0, 0.5, 1, 2, 3, 1, 2, 0.5, 3, 1};
  std::vector<LoggedOp> ops_log;
  ops_log.reserve(ops);
  for (int i = 0; i < ops; ++i) {
    LoggedOp op;
    const int r = pick_op(rng);
    op.key = pick_key(rng);
    op.priority = priorities[rng() % 10];
    log->events.clear();
    if (r < 35) {
      op.kind = LoggedOp::kInsert;
      op.code = (*table)
                    ->InsertOrAssign(ItemOver(op.key, op.priority, {chunk}),
                                     absl::ZeroDuration())
                    .code();
    } else if (r < 65) {
      op.kind = LoggedOp::kSample;
      op.code = (*table)->SampleOne(absl::ZeroDuration()).status().code();
    } else if (r < 85) {
      op.kind = LoggedOp::kUpdate;
      const std::pair<ItemKey, double> update[] = {{op.key, op.priority}};
      op.code = (*table)->UpdatePriorities(update).status().code();
    } else {
      op.kind = LoggedOp::kDelete;
      op.code = (*table)->Delete(op.key).code();
    }
    op.events = std::move(log->events);
    ops_log.push_back(std::move(op));
  }
  absl::Status audit = (*table)->Audit();
  if (!audit.ok()) return absl::StrCat("audit: ", audit.ToString());

  BruteForceModel model(sampler, remover, kMaxSize, kMaxTimes);
  for (size_t i = 0; i < ops_log.size(); ++i) {
    std::string error = model.Apply(ops_log[i]);
    if (!error.empty()) return absl::StrCat("op ", i, ": ", error);
  }
  std::vector<Item> items = (*table)->Copy();
  if (items.size() != model.items().size()) {
    return absl::StrCat("size ", items.size(), " vs model ",
                        model.items().size());
  }
  for (const Item& item : items) {
    auto it = model.items().find(item.key);
    if (it == model.items().end() || it->second.priority != item.priority ||
        it->second.times_sampled != item.times_sampled) {
      return absl::StrCat("item ", item.key, " differs from the model");
    }
  }
  std::vector<ItemKey> order;
  for (const auto& [key, priority] : (*table)->TestOnlySampler()->Entries()) {
    order.push_back(key);
  }
  if (order != model.InsertionOrder()) return "sampler order differs";
  if (store->RefCount(1).value_or(0) != static_cast<int64_t>(items.size())) {
    return "chunk refcount differs from the item count";
  }
  return "";
}

Outcome CheckAudit() {
  constexpr int kOps = 100000;
  const std::vector<SelectorOptions> selectors = {
      SelectorOptions::Fifo(),    SelectorOptions::Lifo(),
      SelectorOptions::Uniform(), SelectorOptions::MaxHeap(),
      SelectorOptions::MinHeap(), SelectorOptions::Prioritized(0.8)};
  const absl::Time start = absl::Now();
  int pairs = 0;
  std::vector<std::string> failures;
  for (const auto& sampler : selectors) {
    for (const auto& remover : selectors) {
      std::string error = AuditPair(sampler, remover, kOps, 1000 + pairs);
      ++pairs;
      if (!error.empty()) {
        failures.push_back(absl::StrCat(SelectorTypeName(sampler.type), "/",
                                        SelectorTypeName(remover.type), ": ",
                                        error));
      }
    }
  }
  return {failures.empty(),
          absl::StrFormat("%d sampler/remover pairs x %d ops, %d divergent, "
                          "%.0f s%s",
                          pairs, kOps, failures.size(), Seconds(start),
                          failures.empty()
                              ? ""
                              : absl::StrCat("; ", absl::StrJoin(failures, "; ")))};
}

}  // namespace
}  // namespace relay

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    relay::Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"1", "prioritized sampling distribution", relay::CheckPrioritized},
      {"2", "samples-per-insert enforcement", relay::CheckSpi},
      {"2b", "samples-per-insert enforcement, reachable min_size (extra)",
       relay::CheckSpiReachable},
      {"3", "queue exactness", relay::CheckQueue},
      {"4", "chunk reference counting", relay::CheckRefcounting},
      {"5", "rows transmitted per item", relay::CheckTransmittedRows},
      {"6", "checkpoint round trip", relay::CheckCheckpointRoundTrip},
      {"7", "end-to-end byte identity", relay::CheckByteIdentity},
      {"8", "sampler timeout semantics", relay::CheckTimeouts},
      {"9", "throughput scaling shape", relay::CheckScaling},
      {"10", "sharded-table contention relief", relay::CheckSharding},
      {"11", "compression direction", relay::CheckCompression},
      {"12", "selector/table audit", relay::CheckAudit},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const absl::Time start = absl::Now();
    relay::Outcome outcome = c.run();
    if (!outcome.pass) ++failed;
    std::printf("%s criterion %s (%s) [%.1fs]: %s\n",
                outcome.pass ? "PASS" : "FAIL", c.id, c.name,
                absl::ToDoubleSeconds(absl::Now() - start),
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu checks failed\n", failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
