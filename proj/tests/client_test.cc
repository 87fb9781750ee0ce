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


#include "relay/client.h"

#include <cstdlib>
#include <map>
#include <random>
#include <set>
#include <thread>

#include "absl/strings/str_cat.h"
#include "absl/time/clock.h"
#include "gtest/gtest.h"
#include "relay/server.h"
#include "test_util.h"

namespace relay {
namespace {

using ::relay::testing::RandomStep;
using ::relay::testing::SimpleConfig;
using ::relay::testing::TempDir;

ServerConfig PoolConfig(const std::string& checkpoint_dir = "") {
  ServerConfig config;
  config.checkpoint_dir = checkpoint_dir;
  config.tables.push_back(SimpleConfig("uniform", SelectorOptions::Uniform(),
                                       SelectorOptions::Fifo(), 1000,
                                       *RateLimiterConfig::MinSize(1)));
  config.tables.push_back(SimpleConfig("queue", SelectorOptions::Fifo(),
                                       SelectorOptions::Fifo(), 100,
                                       *RateLimiterConfig::Queue(100), 1));
  return config;
}

std::unique_ptr<Server> StartOrDie(ServerConfig config = PoolConfig()) {
  auto server = Server::Start(std::move(config));
  RELAY_CHECK(server.ok());
  return *std::move(server);
}

WriterOptions Opts(int k, int max_seq) {
  WriterOptions o;
  o.chunk_length = k;
  o.max_sequence_length = max_seq;
  return o;
}

TEST(WriterTest, OptionsValidated) {
  EXPECT_FALSE(Opts(0, 1).Validate().ok());
  EXPECT_FALSE(Opts(4, 2).Validate().ok());
  WriterOptions o = Opts(1, 1);
  o.max_pending_items = 0;
  EXPECT_FALSE(o.Validate().ok());
}

TEST(WriterTest, ChunksEveryKStepsAndConfirmsItems) {
  auto server = StartOrDie();
  auto writer = Writer::Open(server->address(), Opts(4, 8));
  ASSERT_TRUE(writer.ok()) << writer.status();
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    RELAY_ASSERT_OK((*writer)->Append(RandomStep(rng)));
    if (i >= 3) RELAY_ASSERT_OK((*writer)->CreateItem("queue", 4, 1));
  }
  RELAY_ASSERT_OK((*writer)->Flush());
  EXPECT_EQ((*writer)->items_sent(), 7);
  EXPECT_EQ((*writer)->items_confirmed(), 7);
  EXPECT_EQ((*writer)->confirmed_keys().size(), 7);
  EXPECT_EQ((*writer)->rows_sent(), 10);
  EXPECT_EQ(server->table("queue")->size(), 7);
  RELAY_EXPECT_OK(server->table("queue")->Audit());
  RELAY_ASSERT_OK((*writer)->Close());
  EXPECT_FALSE((*writer)->Append(RandomStep(rng)).ok());
}

TEST(WriterTest, SignatureMismatchRejectedWriterStaysUsable) {
  auto server = StartOrDie();
  auto writer = *Writer::Open(server->address(), Opts(2, 2));
  RELAY_ASSERT_OK(writer->Append(testing::ScalarObsStep(1, 2)));
  absl::Status s = writer->Append(testing::ScalarObsStep(1, 3));
  EXPECT_EQ(s.code(), absl::StatusCode::kInvalidArgument);
  EXPECT_NE(s.message().find("obs"), absl::string_view::npos);
  RELAY_ASSERT_OK(writer->Append(testing::ScalarObsStep(2, 2)));
  RELAY_ASSERT_OK(writer->CreateItem("uniform", 2, 1));
  RELAY_ASSERT_OK(writer->Flush());
}

TEST(WriterTest, ItemLengthValidated) {
  auto server = StartOrDie();
  auto writer = *Writer::Open(server->address(), Opts(2, 4));
  std::mt19937_64 rng(1);
  RELAY_ASSERT_OK(writer->Append(RandomStep(rng)));
  EXPECT_FALSE(writer->CreateItem("uniform", 2, 1).ok());
  EXPECT_FALSE(writer->CreateItem("uniform", 0, 1).ok());
  for (int i = 0; i < 5; ++i) RELAY_ASSERT_OK(writer->Append(RandomStep(rng)));
  EXPECT_FALSE(writer->CreateItem("uniform", 5, 1).ok());
  RELAY_EXPECT_OK(writer->CreateItem("uniform", 4, 1));
}

TEST(WriterTest, ServerErrorSurfacesOnFlush) {
  auto server = StartOrDie();
  auto writer = *Writer::Open(server->address(), Opts(1, 1));
  std::mt19937_64 rng(1);
  RELAY_ASSERT_OK(writer->Append(RandomStep(rng)));
  writer->CreateItem("missing", 1, 1).IgnoreError();
  absl::Status s = writer->Flush(absl::Seconds(5));
  EXPECT_EQ(s.code(), absl::StatusCode::kNotFound) << s;
}

TEST(WriterTest, ConnectFailure) {
  auto listener = Listener::Listen("127.0.0.1:0");
  ASSERT_TRUE(listener.ok());
  std::string address = absl::StrCat("127.0.0.1:", listener->port());
  *listener = Listener();
  EXPECT_EQ(Writer::Open(address, Opts(1, 1)).status().code(),
            absl::StatusCode::kUnavailable);
}

TEST(SamplerTest, DecodedStepsMatchAppended) {
  auto server = StartOrDie();
  auto writer = *Writer::Open(server->address(), Opts(3, 6));
  std::mt19937_64 rng(5);
  std::vector<Step> steps;
  std::vector<std::vector<Step>> items;
  for (int i = 0; i < 30; ++i) {
    steps.push_back(RandomStep(rng));
    RELAY_ASSERT_OK(writer->Append(steps.back()));
    if (i % 5 == 4) {
      int n = 1 + i % 6;
      RELAY_ASSERT_OK(writer->CreateItem("queue", n, 1));
      items.emplace_back(steps.end() - n, steps.end());
    }
  }
  RELAY_ASSERT_OK(writer->Flush());
  SamplerOptions options;
  options.table = "queue";
  options.max_in_flight_samples_per_worker = 3;
  options.num_samples_per_worker = items.size();
  auto sampler = *Sampler::Open({server->address()}, options);
  for (const auto& want : items) {
    auto next = sampler->Next();
    ASSERT_TRUE(next.ok()) << next.status();
    ASSERT_TRUE(next->has_value());
    EXPECT_EQ((*next)->steps, want);
    EXPECT_EQ((*next)->endpoint, server->address());
    EXPECT_GE((*next)->transmitted_rows, (*next)->item.length);
  }
  auto end = sampler->Next();
  ASSERT_TRUE(end.ok());
  EXPECT_FALSE(end->has_value());
}

TEST(SamplerTest, TimeoutGivesEndOfData) {
  auto server = StartOrDie();
  SamplerOptions options;
  options.table = "queue";
  options.timeout_ms = 100;
  auto sampler = *Sampler::Open({server->address()}, options);
  absl::Time start = absl::Now();
  auto next = sampler->Next();
  absl::Duration elapsed = absl::Now() - start;
  ASSERT_TRUE(next.ok()) << next.status();
  EXPECT_FALSE(next->has_value());
  EXPECT_GE(elapsed, absl::Milliseconds(100));
  EXPECT_LT(elapsed, absl::Milliseconds(500));
}

TEST(SamplerTest, NextTimeoutOverride) {
  auto server = StartOrDie();
  SamplerOptions options;
  options.table = "queue";
  auto sampler = *Sampler::Open({server->address()}, options);
  EXPECT_EQ(sampler->Next(absl::Milliseconds(50)).status().code(),
            absl::StatusCode::kDeadlineExceeded);
  sampler->Close();
  EXPECT_EQ(sampler->Next().status().code(), absl::StatusCode::kCancelled);
}

TEST(SamplerTest, UnreachableEndpointFails) {
  auto listener = Listener::Listen("127.0.0.1:0");
  std::string address = absl::StrCat("127.0.0.1:", listener->port());
  *listener = Listener();
  SamplerOptions options;
  options.table = "queue";
  options.retry.max_attempts = 2;
  options.retry.initial_backoff = absl::Milliseconds(5);
  auto sampler = Sampler::Open({address}, options);
  ASSERT_TRUE(sampler.ok());
  auto next = (*sampler)->Next(absl::Seconds(10));
  EXPECT_FALSE(next.ok());
  EXPECT_EQ(next.status().code(), absl::StatusCode::kUnavailable) << next.status();
}

TEST(SamplerTest, UnknownTableIsFatal) {
  auto server = StartOrDie();
  SamplerOptions options;
  options.table = "missing";
  auto sampler = *Sampler::Open({server->address()}, options);
  auto next = sampler->Next(absl::Seconds(10));
  EXPECT_EQ(next.status().code(), absl::StatusCode::kNotFound) << next.status();
}

TEST(SamplerTest, MultipleWorkersDrainQueueExactlyOnce) {
  auto server = StartOrDie();
  auto writer = *Writer::Open(server->address(), Opts(1, 1));
  for (int i = 0; i < 60; ++i) {
    RELAY_ASSERT_OK(writer->Append(testing::ScalarObsStep(i)));
    RELAY_ASSERT_OK(writer->CreateItem("queue", 1, 1));
  }
  RELAY_ASSERT_OK(writer->Flush());
  SamplerOptions options;
  options.table = "queue";
  options.num_workers = 3;
  options.max_in_flight_samples_per_worker = 4;
  options.timeout_ms = 200;
  auto sampler = *Sampler::Open({server->address()}, options);
  std::set<float> seen;
  while (true) {
    auto next = sampler->Next();
    ASSERT_TRUE(next.ok()) << next.status();
    if (!next->has_value()) break;
    seen.insert((*next)->steps[0].fields()[0].value.tensor().values<float>()[0]);
  }
  EXPECT_EQ(seen.size(), 60);
}

TEST(RetryPolicyTest, BackoffGrowsAndCaps) {
  RetryPolicy policy;
  policy.jitter = 0;
  std::mt19937_64 rng(1);
  EXPECT_EQ(policy.Backoff(1, &rng), absl::Milliseconds(20));
  EXPECT_EQ(policy.Backoff(3, &rng), absl::Milliseconds(80));
  EXPECT_EQ(policy.Backoff(30, &rng), absl::Seconds(1));
  policy.jitter = 0.2;
  for (int i = 0; i < 100; ++i) {
    absl::Duration d = policy.Backoff(1, &rng);
    EXPECT_GE(d, absl::Milliseconds(16));
    EXPECT_LE(d, absl::Milliseconds(24));
  }
}

TEST(ClientTest, UnaryCalls) {
  TempDir dir;
  auto server = StartOrDie(PoolConfig(dir.path()));
  Client client(server->address());
  auto writer = *client.NewWriter(Opts(1, 1));
  RELAY_ASSERT_OK(writer->Append(testing::ScalarObsStep(1)));
  RELAY_ASSERT_OK(writer->CreateItem("uniform", 1, 1));
  RELAY_ASSERT_OK(writer->Flush());
  ItemKey key = writer->confirmed_keys()[0];
  std::vector<std::pair<ItemKey, double>> updates = {{key, 3}, {key + 100, 1}};
  EXPECT_EQ(*client.UpdatePriorities("uniform", updates), 1);
  EXPECT_EQ(client.UpdatePriorities("missing", updates).status().code(),
            absl::StatusCode::kNotFound);
  auto info = client.ServerInfo();
  ASSERT_TRUE(info.ok());
  ASSERT_EQ(info->size(), 2);
  EXPECT_EQ((*info)[0].size, 1);
  EXPECT_EQ((*info)[0].counters.inserts, 1);
  auto ckpt = client.Checkpoint();
  ASSERT_TRUE(ckpt.ok()) << ckpt.status();
  EXPECT_FALSE(ckpt->path.empty());
}

TEST(ClientTest, ReconnectsAfterServerRestart) {
  auto server = StartOrDie();
  const uint16_t port = server->port();
  Client client(server->address());
  ASSERT_TRUE(client.ServerInfo().ok());
  server->Stop();
  server.reset();
  ServerConfig config = PoolConfig();
  config.address = absl::StrCat("127.0.0.1:", port);
  auto restarted = Server::Start(config);
  ASSERT_TRUE(restarted.ok()) << restarted.status();
  EXPECT_TRUE(client.ServerInfo().ok());
}

TEST(ClientTest, EndpointsFromEnv) {
  setenv(kEndpointsEnv, "a:1, b:2,c:3", 1);
  auto endpoints = EndpointsFromEnv();
  ASSERT_TRUE(endpoints.ok());
  EXPECT_EQ(*endpoints, (std::vector<std::string>{"a:1", "b:2", "c:3"}));
  unsetenv(kEndpointsEnv);
  EXPECT_FALSE(EndpointsFromEnv().ok());
}

TEST(PoolTest, RoundRobinWritesAndMergedSampling) {
  auto a = StartOrDie();
  auto b = StartOrDie();
  ServerPool pool({a->address(), b->address()});
  auto writer = pool.NewWriter(Opts(2, 4));
  ASSERT_TRUE(writer.ok()) << writer.status();
  std::mt19937_64 rng(2);
  std::vector<Step> steps;
  std::map<std::string, std::vector<std::vector<Step>>> expected;
  for (int i = 0; i < 20; ++i) {
    steps.push_back(RandomStep(rng));
    RELAY_ASSERT_OK((*writer)->Append(steps.back()));
    if (i >= 2) {
      const std::string& target = pool.endpoints()[(*writer)->next_server()];
      RELAY_ASSERT_OK((*writer)->CreateItem("queue", 3, 1));
      expected[target].emplace_back(steps.end() - 3, steps.end());
    }
  }
  RELAY_ASSERT_OK((*writer)->Flush());
  EXPECT_EQ(a->table("queue")->size(), 9);
  EXPECT_EQ(b->table("queue")->size(), 9);

  SamplerOptions options;
  options.table = "queue";
  options.timeout_ms = 200;
  auto sampler = *pool.NewSampler(options);
  std::map<std::string, std::vector<std::vector<Step>>> got;
  while (true) {
    auto next = sampler->Next();
    ASSERT_TRUE(next.ok()) << next.status();
    if (!next->has_value()) break;
    got[(*next)->endpoint].push_back((*next)->steps);
  }
  EXPECT_EQ(got, expected);
}

TEST(PoolTest, PriorityUpdatesGroupedByEndpoint) {
  auto a = StartOrDie();
  auto b = StartOrDie();
  ServerPool pool({a->address(), b->address()});
  auto writer = *pool.NewWriter(Opts(1, 1));
  for (int i = 0; i < 4; ++i) {
    RELAY_ASSERT_OK(writer->Append(testing::ScalarObsStep(i)));
    RELAY_ASSERT_OK(writer->CreateItem("uniform", 1, 1));
  }
  RELAY_ASSERT_OK(writer->Flush());
  std::vector<PriorityUpdate> updates;
  for (size_t s = 0; s < 2; ++s) {
    for (ItemKey key : writer->writer(s).confirmed_keys()) {
      updates.push_back({pool.endpoints()[s], key, 9});
    }
  }
  EXPECT_EQ(*pool.UpdatePriorities("uniform", updates), 4);
  for (const Item& item : a->table("uniform")->Copy()) EXPECT_EQ(item.priority, 9);
  for (const Item& item : b->table("uniform")->Copy()) EXPECT_EQ(item.priority, 9);
}

}  // namespace
}  // namespace relay
