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

#include "absl/container/flat_hash_map.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "relay/status_macros.h"

namespace relay {

absl::StatusOr<std::vector<std::string>> EndpointsFromEnv() {
  const char* value = std::getenv(kEndpointsEnv);
  if (value == nullptr || *value == '\0') {
    return absl::NotFoundError(absl::StrCat(kEndpointsEnv, " is not set"));
  }
  std::vector<std::string> endpoints;
  for (absl::string_view part : absl::StrSplit(value, ',', absl::SkipEmpty())) {
    part = absl::StripAsciiWhitespace(part);
    RELAY_RETURN_IF_ERROR(ParseHostPort(part).status());
    endpoints.emplace_back(part);
  }
  if (endpoints.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(kEndpointsEnv, " is empty"));
  }
  return endpoints;
}

Client::Client(std::string endpoint, absl::Duration connect_timeout)
    : endpoint_(std::move(endpoint)), connect_timeout_(connect_timeout) {}

absl::StatusOr<std::unique_ptr<Writer>> Client::NewWriter(
    WriterOptions options) {
  return Writer::Open(endpoint_, options);
}

absl::StatusOr<std::unique_ptr<Sampler>> Client::NewSampler(
    SamplerOptions options) {
  return Sampler::Open({endpoint_}, std::move(options));
}

absl::StatusOr<Message> Client::Call(const Message& request) {
  absl::MutexLock lock(&mu_);
  absl::Status last;
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (!socket_.valid()) {
      RELAY_ASSIGN_OR_RETURN(socket_,
                             Socket::Connect(endpoint_, connect_timeout_));
    }
    last = socket_.Send(request);
    if (last.ok()) {
      auto reply = socket_.Receive(kDefaultMaxMessageBytes);
      if (reply.ok()) {
        if (auto* error = std::get_if<ErrorMsg>(&*reply)) {
          return StatusFromError(*error);
        }
        return reply;
      }
      last = reply.status();
    }
    socket_.Close();
    if (last.code() != absl::StatusCode::kUnavailable) break;
  }
  return last;
}

absl::StatusOr<int64_t> Client::UpdatePriorities(
    const std::string& table,
    std::span<const std::pair<ItemKey, double>> updates) {
  UpdatePrioritiesMsg request;
  request.table = table;
  request.updates.assign(updates.begin(), updates.end());
  RELAY_ASSIGN_OR_RETURN(Message reply, Call(request));
  auto* applied = std::get_if<UpdatePrioritiesReplyMsg>(&reply);
  if (applied == nullptr) {
    return absl::InternalError("unexpected reply to UpdatePriorities");
  }
  return applied->applied;
}

absl::StatusOr<CheckpointInfo> Client::Checkpoint() {
  RELAY_ASSIGN_OR_RETURN(Message reply, Call(CheckpointMsg{}));
  auto* info = std::get_if<CheckpointReplyMsg>(&reply);
  if (info == nullptr) {
    return absl::InternalError("unexpected reply to Checkpoint");
  }
  return CheckpointInfo{info->id, info->path};
}

absl::StatusOr<std::vector<TableInfo>> Client::ServerInfo() {
  RELAY_ASSIGN_OR_RETURN(Message reply, Call(ServerInfoMsg{}));
  auto* info = std::get_if<ServerInfoReplyMsg>(&reply);
  if (info == nullptr) {
    return absl::InternalError("unexpected reply to ServerInfo");
  }
  return std::move(info->tables);
}

ServerPool::ServerPool(std::vector<std::string> endpoints)
    : endpoints_(std::move(endpoints)) {
  for (const auto& endpoint : endpoints_) {
    clients_.push_back(std::make_unique<Client>(endpoint));
  }
}

absl::StatusOr<ServerPool> ServerPool::FromEnv() {
  RELAY_ASSIGN_OR_RETURN(auto endpoints, EndpointsFromEnv());
  return ServerPool(std::move(endpoints));
}

absl::StatusOr<std::unique_ptr<PooledWriter>> ServerPool::NewWriter(
    WriterOptions options) {
  return PooledWriter::Open(endpoints_, options);
}

absl::StatusOr<std::unique_ptr<Sampler>> ServerPool::NewSampler(
    SamplerOptions options) {
  return Sampler::Open(endpoints_, std::move(options));
}

absl::StatusOr<int64_t> ServerPool::UpdatePriorities(
    const std::string& table, std::span<const PriorityUpdate> updates) {
  absl::flat_hash_map<std::string, std::vector<std::pair<ItemKey, double>>>
      by_endpoint;
  for (const auto& update : updates) {
    by_endpoint[update.endpoint].emplace_back(update.key, update.priority);
  }
  int64_t applied = 0;
  for (size_t i = 0; i < endpoints_.size(); ++i) {
    auto it = by_endpoint.find(endpoints_[i]);
    if (it == by_endpoint.end()) continue;
    RELAY_ASSIGN_OR_RETURN(int64_t n,
                           clients_[i]->UpdatePriorities(table, it->second));
    applied += n;
    by_endpoint.erase(it);
  }
  if (!by_endpoint.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "update for endpoint ", by_endpoint.begin()->first,
        " which is not in the pool"));
  }
  return applied;
}

absl::StatusOr<std::vector<CheckpointInfo>> ServerPool::Checkpoint() {
  std::vector<CheckpointInfo> out;
  for (auto& client : clients_) {
    RELAY_ASSIGN_OR_RETURN(CheckpointInfo info, client->Checkpoint());
    out.push_back(std::move(info));
  }
  return out;
}

}  // namespace relay
