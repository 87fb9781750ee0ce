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

#include "relay/server.h"

#include <algorithm>
#include <cstdio>
#include <map>

#include "absl/strings/str_cat.h"
#include "absl/time/clock.h"
#include "relay/status_macros.h"

namespace relay {

namespace {

// Blocking table calls are cut into slices so that a vanished client or a
// stopping server is noticed promptly.
constexpr absl::Duration kWaitSlice = absl::Milliseconds(100);

void RaiseMax(std::atomic<int64_t>* target, int64_t value) {
  int64_t current = target->load();
  while (value > current && !target->compare_exchange_weak(current, value)) {
  }
}

}  // namespace

struct Server::Connection {
  explicit Connection(Socket s) : socket(std::move(s)) {}
  Socket socket;
  std::thread thread;
};

// Per-connection protocol state machine.
class Session {
 public:
  Session(Server* server, Server::Connection* connection)
      : server_(server), socket_(&connection->socket) {}

  void Run();

 private:
  // Handlers return false when the connection must be closed.
  bool OnInsertChunk(InsertChunkMsg message);
  bool OnCreateItem(const CreateItemMsg& message);
  bool OnSampleRequest(const SampleRequestMsg& message);
  bool OnUpdatePriorities(const UpdatePrioritiesMsg& message);
  bool OnCheckpoint();
  bool OnServerInfo();

  // Sends an Error frame; returns false so callers can close in one line.
  bool Fail(const absl::Status& status);
  bool Reply(const Message& message) { return socket_->Send(message).ok(); }
  bool Gone() const {
    return server_->stopping_.load() || socket_->PeerClosed();
  }

  Server* const server_;
  Socket* const socket_;

  // Chunks received on this connection, by client key. The store only sees
  // them once an item references them.
  std::map<ChunkKey, std::shared_ptr<const Chunk>> chunks_;
  ChunkKey watermark_ = 0;
  uint64_t confirmed_items_ = 0;
};

void Session::Run() {
  const size_t limit = server_->config_.max_message_bytes;
  while (!server_->stopping_.load()) {
    auto received = socket_->Receive(limit);
    if (!received.ok()) {
      const auto code = received.status().code();
      if (code == absl::StatusCode::kInvalidArgument ||
          code == absl::StatusCode::kResourceExhausted) {
        Fail(received.status());
      }
      return;
    }
    Message message = std::move(received).value();
    bool keep_open = true;
    switch (TagOf(message)) {
      case MessageTag::kInsertChunk:
        keep_open = OnInsertChunk(std::get<InsertChunkMsg>(std::move(message)));
        break;
      case MessageTag::kCreateItem:
        keep_open = OnCreateItem(std::get<CreateItemMsg>(message));
        break;
      case MessageTag::kSampleRequest:
        keep_open = OnSampleRequest(std::get<SampleRequestMsg>(message));
        break;
      case MessageTag::kSampleAck:
        // Late acks for a stream that already ended.
        break;
      case MessageTag::kUpdatePriorities:
        keep_open = OnUpdatePriorities(std::get<UpdatePrioritiesMsg>(message));
        break;
      case MessageTag::kCheckpoint:
        keep_open = OnCheckpoint();
        break;
      case MessageTag::kServerInfo:
        keep_open = OnServerInfo();
        break;
      default:
        keep_open = Fail(absl::InvalidArgumentError(
            absl::StrCat("unexpected ", MessageName(TagOf(message)),
                         " from client")));
        break;
    }
    if (!keep_open) return;
  }
}

bool Session::Fail(const absl::Status& status) {
  socket_->Send(ErrorFromStatus(status)).IgnoreError();
  return false;
}

bool Session::OnInsertChunk(InsertChunkMsg message) {
  ++server_->insert_chunk_frames_;
  const ChunkKey client_key = message.chunk->key();
  if (chunks_.contains(client_key)) {
    return Fail(absl::InvalidArgumentError(
        absl::StrCat("chunk ", client_key, " sent twice on one stream")));
  }
  // Keys are remapped so that independent writers never collide.
  // The decoded chunk is owned by this message alone, so its payload can be
  // moved rather than copied.
  Chunk payload = message.chunk.use_count() == 1
                      ? std::move(*std::const_pointer_cast<Chunk>(message.chunk))
                      : Chunk(*message.chunk);
  message.chunk.reset();
  auto remapped = std::make_shared<const Chunk>(
      std::move(payload).WithKey(server_->store_->NewKey()));
  chunks_.erase(chunks_.begin(), chunks_.lower_bound(message.keep_from));
  chunks_.emplace(client_key, std::move(remapped));
  watermark_ = std::max(watermark_, client_key + 1);
  return true;
}

bool Session::OnCreateItem(const CreateItemMsg& message) {
  ++server_->create_item_frames_;
  Table* table = server_->table(message.table);
  if (table == nullptr) {
    return Fail(absl::NotFoundError(
        absl::StrCat("table '", message.table, "' not found")));
  }
  TableItem item;
  item.item.key = server_->next_item_key_.fetch_add(1);
  item.item.priority = message.priority;
  item.item.offset = message.offset;
  item.item.length = message.length;
  for (ChunkKey client_key : message.chunk_keys) {
    auto it = chunks_.find(client_key);
    if (it == chunks_.end()) {
      return Fail(absl::FailedPreconditionError(absl::StrCat(
          "item references chunk ", client_key,
          " which was not sent on this stream (or is below keep_from)")));
    }
    item.item.chunk_keys.push_back(it->second->key());
    item.chunks.push_back(it->second);
  }
  while (true) {
    absl::Status status = table->InsertOrAssign(item, kWaitSlice);
    if (status.ok()) break;
    if (status.code() != absl::StatusCode::kDeadlineExceeded) {
      return Fail(status);
    }
    if (Gone()) return false;
  }
  ++confirmed_items_;
  return Reply(InsertAckMsg{confirmed_items_, item.item.key, watermark_});
}

bool Session::OnSampleRequest(const SampleRequestMsg& request) {
  Table* table = server_->table(request.table);
  if (table == nullptr) {
    Fail(absl::NotFoundError(
        absl::StrCat("table '", request.table, "' not found")));
    return true;
  }
  const size_t limit = server_->config_.max_message_bytes;
  const absl::Duration timeout = request.timeout_ms < 0
                                     ? absl::InfiniteDuration()
                                     : absl::Milliseconds(request.timeout_ms);
  int64_t unacked = 0;
  int64_t sent = 0;
  auto consume_ack = [&](absl::StatusOr<Message> received) {
    if (!received.ok()) return false;
    auto* ack = std::get_if<SampleAckMsg>(&*received);
    if (ack == nullptr) {
      return Fail(absl::InvalidArgumentError(
          absl::StrCat("expected SampleAck, got ",
                       MessageName(TagOf(*received)))));
    }
    unacked = std::max<int64_t>(0, unacked - ack->credits);
    return true;
  };

  while (request.num_samples < 0 || sent < request.num_samples) {
    // Credit window: block on acks while full, then drain whatever arrived.
    while (unacked >= request.max_in_flight) {
      if (!consume_ack(socket_->Receive(limit))) return false;
    }
    while (true) {
      auto readable = socket_->WaitReadable(absl::ZeroDuration());
      if (!readable.ok()) return false;
      if (!*readable) break;
      if (!consume_ack(socket_->Receive(limit))) return false;
    }

    const absl::Time deadline = timeout == absl::InfiniteDuration()
                                    ? absl::InfiniteFuture()
                                    : absl::Now() + timeout;
    std::vector<SampledItem> out;
    while (out.empty()) {
      const absl::Duration slice =
          std::min(kWaitSlice, std::max(absl::ZeroDuration(),
                                        deadline - absl::Now()));
      absl::Status status = table->Sample(1, slice, &out);
      if (status.ok()) break;
      if (status.code() != absl::StatusCode::kDeadlineExceeded) {
        return Fail(status);
      }
      if (Gone()) return false;
      if (absl::Now() >= deadline) {
        return Reply(SampleEndMsg{SampleEndReason::kTimeout});
      }
    }
    SampledItem& sampled = out.front();
    SampleResponseMsg response;
    response.item = std::move(sampled.item);
    response.probability = sampled.probability;
    response.table_size = sampled.table_size;
    response.chunks = std::move(sampled.chunks);
    if (!Reply(response)) return false;
    ++unacked;
    ++sent;
    ++server_->sample_responses_;
    RELAY_CHECK(unacked <= request.max_in_flight);
    RaiseMax(&server_->max_unacked_responses_, unacked);
  }
  return Reply(SampleEndMsg{SampleEndReason::kCompleted});
}

bool Session::OnUpdatePriorities(const UpdatePrioritiesMsg& message) {
  Table* table = server_->table(message.table);
  if (table == nullptr) {
    Fail(absl::NotFoundError(
        absl::StrCat("table '", message.table, "' not found")));
    return true;
  }
  auto applied = table->UpdatePriorities(message.updates);
  if (!applied.ok()) {
    Fail(applied.status());
    return true;
  }
  return Reply(UpdatePrioritiesReplyMsg{*applied});
}

bool Session::OnCheckpoint() {
  auto info = server_->Checkpoint();
  if (!info.ok()) {
    Fail(info.status());
    return true;
  }
  return Reply(CheckpointReplyMsg{info->id, info->path});
}

bool Session::OnServerInfo() {
  ServerInfoReplyMsg reply;
  for (const auto& table : server_->tables_) reply.tables.push_back(table->info());
  return Reply(reply);
}

absl::StatusOr<std::unique_ptr<Server>> Server::Start(
    ServerConfig config, std::optional<std::string> restore_from) {
  auto store = std::make_shared<ChunkStore>();
  std::vector<std::unique_ptr<Table>> tables;
  ItemKey first_item_key = 1;
  if (restore_from.has_value()) {
    RELAY_ASSIGN_OR_RETURN(std::string path,
                           ResolveCheckpointPath(*restore_from));
    RELAY_ASSIGN_OR_RETURN(CheckpointData data, ReadCheckpointFile(path));
    config.tables.clear();
    for (const auto& snapshot : data.tables) {
      config.tables.push_back(snapshot.config);
      for (const Item& item : snapshot.items) {
        first_item_key = std::max(first_item_key, item.key + 1);
      }
    }
    RELAY_RETURN_IF_ERROR(config.Validate());
    RELAY_ASSIGN_OR_RETURN(tables, RestoreTables(std::move(data), store));
  } else {
    RELAY_RETURN_IF_ERROR(config.Validate());
    for (const auto& table_config : config.tables) {
      RELAY_ASSIGN_OR_RETURN(auto table, Table::Create(table_config, store));
      tables.push_back(std::move(table));
    }
  }
  RELAY_ASSIGN_OR_RETURN(Listener listener, Listener::Listen(config.address));
  auto server = std::unique_ptr<Server>(
      new Server(std::move(config), std::move(store), std::move(tables),
                 std::move(listener), first_item_key));
  server->accept_thread_ = std::thread([s = server.get()] { s->AcceptLoop(); });
  return server;
}

Server::Server(ServerConfig config, std::shared_ptr<ChunkStore> store,
               std::vector<std::unique_ptr<Table>> tables, Listener listener,
               ItemKey first_item_key)
    : config_(std::move(config)),
      store_(std::move(store)),
      tables_(std::move(tables)),
      listener_(std::move(listener)),
      next_item_key_(first_item_key) {
  for (const auto& table : tables_) by_name_[table->name()] = table.get();
  if (!config_.checkpoint_dir.empty()) {
    checkpointer_ = std::make_unique<Checkpointer>(config_.checkpoint_dir,
                                                   config_.checkpoint_keep);
  }
}

Server::~Server() { Stop(); }

std::string Server::address() const {
  return absl::StrCat("127.0.0.1:", port());
}

Table* Server::table(absl::string_view name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

std::vector<Table*> Server::tables() const {
  std::vector<Table*> out;
  for (const auto& table : tables_) out.push_back(table.get());
  return out;
}

absl::StatusOr<CheckpointInfo> Server::Checkpoint() {
  if (checkpointer_ == nullptr) {
    return absl::FailedPreconditionError(
        "server has no checkpoint_dir configured");
  }
  std::vector<Table*> all = tables();
  return checkpointer_->Save(all);
}

ServerStats Server::stats() const {
  ServerStats stats;
  stats.connections_accepted = connections_accepted_.load();
  stats.connections_refused = connections_refused_.load();
  {
    absl::MutexLock lock(&mu_);
    stats.open_connections = connections_.size() - finished_.size();
  }
  stats.insert_chunk_frames = insert_chunk_frames_.load();
  stats.create_item_frames = create_item_frames_.load();
  stats.sample_responses = sample_responses_.load();
  stats.max_unacked_responses = max_unacked_responses_.load();
  return stats;
}

void Server::AcceptLoop() {
  while (!stopping_.load()) {
    auto accepted = listener_.Accept();
    Reap();
    if (!accepted.ok()) {
      if (stopping_.load() ||
          accepted.status().code() == absl::StatusCode::kCancelled) {
        return;
      }
      // Typically descriptor exhaustion; back off instead of spinning.
      absl::SleepFor(absl::Milliseconds(10));
      continue;
    }
    auto connection = std::make_shared<Connection>(std::move(accepted).value());
    absl::MutexLock lock(&mu_);
    if (stopped_) return;
    if (static_cast<int64_t>(connections_.size() - finished_.size()) >=
        config_.max_concurrent_streams) {
      ++connections_refused_;
      connection->socket
          .Send(ErrorFromStatus(absl::ResourceExhaustedError(absl::StrCat(
              "server is at max_concurrent_streams (",
              config_.max_concurrent_streams, ")"))))
          .IgnoreError();
      continue;
    }
    const uint64_t id = next_connection_id_++;
    ++connections_accepted_;
    // Started under mu_ so the handler cannot report completion before its
    // thread handle is stored.
    connection->thread =
        std::thread([this, id, c = connection.get()] { Handle(id, c); });
    connections_.emplace(id, std::move(connection));
  }
}

void Server::Handle(uint64_t id, Connection* connection) {
  Session(this, connection).Run();
  connection->socket.Shutdown();
  absl::MutexLock lock(&mu_);
  finished_.push_back(id);
}

void Server::Reap() {
  std::vector<std::shared_ptr<Connection>> done;
  {
    absl::MutexLock lock(&mu_);
    for (uint64_t id : finished_) {
      auto it = connections_.find(id);
      done.push_back(std::move(it->second));
      connections_.erase(it);
    }
    finished_.clear();
  }
  for (auto& connection : done) connection->thread.join();
}

void Server::Stop() {
  {
    absl::MutexLock lock(&mu_);
    if (stopped_) return;
    stopped_ = true;
  }
  stopping_ = true;
  listener_.Shutdown();
  if (accept_thread_.joinable()) accept_thread_.join();
  for (const auto& table : tables_) table->Close();
  std::vector<std::shared_ptr<Connection>> all;
  {
    absl::MutexLock lock(&mu_);
    for (auto& [id, connection] : connections_) {
      connection->socket.Shutdown();
      all.push_back(connection);
    }
  }
  for (auto& connection : all) connection->thread.join();
  absl::MutexLock lock(&mu_);
  connections_.clear();
  finished_.clear();
}

void Server::Wait() {
  absl::MutexLock lock(&mu_);
  mu_.Await(absl::Condition(&stopped_));
}

}  // namespace relay
