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

#include "relay/checkpoint.h"

#include <fcntl.h>
#include <openssl/sha.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/time/clock.h"
#include "relay/byte_io.h"
#include "relay/instrumentation.h"
#include "relay/status_macros.h"

namespace relay {

namespace {

namespace fs = std::filesystem;

constexpr uint8_t kMagic[8] = {'R', 'L', 'Y', 'C', 'K', 'P', 'T', 0};
constexpr size_t kHashBytes = SHA256_DIGEST_LENGTH;
constexpr absl::string_view kPrefix = "checkpoint-";
constexpr absl::string_view kTempSuffix = ".tmp";

absl::Status Corrupt(absl::string_view what) {
  return absl::DataLossError(absl::StrCat("checkpoint: ", what));
}

void EncodeSelectorState(const SelectorOptions& options,
                         const std::vector<std::pair<ItemKey, double>>& entries,
                         ByteWriter* writer) {
  EncodeSelectorOptions(options, writer);
  writer->PutU64(entries.size());
  for (const auto& [key, priority] : entries) {
    writer->PutU64(key);
    writer->PutF64(priority);
  }
}

absl::StatusOr<std::vector<std::pair<ItemKey, double>>> DecodeSelectorState(
    const SelectorOptions& expected, ByteReader* reader) {
  RELAY_ASSIGN_OR_RETURN(SelectorOptions options, DecodeSelectorOptions(reader));
  if (!(options == expected)) {
    return Corrupt("selector state does not match the table config");
  }
  RELAY_ASSIGN_OR_RETURN(uint64_t count, reader->ReadU64());
  if (count > reader->remaining() / 16) return Corrupt("selector entry count");
  std::vector<std::pair<ItemKey, double>> entries;
  entries.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    RELAY_ASSIGN_OR_RETURN(ItemKey key, reader->ReadU64());
    RELAY_ASSIGN_OR_RETURN(double priority, reader->ReadF64());
    entries.emplace_back(key, priority);
  }
  return entries;
}

std::array<uint8_t, kHashBytes> Sha256(std::span<const uint8_t> bytes) {
  std::array<uint8_t, kHashBytes> digest;
  SHA256(bytes.data(), bytes.size(), digest.data());
  return digest;
}

bool IsCheckpointName(const std::string& name) {
  return absl::StartsWith(name, kPrefix) && !absl::EndsWith(name, kTempSuffix);
}

// Names embed a zero-padded timestamp and sequence, so lexical order is
// creation order.
std::vector<fs::path> ListCheckpoints(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() &&
        IsCheckpointName(entry.path().filename().string())) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<uint8_t> EncodeCheckpoint(const CheckpointData& data) {
  ByteWriter writer;
  writer.PutBytes(kMagic);
  writer.PutU32(kCheckpointVersion);
  writer.PutU8(static_cast<uint8_t>(data.metadata.codec));
  writer.PutI64(data.metadata.created_unix_millis);
  writer.PutU32(data.tables.size());

  std::vector<std::shared_ptr<const Chunk>> chunks;
  absl::flat_hash_set<ChunkKey> seen;
  for (const TableSnapshot& table : data.tables) {
    EncodeTableConfig(table.config, &writer);
    writer.PutU64(table.counters.inserts);
    writer.PutU64(table.counters.samples);
    writer.PutU64(table.counters.deletes);
    writer.PutU64(table.items.size());
    for (const Item& item : table.items) EncodeItem(item, &writer);
    EncodeSelectorState(table.config.sampler, table.sampler_entries, &writer);
    EncodeSelectorState(table.config.remover, table.remover_entries, &writer);
    for (const auto& chunk : table.chunks) {
      if (seen.insert(chunk->key()).second) chunks.push_back(chunk);
    }
  }
  std::sort(chunks.begin(), chunks.end(),
            [](const auto& a, const auto& b) { return a->key() < b->key(); });
  writer.PutU64(chunks.size());
  for (const auto& chunk : chunks) chunk->Encode(&writer);

  std::vector<uint8_t> bytes = writer.Release();
  auto digest = Sha256(bytes);
  bytes.insert(bytes.end(), digest.begin(), digest.end());
  return bytes;
}

absl::StatusOr<CheckpointData> DecodeCheckpoint(std::span<const uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) + 4 + kHashBytes) {
    return Corrupt("file too short");
  }
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    return Corrupt("bad magic");
  }
  const auto body = bytes.first(bytes.size() - kHashBytes);
  const auto digest = Sha256(body);
  if (!std::equal(digest.begin(), digest.end(), body.end())) {
    return Corrupt("integrity hash mismatch (truncated or modified file)");
  }

  ByteReader reader(body.subspan(sizeof(kMagic)));
  RELAY_ASSIGN_OR_RETURN(uint32_t version, reader.ReadU32());
  if (version != kCheckpointVersion) {
    return absl::FailedPreconditionError(absl::StrCat(
        "checkpoint version ", version, " not supported (expected ",
        kCheckpointVersion, ")"));
  }
  CheckpointData data;
  RELAY_ASSIGN_OR_RETURN(uint8_t codec, reader.ReadU8());
  RELAY_ASSIGN_OR_RETURN(data.metadata.codec, CodecFromCode(codec));
  RELAY_ASSIGN_OR_RETURN(data.metadata.created_unix_millis, reader.ReadI64());
  RELAY_ASSIGN_OR_RETURN(uint32_t num_tables, reader.ReadU32());
  if (num_tables > reader.remaining()) return Corrupt("table count");

  absl::flat_hash_set<std::string> names;
  for (uint32_t t = 0; t < num_tables; ++t) {
    TableSnapshot table;
    RELAY_ASSIGN_OR_RETURN(table.config, DecodeTableConfig(&reader));
    if (!names.insert(table.config.name).second) {
      return Corrupt(absl::StrCat("duplicate table '", table.config.name, "'"));
    }
    RELAY_ASSIGN_OR_RETURN(uint64_t inserts, reader.ReadU64());
    RELAY_ASSIGN_OR_RETURN(uint64_t samples, reader.ReadU64());
    RELAY_ASSIGN_OR_RETURN(uint64_t deletes, reader.ReadU64());
    table.counters = {static_cast<int64_t>(inserts),
                      static_cast<int64_t>(samples),
                      static_cast<int64_t>(deletes)};
    RELAY_ASSIGN_OR_RETURN(uint64_t num_items, reader.ReadU64());
    if (num_items > reader.remaining()) return Corrupt("item count");
    table.items.reserve(num_items);
    for (uint64_t i = 0; i < num_items; ++i) {
      RELAY_ASSIGN_OR_RETURN(Item item, DecodeItem(&reader));
      table.items.push_back(std::move(item));
    }
    RELAY_ASSIGN_OR_RETURN(table.sampler_entries,
                           DecodeSelectorState(table.config.sampler, &reader));
    RELAY_ASSIGN_OR_RETURN(table.remover_entries,
                           DecodeSelectorState(table.config.remover, &reader));
    data.tables.push_back(std::move(table));
  }

  RELAY_ASSIGN_OR_RETURN(uint64_t num_chunks, reader.ReadU64());
  if (num_chunks > reader.remaining()) return Corrupt("chunk count");
  absl::flat_hash_map<ChunkKey, std::shared_ptr<const Chunk>> chunks;
  for (uint64_t i = 0; i < num_chunks; ++i) {
    RELAY_ASSIGN_OR_RETURN(Chunk chunk, Chunk::Decode(&reader));
    const ChunkKey key = chunk.key();
    if (!chunks.emplace(key, std::make_shared<const Chunk>(std::move(chunk)))
             .second) {
      return Corrupt(absl::StrCat("chunk ", key, " encoded twice"));
    }
  }
  if (!reader.AtEnd()) return Corrupt("trailing bytes before the hash");

  for (TableSnapshot& table : data.tables) {
    absl::flat_hash_set<ChunkKey> attached;
    for (const Item& item : table.items) {
      for (ChunkKey key : item.chunk_keys) {
        auto it = chunks.find(key);
        if (it == chunks.end()) {
          return Corrupt(absl::StrCat("item ", item.key,
                                      " references missing chunk ", key));
        }
        if (attached.insert(key).second) table.chunks.push_back(it->second);
      }
    }
  }
  return data;
}

absl::StatusOr<CheckpointData> ReadCheckpointFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) return absl::DataLossError(absl::StrCat("cannot read ", path));
  auto data = DecodeCheckpoint(bytes);
  if (!data.ok()) {
    return absl::Status(data.status().code(),
                        absl::StrCat(path, ": ", data.status().message()));
  }
  return data;
}

absl::StatusOr<std::string> ResolveCheckpointPath(const std::string& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    auto all = ListCheckpoints(path);
    if (all.empty()) {
      return absl::NotFoundError(absl::StrCat("no checkpoints in ", path));
    }
    return all.back().string();
  }
  if (!fs::exists(path, ec)) {
    return absl::NotFoundError(absl::StrCat("no checkpoint at ", path));
  }
  return path;
}

absl::StatusOr<std::vector<std::unique_ptr<Table>>> RestoreTables(
    CheckpointData data, std::shared_ptr<ChunkStore> store) {
  ChunkKey max_key = 0;
  for (const TableSnapshot& table : data.tables) {
    for (const auto& chunk : table.chunks) {
      max_key = std::max(max_key, chunk->key());
    }
  }
  store->AdvanceKeysPast(max_key);
  std::vector<std::unique_ptr<Table>> tables;
  for (TableSnapshot& snapshot : data.tables) {
    RELAY_ASSIGN_OR_RETURN(auto table,
                           Table::Restore(std::move(snapshot), store));
    tables.push_back(std::move(table));
  }
  return tables;
}

Checkpointer::Checkpointer(std::string directory, int keep_latest)
    : directory_(std::move(directory)), keep_latest_(std::max(keep_latest, 1)) {}

absl::StatusOr<CheckpointInfo> Checkpointer::Save(
    std::span<Table* const> tables) {
  std::error_code ec;
  fs::create_directories(directory_, ec);
  if (ec) {
    return absl::InternalError(absl::StrCat(
        "cannot create checkpoint directory ", directory_, ": ", ec.message()));
  }
  std::vector<Table*> ordered(tables.begin(), tables.end());
  std::sort(ordered.begin(), ordered.end(),
            [](Table* a, Table* b) { return a->name() < b->name(); });

  CheckpointData data;
  data.metadata.codec = kDefaultCodec;
  data.metadata.created_unix_millis = absl::ToUnixMillis(absl::Now());
  CheckpointInfo info;
  info.id = absl::StrFormat("%s%013d-%06d", kPrefix,
                            data.metadata.created_unix_millis,
                            sequence_.fetch_add(1) % 1000000);
  info.path = (fs::path(directory_) / info.id).string();

  absl::Status status;
  {
    TableLockMarker marker;
    for (Table* table : ordered) table->LockForCheckpoint();
    for (Table* table : ordered) data.tables.push_back(table->SnapshotLocked());
    status = WriteAtomically(info.path, EncodeCheckpoint(data));
    for (auto it = ordered.rbegin(); it != ordered.rend(); ++it) {
      (*it)->UnlockAfterCheckpoint();
    }
  }
  // Snapshot chunk references are dropped here, outside every table lock.
  data.tables.clear();
  RELAY_RETURN_IF_ERROR(status);
  PruneOld();
  return info;
}

absl::Status Checkpointer::WriteAtomically(const std::string& path,
                                           std::span<const uint8_t> bytes) {
  const std::string temp = absl::StrCat(path, kTempSuffix);
  auto fail = [&temp](absl::string_view what) {
    const int saved = errno;
    ::unlink(temp.c_str());
    return absl::InternalError(
        absl::StrCat(what, " ", temp, ": ", std::strerror(saved)));
  };
  const int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) return fail("cannot create");
  size_t written = 0;
  while (written < bytes.size()) {
    const ssize_t n =
        ::write(fd, bytes.data() + written, bytes.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      return fail("write failed for");
    }
    written += n;
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    return fail("fsync failed for");
  }
  if (::close(fd) != 0) return fail("close failed for");
  if (::rename(temp.c_str(), path.c_str()) != 0) return fail("rename failed for");
  return absl::OkStatus();
}

void Checkpointer::PruneOld() {
  auto all = ListCheckpoints(directory_);
  if (all.size() <= static_cast<size_t>(keep_latest_)) return;
  std::error_code ec;
  for (size_t i = 0; i + keep_latest_ < all.size(); ++i) fs::remove(all[i], ec);
}

}  // namespace relay
