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

#include "relay/table.h"

#include <algorithm>
#include <climits>
#include <cmath>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"
#include "relay/instrumentation.h"
#include "relay/status_macros.h"

namespace relay {

namespace {

// Holds the table mutex and marks the thread as inside a table critical
// section for the deallocation instrumentation.
class ScopedTableLock {
 public:
  explicit ScopedTableLock(absl::Mutex* mu) ABSL_EXCLUSIVE_LOCK_FUNCTION(mu)
      : lock_(mu) {}

 private:
  absl::MutexLock lock_;
  TableLockMarker marker_;
};

absl::Time DeadlineFor(absl::Duration timeout) {
  if (timeout == absl::InfiniteDuration()) return absl::InfiniteFuture();
  return absl::Now() + timeout;
}

absl::Status Closed(const std::string& name) {
  return absl::CancelledError(absl::StrCat("table '", name, "' is closed"));
}

}  // namespace

absl::Status TableConfig::Validate() const {
  if (name.empty()) return absl::InvalidArgumentError("table name is empty");
  if (max_size < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("table '", name, "': max_size must be >= 1"));
  }
  if (max_times_sampled < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("table '", name, "': max_times_sampled must be >= 0"));
  }
  return rate_limiter.Validate();
}

void EncodeSelectorOptions(const SelectorOptions& options, ByteWriter* writer) {
  writer->PutU8(static_cast<uint8_t>(options.type));
  writer->PutF64(options.priority_exponent);
}

absl::StatusOr<SelectorOptions> DecodeSelectorOptions(ByteReader* reader) {
  RELAY_ASSIGN_OR_RETURN(uint8_t type, reader->ReadU8());
  if (type > static_cast<uint8_t>(SelectorType::kPrioritized)) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown selector type ", type));
  }
  SelectorOptions options;
  options.type = static_cast<SelectorType>(type);
  RELAY_ASSIGN_OR_RETURN(options.priority_exponent, reader->ReadF64());
  return options;
}

void EncodeRateLimiterConfig(const RateLimiterConfig& config,
                             ByteWriter* writer) {
  writer->PutI64(config.min_size_to_sample);
  writer->PutF64(config.samples_per_insert);
  writer->PutF64(config.min_diff);
  writer->PutF64(config.max_diff);
}

absl::StatusOr<RateLimiterConfig> DecodeRateLimiterConfig(ByteReader* reader) {
  RateLimiterConfig config;
  RELAY_ASSIGN_OR_RETURN(config.min_size_to_sample, reader->ReadI64());
  RELAY_ASSIGN_OR_RETURN(config.samples_per_insert, reader->ReadF64());
  RELAY_ASSIGN_OR_RETURN(config.min_diff, reader->ReadF64());
  RELAY_ASSIGN_OR_RETURN(config.max_diff, reader->ReadF64());
  return config;
}

void EncodeTableConfig(const TableConfig& config, ByteWriter* writer) {
  writer->PutString(config.name);
  EncodeSelectorOptions(config.sampler, writer);
  EncodeSelectorOptions(config.remover, writer);
  writer->PutI64(config.max_size);
  writer->PutI64(config.max_times_sampled);
  EncodeRateLimiterConfig(config.rate_limiter, writer);
  writer->PutU8(config.signature.has_value() ? 1 : 0);
  if (config.signature.has_value()) config.signature->Encode(writer);
  writer->PutU32(config.extensions.size());
  for (const auto& name : config.extensions) writer->PutString(name);
  writer->PutU64(config.rng_seed);
}

absl::StatusOr<TableConfig> DecodeTableConfig(ByteReader* reader) {
  TableConfig config;
  RELAY_ASSIGN_OR_RETURN(config.name, reader->ReadString());
  RELAY_ASSIGN_OR_RETURN(config.sampler, DecodeSelectorOptions(reader));
  RELAY_ASSIGN_OR_RETURN(config.remover, DecodeSelectorOptions(reader));
  RELAY_ASSIGN_OR_RETURN(config.max_size, reader->ReadI64());
  RELAY_ASSIGN_OR_RETURN(int64_t max_times_sampled, reader->ReadI64());
  if (max_times_sampled < 0 || max_times_sampled > INT32_MAX) {
    return absl::InvalidArgumentError("max_times_sampled out of range");
  }
  config.max_times_sampled = static_cast<int32_t>(max_times_sampled);
  RELAY_ASSIGN_OR_RETURN(config.rate_limiter, DecodeRateLimiterConfig(reader));
  RELAY_ASSIGN_OR_RETURN(uint8_t has_signature, reader->ReadU8());
  if (has_signature > 1) {
    return absl::InvalidArgumentError("bad signature presence flag");
  }
  if (has_signature == 1) {
    RELAY_ASSIGN_OR_RETURN(Signature signature, Signature::Decode(reader));
    config.signature = std::move(signature);
  }
  RELAY_ASSIGN_OR_RETURN(uint32_t num_extensions, reader->ReadU32());
  if (num_extensions > reader->remaining() / 4) {
    return absl::InvalidArgumentError("extension count exceeds payload");
  }
  for (uint32_t i = 0; i < num_extensions; ++i) {
    RELAY_ASSIGN_OR_RETURN(std::string name, reader->ReadString());
    config.extensions.push_back(std::move(name));
  }
  RELAY_ASSIGN_OR_RETURN(config.rng_seed, reader->ReadU64());
  RELAY_RETURN_IF_ERROR(config.Validate());
  return config;
}

void EncodeItem(const Item& item, ByteWriter* writer) {
  writer->PutU64(item.key);
  writer->PutF64(item.priority);
  writer->PutU32(item.chunk_keys.size());
  for (ChunkKey key : item.chunk_keys) writer->PutU64(key);
  writer->PutI64(item.offset);
  writer->PutI64(item.length);
  writer->PutI64(item.times_sampled);
}

absl::StatusOr<Item> DecodeItem(ByteReader* reader) {
  Item item;
  RELAY_ASSIGN_OR_RETURN(item.key, reader->ReadU64());
  RELAY_ASSIGN_OR_RETURN(item.priority, reader->ReadF64());
  RELAY_ASSIGN_OR_RETURN(uint32_t num_chunks, reader->ReadU32());
  if (num_chunks > reader->remaining() / 8) {
    return absl::InvalidArgumentError("chunk key count exceeds payload");
  }
  item.chunk_keys.reserve(num_chunks);
  for (uint32_t i = 0; i < num_chunks; ++i) {
    RELAY_ASSIGN_OR_RETURN(ChunkKey key, reader->ReadU64());
    item.chunk_keys.push_back(key);
  }
  RELAY_ASSIGN_OR_RETURN(item.offset, reader->ReadI64());
  RELAY_ASSIGN_OR_RETURN(item.length, reader->ReadI64());
  RELAY_ASSIGN_OR_RETURN(int64_t times_sampled, reader->ReadI64());
  if (times_sampled < 0 || times_sampled > INT32_MAX) {
    return absl::InvalidArgumentError("times_sampled out of range");
  }
  item.times_sampled = static_cast<int32_t>(times_sampled);
  return item;
}

absl::StatusOr<std::unique_ptr<Table>> Table::Create(
    TableConfig config, std::shared_ptr<ChunkStore> store,
    std::vector<std::shared_ptr<TableExtension>> extra_extensions) {
  RELAY_RETURN_IF_ERROR(config.Validate());
  RELAY_ASSIGN_OR_RETURN(auto sampler, MakeSelector(config.sampler));
  RELAY_ASSIGN_OR_RETURN(auto remover, MakeSelector(config.remover));
  std::vector<std::shared_ptr<TableExtension>> extensions;
  for (const auto& name : config.extensions) {
    RELAY_ASSIGN_OR_RETURN(auto extension, MakeExtension(name));
    extensions.push_back(std::move(extension));
  }
  for (auto& extension : extra_extensions) {
    extensions.push_back(std::move(extension));
  }
  return std::unique_ptr<Table>(new Table(std::move(config), std::move(store),
                                          std::move(sampler), std::move(remover),
                                          std::move(extensions)));
}

absl::StatusOr<std::unique_ptr<Table>> Table::Restore(
    TableSnapshot snapshot, std::shared_ptr<ChunkStore> store,
    std::vector<std::shared_ptr<TableExtension>> extra_extensions) {
  const std::string& name = snapshot.config.name;
  auto corrupt = [&name](absl::string_view what) {
    return absl::DataLossError(
        absl::StrCat("snapshot of table '", name, "': ", what));
  };
  if (snapshot.items.size() > static_cast<size_t>(snapshot.config.max_size)) {
    return corrupt("more items than max_size");
  }
  if (snapshot.counters.inserts - snapshot.counters.deletes !=
      static_cast<int64_t>(snapshot.items.size())) {
    return corrupt("limiter counters disagree with the item count");
  }
  absl::flat_hash_map<ChunkKey, std::shared_ptr<const Chunk>> chunks;
  for (auto& chunk : snapshot.chunks) chunks[chunk->key()] = chunk;

  RELAY_ASSIGN_OR_RETURN(
      auto table, Create(snapshot.config, store, std::move(extra_extensions)));
  {
    ScopedTableLock lock(&table->mu_);
    absl::flat_hash_set<ItemKey> keys;
    for (const auto& item : snapshot.items) {
      if (!keys.insert(item.key).second) return corrupt("duplicate item key");
      TableItem table_item{item, {}};
      for (ChunkKey key : item.chunk_keys) {
        auto it = chunks.find(key);
        if (it == chunks.end()) return corrupt("item references missing chunk");
        table_item.chunks.push_back(it->second);
      }
      RELAY_RETURN_IF_ERROR(table->ValidateItem(table_item));
      for (const auto& chunk : table_item.chunks) store->Acquire(chunk);
      table->items_.emplace(item.key, Record{item, table->next_seq_++});
    }
    auto load = [&](Selector* selector,
                    const std::vector<std::pair<ItemKey, double>>& entries)
        -> absl::Status {
      if (entries.size() != keys.size()) {
        return corrupt("selector state size differs from item count");
      }
      for (const auto& [key, priority] : entries) {
        auto it = table->items_.find(key);
        if (it == table->items_.end() || it->second.item.priority != priority) {
          return corrupt("selector state disagrees with items");
        }
        RELAY_RETURN_IF_ERROR(selector->Insert(key, priority));
      }
      return absl::OkStatus();
    };
    RELAY_RETURN_IF_ERROR(load(table->sampler_.get(), snapshot.sampler_entries));
    RELAY_RETURN_IF_ERROR(load(table->remover_.get(), snapshot.remover_entries));
    table->limiter_.Restore(snapshot.counters);
  }
  return table;
}

Table::Table(TableConfig config, std::shared_ptr<ChunkStore> store,
             std::unique_ptr<Selector> sampler,
             std::unique_ptr<Selector> remover,
             std::vector<std::shared_ptr<TableExtension>> extensions)
    : config_(std::move(config)),
      store_(std::move(store)),
      sampler_(std::move(sampler)),
      remover_(std::move(remover)),
      limiter_(config_.rate_limiter),
      rng_(config_.rng_seed),
      extensions_(std::move(extensions)) {}

Table::~Table() {
  absl::MutexLock lock(&mu_);
  for (const auto& [key, record] : items_) {
    for (ChunkKey chunk : record.item.chunk_keys) store_->ReleaseRef(chunk);
  }
  items_.clear();
}

double Table::NextDraw() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

TableEvent Table::MakeEvent(
    const Item& item,
    std::span<const std::shared_ptr<const Chunk>> chunks) const {
  return TableEvent{item, chunks, static_cast<int64_t>(items_.size()),
                    limiter_.counters(), limiter_.diff()};
}

absl::Status Table::ValidateItem(const TableItem& table_item) const {
  const Item& item = table_item.item;
  auto invalid = [&item](absl::string_view what) {
    return absl::InvalidArgumentError(
        absl::StrCat("item ", item.key, ": ", what));
  };
  if (!std::isfinite(item.priority) || item.priority < 0) {
    return invalid("priority must be finite and >= 0");
  }
  if (item.chunk_keys.empty()) return invalid("references no chunks");
  if (table_item.chunks.size() != item.chunk_keys.size()) {
    return invalid("chunk payloads do not match chunk keys");
  }
  if (item.offset < 0 || item.length < 1) {
    return invalid("needs offset >= 0 and length >= 1");
  }
  if (item.times_sampled < 0 ||
      (config_.max_times_sampled > 0 &&
       item.times_sampled >= config_.max_times_sampled)) {
    return invalid("times_sampled out of range");
  }
  int64_t total_rows = 0;
  for (size_t i = 0; i < table_item.chunks.size(); ++i) {
    const auto& chunk = table_item.chunks[i];
    if (chunk == nullptr || chunk->key() != item.chunk_keys[i]) {
      return invalid("chunk payloads do not match chunk keys");
    }
    if (!(chunk->signature() == table_item.chunks[0]->signature())) {
      return invalid("chunks disagree on signature");
    }
    total_rows += chunk->num_rows();
  }
  if (item.offset >= table_item.chunks.front()->num_rows()) {
    return invalid("offset must be inside the first chunk");
  }
  if (item.offset + item.length > total_rows) {
    return invalid("offset + length exceeds the referenced rows");
  }
  if (item.offset + item.length <=
      total_rows - table_item.chunks.back()->num_rows()) {
    return invalid("last chunk is not used by the item");
  }
  if (config_.signature.has_value() &&
      !(table_item.chunks[0]->signature() == *config_.signature)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "item ", item.key, " signature ",
        table_item.chunks[0]->signature().DebugString(),
        " does not match table '", config_.name, "' signature ",
        config_.signature->DebugString()));
  }
  return absl::OkStatus();
}

absl::Status Table::InsertOrAssign(TableItem item, absl::Duration timeout) {
  RELAY_RETURN_IF_ERROR(ValidateItem(item));
  const absl::Time deadline = DeadlineFor(timeout);
  ScopedTableLock lock(&mu_);
  while (true) {
    if (closed_) return Closed(config_.name);
    if (items_.contains(item.item.key)) return AssignLocked(item.item);
    if (limiter_.CanInsert(items_.size())) break;
    if (absl::Now() >= deadline) {
      return absl::DeadlineExceededError(absl::StrCat(
          "insert into '", config_.name, "' blocked by the rate limiter"));
    }
    ++blocked_inserts_;
    insert_cv_.WaitWithDeadline(&mu_, deadline);
    --blocked_inserts_;
  }
  if (static_cast<int64_t>(items_.size()) >= config_.max_size) {
    RELAY_ASSIGN_OR_RETURN(SelectionResult victim, remover_->Select(NextDraw()));
    RELAY_RETURN_IF_ERROR(DeleteLocked(victim.key));
  }
  InsertLocked(std::move(item));
  sample_cv_.SignalAll();
  return absl::OkStatus();
}

absl::Status Table::AssignLocked(const Item& item) {
  Record& record = items_.at(item.key);
  record.item.priority = item.priority;
  RELAY_RETURN_IF_ERROR(sampler_->Update(item.key, item.priority));
  RELAY_RETURN_IF_ERROR(remover_->Update(item.key, item.priority));
  const TableEvent event = MakeEvent(record.item, {});
  for (const auto& extension : extensions_) extension->OnUpdate(event);
  return absl::OkStatus();
}

void Table::InsertLocked(TableItem table_item) {
  const ItemKey key = table_item.item.key;
  const double priority = table_item.item.priority;
  for (const auto& chunk : table_item.chunks) store_->Acquire(chunk);
  auto [it, inserted] =
      items_.emplace(key, Record{std::move(table_item.item), next_seq_++});
  RELAY_CHECK(inserted);
  RELAY_CHECK(sampler_->Insert(key, priority).ok());
  RELAY_CHECK(remover_->Insert(key, priority).ok());
  limiter_.RecordInsert();
  const TableEvent event = MakeEvent(it->second.item, table_item.chunks);
  for (const auto& extension : extensions_) extension->OnInsert(event);
}

absl::Status Table::DeleteLocked(ItemKey key) {
  auto it = items_.find(key);
  if (it == items_.end()) {
    return absl::NotFoundError(
        absl::StrCat("item ", key, " not in table '", config_.name, "'"));
  }
  Item item = std::move(it->second.item);
  items_.erase(it);
  RELAY_RETURN_IF_ERROR(sampler_->Delete(key));
  RELAY_RETURN_IF_ERROR(remover_->Delete(key));
  for (ChunkKey chunk : item.chunk_keys) store_->ReleaseRef(chunk);
  limiter_.RecordDelete();
  const TableEvent event = MakeEvent(item, {});
  for (const auto& extension : extensions_) extension->OnDelete(event);
  return absl::OkStatus();
}

absl::Status Table::Sample(int64_t n, absl::Duration timeout,
                           std::vector<SampledItem>* out) {
  if (n < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("sample count must be >= 1, got ", n));
  }
  const absl::Time deadline = DeadlineFor(timeout);
  for (int64_t i = 0; i < n; ++i) {
    SampledItem sampled;
    {
      ScopedTableLock lock(&mu_);
      while (true) {
        if (closed_) return Closed(config_.name);
        if (limiter_.CanSample(items_.size())) break;
        if (absl::Now() >= deadline) {
          return absl::DeadlineExceededError(absl::StrCat(
              "sample from '", config_.name, "' blocked by the rate limiter"));
        }
        ++blocked_samples_;
        sample_cv_.WaitWithDeadline(&mu_, deadline);
        --blocked_samples_;
      }
      RELAY_ASSIGN_OR_RETURN(SelectionResult selected,
                             sampler_->Select(NextDraw()));
      Record& record = items_.at(selected.key);
      ++record.item.times_sampled;
      RELAY_ASSIGN_OR_RETURN(sampled.chunks, store_->Get(record.item.chunk_keys));
      sampled.item = record.item;
      sampled.probability = selected.probability;
      sampled.table_size = static_cast<int64_t>(items_.size());
      limiter_.RecordSample();
      const TableEvent event = MakeEvent(sampled.item, sampled.chunks);
      for (const auto& extension : extensions_) extension->OnSample(event);
      if (config_.max_times_sampled > 0 &&
          record.item.times_sampled >= config_.max_times_sampled) {
        sampled.retired = true;
        RELAY_RETURN_IF_ERROR(DeleteLocked(selected.key));
      }
      insert_cv_.SignalAll();
    }
    out->push_back(std::move(sampled));
  }
  return absl::OkStatus();
}

absl::StatusOr<SampledItem> Table::SampleOne(absl::Duration timeout) {
  std::vector<SampledItem> out;
  RELAY_RETURN_IF_ERROR(Sample(1, timeout, &out));
  return std::move(out.front());
}

absl::StatusOr<int64_t> Table::UpdatePriorities(
    std::span<const std::pair<ItemKey, double>> updates) {
  for (const auto& [key, priority] : updates) {
    if (!std::isfinite(priority) || priority < 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          "priority for item ", key, " must be finite and >= 0, got ",
          priority));
    }
  }
  ScopedTableLock lock(&mu_);
  if (closed_) return Closed(config_.name);
  int64_t applied = 0;
  for (const auto& [key, priority] : updates) {
    auto it = items_.find(key);
    if (it == items_.end()) continue;
    Item update = it->second.item;
    update.priority = priority;
    RELAY_RETURN_IF_ERROR(AssignLocked(update));
    ++applied;
  }
  return applied;
}

absl::Status Table::Delete(ItemKey key) {
  ScopedTableLock lock(&mu_);
  if (closed_) return Closed(config_.name);
  return DeleteLocked(key);
}

int64_t Table::size() const {
  absl::MutexLock lock(&mu_);
  return items_.size();
}

bool Table::Contains(ItemKey key) const {
  absl::MutexLock lock(&mu_);
  return items_.contains(key);
}

TableInfo Table::info() const {
  absl::MutexLock lock(&mu_);
  TableInfo info;
  info.config = config_;
  info.size = items_.size();
  info.counters = limiter_.counters();
  info.diff = limiter_.diff();
  info.blocked_inserts = blocked_inserts_;
  info.blocked_samples = blocked_samples_;
  return info;
}

std::vector<Item> Table::Copy() const {
  std::vector<std::pair<uint64_t, Item>> ordered;
  {
    absl::MutexLock lock(&mu_);
    ordered.reserve(items_.size());
    for (const auto& [key, record] : items_) {
      ordered.emplace_back(record.seq, record.item);
    }
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Item> out;
  out.reserve(ordered.size());
  for (auto& [seq, item] : ordered) out.push_back(std::move(item));
  return out;
}

absl::Status Table::Audit() const {
  absl::MutexLock lock(&mu_);
  auto inconsistent = [this](absl::string_view what) {
    return absl::InternalError(
        absl::StrCat("table '", config_.name, "' audit: ", what));
  };
  for (const Selector* selector : {sampler_.get(), remover_.get()}) {
    if (selector->size() != items_.size()) {
      return inconsistent(absl::StrCat(
          std::string(SelectorTypeName(selector->options().type)),
          " selector holds ",
          selector->size(), " keys, table holds ", items_.size()));
    }
    for (const auto& [key, priority] : selector->Entries()) {
      auto it = items_.find(key);
      if (it == items_.end()) {
        return inconsistent(absl::StrCat("selector key ", key, " not in table"));
      }
      if (it->second.item.priority != priority) {
        return inconsistent(
            absl::StrCat("selector priority for ", key, " is stale"));
      }
    }
  }
  absl::flat_hash_map<ChunkKey, int64_t> local_refs;
  for (const auto& [key, record] : items_) {
    if (record.item.chunk_keys.empty()) {
      return inconsistent(absl::StrCat("item ", key, " has no chunks"));
    }
    if (config_.max_times_sampled > 0 &&
        record.item.times_sampled >= config_.max_times_sampled) {
      return inconsistent(
          absl::StrCat("item ", key, " exceeded max_times_sampled"));
    }
    for (ChunkKey chunk : record.item.chunk_keys) ++local_refs[chunk];
  }
  for (const auto& [chunk, refs] : local_refs) {
    auto stored = store_->RefCount(chunk);
    if (!stored.has_value()) {
      return inconsistent(absl::StrCat("chunk ", chunk, " missing from store"));
    }
    if (*stored < refs) {
      return inconsistent(absl::StrCat("chunk ", chunk, " refcount ", *stored,
                                       " below the table's ", refs,
                                       " references"));
    }
  }
  const auto& counters = limiter_.counters();
  if (counters.inserts - counters.deletes !=
      static_cast<int64_t>(items_.size())) {
    return inconsistent(absl::StrCat(
        "inserts (", counters.inserts, ") - deletes (", counters.deletes,
        ") != size (", items_.size(), ")"));
  }
  if (static_cast<int64_t>(items_.size()) > config_.max_size) {
    return inconsistent("size exceeds max_size");
  }
  return absl::OkStatus();
}

void Table::Close() {
  absl::MutexLock lock(&mu_);
  closed_ = true;
  insert_cv_.SignalAll();
  sample_cv_.SignalAll();
}

void Table::LockForCheckpoint() {
  mu_.Lock();
}

TableSnapshot Table::SnapshotLocked() const {
  TableLockMarker marker;
  TableSnapshot snapshot;
  snapshot.config = config_;
  snapshot.counters = limiter_.counters();
  std::vector<const Record*> ordered;
  ordered.reserve(items_.size());
  for (const auto& [key, record] : items_) ordered.push_back(&record);
  std::sort(ordered.begin(), ordered.end(),
            [](const Record* a, const Record* b) { return a->seq < b->seq; });
  absl::flat_hash_set<ChunkKey> seen;
  std::vector<ChunkKey> chunk_keys;
  for (const Record* record : ordered) {
    snapshot.items.push_back(record->item);
    for (ChunkKey key : record->item.chunk_keys) {
      if (seen.insert(key).second) chunk_keys.push_back(key);
    }
  }
  std::sort(chunk_keys.begin(), chunk_keys.end());
  auto chunks = store_->Get(chunk_keys);
  RELAY_CHECK(chunks.ok());
  snapshot.chunks = std::move(chunks).value();
  snapshot.sampler_entries = sampler_->Entries();
  snapshot.remover_entries = remover_->Entries();
  return snapshot;
}

void Table::UnlockAfterCheckpoint() {
  mu_.Unlock();
}

std::shared_ptr<TableExtension> Table::extension(absl::string_view name) const {
  for (const auto& extension : extensions_) {
    if (extension->name() == name) return extension;
  }
  return nullptr;
}

}  // namespace relay
