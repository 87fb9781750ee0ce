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

#ifndef RELAY_INSTRUMENTATION_H_
#define RELAY_INSTRUMENTATION_H_

#include <cstdint>

namespace relay {

// Tracks whether the current thread is inside a table critical section so
// that chunk deallocation can be checked to never happen there.
class TableLockMarker {
 public:
  TableLockMarker() { ++depth_; }
  ~TableLockMarker() { --depth_; }
  TableLockMarker(const TableLockMarker&) = delete;
  TableLockMarker& operator=(const TableLockMarker&) = delete;

  static int depth() { return depth_; }

 private:
  static thread_local int depth_;
};

// Number of chunk payloads freed while the freeing thread held a table lock.
// Expected to stay zero for the lifetime of the process.
int64_t ChunkDeallocationsUnderTableLock();

void RecordChunkDeallocation();

}  // namespace relay

#endif  // RELAY_INSTRUMENTATION_H_
