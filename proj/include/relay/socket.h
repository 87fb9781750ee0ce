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

#ifndef RELAY_SOCKET_H_
#define RELAY_SOCKET_H_

#include <cstdint>
#include <span>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/time/time.h"
#include "relay/wire.h"

namespace relay {

struct HostPort {
  std::string host;
  uint16_t port = 0;
};

// "host:port" or "[v6]:port". An empty host means every interface.
absl::StatusOr<HostPort> ParseHostPort(absl::string_view address);

// Owning TCP socket with blocking frame I/O.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;

  static absl::StatusOr<Socket> Connect(
      absl::string_view address, absl::Duration timeout = absl::Seconds(5));

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }

  absl::Status SendAll(std::span<const uint8_t> bytes);
  absl::Status Send(const Message& message);

  // Reads one frame. Unavailable on orderly or abrupt peer close.
  absl::StatusOr<Message> Receive(size_t max_message_bytes);

  // True when a read would not block (data, EOF or error pending).
  absl::StatusOr<bool> WaitReadable(absl::Duration timeout);

  // True once the peer has closed or reset the connection. Does not consume
  // data.
  bool PeerClosed();

  // Unblocks any thread reading or writing on this socket.
  void Shutdown();
  void Close();

 private:
  absl::Status ReadExact(uint8_t* out, size_t n);

  int fd_ = -1;
};

class Listener {
 public:
  Listener() = default;
  ~Listener();
  Listener(Listener&& other) noexcept;
  Listener& operator=(Listener&& other) noexcept;

  // Port 0 picks an ephemeral port; see port().
  static absl::StatusOr<Listener> Listen(absl::string_view address);

  absl::StatusOr<Socket> Accept();
  uint16_t port() const { return port_; }

  // Makes a blocked Accept return Cancelled.
  void Shutdown();

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

}  // namespace relay

#endif  // RELAY_SOCKET_H_
