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

#include "relay/socket.h"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <vector>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "relay/status_macros.h"

namespace relay {

namespace {

absl::Status Errno(absl::string_view what) {
  const int saved = errno;
  const std::string detail = absl::StrCat(what, ": ", std::strerror(saved));
  if (saved == EPIPE || saved == ECONNRESET || saved == ECONNREFUSED ||
      saved == ENOTCONN || saved == ETIMEDOUT || saved == EHOSTUNREACH) {
    return absl::UnavailableError(detail);
  }
  return absl::InternalError(detail);
}

void SetNoDelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

struct AddrInfoDeleter {
  void operator()(addrinfo* info) const { ::freeaddrinfo(info); }
};

absl::StatusOr<std::unique_ptr<addrinfo, AddrInfoDeleter>> Resolve(
    const HostPort& hp, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* result = nullptr;
  const std::string port = absl::StrCat(hp.port);
  const int rc = ::getaddrinfo(hp.host.empty() ? nullptr : hp.host.c_str(),
                               port.c_str(), &hints, &result);
  if (rc != 0) {
    return absl::UnavailableError(absl::StrCat(
        "cannot resolve ", hp.host, ":", hp.port, ": ", ::gai_strerror(rc)));
  }
  return std::unique_ptr<addrinfo, AddrInfoDeleter>(result);
}

}  // namespace

absl::StatusOr<HostPort> ParseHostPort(absl::string_view address) {
  HostPort hp;
  absl::string_view port;
  if (!address.empty() && address.front() == '[') {
    const size_t close = address.find(']');
    if (close == absl::string_view::npos || close + 1 >= address.size() ||
        address[close + 1] != ':') {
      return absl::InvalidArgumentError(
          absl::StrCat("bad address '", address, "'"));
    }
    hp.host = std::string(address.substr(1, close - 1));
    port = address.substr(close + 2);
  } else {
    const size_t colon = address.rfind(':');
    if (colon == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("address '", address, "' has no port"));
    }
    hp.host = std::string(address.substr(0, colon));
    port = address.substr(colon + 1);
  }
  uint32_t value;
  if (!absl::SimpleAtoi(port, &value) || value > 65535) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad port in address '", address, "'"));
  }
  hp.port = static_cast<uint16_t>(value);
  return hp;
}

Socket::~Socket() { Close(); }

Socket::Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    Close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

absl::StatusOr<Socket> Socket::Connect(absl::string_view address,
                                       absl::Duration timeout) {
  RELAY_ASSIGN_OR_RETURN(HostPort hp, ParseHostPort(address));
  if (hp.host.empty()) hp.host = "127.0.0.1";
  RELAY_ASSIGN_OR_RETURN(auto info, Resolve(hp, false));
  absl::Status last = absl::UnavailableError(
      absl::StrCat("no usable address for ", address));
  for (addrinfo* ai = info.get(); ai != nullptr; ai = ai->ai_next) {
    Socket socket(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC,
                           ai->ai_protocol));
    if (!socket.valid()) {
      last = Errno("socket");
      continue;
    }
    const int flags = ::fcntl(socket.fd(), F_GETFL);
    ::fcntl(socket.fd(), F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(socket.fd(), ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      pollfd pfd{socket.fd(), POLLOUT, 0};
      const int ms = static_cast<int>(absl::ToInt64Milliseconds(timeout));
      rc = ::poll(&pfd, 1, ms);
      if (rc == 0) {
        last = absl::DeadlineExceededError(
            absl::StrCat("connect to ", address, " timed out"));
        continue;
      }
      int error = 0;
      socklen_t len = sizeof(error);
      ::getsockopt(socket.fd(), SOL_SOCKET, SO_ERROR, &error, &len);
      errno = error;
      rc = error == 0 ? 0 : -1;
    }
    if (rc != 0) {
      last = Errno(absl::StrCat("connect to ", address));
      continue;
    }
    ::fcntl(socket.fd(), F_SETFL, flags);
    SetNoDelay(socket.fd());
    return socket;
  }
  return last;
}

absl::Status Socket::SendAll(std::span<const uint8_t> bytes) {
  if (!valid()) return absl::FailedPreconditionError("socket is closed");
  size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n =
        ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return Errno("send");
    }
    sent += n;
  }
  return absl::OkStatus();
}

absl::Status Socket::Send(const Message& message) {
  return SendAll(EncodeFrame(message));
}

absl::Status Socket::ReadExact(uint8_t* out, size_t n) {
  size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd_, out + got, n - got, 0);
    if (r == 0) return absl::UnavailableError("connection closed by peer");
    if (r < 0) {
      if (errno == EINTR) continue;
      if (errno == EBADF || errno == EINVAL) {
        return absl::UnavailableError("connection shut down");
      }
      return Errno("recv");
    }
    got += r;
  }
  return absl::OkStatus();
}

absl::StatusOr<Message> Socket::Receive(size_t max_message_bytes) {
  if (!valid()) return absl::FailedPreconditionError("socket is closed");
  uint32_t length;
  RELAY_RETURN_IF_ERROR(
      ReadExact(reinterpret_cast<uint8_t*>(&length), sizeof(length)));
  if (length == 0) return absl::InvalidArgumentError("zero-length frame");
  if (length > max_message_bytes) {
    return absl::ResourceExhaustedError(
        absl::StrCat("frame of ", length, " bytes exceeds the limit of ",
                     max_message_bytes));
  }
  std::vector<uint8_t> body(length);
  RELAY_RETURN_IF_ERROR(ReadExact(body.data(), body.size()));
  return DecodeMessage(body);
}

absl::StatusOr<bool> Socket::WaitReadable(absl::Duration timeout) {
  if (!valid()) return absl::FailedPreconditionError("socket is closed");
  pollfd pfd{fd_, POLLIN | POLLRDHUP, 0};
  const int ms = timeout == absl::InfiniteDuration()
                     ? -1
                     : static_cast<int>(absl::ToInt64Milliseconds(timeout));
  while (true) {
    const int rc = ::poll(&pfd, 1, ms);
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) return Errno("poll");
    return rc > 0;
  }
}

bool Socket::PeerClosed() {
  if (!valid()) return true;
  pollfd pfd{fd_, POLLRDHUP, 0};
  if (::poll(&pfd, 1, 0) <= 0) return false;
  return (pfd.revents & (POLLRDHUP | POLLHUP | POLLERR | POLLNVAL)) != 0;
}

void Socket::Shutdown() {
  if (valid()) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::Close() {
  if (valid()) {
    ::close(fd_);
    fd_ = -1;
  }
}

Listener::~Listener() {
  if (fd_ >= 0) ::close(fd_);
}

Listener::Listener(Listener&& other) noexcept
    : fd_(other.fd_), port_(other.port_) {
  other.fd_ = -1;
}

Listener& Listener::operator=(Listener&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.fd_;
    port_ = other.port_;
    other.fd_ = -1;
  }
  return *this;
}

absl::StatusOr<Listener> Listener::Listen(absl::string_view address) {
  RELAY_ASSIGN_OR_RETURN(HostPort hp, ParseHostPort(address));
  RELAY_ASSIGN_OR_RETURN(auto info, Resolve(hp, true));
  absl::Status last = absl::UnavailableError(
      absl::StrCat("no usable address for ", address));
  for (addrinfo* ai = info.get(); ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC,
                            ai->ai_protocol);
    if (fd < 0) {
      last = Errno("socket");
      continue;
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) != 0 ||
        ::listen(fd, 1024) != 0) {
      last = Errno(absl::StrCat("bind/listen on ", address));
      ::close(fd);
      continue;
    }
    sockaddr_storage bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
    Listener listener;
    listener.fd_ = fd;
    listener.port_ = ntohs(bound.ss_family == AF_INET6
                               ? reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port
                               : reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
    return listener;
  }
  return last;
}

absl::StatusOr<Socket> Listener::Accept() {
  while (true) {
    const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd >= 0) {
      SetNoDelay(fd);
      return Socket(fd);
    }
    if (errno == EINTR || errno == ECONNABORTED) continue;
    if (errno == EINVAL || errno == EBADF) {
      return absl::CancelledError("listener shut down");
    }
    if (errno == EMFILE || errno == ENFILE) {
      return absl::ResourceExhaustedError("out of file descriptors");
    }
    return Errno("accept");
  }
}

void Listener::Shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

}  // namespace relay
