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

// Runs a server from a JSON config until SIGINT or SIGTERM.
//
//   relay_server --config server.json [--restore <checkpoint file or dir>]

#include <csignal>
#include <cstdio>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "relay/server.h"
#include "relay/server_config.h"

int main(int argc, char** argv) {
  CLI::App app{"relay replay server"};
  std::string config_path;
  std::string restore;
  app.add_option("--config", config_path, "server config (JSON)")->required();
  app.add_option("--restore", restore,
                 "checkpoint file, or directory whose newest checkpoint is "
                 "loaded");
  CLI11_PARSE(app, argc, argv);

  auto config = relay::LoadServerConfig(config_path);
  if (!config.ok()) {
    std::fprintf(stderr, "%s\n", config.status().ToString().c_str());
    return 2;
  }

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::optional<std::string> restore_from;
  if (!restore.empty()) restore_from = restore;
  auto server = relay::Server::Start(*std::move(config), restore_from);
  if (!server.ok()) {
    std::fprintf(stderr, "%s\n", server.status().ToString().c_str());
    return 1;
  }
  std::printf("listening on port %u\n", (*server)->port());
  for (relay::Table* table : (*server)->tables()) {
    std::printf("  table %s (%lld items)\n", table->name().c_str(),
                static_cast<long long>(table->size()));
  }
  std::fflush(stdout);

  int received = 0;
  sigwait(&signals, &received);
  std::printf("signal %d, shutting down\n", received);
  (*server)->Stop();
  return 0;
}
