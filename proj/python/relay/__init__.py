# Copyright 2026 The Relay Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Experience replay server and clients."""

import json

from relay._relay import Client, Sampler, Server, Writer

__all__ = ["Client", "Sampler", "Server", "Writer", "start_server"]


def start_server(config, restore_from=None):
  """Starts an in-process server from a config dict or JSON string."""
  if not isinstance(config, str):
    config = json.dumps(config)
  return Server(config, restore_from)
