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

import time

import numpy as np
import pytest

import relay


def make_server(tmp_path=None, restore_from=None):
  config = {
      "tables": [
          {
              "name": "queue",
              "sampler": {"type": "fifo"},
              "remover": {"type": "fifo"},
              "max_times_sampled": 1,
              "rate_limiter": {"type": "queue", "queue_size": 100},
          },
          {
              "name": "uniform",
              "sampler": {"type": "uniform"},
              "remover": {"type": "fifo"},
              "max_size": 100,
              "rate_limiter": {"type": "min_size", "min_size": 1},
          },
      ]
  }
  if tmp_path is not None:
    config["checkpoint_dir"] = str(tmp_path)
  return relay.start_server(config, restore_from)


def step(i):
  return {
      "obs": np.full((3, 2), i, dtype=np.float32),
      "action": np.int64(i),
      "extra": {"done": np.array(i % 2 == 0)},
  }


def test_round_trip_preserves_steps():
  server = make_server()
  with relay.Writer(server.address, chunk_length=2,
                    max_sequence_length=3) as writer:
    for i in range(6):
      writer.append(step(i))
      if i >= 2:
        writer.create_item("queue", 3, 1.0)
  sampler = relay.Sampler([server.address], "queue", num_samples=4)
  samples = list(sampler)
  assert len(samples) == 4
  for n, sample in enumerate(samples):
    assert sample["info"]["length"] == 3
    for t, got in enumerate(sample["steps"]):
      want = step(n + t)
      assert got["obs"].dtype == np.float32
      np.testing.assert_array_equal(got["obs"], want["obs"])
      assert got["action"].shape == ()
      assert int(got["action"]) == n + t
      assert bool(got["extra"]["done"]) == ((n + t) % 2 == 0)
  server.stop()


def test_timeout_returns_none():
  server = make_server()
  sampler = relay.Sampler([server.address], "uniform", timeout_ms=100)
  start = time.monotonic()
  assert sampler.next() is None
  assert 0.1 <= time.monotonic() - start < 0.5
  server.stop()


def test_errors_map_to_python_exceptions():
  server = make_server()
  with pytest.raises(KeyError):
    relay.Sampler([server.address], "missing").next()
  writer = relay.Writer(server.address)
  writer.append(step(0))
  with pytest.raises(ValueError):
    writer.append({"obs": np.zeros(4, dtype=np.int8)})
  server.stop()


def test_client_calls(tmp_path):
  server = make_server(tmp_path)
  writer = relay.Writer(server.address)
  writer.append(step(1))
  writer.create_item("uniform", 1, 2.0)
  writer.flush()
  key = writer.confirmed_keys[0]
  client = relay.Client(server.address)
  assert client.update_priorities("uniform", [(key, 5.0)]) == 1
  info = {t["name"]: t for t in client.server_info()}
  assert info["uniform"]["size"] == 1
  assert info["uniform"]["inserts"] == 1
  checkpoint_id, path = client.checkpoint()
  assert checkpoint_id
  server.stop()
  # Tables come from the checkpoint, not from the config.
  restored = make_server(tmp_path, restore_from=path)
  sample = relay.Sampler([restored.address], "uniform").next()
  assert sample["info"]["priority"] == 5.0
  restored.stop()
