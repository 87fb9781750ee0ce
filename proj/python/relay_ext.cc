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


// Python bindings: an in-process server, writers, samplers and the unary
// client. Steps cross the boundary as nested dicts of numpy arrays.

#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pybind11/numpy.h"
#include "pybind11/pybind11.h"
#include "pybind11/stl.h"
#include "relay/client.h"
#include "relay/sampler.h"
#include "relay/server.h"
#include "relay/server_config.h"
#include "relay/tensor.h"
#include "relay/writer.h"

namespace py = pybind11;

namespace relay {
namespace {

[[noreturn]] void Raise(const absl::Status& status) {
  const std::string message = status.ToString();
  switch (status.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kFailedPrecondition:
      throw py::value_error(message);
    case absl::StatusCode::kNotFound:
      throw py::key_error(message);
    case absl::StatusCode::kDeadlineExceeded:
      PyErr_SetString(PyExc_TimeoutError, message.c_str());
      throw py::error_already_set();
    default:
      throw std::runtime_error(message);
  }
}

void Check(const absl::Status& status) {
  if (!status.ok()) Raise(status);
}

template <typename T>
T Unwrap(absl::StatusOr<T> value) {
  if (!value.ok()) Raise(value.status());
  return *std::move(value);
}

Dtype DtypeOfArray(const py::array& array) {
  const py::dtype dtype = array.dtype();
  const size_t width = dtype.itemsize();
  switch (dtype.kind()) {
    case 'f':
      if (width == 4) return Dtype::kFloat32;
      if (width == 8) return Dtype::kFloat64;
      break;
    case 'i':
      if (width == 1) return Dtype::kInt8;
      if (width == 2) return Dtype::kInt16;
      if (width == 4) return Dtype::kInt32;
      if (width == 8) return Dtype::kInt64;
      break;
    case 'u':
      if (width == 1) return Dtype::kUint8;
      if (width == 2) return Dtype::kUint16;
      if (width == 4) return Dtype::kUint32;
      if (width == 8) return Dtype::kUint64;
      break;
    case 'b':
      return Dtype::kBool;
  }
  throw py::type_error("unsupported array dtype " +
                       py::str(dtype).cast<std::string>());
}

Tensor ToTensor(const py::handle& value) {
  py::array array = py::array::ensure(value, py::array::c_style);
  if (!array) throw py::type_error("step leaves must be array-like");
  const Dtype dtype = DtypeOfArray(array);
  Shape shape(array.shape(), array.shape() + array.ndim());
  std::vector<uint8_t> bytes(array.nbytes());
  if (!bytes.empty()) std::memcpy(bytes.data(), array.data(), bytes.size());
  return Unwrap(Tensor::Create(dtype, std::move(shape), std::move(bytes)));
}

Step ToStep(const py::handle& value) {
  if (py::isinstance<py::dict>(value)) {
    std::vector<StepField> fields;
    for (auto [key, child] : py::reinterpret_borrow<py::dict>(value)) {
      fields.push_back({key.cast<std::string>(), ToStep(child)});
    }
    return Step(std::move(fields));
  }
  return Step(ToTensor(value));
}

py::array ToArray(const Tensor& tensor) {
  py::array array(py::dtype(std::string(DtypeName(tensor.dtype()))),
                  std::vector<py::ssize_t>(tensor.shape().begin(),
                                           tensor.shape().end()));
  if (tensor.byte_size() > 0) {
    std::memcpy(array.mutable_data(), tensor.bytes().data(),
                tensor.byte_size());
  }
  return array;
}

py::object FromStep(const Step& step) {
  if (step.is_leaf()) return ToArray(step.tensor());
  py::dict out;
  for (const StepField& field : step.fields()) {
    out[py::str(field.name)] = FromStep(field.value);
  }
  return out;
}

py::dict ItemDict(const Item& item) {
  py::dict out;
  out["key"] = item.key;
  out["priority"] = item.priority;
  out["times_sampled"] = item.times_sampled;
  out["offset"] = item.offset;
  out["length"] = item.length;
  return out;
}

py::dict SampleDict(const Sample& sample) {
  py::dict out;
  out["info"] = ItemDict(sample.item);
  out["probability"] = sample.probability;
  out["table_size"] = sample.table_size;
  out["endpoint"] = sample.endpoint;
  py::list steps;
  for (const Step& step : sample.steps) steps.append(FromStep(step));
  out["steps"] = steps;
  return out;
}

py::dict TableInfoDict(const TableInfo& info) {
  py::dict out;
  out["name"] = info.config.name;
  out["size"] = info.size;
  out["max_size"] = info.config.max_size;
  out["inserts"] = info.counters.inserts;
  out["samples"] = info.counters.samples;
  out["deletes"] = info.counters.deletes;
  out["diff"] = info.diff;
  out["sampler"] = info.config.sampler.DebugString();
  out["remover"] = info.config.remover.DebugString();
  out["rate_limiter"] = info.config.rate_limiter.DebugString();
  return out;
}

std::unique_ptr<Server> StartServer(const std::string& config_json,
                                    std::optional<std::string> restore_from) {
  ServerConfig config = Unwrap(ParseServerConfig(config_json));
  py::gil_scoped_release release;
  return Unwrap(Server::Start(std::move(config), std::move(restore_from)));
}

}  // namespace
}  // namespace relay

PYBIND11_MODULE(_relay, m) {
  using namespace relay;
  m.doc() = "Experience replay server and clients";

  py::class_<Server>(m, "Server")
      .def(py::init(&StartServer), py::arg("config_json"),
           py::arg("restore_from") = std::nullopt)
      .def_property_readonly("address", &Server::address)
      .def_property_readonly("port", &Server::port)
      .def("checkpoint",
           [](Server& self) {
             CheckpointInfo info;
             {
               py::gil_scoped_release release;
               info = Unwrap(self.Checkpoint());
             }
             return py::make_tuple(info.id, info.path);
           })
      .def("table_info",
           [](Server& self) {
             py::list out;
             for (Table* table : self.tables()) {
               out.append(TableInfoDict(table->info()));
             }
             return out;
           })
      .def("stop", &Server::Stop, py::call_guard<py::gil_scoped_release>());

  py::class_<Writer>(m, "Writer")
      .def(py::init([](const std::string& endpoint, int chunk_length,
                       int max_sequence_length) {
             WriterOptions options;
             options.chunk_length = chunk_length;
             options.max_sequence_length = max_sequence_length;
             py::gil_scoped_release release;
             return Unwrap(Writer::Open(endpoint, options));
           }),
           py::arg("endpoint"), py::arg("chunk_length") = 1,
           py::arg("max_sequence_length") = 1)
      .def("append",
           [](Writer& self, const py::object& step) {
             Step converted = ToStep(step);
             py::gil_scoped_release release;
             Check(self.Append(converted));
           })
      .def(
          "create_item",
          [](Writer& self, const std::string& table, int num_timesteps,
             double priority) {
            py::gil_scoped_release release;
            Check(self.CreateItem(table, num_timesteps, priority));
          },
          py::arg("table"), py::arg("num_timesteps"), py::arg("priority"))
      .def(
          "flush",
          [](Writer& self, std::optional<double> timeout_s) {
            py::gil_scoped_release release;
            Check(self.Flush(timeout_s ? absl::Seconds(*timeout_s)
                                       : absl::InfiniteDuration()));
          },
          py::arg("timeout_s") = std::nullopt)
      .def("close",
           [](Writer& self) {
             py::gil_scoped_release release;
             Check(self.Close());
           })
      .def_property_readonly("items_confirmed", &Writer::items_confirmed)
      .def_property_readonly("confirmed_keys", &Writer::confirmed_keys)
      .def("__enter__", [](Writer& self) -> Writer& { return self; },
           py::return_value_policy::reference)
      .def("__exit__", [](Writer& self, py::args) {
        py::gil_scoped_release release;
        Check(self.Close());
      });

  py::class_<Sampler>(m, "Sampler")
      .def(py::init([](std::vector<std::string> endpoints,
                       const std::string& table, int max_in_flight,
                       int num_workers, int64_t timeout_ms,
                       int64_t num_samples, uint64_t seed) {
             SamplerOptions options;
             options.table = table;
             options.max_in_flight_samples_per_worker = max_in_flight;
             options.num_workers = num_workers;
             options.timeout_ms = timeout_ms;
             options.num_samples_per_worker = num_samples;
             options.seed = seed;
             py::gil_scoped_release release;
             return Unwrap(Sampler::Open(std::move(endpoints), options));
           }),
           py::arg("endpoints"), py::arg("table"), py::arg("max_in_flight") = 1,
           py::arg("num_workers") = 1, py::arg("timeout_ms") = -1,
           py::arg("num_samples") = -1, py::arg("seed") = 0)
      .def(
          "next",
          [](Sampler& self, std::optional<double> timeout_s) -> py::object {
            absl::StatusOr<std::optional<Sample>> sample;
            {
              py::gil_scoped_release release;
              std::optional<absl::Duration> timeout;
              if (timeout_s) timeout = absl::Seconds(*timeout_s);
              sample = self.Next(timeout);
            }
            if (!sample.ok()) Raise(sample.status());
            if (!sample->has_value()) return py::none();
            return SampleDict(**sample);
          },
          py::arg("timeout_s") = std::nullopt,
          "Next sample as a dict, or None at end of data.")
      .def("close", &Sampler::Close, py::call_guard<py::gil_scoped_release>())
      .def("__iter__", [](Sampler& self) -> Sampler& { return self; },
           py::return_value_policy::reference)
      .def("__next__", [](Sampler& self) -> py::object {
        absl::StatusOr<std::optional<Sample>> sample;
        {
          py::gil_scoped_release release;
          sample = self.Next();
        }
        if (!sample.ok()) Raise(sample.status());
        if (!sample->has_value()) throw py::stop_iteration();
        return SampleDict(**sample);
      });

  py::class_<Client>(m, "Client")
      .def(py::init<std::string>(), py::arg("endpoint"))
      .def_property_readonly("endpoint", &Client::endpoint)
      .def("update_priorities",
           [](Client& self, const std::string& table,
              const std::vector<std::pair<ItemKey, double>>& updates) {
             py::gil_scoped_release release;
             return Unwrap(self.UpdatePriorities(table, updates));
           })
      .def("checkpoint",
           [](Client& self) {
             CheckpointInfo info;
             {
               py::gil_scoped_release release;
               info = Unwrap(self.Checkpoint());
             }
             return py::make_tuple(info.id, info.path);
           })
      .def("server_info", [](Client& self) {
        std::vector<TableInfo> infos;
        {
          py::gil_scoped_release release;
          infos = Unwrap(self.ServerInfo());
        }
        py::list out;
        for (const TableInfo& info : infos) out.append(TableInfoDict(info));
        return out;
      });
}
