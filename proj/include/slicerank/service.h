// Copyright 2026 The SliceRank Authors.
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

#ifndef SLICERANK_SERVICE_H_
#define SLICERANK_SERVICE_H_

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "slicerank/dataset.h"
#include "slicerank/hierarchy.h"
#include "slicerank/slice_engine.h"

namespace httplib {
class Server;
}

namespace slicerank {

// Immutable (dataset, hierarchy) pairing with precomputed counts.
struct Snapshot {
  std::shared_ptr<const Dataset> dataset;
  std::shared_ptr<const TopicHierarchy> hierarchy;
  std::shared_ptr<const SliceEngine> engine;
  std::string built_at;  // UTC, ISO-8601; logged, never echoed in responses

  const std::string& dataset_digest() const { return dataset->source_digest(); }
  const std::string& hierarchy_digest() const { return hierarchy->digest(); }
  nlohmann::json DigestsJson() const;
};

std::shared_ptr<const Snapshot> MakeSnapshot(Dataset dataset, TopicHierarchy hierarchy);
// Throws IoError / ValidationError from ingest and hierarchy loading.
std::shared_ptr<const Snapshot> LoadSnapshot(const std::filesystem::path& data,
                                             const std::filesystem::path& hierarchy);

struct ServiceConfig {
  SmoothingPolicy smoothing;
  MissingSlicePolicy missing = MissingSlicePolicy::kDropAndRenormalize;
  // Sent as Access-Control-Allow-Origin when non-empty.
  std::string cors_origin;
  size_t default_limit = 10;
  size_t max_limit = 200;
  uint64_t example_seed = 0;
};

struct HttpRequest {
  std::string method;
  std::string target;  // raw path plus optional query, percent-encoded
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;
};

// Request handling is a pure function of (config, snapshot, request). The
// snapshot can be swapped atomically while requests are in flight.
class Service {
 public:
  explicit Service(ServiceConfig config = {});

  void Swap(std::shared_ptr<const Snapshot> snapshot);
  std::shared_ptr<const Snapshot> snapshot() const;
  const ServiceConfig& config() const { return config_; }

  HttpResponse Handle(const HttpRequest& request) const;

 private:
  ServiceConfig config_;
  mutable std::mutex mu_;
  std::shared_ptr<const Snapshot> snapshot_;
};

// Hierarchy tree payload with per-node prompt and judgment counts.
nlohmann::json HierarchyTreeJson(const SliceEngine& engine);

// Binds a Service to an HTTP listener on a background thread.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Throws IoError when binding fails.
  int Start(const std::string& host, int port);
  // Blocks until Stop() from another thread.
  void Listen(const std::string& host, int port);
  void Stop();
  int port() const { return port_; }

 private:
  void Install();

  Service& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

// Splits "host:port". Throws ValidationError.
std::pair<std::string, int> ParseBindAddress(const std::string& bind);

}  // namespace slicerank

#endif  // SLICERANK_SERVICE_H_
