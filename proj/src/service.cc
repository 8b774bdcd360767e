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

#include "slicerank/service.h"

#include <charconv>
#include <chrono>
#include <ctime>

#include "httplib.h"
#include "slicerank/error.h"

namespace slicerank {

using json = nlohmann::json;

namespace {

std::string UtcNow() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Percent-decoding; '+' is a space only in query strings.
std::optional<std::string> Decode(std::string_view s, bool query) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%') {
      if (i + 2 >= s.size()) return std::nullopt;
      const int hi = HexValue(s[i + 1]);
      const int lo = HexValue(s[i + 2]);
      if (hi < 0 || lo < 0) return std::nullopt;
      out += static_cast<char>(hi * 16 + lo);
      i += 2;
    } else if (query && s[i] == '+') {
      out += ' ';
    } else {
      out += s[i];
    }
  }
  return out;
}

struct Route {
  std::vector<std::string> segments;
  std::map<std::string, std::string> query;
};

std::optional<Route> ParseTarget(std::string_view target) {
  Route r;
  const auto qpos = target.find('?');
  std::string_view path = target.substr(0, qpos);
  size_t start = 0;
  while (start <= path.size()) {
    const auto end = path.find('/', start);
    const auto piece = path.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (!piece.empty()) {
      auto d = Decode(piece, false);
      if (!d) return std::nullopt;
      r.segments.push_back(std::move(*d));
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  if (qpos != std::string_view::npos) {
    std::string_view q = target.substr(qpos + 1);
    while (!q.empty()) {
      const auto amp = q.find('&');
      const auto pair = q.substr(0, amp);
      const auto eq = pair.find('=');
      auto key = Decode(pair.substr(0, eq), true);
      auto value = Decode(eq == std::string_view::npos ? std::string_view() : pair.substr(eq + 1), true);
      if (!key || !value) return std::nullopt;
      if (!key->empty()) r.query[*key] = *value;
      if (amp == std::string_view::npos) break;
      q = q.substr(amp + 1);
    }
  }
  return r;
}

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& message, json detail = nullptr)
      : std::runtime_error(message), status(status), detail(std::move(detail)) {}
  int status;
  json detail;
};

size_t LimitParam(const Route& r, const ServiceConfig& config) {
  auto it = r.query.find("limit");
  if (it == r.query.end()) return config.default_limit;
  size_t v = 0;
  const auto& s = it->second;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw HttpError(400, "limit must be a non-negative integer");
  }
  if (v > config.max_limit) throw HttpError(400, "limit must be at most " + std::to_string(config.max_limit));
  return v;
}

json NodeJson(const SliceEngine& engine, const std::string& id) {
  const auto& h = engine.hierarchy();
  const auto& node = h.At(id);
  json children = json::array();
  for (const auto& c : h.Children(id)) children.push_back(NodeJson(engine, c));
  return {{"id", node.id},
          {"level", LevelName(node.level)},
          {"label", node.label},
          {"description", node.description},
          {"keywords", node.keywords},
          {"prompt_count", engine.PromptCount(id)},
          {"judgment_count", engine.JudgmentCount(id)},
          {"children", std::move(children)}};
}

json StripJson(const StripPosition& p) {
  return {{"node", p.node},
          {"label", p.label},
          {"rank", p.rank ? json(*p.rank) : json(nullptr)},
          {"models_ranked", p.models_ranked},
          {"smoothed_rate", p.smoothed_rate ? json(*p.smoothed_rate) : json(nullptr)}};
}

HttpResponse JsonResponse(int status, json body) {
  HttpResponse r;
  r.status = status;
  r.body = body.dump();
  r.headers["Content-Type"] = "application/json";
  return r;
}

}  // namespace

json Snapshot::DigestsJson() const {
  return {{"dataset_digest", dataset_digest()}, {"hierarchy_digest", hierarchy_digest()}};
}

std::shared_ptr<const Snapshot> MakeSnapshot(Dataset dataset, TopicHierarchy hierarchy) {
  auto s = std::make_shared<Snapshot>();
  s->dataset = std::make_shared<const Dataset>(std::move(dataset));
  s->hierarchy = std::make_shared<const TopicHierarchy>(std::move(hierarchy));
  s->engine = std::make_shared<const SliceEngine>(s->dataset, s->hierarchy);
  s->built_at = UtcNow();
  return s;
}

std::shared_ptr<const Snapshot> LoadSnapshot(const std::filesystem::path& data,
                                             const std::filesystem::path& hierarchy) {
  auto ingest = Ingest(data);
  return MakeSnapshot(std::move(ingest.dataset), LoadHierarchy(hierarchy));
}

json HierarchyTreeJson(const SliceEngine& engine) {
  json roots = json::array();
  size_t assigned = 0;
  for (const auto& id : engine.hierarchy().NodesAtLevel(Level::kTop)) {
    roots.push_back(NodeJson(engine, id));
    assigned += engine.PromptCount(id);
  }
  const size_t total = engine.dataset().prompts().size();
  return {{"schema_version", 1},
          {"roots", std::move(roots)},
          {"total_prompts", total},
          {"assigned_prompts", assigned},
          {"unassigned_prompts", total - assigned}};
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  if (config_.max_limit < config_.default_limit) throw ValidationError("max_limit below default_limit");
}

void Service::Swap(std::shared_ptr<const Snapshot> snapshot) {
  std::lock_guard<std::mutex> lock(mu_);
  snapshot_ = std::move(snapshot);
}

std::shared_ptr<const Snapshot> Service::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return snapshot_;
}

HttpResponse Service::Handle(const HttpRequest& request) const {
  // One snapshot per request, even if a swap lands mid-request.
  const auto snap = snapshot();
  HttpResponse response;
  auto finish = [&](HttpResponse r) {
    if (!config_.cors_origin.empty()) {
      r.headers["Access-Control-Allow-Origin"] = config_.cors_origin;
      r.headers["Vary"] = "Origin";
    }
    return r;
  };
  auto with_snapshot = [&](json body) {
    body["snapshot"] = snap->DigestsJson();
    return body;
  };

  if (request.method == "OPTIONS") {
    HttpResponse r;
    r.status = 204;
    r.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS";
    r.headers["Access-Control-Allow-Headers"] = "Content-Type";
    r.headers["Access-Control-Max-Age"] = "600";
    return finish(r);
  }

  try {
    const auto route = ParseTarget(request.target);
    if (!route) throw HttpError(400, "malformed percent-encoding in request target");
    const auto& s = route->segments;
    if (s.size() < 3 || s[0] != "api" || s[1] != "v1") throw HttpError(404, "no such endpoint");
    auto require = [&](const char* method) {
      if (request.method != method) {
        throw HttpError(405, std::string("use ") + method, json{{"allow", method}});
      }
    };
    if (!snap) {
      auto r = JsonResponse(503, {{"error", "snapshot not loaded"}, {"status", "loading"}, {"retry_after_s", 5}});
      r.headers["Retry-After"] = "5";
      return finish(r);
    }
    const SliceEngine& engine = *snap->engine;

    if (s.size() == 3 && s[2] == "health") {
      require("GET");
      return finish(JsonResponse(200, with_snapshot({{"status", "ok"},
                                                     {"models", engine.models().size()},
                                                     {"judgments", snap->dataset->size()}})));
    }
    if (s.size() == 3 && s[2] == "hierarchy") {
      require("GET");
      return finish(JsonResponse(200, with_snapshot(HierarchyTreeJson(engine))));
    }
    if (s.size() == 5 && s[2] == "categories" && s[4] == "examples") {
      require("GET");
      const auto& node = s[3];
      if (node != kAllNode && !snap->hierarchy->Find(node)) throw HttpError(404, "unknown node '" + node + "'");
      const size_t limit = LimitParam(*route, config_);
      json examples = json::array();
      for (const auto& [id, text] : engine.CategoryExamples(node, limit, config_.example_seed)) {
        examples.push_back({{"prompt_id", id}, {"text", text}});
      }
      return finish(JsonResponse(
          200, with_snapshot({{"schema_version", 1}, {"node", node}, {"limit", limit}, {"examples", examples}})));
    }
    if (s.size() == 3 && s[2] == "rankings") {
      require("POST");
      json body;
      try {
        body = json::parse(request.body);
      } catch (const json::parse_error& e) {
        throw HttpError(400, std::string("request body is not JSON: ") + e.what());
      }
      const auto parsed = ParseSliceSpec(body, *snap->hierarchy);
      if (!parsed.spec) {
        json fields = json::array();
        for (const auto& e : parsed.errors) fields.push_back({{"field", e.field}, {"message", e.message}});
        throw HttpError(422, "invalid slice spec", fields);
      }
      try {
        auto table = engine.WeightedRanking(*parsed.spec, config_.smoothing, config_.missing);
        return finish(JsonResponse(200, with_snapshot(RankingTableToJson(table))));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kValidation) throw;
        throw HttpError(422, e.what());
      }
    }
    if (s.size() == 6 && s[2] == "cells" && s[5] == "examples") {
      require("GET");
      const auto& model = s[3];
      const auto& node = s[4];
      auto fit = route->query.find("filter");
      const std::string filter_name = fit == route->query.end() ? "all" : fit->second;
      const auto filter = ParseCellFilter(filter_name);
      if (!filter) throw HttpError(400, "filter must be wins, losses, ties or all");
      const size_t limit = LimitParam(*route, config_);
      if (!engine.HasModel(model)) throw HttpError(404, "unknown model '" + model + "'");
      if (node != kAllNode && !snap->hierarchy->Find(node)) throw HttpError(404, "unknown node '" + node + "'");
      json examples = json::array();
      for (const auto& v : engine.CellExamples(model, node, *filter, limit)) examples.push_back(JudgmentViewToJson(v));
      return finish(JsonResponse(200, with_snapshot({{"schema_version", 1},
                                                     {"model", model},
                                                     {"node", node},
                                                     {"filter", filter_name},
                                                     {"limit", limit},
                                                     {"counts", SliceStatsToJson(engine.StatsFor(model, node, config_.smoothing))},
                                                     {"examples", examples}})));
    }
    if (s.size() == 5 && s[2] == "models" && s[4] == "strips") {
      require("GET");
      const auto& model = s[3];
      auto lit = route->query.find("level");
      const std::string level_name = lit == route->query.end() ? "mid" : lit->second;
      const auto level = ParseLevel(level_name);
      if (!level) throw HttpError(400, "level must be top, mid or fine");
      if (!engine.HasModel(model)) throw HttpError(404, "unknown model '" + model + "'");
      json positions = json::array();
      for (const auto& p : engine.StripPositions(model, *level, config_.smoothing)) positions.push_back(StripJson(p));
      return finish(JsonResponse(200, with_snapshot({{"schema_version", 1},
                                                     {"model", model},
                                                     {"level", LevelName(*level)},
                                                     {"positions", positions}})));
    }
    throw HttpError(404, "no such endpoint");
  } catch (const HttpError& e) {
    json body = {{"error", e.what()}};
    if (e.status == 422 && e.detail.is_array()) body["fields"] = e.detail;
    if (e.status == 405) body["allow"] = e.detail["allow"];
    if (snap) body["snapshot"] = snap->DigestsJson();
    auto r = JsonResponse(e.status, body);
    if (e.status == 405) r.headers["Allow"] = e.detail["allow"].get<std::string>();
    return finish(r);
  } catch (const Error& e) {
    const int status = e.kind() == ErrorKind::kNotFound ? 404 : e.kind() == ErrorKind::kValidation ? 422 : 500;
    json body = {{"error", e.what()}};
    if (snap) body["snapshot"] = snap->DigestsJson();
    return finish(JsonResponse(status, body));
  }
}

// ---------------------------------------------------------------------------

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  Install();
}

HttpServer::~HttpServer() { Stop(); }

void HttpServer::Install() {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const auto out = service_.Handle({req.method, req.target, req.body});
    res.status = out.status;
    std::string type = "application/json";
    for (const auto& [k, v] : out.headers) {
      if (k == "Content-Type") {
        type = v;
      } else {
        res.set_header(k, v);
      }
    }
    if (!out.body.empty()) res.set_content(out.body, type);
  };
  server_->Get(".*", handler);
  server_->Post(".*", handler);
  server_->Options(".*", handler);
  server_->Put(".*", handler);
  server_->Delete(".*", handler);
  server_->Patch(".*", handler);
}

int HttpServer::Start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  port_ = bound;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void HttpServer::Listen(const std::string& host, int port) {
  if (!server_->bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  port_ = port;
  server_->listen_after_bind();
}

void HttpServer::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::pair<std::string, int> ParseBindAddress(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos || colon == 0) throw ValidationError("bind address must be host:port, got '" + bind + "'");
  const std::string host = bind.substr(0, colon);
  const std::string port_text = bind.substr(colon + 1);
  int port = -1;
  auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || p != port_text.data() + port_text.size() || port < 0 || port > 65535) {
    throw ValidationError("invalid port in bind address '" + bind + "'");
  }
  return {host, port};
}

}  // namespace slicerank
