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

// Remote provider over OpenAI-compatible HTTP endpoints.

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

#include "slicerank/error.h"
#include "slicerank/providers.h"

namespace slicerank {

namespace {

using nlohmann::json;

constexpr size_t kEmbedBatch = 64;

class RemoteProvider : public Provider {
 public:
  explicit RemoteProvider(ProviderConfig config) : config_(std::move(config)) {
    // Split "https://host:port/base" into origin and path prefix.
    const size_t scheme = config_.endpoint.find("://");
    const size_t slash =
        config_.endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    origin_ = config_.endpoint.substr(0, slash);
    if (slash != std::string::npos) base_path_ = config_.endpoint.substr(slash);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  }

  const std::string& name() const override { return config_.name; }

  std::string Complete(const std::string& /*template_id*/, const std::string& prompt,
                       const TemplateVars& /*vars*/) override {
    json body = {{"model", config_.model},
                 {"temperature", 0},
                 {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
    json reply = Post("/v1/chat/completions", body);
    try {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
      throw ProviderError(config_.name + ": completion response lacks choices[0].message.content");
    }
  }

  EmbeddingMatrix Embed(const std::vector<std::string>& texts) override {
    EmbeddingMatrix out;
    size_t dim = 0;
    for (size_t begin = 0; begin < texts.size(); begin += kEmbedBatch) {
      const size_t end = std::min(texts.size(), begin + kEmbedBatch);
      json input = json::array();
      for (size_t i = begin; i < end; ++i) input.push_back(texts[i]);
      json reply = Post("/v1/embeddings", {{"model", config_.model}, {"input", input}});
      if (!reply.contains("data") || !reply["data"].is_array() ||
          reply["data"].size() != end - begin) {
        throw ProviderError(config_.name + ": embedding response has wrong row count");
      }
      for (const auto& item : reply["data"]) {
        const size_t index = begin + item.value("index", size_t{0});
        const auto& vec = item.at("embedding");
        if (index >= end) throw ProviderError(config_.name + ": embedding index out of range");
        if (dim == 0) {
          dim = vec.size();
          if (dim == 0) throw ProviderError(config_.name + ": empty embedding");
          out = EmbeddingMatrix(texts.size(), dim);
        } else if (vec.size() != dim) {
          throw ProviderError(config_.name + ": embedding dimension changed from " +
                              std::to_string(dim) + " to " + std::to_string(vec.size()));
        }
        auto row = out.row(index);
        for (size_t d = 0; d < dim; ++d) row[d] = vec[d].get<double>();
        if (!NormalizeInPlace(row)) throw ProviderError(config_.name + ": zero embedding");
      }
    }
    return out;
  }

 private:
  json Post(const std::string& path, const json& body) {
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
      const char* key = std::getenv(config_.api_key_env.c_str());
      if (key == nullptr || *key == '\0') {
        throw ProviderError(config_.name + ": environment variable " + config_.api_key_env +
                            " is not set");
      }
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 << (attempt - 1)));
      CountCall();
      httplib::Client client(origin_);
      client.set_connection_timeout(seconds.count(), micros.count());
      client.set_read_timeout(seconds.count(), micros.count());
      client.set_write_timeout(seconds.count(), micros.count());
      auto res = client.Post(base_path_ + path, headers, body.dump(), "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 200) {
        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded()) throw ProviderError(config_.name + ": response is not JSON");
        return parsed;
      }
      last_error = "HTTP " + std::to_string(res->status);
      // Client errors other than rate limiting will not improve on retry.
      if (res->status >= 400 && res->status < 500 && res->status != 429) break;
    }
    throw ProviderError(config_.name + ": " + path + " failed: " + last_error);
  }

  ProviderConfig config_;
  std::string origin_;
  std::string base_path_;
};

}  // namespace

std::unique_ptr<Provider> MakeRemoteProvider(const ProviderConfig& config) {
  config.Validate();
  if (config.kind != ProviderKind::kRemote) throw ValidationError("not a remote provider config");
  return std::make_unique<RemoteProvider>(config);
}

}  // namespace slicerank
