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

#ifndef SLICERANK_PROVIDERS_H_
#define SLICERANK_PROVIDERS_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "slicerank/embedding.h"
#include "slicerank/templates.h"

namespace slicerank {

enum class ProviderKind { kOfflineStub, kRemote };

// One text or embedding backend. Remote providers speak the OpenAI-compatible
// /v1/chat/completions and /v1/embeddings endpoints.
struct ProviderConfig {
  ProviderKind kind = ProviderKind::kOfflineStub;
  std::string name = "stub";
  // Remote only.
  std::string endpoint;     // e.g. "https://api.openai.com"
  std::string api_key_env;  // environment variable holding the bearer token
  std::string model;
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
  int max_in_flight = 4;
  // Stub only.
  uint64_t seed = 0;
  int dimension = 64;
  // When set, the stub returns this text for every completion.
  std::optional<std::string> fixed_output;

  // Throws ValidationError: an offline stub must not carry endpoint or
  // credential fields, a remote one needs endpoint and model.
  void Validate() const;
};

ProviderConfig ProviderConfigFromJson(const nlohmann::json& j);
nlohmann::json ProviderConfigToJson(const ProviderConfig& config);

// The providers config file: {"label": {...}, "embedding": {...},
// "panel": [{...}, ...]}. Every key is optional; missing entries default to
// offline stubs.
struct ProvidersFile {
  ProviderConfig label;
  ProviderConfig embedding;
  std::vector<ProviderConfig> panel;
};
ProvidersFile LoadProvidersFile(const std::filesystem::path& path);

// Thread-safe. Complete() receives the template id, the rendered prompt and
// the variables used to render it; remote providers send only the rendered
// prompt, the stub derives a deterministic answer from the variables.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual const std::string& name() const = 0;
  // Throws ProviderError after exhausting retries.
  virtual std::string Complete(const std::string& template_id, const std::string& prompt,
                               const TemplateVars& vars) = 0;
  // Unit-norm rows, one per text. Throws ProviderError.
  virtual EmbeddingMatrix Embed(const std::vector<std::string>& texts) = 0;

  // Completions plus embedding batches issued so far.
  size_t call_count() const { return calls_.load(); }

 protected:
  void CountCall() { ++calls_; }

 private:
  std::atomic<size_t> calls_{0};
};

// Validates `config` and builds the matching provider.
std::unique_ptr<Provider> MakeProvider(const ProviderConfig& config);
std::unique_ptr<Provider> MakeRemoteProvider(const ProviderConfig& config);

// Deterministic offline provider. Embedding is a seeded random projection of
// token-hash counts; completions are shaped like the JSON a remote model is
// asked for, so the same parsers handle both.
class StubProvider : public Provider {
 public:
  explicit StubProvider(ProviderConfig config);

  const std::string& name() const override { return config_.name; }
  std::string Complete(const std::string& template_id, const std::string& prompt,
                       const TemplateVars& vars) override;
  EmbeddingMatrix Embed(const std::vector<std::string>& texts) override;

  // Stable summary of a prompt: its most frequent tokens (ties alphabetical),
  // at most `max_tokens`, joined by spaces. Throws ProviderError when the text
  // has no content.
  static std::string TokenDigest(std::string_view text, size_t max_tokens = 12);

 private:
  ProviderConfig config_;
};

// Rendered prompt plus any output-format instructions the task needs for
// machine parsing. Throws NotFoundError for an unknown template.
std::string RenderTaskPrompt(const std::string& template_id, const TemplateVars& vars);

// The first balanced JSON value ({...} or [...]) embedded in `text`, e.g.
// inside a fenced code block. Throws ProviderError when none parses.
nlohmann::json ExtractJson(std::string_view text);

}  // namespace slicerank

#endif  // SLICERANK_PROVIDERS_H_
