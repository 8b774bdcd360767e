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

#include "slicerank/providers.h"

#include <httplib.h>

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "slicerank/error.h"
#include "slicerank/templates.h"

namespace slicerank {
namespace {

using nlohmann::json;

TEST(Templates, AllTasksPresentWithPlaceholders) {
  const std::map<std::string, std::set<std::string>> expected = {
      {"cluster_label", {"in_example_list", "out_example_list"}},
      {"higher_level_grouping", {"child_cluster_list", "cluster_count"}},
      {"math_correctness", {"model_a_response", "model_b_response", "prompt"}},
      {"math_deterministic_filter", {"prompt"}},
      {"pluralism_label", {"model_a_response", "model_b_response", "prompt"}},
      {"politics_category", {"model_a_response", "model_b_response", "prompt"}},
      {"style_discovery", {"sample_list"}},
      {"style_tagging", {"model_a_response", "model_b_response", "prompt"}},
      {"topic_description", {"prompt"}},
      {"win_rationale", {"loser_response", "prompt", "winner_response"}},
  };
  std::vector<std::string> ids;
  for (const auto& [id, names] : expected) ids.push_back(id);
  EXPECT_EQ(TemplateIds(), ids);
  for (const auto& [id, names] : expected) {
    EXPECT_EQ(Placeholders(TemplateText(id)), names) << id;
  }
  EXPECT_THROW(TemplateText("nope"), Error);
}

TEST(Templates, RenderSubstitutesAndKeepsJsonBraces) {
  const std::string out = RenderTemplate("{\n  \"k\": {x}\n} {y}", {{"x", "1"}, {"y", "{x}"}});
  EXPECT_EQ(out, "{\n  \"k\": 1\n} {x}");
  EXPECT_THROW(RenderTemplate("a {missing} b", {}), Error);
  const std::string tagging = RenderTemplate(TemplateText("style_tagging"),
                                             {{"prompt", "P"}, {"model_a_response", "RA"},
                                              {"model_b_response", "RB"}});
  EXPECT_NE(tagging.find("\"conciseness\": \"model_a\""), std::string::npos);
  EXPECT_NE(tagging.find("Model B's Response: RB"), std::string::npos);
}

TEST(Templates, TaskPromptAppendsFormatOnlyWhereNeeded) {
  const TemplateVars vars = {{"prompt", "2+2?"}};
  const std::string filter = RenderTaskPrompt("math_deterministic_filter", vars);
  EXPECT_NE(filter.find("\"deterministic\""), std::string::npos);
  EXPECT_EQ(RenderTaskPrompt("topic_description", vars),
            RenderTemplate(TemplateText("topic_description"), vars));
}

TEST(ProviderConfig, StubRejectsNetworkFields) {
  ProviderConfig c;
  c.endpoint = "http://x";
  EXPECT_THROW(c.Validate(), Error);
  EXPECT_THROW(ProviderConfigFromJson({{"kind", "offline-stub"}, {"api_key_env", "K"}}), Error);
  EXPECT_THROW(ProviderConfigFromJson({{"kind", "remote"}, {"model", "m"}}), Error);
  EXPECT_THROW(ProviderConfigFromJson({{"kind", "carrier-pigeon"}}), Error);
  EXPECT_THROW(ProviderConfigFromJson({{"kind", "offline-stub"}, {"bogus", 1}}), Error);
  auto remote = ProviderConfigFromJson(
      {{"kind", "remote"}, {"endpoint", "http://h"}, {"model", "m"}, {"timeout_ms", 500}});
  EXPECT_EQ(remote.timeout.count(), 500);
  auto back = ProviderConfigFromJson(ProviderConfigToJson(remote));
  EXPECT_EQ(back.endpoint, "http://h");
  EXPECT_EQ(back.model, "m");
}

TEST(StubProvider, DescribeIsDeterministicAndRejectsEmpty) {
  StubProvider stub({});
  const TemplateVars v = {{"prompt", "Solve the algebra equation x + 2 = 5"}};
  const auto a = stub.Complete("topic_description", "", v);
  EXPECT_EQ(a, stub.Complete("topic_description", "", v));
  EXPECT_EQ(a, "2 5 algebra equation solve x");
  EXPECT_THROW(stub.Complete("topic_description", "", {{"prompt", ""}}), Error);
  EXPECT_EQ(stub.call_count(), 3u);
}

TEST(StubProvider, EmbeddingsUnitNormAndDeterministic) {
  StubProvider stub({});
  std::vector<std::string> texts;
  for (int i = 0; i < 1000; ++i) texts.push_back("prompt number " + std::to_string(i) + " about topic " + std::to_string(i % 7));
  auto m = stub.Embed(texts);
  ASSERT_EQ(m.rows(), 1000u);
  ASSERT_EQ(m.cols(), 64u);
  for (size_t i = 0; i < m.rows(); ++i) {
    double n2 = 0;
    for (double x : m.row(i)) n2 += x * x;
    EXPECT_NEAR(std::sqrt(n2), 1.0, 1e-6);
  }
  // Collision scan.
  std::set<std::vector<double>> distinct;
  for (size_t i = 0; i < m.rows(); ++i) distinct.emplace(m.row(i).begin(), m.row(i).end());
  EXPECT_EQ(distinct.size(), 1000u);
  auto again = stub.Embed({texts[3], texts[3]});
  EXPECT_TRUE(std::equal(again.row(0).begin(), again.row(0).end(), m.row(3).begin()));
  EXPECT_TRUE(std::equal(again.row(1).begin(), again.row(1).end(), m.row(3).begin()));
  EXPECT_THROW(stub.Embed({""}), Error);

  ProviderConfig other;
  other.seed = 9;
  EXPECT_NE(StubProvider(other).Embed({texts[0]}).data(), stub.Embed({texts[0]}).data());
}

TEST(StubProvider, ClusterLabelKeywordsFromSharedTokens) {
  StubProvider stub({});
  const std::string raw = stub.Complete(
      "cluster_label", "",
      {{"cluster_index", "4"},
       {"in_example_list", "- algebra homework help\n- linear algebra proof\n- algebra word problem"},
       {"out_example_list", "- geometry"}});
  json j = ExtractJson(raw);
  EXPECT_EQ(j["label"], "cluster-4");
  EXPECT_EQ(j["keywords"][0], "algebra");
}

TEST(StubProvider, FixedOutputOverrides) {
  ProviderConfig c;
  c.fixed_output = "{\"category\": \"future_predictions\"}";
  StubProvider stub(c);
  EXPECT_EQ(stub.Complete("politics_category", "", {}), *c.fixed_output);
}

TEST(ExtractJson, FindsEmbeddedValue) {
  EXPECT_EQ(ExtractJson("Sure!\n```json\n{\"a\": \"}\", \"b\": [1]}\n```"),
            json({{"a", "}"}, {"b", {1}}}));
  EXPECT_EQ(ExtractJson("traits: [\"x\", \"y\"]"), json({"x", "y"}));
  EXPECT_EQ(ExtractJson("{broken} then {\"ok\": true}"), json({{"ok", true}}));
  EXPECT_THROW(ExtractJson("no json here"), Error);
}

// Minimal OpenAI-compatible endpoint on localhost.
class FakeServer {
 public:
  explicit FakeServer(int failures_before_success) : failures_(failures_before_success) {
    server_.Post("/base/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      if (failures_-- > 0) {
        res.status = 500;
        return;
      }
      auto body = json::parse(req.body);
      last_auth_ = req.get_header_value("Authorization");
      const std::string content = "echo: " + body["messages"][0]["content"].get<std::string>();
      res.set_content(json({{"choices", {{{"message", {{"content", content}}}}}}}).dump(),
                      "application/json");
    });
    server_.Post("/base/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      auto body = json::parse(req.body);
      json data = json::array();
      for (size_t i = 0; i < body["input"].size(); ++i) {
        data.push_back({{"index", i}, {"embedding", {3.0, 4.0 + static_cast<double>(i)}}});
      }
      res.set_content(json({{"data", data}}).dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/base"; }
  int hits() const { return hits_; }
  const std::string& last_auth() const { return last_auth_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> failures_;
  std::atomic<int> hits_{0};
  std::string last_auth_;
};

ProviderConfig RemoteConfig(const std::string& endpoint) {
  ProviderConfig c;
  c.kind = ProviderKind::kRemote;
  c.name = "fake";
  c.endpoint = endpoint;
  c.model = "m";
  c.timeout = std::chrono::milliseconds(2000);
  return c;
}

TEST(RemoteProvider, CompletesWithRetriesAndAuth) {
  FakeServer server(2);
  auto config = RemoteConfig(server.endpoint());
  config.retries = 2;
  config.api_key_env = "SLICERANK_FAKE_KEY";
  setenv("SLICERANK_FAKE_KEY", "secret", 1);
  auto provider = MakeProvider(config);
  EXPECT_EQ(provider->Complete("topic_description", "hello", {}), "echo: hello");
  EXPECT_EQ(server.hits(), 3);
  EXPECT_EQ(server.last_auth(), "Bearer secret");
}

TEST(RemoteProvider, FailsAfterRetriesExhausted) {
  FakeServer server(5);
  auto config = RemoteConfig(server.endpoint());
  config.retries = 1;
  auto provider = MakeProvider(config);
  try {
    provider->Complete("topic_description", "hello", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kProvider);
  }
  EXPECT_EQ(server.hits(), 2);
}

TEST(RemoteProvider, UnreachableIsProviderError) {
  auto config = RemoteConfig("http://127.0.0.1:1");
  config.retries = 0;
  auto provider = MakeProvider(config);
  EXPECT_THROW(provider->Complete("x", "y", {}), Error);
}

TEST(RemoteProvider, EmbeddingsNormalizedInOrder) {
  FakeServer server(0);
  auto provider = MakeProvider(RemoteConfig(server.endpoint()));
  auto m = provider->Embed({"a", "b"});
  ASSERT_EQ(m.rows(), 2u);
  EXPECT_NEAR(m.row(0)[0], 0.6, 1e-12);
  EXPECT_NEAR(m.row(0)[1], 0.8, 1e-12);
  EXPECT_NEAR(m.row(1)[0], 3.0 / std::sqrt(34.0), 1e-12);
}

}  // namespace
}  // namespace slicerank
