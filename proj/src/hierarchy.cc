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

#include "slicerank/hierarchy.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "slicerank/digest.h"
#include "slicerank/error.h"

namespace slicerank {

using nlohmann::json;

std::string_view LevelName(Level level) {
  switch (level) {
    case Level::kTop:
      return "top";
    case Level::kMid:
      return "mid";
    case Level::kFine:
      return "fine";
  }
  return "fine";
}

std::optional<Level> ParseLevel(std::string_view name) {
  if (name == "top") return Level::kTop;
  if (name == "mid") return Level::kMid;
  if (name == "fine") return Level::kFine;
  return std::nullopt;
}

bool NaturalLess(std::string_view a, std::string_view b) {
  size_t i = 0, j = 0;
  auto digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  while (i < a.size() && j < b.size()) {
    if (digit(a[i]) && digit(b[j])) {
      size_t ie = i, je = j;
      while (ie < a.size() && digit(a[ie])) ++ie;
      while (je < b.size() && digit(b[je])) ++je;
      std::string_view da = a.substr(i, ie - i), db = b.substr(j, je - j);
      while (da.size() > 1 && da[0] == '0') da.remove_prefix(1);
      while (db.size() > 1 && db[0] == '0') db.remove_prefix(1);
      if (da.size() != db.size()) return da.size() < db.size();
      if (da != db) return da < db;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if ((a.size() - i) != (b.size() - j)) return (a.size() - i) < (b.size() - j);
  return a < b;
}

namespace {

void SortNatural(std::vector<std::string>& ids) {
  std::sort(ids.begin(), ids.end(),
            [](const std::string& x, const std::string& y) { return NaturalLess(x, y); });
}

std::optional<Level> ExpectedParentLevel(Level level) {
  switch (level) {
    case Level::kTop:
      return std::nullopt;
    case Level::kMid:
      return Level::kTop;
    case Level::kFine:
      return Level::kMid;
  }
  return std::nullopt;
}

}  // namespace

TopicHierarchy TopicHierarchy::Create(std::vector<TopicNode> nodes,
                                      std::map<std::string, std::string> assignment) {
  TopicHierarchy h;
  for (auto& node : nodes) {
    if (node.id.empty()) throw ValidationError("node with empty id");
    if (node.label.empty()) throw ValidationError("node \"" + node.id + "\" has an empty label");
    std::string id = node.id;
    if (!h.nodes_.emplace(id, std::move(node)).second) {
      throw ValidationError("duplicate node id \"" + id + "\"");
    }
  }
  for (const auto& [id, node] : h.nodes_) {
    const auto expected = ExpectedParentLevel(node.level);
    if (!expected) {
      if (node.parent) throw ValidationError("top node \"" + id + "\" must not have a parent");
      continue;
    }
    if (!node.parent) throw ValidationError("node \"" + id + "\" has no parent");
    auto it = h.nodes_.find(*node.parent);
    if (it == h.nodes_.end()) {
      throw ValidationError("node \"" + id + "\" references unknown parent \"" +
                            *node.parent + "\"");
    }
    if (it->second.level != *expected) {
      throw ValidationError("node \"" + id + "\" (" + std::string(LevelName(node.level)) +
                            ") has parent \"" + *node.parent + "\" at level " +
                            std::string(LevelName(it->second.level)));
    }
    h.children_[*node.parent].push_back(id);
  }
  // With the level constraints above every parent chain is strictly
  // decreasing in depth, so it cannot cycle; still walk each chain as a guard
  // against malformed level data.
  for (const auto& [id, node] : h.nodes_) {
    std::set<std::string> seen{id};
    const TopicNode* cur = &node;
    while (cur->parent) {
      if (!seen.insert(*cur->parent).second) throw ValidationError("cycle through node \"" + id + "\"");
      cur = &h.nodes_.at(*cur->parent);
    }
  }
  for (auto& [id, kids] : h.children_) SortNatural(kids);
  for (const auto& [id, node] : h.nodes_) {
    if (node.level != Level::kFine && !h.children_.count(id)) {
      throw ValidationError("node \"" + id + "\" (" + std::string(LevelName(node.level)) +
                            ") has no children; every path must reach a fine node");
    }
  }
  for (const auto& [prompt, fine] : assignment) {
    auto it = h.nodes_.find(fine);
    if (it == h.nodes_.end()) {
      throw ValidationError("prompt \"" + prompt + "\" assigned to unknown node \"" + fine + "\"");
    }
    if (it->second.level != Level::kFine) {
      throw ValidationError("prompt \"" + prompt + "\" assigned to non-fine node \"" + fine + "\"");
    }
  }
  h.assignment_ = std::move(assignment);
  h.digest_ = Sha256Hex(h.Serialize());
  return h;
}

const TopicNode* TopicHierarchy::Find(std::string_view id) const {
  auto it = nodes_.find(std::string(id));
  return it == nodes_.end() ? nullptr : &it->second;
}

const TopicNode& TopicHierarchy::At(std::string_view id) const {
  const TopicNode* node = Find(id);
  if (!node) throw NotFoundError("unknown node \"" + std::string(id) + "\"");
  return *node;
}

std::vector<std::string> TopicHierarchy::NodesAtLevel(Level level) const {
  std::vector<std::string> out;
  for (const auto& [id, node] : nodes_) {
    if (node.level == level) out.push_back(id);
  }
  SortNatural(out);
  return out;
}

std::vector<std::string> TopicHierarchy::Children(std::string_view id) const {
  auto it = children_.find(std::string(id));
  return it == children_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<std::string> TopicHierarchy::FineDescendants(std::string_view id) const {
  const TopicNode& root = At(id);
  std::vector<std::string> out;
  if (root.level == Level::kFine) return {root.id};
  std::vector<std::string> stack{root.id};
  while (!stack.empty()) {
    std::string cur = std::move(stack.back());
    stack.pop_back();
    for (const auto& kid : Children(cur)) {
      if (nodes_.at(kid).level == Level::kFine) {
        out.push_back(kid);
      } else {
        stack.push_back(kid);
      }
    }
  }
  SortNatural(out);
  return out;
}

std::string TopicHierarchy::AncestorAt(std::string_view id, Level level) const {
  const TopicNode* cur = &At(id);
  while (cur->level != level) {
    if (!cur->parent) {
      throw ValidationError("node \"" + std::string(id) + "\" has no ancestor at level " +
                            std::string(LevelName(level)));
    }
    cur = &nodes_.at(*cur->parent);
  }
  return cur->id;
}

json TopicHierarchy::ToJson() const {
  json nodes = json::array();
  for (Level level : {Level::kTop, Level::kMid, Level::kFine}) {
    for (const auto& id : NodesAtLevel(level)) {
      const TopicNode& n = nodes_.at(id);
      nodes.push_back({{"id", n.id},
                       {"level", std::string(LevelName(n.level))},
                       {"label", n.label},
                       {"description", n.description},
                       {"keywords", n.keywords},
                       {"parent", n.parent ? json(*n.parent) : json(nullptr)}});
    }
  }
  return {{"nodes", std::move(nodes)}, {"assignment", assignment_}};
}

TopicHierarchy TopicHierarchy::FromJson(const json& j) {
  try {
    std::vector<TopicNode> nodes;
    for (const auto& n : j.at("nodes")) {
      TopicNode node;
      node.id = n.at("id").get<std::string>();
      const auto level = ParseLevel(n.at("level").get<std::string>());
      if (!level) throw ValidationError("node \"" + node.id + "\" has an unknown level");
      node.level = *level;
      node.label = n.at("label").get<std::string>();
      node.description = n.value("description", "");
      if (auto it = n.find("keywords"); it != n.end()) {
        node.keywords = it->get<std::vector<std::string>>();
      }
      if (auto it = n.find("parent"); it != n.end() && !it->is_null()) {
        node.parent = it->get<std::string>();
      }
      nodes.push_back(std::move(node));
    }
    auto assignment = j.at("assignment").get<std::map<std::string, std::string>>();
    return Create(std::move(nodes), std::move(assignment));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed hierarchy JSON: ") + e.what());
  }
}

std::string TopicHierarchy::Serialize() const { return ToJson().dump(2) + "\n"; }

TopicHierarchy LoadHierarchy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open hierarchy file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("hierarchy file " + path.string() + " is not valid JSON: " + e.what());
  }
  return TopicHierarchy::FromJson(j);
}

void SaveHierarchy(const TopicHierarchy& hierarchy, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << hierarchy.Serialize();
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> UnassignedPrompts(const TopicHierarchy& hierarchy,
                                           const Dataset& dataset) {
  std::vector<std::string> out;
  for (const auto& [prompt_id, text] : dataset.prompts()) {
    if (!hierarchy.assignment().count(prompt_id)) out.push_back(prompt_id);
  }
  return out;
}

}  // namespace slicerank
