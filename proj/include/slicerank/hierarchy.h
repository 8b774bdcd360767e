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

#ifndef SLICERANK_HIERARCHY_H_
#define SLICERANK_HIERARCHY_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "slicerank/dataset.h"

namespace slicerank {

enum class Level { kTop, kMid, kFine };

// "top", "mid", "fine".
std::string_view LevelName(Level level);
std::optional<Level> ParseLevel(std::string_view name);

struct TopicNode {
  std::string id;
  Level level = Level::kFine;
  std::string label;
  std::string description;
  std::vector<std::string> keywords;
  std::optional<std::string> parent;

  bool operator==(const TopicNode&) const = default;
};

// Orders "f2" before "f10": digit runs compare numerically.
bool NaturalLess(std::string_view a, std::string_view b);

// Three-level topic forest (TOP -> MID -> FINE) plus the prompt -> FINE
// assignment. Immutable after construction.
class TopicHierarchy {
 public:
  TopicHierarchy() = default;

  // Validates parent levels, absence of cycles, depth exactly three on every
  // root-to-leaf path, non-empty labels and that every assignment targets an
  // existing FINE node. Throws ValidationError.
  static TopicHierarchy Create(std::vector<TopicNode> nodes,
                               std::map<std::string, std::string> assignment);

  const std::map<std::string, TopicNode>& nodes() const { return nodes_; }
  // prompt_id -> FINE node id.
  const std::map<std::string, std::string>& assignment() const { return assignment_; }

  const TopicNode* Find(std::string_view id) const;
  // Throws NotFoundError naming the id.
  const TopicNode& At(std::string_view id) const;

  // Natural id order.
  std::vector<std::string> NodesAtLevel(Level level) const;
  std::vector<std::string> Children(std::string_view id) const;
  // FINE nodes at or below `id`, natural order.
  std::vector<std::string> FineDescendants(std::string_view id) const;
  // The ancestor of `id` at `level` (itself when already at that level).
  std::string AncestorAt(std::string_view id, Level level) const;

  // Canonical JSON: {"nodes": [...], "assignment": {...}}. Nodes appear TOP,
  // MID, FINE, each in natural id order.
  nlohmann::json ToJson() const;
  static TopicHierarchy FromJson(const nlohmann::json& j);
  // Pretty-printed canonical JSON with a trailing newline.
  std::string Serialize() const;
  // SHA-256 of Serialize().
  const std::string& digest() const { return digest_; }

 private:
  std::map<std::string, TopicNode> nodes_;
  std::map<std::string, std::string> assignment_;
  std::map<std::string, std::vector<std::string>> children_;
  std::string digest_;
};

TopicHierarchy LoadHierarchy(const std::filesystem::path& path);
void SaveHierarchy(const TopicHierarchy& hierarchy, const std::filesystem::path& path);

// Prompt ids of `dataset` with no FINE assignment, sorted.
std::vector<std::string> UnassignedPrompts(const TopicHierarchy& hierarchy,
                                           const Dataset& dataset);

}  // namespace slicerank

#endif  // SLICERANK_HIERARCHY_H_
