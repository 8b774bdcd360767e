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

#include "slicerank/hierarchy_builder.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <thread>

#include "slicerank/error.h"
#include "slicerank/parallel.h"
#include "slicerank/stats.h"

namespace slicerank {

using nlohmann::json;

namespace {

std::string Trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string BulletList(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += '\n';
    out += "- " + item;
  }
  return out;
}

size_t HardwareThreads() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace

DescribeResult DescribeTopics(const std::vector<std::string>& prompts, Provider& provider,
                              int max_in_flight) {
  if (prompts.empty()) throw ValidationError("describe_topics: no prompts");
  DescribeResult result;
  result.descriptions.resize(prompts.size());
  std::vector<std::optional<std::string>> failures(prompts.size());
  ParallelFor(prompts.size(), static_cast<size_t>(max_in_flight), [&](size_t i) {
    const TemplateVars vars = {{"prompt", prompts[i]}};
    try {
      std::string text =
          provider.Complete("topic_description", RenderTaskPrompt("topic_description", vars), vars);
      text = Trim(text.substr(0, text.find('\n')));
      if (text.empty()) throw ProviderError("empty description");
      result.descriptions[i] = std::move(text);
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });
  for (size_t i = 0; i < failures.size(); ++i) {
    if (failures[i]) result.errors.push_back({i, *failures[i]});
  }
  return result;
}

EmbeddingMatrix EmbedTexts(const std::vector<std::string>& texts, Provider& provider) {
  if (texts.empty()) throw ValidationError("embed: no texts");
  EmbeddingMatrix m = provider.Embed(texts);
  if (m.rows() != texts.size()) {
    throw ProviderError("embed: provider returned " + std::to_string(m.rows()) + " vectors for " +
                        std::to_string(texts.size()) + " texts");
  }
  return m;
}

std::vector<ClusterExamples> SelectClusterExamples(const EmbeddingMatrix& vectors,
                                                   const KMeansResult& clustering,
                                                   const std::vector<std::string>& texts,
                                                   size_t in_count, size_t out_count) {
  const size_t k = clustering.centroids.rows();
  std::vector<ClusterExamples> out(k);
  ParallelFor(k, HardwareThreads(), [&](size_t c) {
    std::vector<std::pair<double, size_t>> members;
    std::vector<std::pair<double, size_t>> others;
    for (size_t i = 0; i < vectors.rows(); ++i) {
      const double d = SquaredDistance(vectors.row(i), clustering.centroids.row(c));
      (static_cast<size_t>(clustering.assignment[i]) == c ? members : others).emplace_back(d, i);
    }
    std::sort(members.begin(), members.end());
    std::sort(others.begin(), others.end());
    std::set<std::string> seen;
    for (const auto& [d, i] : members) {
      if (out[c].in.size() >= in_count) break;
      if (seen.insert(texts[i]).second) out[c].in.push_back(texts[i]);
    }
    for (const auto& [d, i] : others) {
      if (out[c].out.size() >= out_count) break;
      if (seen.insert(texts[i]).second) out[c].out.push_back(texts[i]);
    }
  });
  return out;
}

LabelResult LabelClusters(const std::vector<ClusterExamples>& clusters, Provider& provider,
                          int max_in_flight) {
  for (size_t c = 0; c < clusters.size(); ++c) {
    if (clusters[c].in.empty()) {
      throw ValidationError("label_clusters: cluster " + std::to_string(c) + " is empty");
    }
  }
  LabelResult result;
  result.labels.resize(clusters.size());
  std::vector<std::optional<std::string>> failures(clusters.size());
  ParallelFor(clusters.size(), static_cast<size_t>(max_in_flight), [&](size_t c) {
    const TemplateVars vars = {{"in_example_list", BulletList(clusters[c].in)},
                               {"out_example_list", BulletList(clusters[c].out)},
                               {"cluster_index", std::to_string(c)}};
    try {
      const std::string raw =
          provider.Complete("cluster_label", RenderTaskPrompt("cluster_label", vars), vars);
      const json j = ExtractJson(raw);
      ClusterLabel label;
      label.label = Trim(j.value("label", ""));
      label.description = Trim(j.value("description", ""));
      if (j.contains("keywords") && j["keywords"].is_array()) {
        for (const auto& k : j["keywords"]) {
          if (k.is_string()) label.keywords.push_back(k.get<std::string>());
        }
      }
      if (label.label.empty()) throw ProviderError("label missing from provider output");
      result.labels[c] = std::move(label);
    } catch (const Error& e) {
      failures[c] = e.what();
    } catch (const json::exception& e) {
      failures[c] = e.what();
    }
  });
  for (size_t c = 0; c < failures.size(); ++c) {
    if (failures[c]) result.errors.push_back({c, *failures[c]});
  }
  return result;
}

ManualEditScript ParseEditScript(const json& j) {
  if (!j.is_array()) throw ValidationError("edit script must be a JSON array");
  ManualEditScript script;
  for (size_t i = 0; i < j.size(); ++i) {
    const json& e = j[i];
    const std::string where = "edit[" + std::to_string(i) + "]";
    if (!e.is_object() || !e.contains("op") || !e["op"].is_string()) {
      throw ValidationError(where + ": missing \"op\"");
    }
    auto field = [&](const char* key) {
      if (!e.contains(key) || !e[key].is_string() || e[key].get<std::string>().empty()) {
        throw ValidationError(where + ": missing \"" + key + "\"");
      }
      return e[key].get<std::string>();
    };
    ManualEdit edit;
    const std::string op = e["op"];
    if (op == "add_top") {
      edit.op = ManualEdit::Op::kAddTop;
      edit.id = field("id");
      edit.label = field("label");
    } else if (op == "add_mid") {
      edit.op = ManualEdit::Op::kAddMid;
      edit.id = field("id");
      edit.label = field("label");
      edit.target = field("parent");
    } else if (op == "reassign_fine" || op == "reassign_mid") {
      edit.op = op == "reassign_fine" ? ManualEdit::Op::kReassignFine : ManualEdit::Op::kReassignMid;
      edit.id = field("node");
      edit.target = field("to");
    } else {
      throw ValidationError(where + ": unknown op '" + op + "'");
    }
    edit.description = e.value("description", "");
    script.push_back(std::move(edit));
  }
  return script;
}

ManualEditScript LoadEditScript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read edit script " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ValidationError(path.string() + ": not valid JSON");
  return ParseEditScript(j);
}

namespace {

// Mutable tree used while grouping and replaying edits.
struct Draft {
  std::vector<TopicNode> tops;  // creation order
  std::vector<TopicNode> mids;
  std::vector<TopicNode> fines;

  TopicNode* Find(const std::string& id) {
    for (auto* list : {&tops, &mids, &fines}) {
      for (auto& n : *list) {
        if (n.id == id) return &n;
      }
    }
    return nullptr;
  }
  TopicNode& Require(const std::string& id, Level level, const std::string& what) {
    TopicNode* n = Find(id);
    if (n == nullptr) throw ValidationError(what + ": unknown node '" + id + "'");
    if (n->level != level) {
      throw ValidationError(what + ": node '" + id + "' is " + std::string(LevelName(n->level)) +
                            ", expected " + std::string(LevelName(level)) +
                            "; the edit would break the three-level structure");
    }
    return *n;
  }
  void RequireNew(const std::string& id, const std::string& what) {
    if (Find(id) != nullptr) throw ValidationError(what + ": node '" + id + "' already exists");
  }
};

void ApplyEdits(Draft& draft, const ManualEditScript& edits) {
  for (size_t i = 0; i < edits.size(); ++i) {
    const ManualEdit& e = edits[i];
    const std::string what = "edit[" + std::to_string(i) + "]";
    switch (e.op) {
      case ManualEdit::Op::kAddTop: {
        draft.RequireNew(e.id, what);
        draft.tops.push_back({e.id, Level::kTop, e.label, e.description, {}, std::nullopt});
        break;
      }
      case ManualEdit::Op::kAddMid: {
        draft.RequireNew(e.id, what);
        draft.Require(e.target, Level::kTop, what);
        draft.mids.push_back({e.id, Level::kMid, e.label, e.description, {}, e.target});
        break;
      }
      case ManualEdit::Op::kReassignFine: {
        TopicNode& node = draft.Require(e.id, Level::kFine, what);
        draft.Require(e.target, Level::kMid, what);
        node.parent = e.target;
        break;
      }
      case ManualEdit::Op::kReassignMid: {
        TopicNode& node = draft.Require(e.id, Level::kMid, what);
        draft.Require(e.target, Level::kTop, what);
        node.parent = e.target;
        break;
      }
    }
  }
}

void PruneEmpty(Draft& draft, std::vector<std::string>& warnings) {
  std::set<std::string> used_mids;
  for (const auto& f : draft.fines) used_mids.insert(*f.parent);
  std::erase_if(draft.mids, [&](const TopicNode& m) {
    if (used_mids.contains(m.id)) return false;
    warnings.push_back("pruned mid-level category '" + m.id + "' (" + m.label + "): no clusters");
    return true;
  });
  std::set<std::string> used_tops;
  for (const auto& m : draft.mids) used_tops.insert(*m.parent);
  std::erase_if(draft.tops, [&](const TopicNode& t) {
    if (used_tops.contains(t.id)) return false;
    warnings.push_back("pruned top-level category '" + t.id + "' (" + t.label +
                       "): no mid-level categories");
    return true;
  });
}

}  // namespace

HigherLevels BuildHigherLevels(const std::vector<ClusterLabel>& fine_labels, Provider& provider,
                               const ManualEditScript& edits) {
  if (fine_labels.empty()) throw ValidationError("build_higher_levels: no fine labels");
  HigherLevels result;
  const size_t n = fine_labels.size();

  std::vector<std::string> lines;
  for (size_t i = 0; i < n; ++i) {
    std::string line = "[CLUSTER " + std::to_string(i + 1) + "] " + fine_labels[i].label;
    if (!fine_labels[i].description.empty()) line += ": " + fine_labels[i].description;
    lines.push_back(std::move(line));
  }
  const TemplateVars vars = {{"cluster_count", std::to_string(n)},
                             {"child_cluster_list", BulletList(lines)}};
  const json proposal = ExtractJson(provider.Complete(
      "higher_level_grouping", RenderTaskPrompt("higher_level_grouping", vars), vars));
  if (!proposal.is_object() || !proposal.contains("top") || !proposal["top"].is_array()) {
    throw ProviderError("grouping output lacks a \"top\" array");
  }

  Draft draft;
  std::vector<std::optional<std::string>> parent_of(n);
  size_t mid_counter = 0;
  for (const auto& top : proposal["top"]) {
    const std::string top_id = "t" + std::to_string(draft.tops.size());
    draft.tops.push_back(
        {top_id, Level::kTop, top.value("label", top_id), top.value("description", ""), {}, std::nullopt});
    if (!top.contains("mids") || !top["mids"].is_array()) continue;
    for (const auto& mid : top["mids"]) {
      const std::string mid_id = "m" + std::to_string(mid_counter++);
      draft.mids.push_back(
          {mid_id, Level::kMid, mid.value("label", mid_id), mid.value("description", ""), {}, top_id});
      if (!mid.contains("clusters") || !mid["clusters"].is_array()) continue;
      for (const auto& c : mid["clusters"]) {
        if (!c.is_number_integer() || c.get<int64_t>() < 1 || c.get<int64_t>() > int64_t(n)) {
          result.warnings.push_back("grouping referenced cluster " + c.dump() + " which does not exist");
          continue;
        }
        const size_t index = c.get<size_t>() - 1;
        if (parent_of[index]) {
          result.warnings.push_back("cluster " + std::to_string(index + 1) +
                                    " grouped twice; kept under " + *parent_of[index]);
          continue;
        }
        parent_of[index] = mid_id;
      }
    }
  }
  for (size_t i = 0; i < n; ++i) {
    std::string label = fine_labels[i].label.empty() ? "cluster-" + std::to_string(i)
                                                     : fine_labels[i].label;
    draft.fines.push_back({"f" + std::to_string(i), Level::kFine, std::move(label),
                           fine_labels[i].description, fine_labels[i].keywords, parent_of[i]});
  }
  const size_t unsorted = static_cast<size_t>(
      std::count(parent_of.begin(), parent_of.end(), std::nullopt));
  if (unsorted > 0) {
    if (draft.tops.empty()) draft.tops.push_back({"t0", Level::kTop, "Unsorted", "", {}, std::nullopt});
    const std::string mid_id = "m" + std::to_string(mid_counter++);
    draft.mids.push_back({mid_id, Level::kMid, "Unsorted", "", {}, draft.tops.front().id});
    for (auto& f : draft.fines) {
      if (!f.parent) f.parent = mid_id;
    }
    result.warnings.push_back(std::to_string(unsorted) + " clusters left ungrouped; placed under '" +
                              mid_id + "'");
  }

  ApplyEdits(draft, edits);
  PruneEmpty(draft, result.warnings);
  if (draft.tops.size() < 6 || draft.tops.size() > 10) {
    result.warnings.push_back("top-level category count " + std::to_string(draft.tops.size()) +
                              " is outside [6, 10]");
  }

  std::vector<TopicNode> nodes;
  for (auto* list : {&draft.tops, &draft.mids, &draft.fines}) {
    nodes.insert(nodes.end(), list->begin(), list->end());
  }
  result.hierarchy = TopicHierarchy::Create(std::move(nodes), {});
  return result;
}

BuildResult BuildHierarchy(const Dataset& dataset, Provider& label_provider,
                           Provider& embedding_provider, const BuildConfig& config,
                           const ManualEditScript& edits) {
  std::vector<std::string> prompt_ids;
  std::vector<std::string> prompts;
  for (const auto& [id, text] : dataset.prompts()) {
    prompt_ids.push_back(id);
    prompts.push_back(text);
  }
  if (prompts.empty()) throw ValidationError("build_hierarchy: dataset has no prompts");
  if (config.clustering.k > 0 && static_cast<size_t>(config.clustering.k) > prompts.size()) {
    throw ValidationError("build_hierarchy: k = " + std::to_string(config.clustering.k) +
                          " exceeds the " + std::to_string(prompts.size()) + " distinct prompts");
  }

  json log;
  log["dataset_digest"] = dataset.source_digest();
  log["prompts"] = prompts.size();
  log["k"] = config.clustering.k;
  log["seed"] = config.clustering.seed;
  log["label_provider"] = label_provider.name();
  log["embedding_provider"] = embedding_provider.name();

  DescribeResult described = DescribeTopics(prompts, label_provider, config.max_in_flight);
  std::vector<std::string> texts(prompts.size());
  for (size_t i = 0; i < prompts.size(); ++i) {
    texts[i] = described.descriptions[i].value_or(prompts[i]);
  }
  json describe_errors = json::array();
  for (const auto& e : described.errors) {
    describe_errors.push_back({{"prompt_id", prompt_ids[e.index]}, {"error", e.message}});
  }
  log["describe_errors"] = describe_errors;

  const EmbeddingMatrix vectors = EmbedTexts(texts, embedding_provider);
  log["embedding_dimension"] = vectors.cols();
  const KMeansResult clustering = KMeans(vectors, config.clustering);
  log["kmeans"] = {{"iterations", clustering.iterations},
                   {"converged", clustering.converged},
                   {"objective", clustering.objective_history.empty()
                                     ? 0.0
                                     : clustering.objective_history.back()}};

  const auto examples =
      SelectClusterExamples(vectors, clustering, texts, config.in_examples, config.out_examples);
  LabelResult labeled = LabelClusters(examples, label_provider, config.max_in_flight);
  std::vector<ClusterLabel> labels(examples.size());
  json label_errors = json::array();
  for (const auto& e : labeled.errors) {
    label_errors.push_back({{"cluster", e.index}, {"error", e.message}});
  }
  log["label_errors"] = label_errors;
  for (size_t c = 0; c < labels.size(); ++c) {
    labels[c] = labeled.labels[c].value_or(ClusterLabel{"cluster-" + std::to_string(c), "", {}});
  }

  HigherLevels higher = BuildHigherLevels(labels, label_provider, edits);
  log["warnings"] = higher.warnings;
  log["edits_applied"] = edits.size();

  std::map<std::string, std::string> assignment;
  for (size_t i = 0; i < prompt_ids.size(); ++i) {
    assignment[prompt_ids[i]] = "f" + std::to_string(clustering.assignment[i]);
  }
  std::vector<TopicNode> nodes;
  for (const auto& [id, node] : higher.hierarchy.nodes()) nodes.push_back(node);
  BuildResult result{TopicHierarchy::Create(std::move(nodes), std::move(assignment)), {}};
  log["hierarchy_digest"] = result.hierarchy.digest();
  log["counts"] = {{"top", result.hierarchy.NodesAtLevel(Level::kTop).size()},
                   {"mid", result.hierarchy.NodesAtLevel(Level::kMid).size()},
                   {"fine", result.hierarchy.NodesAtLevel(Level::kFine).size()}};
  result.log = std::move(log);
  return result;
}

std::vector<KSweepRow> KSweep(const Dataset& dataset, const std::vector<std::string>& prompt_ids,
                              const EmbeddingMatrix& vectors, const std::vector<int>& ks,
                              const ClusteringConfig& base, size_t top_models) {
  if (prompt_ids.size() != vectors.rows()) {
    throw ValidationError("k-sweep: prompt ids and vectors differ in length");
  }
  std::map<std::string, size_t> row_of;
  for (size_t i = 0; i < prompt_ids.size(); ++i) row_of[prompt_ids[i]] = i;

  // Top models by overall raw win rate, then name.
  std::map<std::string, stats::WinLoss> overall;
  for (const auto& r : dataset.records()) {
    auto& a = overall[r.model_a.name];
    auto& b = overall[r.model_b.name];
    if (r.outcome == Outcome::kAWin) {
      ++a.wins, ++b.losses;
    } else if (r.outcome == Outcome::kBWin) {
      ++b.wins, ++a.losses;
    }
  }
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& [model, wl] : overall) {
    if (wl.decided() > 0) ranked.emplace_back(stats::WinRate(wl), model);
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& x, const auto& y) { return x.first != y.first ? x.first > y.first : x.second < y.second; });
  if (ranked.size() > top_models) ranked.resize(top_models);
  std::map<std::string, size_t> top_index;
  for (size_t i = 0; i < ranked.size(); ++i) top_index[ranked[i].second] = i;

  std::vector<KSweepRow> rows;
  for (int k : ks) {
    ClusteringConfig config = base;
    config.k = k;
    const KMeansResult clustering = KMeans(vectors, config);
    std::vector<std::vector<stats::WinLoss>> cells(static_cast<size_t>(k),
                                                   std::vector<stats::WinLoss>(ranked.size()));
    for (const auto& r : dataset.records()) {
      auto row = row_of.find(r.prompt_id);
      if (row == row_of.end() || !IsDecided(r.outcome)) continue;
      auto& cluster = cells[static_cast<size_t>(clustering.assignment[row->second])];
      const bool a_won = r.outcome == Outcome::kAWin;
      if (auto it = top_index.find(r.model_a.name); it != top_index.end()) {
        (a_won ? cluster[it->second].wins : cluster[it->second].losses)++;
      }
      if (auto it = top_index.find(r.model_b.name); it != top_index.end()) {
        (a_won ? cluster[it->second].losses : cluster[it->second].wins)++;
      }
    }
    KSweepRow out;
    out.k = k;
    out.mean_cluster_size = static_cast<double>(vectors.rows()) / k;
    size_t overlapping = 0;
    for (const auto& cluster : cells) {
      std::vector<std::optional<stats::Interval>> intervals(cluster.size());
      for (size_t m = 0; m < cluster.size(); ++m) {
        if (cluster[m].decided() > 0) intervals[m] = stats::WilsonInterval(cluster[m]);
      }
      for (size_t i = 0; i < intervals.size(); ++i) {
        for (size_t j = i + 1; j < intervals.size(); ++j) {
          if (!intervals[i] || !intervals[j]) continue;
          ++out.pairs_compared;
          if (intervals[i]->low <= intervals[j]->high && intervals[j]->low <= intervals[i]->high) {
            ++overlapping;
          }
        }
      }
    }
    if (out.pairs_compared > 0) {
      out.overlap_probability = static_cast<double>(overlapping) / static_cast<double>(out.pairs_compared);
    }
    rows.push_back(out);
  }
  return rows;
}

namespace {

// prompt_id -> "high" | "low" for prompts whose MID falls in a band.
std::map<std::string, std::string> BandLabels(const TopicHierarchy& h,
                                              const std::map<std::string, double>& scores,
                                              double band, const std::string& run) {
  std::vector<std::pair<double, std::string>> ordered;
  for (const auto& [mid, rho] : scores) {
    const TopicNode* node = h.Find(mid);
    if (node == nullptr || node->level != Level::kMid) {
      throw ValidationError(run + ": divergence score for '" + mid + "' which is not a mid-level node");
    }
    ordered.emplace_back(rho, mid);
  }
  if (ordered.size() < 2) throw ValidationError(run + ": need at least two scored mid-level nodes");
  std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
    return x.first != y.first ? x.first < y.first : NaturalLess(x.second, y.second);
  });
  const size_t n = ordered.size();
  const size_t n_band = std::max<size_t>(1, static_cast<size_t>(std::floor(band * double(n))));
  std::map<std::string, std::string> mid_label;
  for (size_t i = 0; i < n_band; ++i) {
    mid_label[ordered[i].second] = "high";
    mid_label[ordered[n - 1 - i].second] = "low";
  }
  std::map<std::string, std::string> prompt_label;
  for (const auto& [prompt, fine] : h.assignment()) {
    auto it = mid_label.find(h.AncestorAt(fine, Level::kMid));
    if (it != mid_label.end()) prompt_label[prompt] = it->second;
  }
  return prompt_label;
}

}  // namespace

AgreementResult HierarchyAgreement(const TopicHierarchy& run_a, const TopicHierarchy& run_b,
                                   const std::map<std::string, double>& divergence_a,
                                   const std::map<std::string, double>& divergence_b,
                                   double band) {
  if (!(band > 0.0 && band <= 0.5)) throw ValidationError("band must lie in (0, 0.5]");
  bool shared = false;
  for (const auto& [prompt, fine] : run_a.assignment()) {
    if (run_b.assignment().contains(prompt)) {
      shared = true;
      break;
    }
  }
  if (!shared) throw ValidationError("hierarchy agreement: the two runs share no prompts");

  const auto labels_a = BandLabels(run_a, divergence_a, band, "run A");
  const auto labels_b = BandLabels(run_b, divergence_b, band, "run B");
  std::vector<std::string> a;
  std::vector<std::string> b;
  for (const auto& [prompt, label] : labels_a) {
    auto it = labels_b.find(prompt);
    if (it == labels_b.end()) continue;
    a.push_back(label);
    b.push_back(it->second);
  }
  if (a.empty()) throw ValidationError("hierarchy agreement: no prompt is banded in both runs");
  AgreementResult result;
  result.prompts_compared = a.size();
  size_t same = 0;
  for (size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  result.agreement = static_cast<double>(same) / static_cast<double>(a.size());
  result.kappa = stats::CohenKappa(a, b);
  return result;
}

}  // namespace slicerank
