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

#include "cli.h"

#include <signal.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slicerank/annotation.h"
#include "slicerank/annotation_analysis.h"
#include "slicerank/diagnostics.h"
#include "slicerank/digest.h"
#include "slicerank/error.h"
#include "slicerank/hierarchy_builder.h"
#include "slicerank/report.h"
#include "slicerank/service.h"

namespace slicerank::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct Common {
  std::string data;
  std::string hierarchy;
  std::string out;
  std::string prior_mean = "per-model";
  double prior_strength = 10.0;
  int k = 400;
  uint64_t seed = 0;
  bool offline_stub = false;
  std::string providers;

  SmoothingPolicy Smoothing() const { return ParseSmoothingPolicy(prior_mean, prior_strength); }
};

void AddSmoothing(CLI::App* cmd, Common& c) {
  cmd->add_option("--prior-mean", c.prior_mean, "global, per-model or a value in (0, 1)")
      ->capture_default_str();
  cmd->add_option("--prior-strength", c.prior_strength, "pseudo-observations m (0: raw rates)")
      ->capture_default_str();
}

void AddProviders(CLI::App* cmd, Common& c) {
  auto* stub = cmd->add_flag("--offline-stub", c.offline_stub, "deterministic offline providers");
  cmd->add_option("--providers", c.providers, "providers config file")->excludes(stub);
}

ProvidersFile ResolveProviders(const Common& c) {
  if (!c.offline_stub && c.providers.empty()) {
    throw ValidationError("pass --offline-stub or --providers <config>");
  }
  if (c.offline_stub) {
    ProvidersFile f;
    f.label.seed = c.seed;
    f.embedding.seed = c.seed;
    return f;
  }
  return LoadProvidersFile(c.providers);
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json ReadJson(const fs::path& path) {
  const auto text = ReadFile(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void WriteText(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw IoError("cannot write " + path.string());
}

Level RequireLevel(const std::string& name) {
  auto level = ParseLevel(name);
  if (!level) throw ValidationError("unknown level '" + name + "'");
  return *level;
}

std::shared_ptr<const Dataset> LoadData(const std::string& path) {
  return std::make_shared<const Dataset>(Ingest(path).dataset);
}

std::shared_ptr<const SliceEngine> LoadEngine(const Common& c) {
  auto snap = LoadSnapshot(c.data, c.hierarchy);
  return snap->engine;
}

json SnapshotDigests(const SliceEngine& engine) {
  return {{"dataset_digest", engine.dataset().source_digest()},
          {"hierarchy_digest", engine.hierarchy().digest()}};
}

// ---- ingest

int Ingest(const Common& c, double max_invalid, const std::string& report_path, std::ostream& out) {
  auto result = slicerank::Ingest(c.data, DatasetFormat::kJsonl, max_invalid);
  json invalid = json::array();
  for (const auto& l : result.invalid_lines) invalid.push_back({{"line", l.line_number}, {"message", l.message}});
  const auto shares = ComputeOutcomeShares(result.dataset);
  json report = {{"schema_version", 1},
                 {"dataset_digest", result.dataset.source_digest()},
                 {"lines", result.line_count},
                 {"records", result.dataset.size()},
                 {"prompts", result.dataset.prompts().size()},
                 {"models", result.dataset.models().size()},
                 {"invalid_lines", invalid},
                 {"outcome_shares", {{"a", shares.a}, {"b", shares.b}, {"tie", shares.tie}}}};
  if (!c.out.empty()) WriteJsonl(result.dataset, c.out);
  if (!report_path.empty()) WriteText(report_path, report.dump(2) + "\n");
  out << report.dump(2) << "\n";
  return kExitOk;
}

// ---- build-hierarchy / k-sweep

int BuildHierarchyCmd(const Common& c, const std::string& edits_path, const std::string& log_path,
                      std::ostream& out) {
  if (c.out.empty()) throw ValidationError("--out is required");
  const auto ds = LoadData(c.data);
  const auto providers = ResolveProviders(c);
  auto label = MakeProvider(providers.label);
  auto embed = MakeProvider(providers.embedding);
  BuildConfig config;
  config.clustering.k = c.k;
  config.clustering.seed = c.seed;
  ManualEditScript edits;
  if (!edits_path.empty()) edits = LoadEditScript(edits_path);
  auto result = BuildHierarchy(*ds, *label, *embed, config, edits);
  SaveHierarchy(result.hierarchy, c.out);
  if (!log_path.empty()) WriteText(log_path, result.log.dump(2) + "\n");
  out << json{{"hierarchy", c.out},
              {"hierarchy_digest", result.hierarchy.digest()},
              {"dataset_digest", ds->source_digest()},
              {"fine_nodes", result.hierarchy.NodesAtLevel(Level::kFine).size()},
              {"mid_nodes", result.hierarchy.NodesAtLevel(Level::kMid).size()},
              {"top_nodes", result.hierarchy.NodesAtLevel(Level::kTop).size()}}
             .dump(2)
      << "\n";
  return kExitOk;
}

std::vector<int> ParseKs(const std::string& text) {
  std::vector<int> ks;
  std::stringstream in(text);
  for (std::string part; std::getline(in, part, ',');) {
    try {
      size_t used = 0;
      const int k = std::stoi(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      ks.push_back(k);
    } catch (const std::exception&) {
      throw ValidationError("--ks: not an integer: '" + part + "'");
    }
  }
  if (ks.empty()) throw ValidationError("--ks is empty");
  return ks;
}

int KSweepCmd(const Common& c, const std::string& ks_text, size_t top_models, std::ostream& out) {
  if (c.out.empty()) throw ValidationError("--out is required");
  const auto ks = ParseKs(ks_text);
  const auto ds = LoadData(c.data);
  const auto providers = ResolveProviders(c);
  auto label = MakeProvider(providers.label);
  auto embed = MakeProvider(providers.embedding);
  std::vector<std::string> ids, texts;
  for (const auto& [id, text] : ds->prompts()) {
    ids.push_back(id);
    texts.push_back(text);
  }
  // Same inputs as the build: descriptions, falling back to the prompt.
  auto described = DescribeTopics(texts, *label);
  for (size_t i = 0; i < texts.size(); ++i) {
    if (described.descriptions[i]) texts[i] = *described.descriptions[i];
  }
  const auto vectors = EmbedTexts(texts, *embed);
  ClusteringConfig base;
  base.seed = c.seed;
  const auto rows = KSweep(*ds, ids, vectors, ks, base, top_models);
  std::string csv = "# dataset_digest: " + ds->source_digest() + "\n" +
                    "k,overlap_probability,pairs_compared,mean_cluster_size\n";
  json j = json::array();
  for (const auto& r : rows) {
    csv += std::to_string(r.k) + "," + CsvNumber(r.overlap_probability) + "," + std::to_string(r.pairs_compared) +
           "," + CsvNumber(r.mean_cluster_size) + "\n";
    j.push_back({{"k", r.k},
                 {"overlap_probability", r.overlap_probability ? json(*r.overlap_probability) : json(nullptr)},
                 {"pairs_compared", r.pairs_compared},
                 {"mean_cluster_size", r.mean_cluster_size}});
  }
  WriteText(c.out, csv);
  out << json{{"dataset_digest", ds->source_digest()}, {"rows", j}}.dump(2) << "\n";
  return kExitOk;
}

// ---- analyze

struct AnalyzeArgs {
  std::string which;
  std::string level = "mid";
  int64_t min_models_n = 0;
  double threshold = 3.0;
  std::string hierarchy_b;
  double band = 0.25;
};

std::map<std::string, double> RhoByNode(const DivergenceReport& report) {
  std::map<std::string, double> out;
  for (const auto& r : report.rows) {
    if (r.spearman) out[r.node] = *r.spearman;
  }
  return out;
}

int Analyze(const Common& c, const AnalyzeArgs& a, std::ostream& out) {
  if (c.out.empty()) throw ValidationError("--out is required");
  const fs::path dir = c.out;
  const auto level = RequireLevel(a.level);
  const auto smoothing = c.Smoothing();
  const auto engine = LoadEngine(c);
  json summary = {{"snapshot", SnapshotDigests(*engine)}, {"which", a.which}};
  if (a.which == "divergence") {
    const auto report = engine->Divergence(level, smoothing, a.min_models_n);
    WriteText(dir / "divergence.csv", DivergenceCsv(*engine, report));
    WriteText(dir / "divergence.json", DivergenceJson(*engine, report).dump(2) + "\n");
    summary["rows"] = report.rows.size();
  } else if (a.which == "outliers") {
    const auto report = engine->Outliers(level, a.threshold);
    WriteText(dir / "outliers.csv", OutliersCsv(*engine, report));
    WriteText(dir / "outliers.json", OutliersJson(*engine, report, a.threshold).dump(2) + "\n");
    summary["cells"] = report.cells.size();
  } else {
    if (a.hierarchy_b.empty()) throw ValidationError("stability needs --hierarchy-b");
    Common other = c;
    other.hierarchy = a.hierarchy_b;
    const auto engine_b = LoadEngine(other);
    const auto div_a = engine->Divergence(Level::kMid, smoothing, a.min_models_n);
    const auto div_b = engine_b->Divergence(Level::kMid, smoothing, a.min_models_n);
    const auto agreement =
        HierarchyAgreement(engine->hierarchy(), engine_b->hierarchy(), RhoByNode(div_a), RhoByNode(div_b), a.band);
    json j = {{"schema_version", 1},
              {"snapshot", SnapshotDigests(*engine)},
              {"hierarchy_b_digest", engine_b->hierarchy().digest()},
              {"band", a.band},
              {"agreement", agreement.agreement},
              {"kappa", agreement.kappa ? json(*agreement.kappa) : json(nullptr)},
              {"prompts_compared", agreement.prompts_compared},
              {"divergence_a", DivergenceJson(*engine, div_a)["rows"]},
              {"divergence_b", DivergenceJson(*engine_b, div_b)["rows"]}};
    WriteText(dir / "stability.json", j.dump(2) + "\n");
    summary["agreement"] = agreement.agreement;
    summary["kappa"] = j["kappa"];
  }
  out << summary.dump(2) << "\n";
  return kExitOk;
}

// ---- report

int Report(const Common& c, int64_t min_evals, const std::string& spec_path, double threshold,
           const std::vector<std::string>& annotations, std::ostream& out) {
  if (c.out.empty()) throw ValidationError("--out is required");
  const auto engine = LoadEngine(c);
  ReportOptions options;
  options.smoothing = c.Smoothing();
  options.min_evals = min_evals;
  options.outlier_threshold = threshold;
  if (!spec_path.empty()) {
    auto parsed = ParseSliceSpec(ReadJson(spec_path), engine->hierarchy());
    if (!parsed.spec) {
      std::string msg = "invalid slice spec:";
      for (const auto& e : parsed.errors) msg += " " + e.field + ": " + e.message + ";";
      throw ValidationError(msg);
    }
    options.spec = parsed.spec;
  }
  for (const auto& path : annotations) {
    const auto name = fs::path(path).stem().string();
    if (options.annotation_reports.contains(name)) throw ValidationError("duplicate annotation report " + name);
    options.annotation_reports[name] = ReadJson(path);
  }
  const auto files = BuildReportBundle(*engine, options);
  WriteReportFiles(files, c.out);
  json names = json::array();
  for (const auto& f : files) names.push_back(f.name);
  out << json{{"snapshot", SnapshotDigests(*engine)}, {"out", c.out}, {"files", names}}.dump(2) << "\n";
  return kExitOk;
}

// ---- serve

int Serve(const Common& c, const std::string& bind, const std::string& cors, std::ostream& out,
          std::ostream& err) {
  const auto [host, port] = ParseBindAddress(bind);
  ServiceConfig config;
  config.smoothing = c.Smoothing();
  config.cors_origin = cors;
  Service service(config);
  service.Swap(LoadSnapshot(c.data, c.hierarchy));

  // Block the signals before any server thread exists so only sigwait sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  sigaddset(&set, SIGHUP);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  HttpServer server(service);
  const int bound = server.Start(host, port);
  out << "listening on http://" << host << ":" << bound << std::endl;
  for (;;) {
    int sig = 0;
    if (sigwait(&set, &sig) != 0) break;
    if (sig != SIGHUP) break;
    try {
      service.Swap(LoadSnapshot(c.data, c.hierarchy));
      out << "reloaded " << service.snapshot()->dataset_digest() << std::endl;
    } catch (const Error& e) {
      // Keep serving the previous snapshot.
      err << "reload failed: " << e.what() << std::endl;
    }
  }
  server.Stop();
  pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
  return kExitOk;
}

// ---- annotate

std::vector<std::string> DefaultTargets(TaskKind task, const Dataset& ds) {
  std::vector<std::string> out;
  if (IsPromptLevelTask(task)) {
    for (const auto& [id, text] : ds.prompts()) out.push_back(id);
    return out;
  }
  for (const auto& r : ds.records()) {
    if (r.response_a && r.response_b) out.push_back(r.judgment_id);
  }
  return out;
}

int AnnotateRun(const Common& c, const std::string& job_path, const std::string& vocabulary_path,
                std::ostream& out) {
  auto job = AnnotationJobFromJson(ReadJson(job_path));
  if (!c.out.empty()) job.output = c.out;
  if (!vocabulary_path.empty()) job.vocabulary = LoadConfirmedVocabulary(vocabulary_path);
  const auto ds = LoadData(c.data);
  if (job.targets.empty()) job.targets = DefaultTargets(job.task, *ds);
  const auto summary = RunJob(job, *ds);
  out << json{{"job_id", job.job_id},
              {"task", TaskName(job.task)},
              {"output", job.output.string()},
              {"targets", summary.targets},
              {"skipped", summary.skipped},
              {"labeled", summary.labeled},
              {"failed", summary.failed},
              {"provider_calls", summary.provider_calls}}
             .dump(2)
      << "\n";
  return kExitOk;
}

struct AnnotateAnalyzeArgs {
  std::string which;
  std::string labels;
  std::string correctness;
};

int AnnotateAnalyze(const Common& c, const AnnotateAnalyzeArgs& a, std::ostream& out) {
  if (c.out.empty()) throw ValidationError("--out is required");
  const auto ds = LoadData(c.data);
  const auto labels = LoadLabels(a.labels);
  json report;
  if (a.which == "correctness") {
    report = ToJson(CorrectnessPreference(labels, *ds));
  } else if (a.which == "style") {
    StyleOverlapOptions options;
    options.seed = c.seed;
    std::vector<LabelRow> correctness;
    if (!a.correctness.empty()) {
      correctness = LoadLabels(a.correctness);
      options.correctness = &correctness;
    }
    std::map<std::string, std::string> categories;
    if (!c.hierarchy.empty()) {
      const auto h = LoadHierarchy(c.hierarchy);
      for (const auto& [prompt, fine] : h.assignment()) categories[prompt] = h.AncestorAt(fine, Level::kMid);
      options.categories = &categories;
    }
    report = ToJson(StyleOverlap(labels, *ds, options));
  } else {
    const auto r = Pluralism(labels, *ds, c.prior_strength);
    report = ToJson(r);
    if (r.head_to_head) report["reference"] = HeadToHeadAnchor(*r.head_to_head);
  }
  report["dataset_digest"] = ds->source_digest();
  WriteText(c.out, report.dump(2) + "\n");
  out << report.dump(2) << "\n";
  return kExitOk;
}

int AnnotateAudit(const Common& c, const std::string& human_path, const std::string& labels_path,
                  const std::string& field, std::ostream& out) {
  const auto report = ToJson(AgreementAudit(LoadHumanLabels(human_path), LoadLabels(labels_path), field));
  if (!c.out.empty()) WriteText(c.out, report.dump(2) + "\n");
  out << report.dump(2) << "\n";
  return kExitOk;
}

int DiscoverTraitsCmd(const Common& c, const DiscoveryConfig& config, std::ostream& out) {
  if (c.out.empty()) throw ValidationError("--out is required");
  const auto ds = LoadData(c.data);
  const auto providers = ResolveProviders(c);
  auto provider = MakeProvider(providers.label);
  auto j = ToJson(DiscoverTraits(SamplesFromDataset(*ds), *provider, config));
  j["dataset_digest"] = ds->source_digest();
  WriteText(c.out, j.dump(2) + "\n");
  out << j.dump(2) << "\n";
  return kExitOk;
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo:
      return kExitIo;
    case ErrorKind::kProvider:
      return kExitProvider;
    case ErrorKind::kValidation:
    case ErrorKind::kNotFound:
      break;
  }
  return kExitValidation;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Slice-based leaderboard tools", "slicerank"};
  app.require_subcommand(1);
  Common c;

  auto* ingest = app.add_subcommand("ingest", "validate a JSONL export and write the canonical dataset");
  double max_invalid = kDefaultMaxInvalidFraction;
  std::string ingest_report;
  ingest->add_option("--data", c.data, "input JSONL")->required();
  ingest->add_option("--out", c.out, "canonical JSONL output");
  ingest->add_option("--report", ingest_report, "validation report JSON");
  ingest->add_option("--max-invalid-fraction", max_invalid)->capture_default_str();

  auto* build = app.add_subcommand("build-hierarchy", "cluster prompts and label a three-level hierarchy");
  std::string edits, build_log;
  build->add_option("--data", c.data)->required();
  build->add_option("--out", c.out, "hierarchy JSON")->required();
  build->add_option("--k", c.k, "FINE clusters")->capture_default_str();
  build->add_option("--seed", c.seed)->capture_default_str();
  build->add_option("--edits", edits, "manual edit script");
  build->add_option("--log", build_log, "build log JSON");
  AddProviders(build, c);

  auto* sweep = app.add_subcommand("k-sweep", "interval-overlap curve over candidate k");
  std::string ks = "100,200,300,400,500,600";
  size_t top_models = 20;
  sweep->add_option("--data", c.data)->required();
  sweep->add_option("--out", c.out, "CSV output")->required();
  sweep->add_option("--ks", ks, "comma-separated k values")->capture_default_str();
  sweep->add_option("--top-models", top_models)->capture_default_str();
  sweep->add_option("--seed", c.seed)->capture_default_str();
  AddProviders(sweep, c);

  auto* analyze = app.add_subcommand("analyze", "divergence, outliers or stability");
  AnalyzeArgs aa;
  analyze->add_option("which", aa.which)->required()->check(CLI::IsMember({"divergence", "outliers", "stability"}));
  analyze->add_option("--data", c.data)->required();
  analyze->add_option("--hierarchy", c.hierarchy)->required();
  analyze->add_option("--out", c.out, "output directory")->required();
  analyze->add_option("--level", aa.level)->capture_default_str();
  analyze->add_option("--min-models-n", aa.min_models_n)->capture_default_str();
  analyze->add_option("--threshold", aa.threshold, "outlier |z|")->capture_default_str();
  analyze->add_option("--hierarchy-b", aa.hierarchy_b, "second run for stability");
  analyze->add_option("--band", aa.band, "tail fraction for stability")->capture_default_str();
  AddSmoothing(analyze, c);

  auto* report = app.add_subcommand("report", "write the report bundle");
  int64_t min_evals = 4000;
  std::string spec;
  double threshold = 3.0;
  report->add_option("--data", c.data)->required();
  report->add_option("--hierarchy", c.hierarchy)->required();
  report->add_option("--out", c.out, "output directory")->required();
  report->add_option("--min-evals", min_evals, "heatmap row filter")->capture_default_str();
  report->add_option("--spec", spec, "slice spec JSON");
  report->add_option("--threshold", threshold, "outlier |z|")->capture_default_str();
  std::vector<std::string> annotations;
  report->add_option("--annotation", annotations, "annotate analyze output to include (repeatable)");
  AddSmoothing(report, c);

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  std::string bind = "127.0.0.1:8080", cors;
  serve->add_option("--data", c.data)->required();
  serve->add_option("--hierarchy", c.hierarchy)->required();
  serve->add_option("--bind", bind)->capture_default_str();
  serve->add_option("--cors-origin", cors);
  AddSmoothing(serve, c);

  auto* annotate = app.add_subcommand("annotate", "annotation jobs and analyses");
  annotate->require_subcommand(1);
  auto* run = annotate->add_subcommand("run", "run or resume a job");
  std::string job, vocabulary;
  run->add_option("--job", job, "job JSON")->required();
  run->add_option("--data", c.data)->required();
  run->add_option("--out", c.out, "labels JSONL (overrides the job)");
  run->add_option("--vocabulary", vocabulary, "confirmed trait discovery file");
  auto* aanalyze = annotate->add_subcommand("analyze", "correctness, style or pluralism");
  AnnotateAnalyzeArgs an;
  aanalyze->add_option("which", an.which)->required()->check(CLI::IsMember({"correctness", "style", "pluralism"}));
  aanalyze->add_option("--data", c.data)->required();
  aanalyze->add_option("--labels", an.labels)->required();
  aanalyze->add_option("--out", c.out)->required();
  aanalyze->add_option("--correctness", an.correctness, "math correctness labels (style)");
  aanalyze->add_option("--hierarchy", c.hierarchy, "MID categories for the style baseline");
  aanalyze->add_option("--seed", c.seed)->capture_default_str();
  aanalyze->add_option("--prior-strength", c.prior_strength)->capture_default_str();
  auto* audit = annotate->add_subcommand("audit", "human vs machine agreement");
  std::string human, labels, field;
  audit->add_option("--human", human)->required();
  audit->add_option("--labels", labels)->required();
  audit->add_option("--field", field)->required();
  audit->add_option("--out", c.out);

  auto* discover = app.add_subcommand("discover-traits", "propose a style trait vocabulary");
  DiscoveryConfig dc;
  discover->add_option("--data", c.data)->required();
  discover->add_option("--out", c.out)->required();
  discover->add_option("--rounds", dc.rounds)->capture_default_str();
  discover->add_option("--sample-size", dc.sample_size)->capture_default_str();
  discover->add_option("--seed", dc.seed)->capture_default_str();
  AddProviders(discover, c);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*ingest) return Ingest(c, max_invalid, ingest_report, out);
    if (*build) return BuildHierarchyCmd(c, edits, build_log, out);
    if (*sweep) return KSweepCmd(c, ks, top_models, out);
    if (*analyze) return Analyze(c, aa, out);
    if (*report) return Report(c, min_evals, spec, threshold, annotations, out);
    if (*serve) return Serve(c, bind, cors, out, err);
    if (*run) return AnnotateRun(c, job, vocabulary, out);
    if (*aanalyze) return AnnotateAnalyze(c, an, out);
    if (*audit) return AnnotateAudit(c, human, labels, field, out);
    if (*discover) {
      c.seed = dc.seed;
      return DiscoverTraitsCmd(c, dc, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}

}  // namespace slicerank::cli
