#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "octseg/config_json.hpp"
#include "octseg/io.hpp"
#include "octseg/metrics.hpp"
#include "octseg/pipeline.hpp"

namespace octseg::harness {

namespace fs = std::filesystem;
using nlohmann::json;

struct ManifestEntry {
  std::string scan_path;
  std::optional<std::string> label_path;
  std::string dataset;
  std::string pathology;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// JSON-lines manifest. Blank lines are skipped, unknown fields ignored.
/// Relative paths are resolved against the manifest's directory.
inline std::vector<ManifestEntry> parse_manifest(std::istream& in, const fs::path& base = {}) {
  std::vector<ManifestEntry> out;
  std::string line;
  int lineno = 0;
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return (path.is_relative() && !base.empty() ? base / path : path).string();
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto bad = [&](const std::string& why) {
      detail::fail(ErrorKind::Parse, "manifest line " + std::to_string(lineno) + ": " + why);
    };
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      bad("not valid JSON");
    }
    if (!j.is_object()) bad("expected a JSON object");
    ManifestEntry e;
    if (!j.contains("scan_path") || !j["scan_path"].is_string()) bad("missing string field scan_path");
    e.scan_path = resolve(j["scan_path"].get<std::string>());
    if (j.contains("label_path") && !j["label_path"].is_null()) {
      if (!j["label_path"].is_string()) bad("label_path must be a string");
      e.label_path = resolve(j["label_path"].get<std::string>());
    }
    for (auto [key, field] : {std::pair{"dataset", &e.dataset}, std::pair{"pathology", &e.pathology}}) {
      if (!j.contains(key) || j[key].is_null()) continue;
      if (!j[key].is_string()) bad(std::string(key) + " must be a string");
      *field = j[key].get<std::string>();
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ManifestEntry> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) detail::fail(ErrorKind::Io, "cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path());
}

// ---------------------------------------------------------------------------
// Batch execution

struct Failure {
  std::string stage;
  std::string reason;
  ErrorKind kind = ErrorKind::Parameter;
};

struct ImageRecord {
  ManifestEntry entry;
  std::optional<Failure> failure;
  std::optional<metrics::ImageEvaluation> evaluation;  // set when a label exists
  std::size_t clamped_columns = 0;

  bool ok() const { return !failure; }
};

/// Scores of one group of evaluated images.
struct GroupScores {
  metrics::AggregateScores aggregate;
  metrics::PerClass classes{};
  metrics::ConfusionMatrix confusion;
};

struct RunReport {
  PipelineConfig config;
  double bf_tolerance = 0.0;
  std::vector<ImageRecord> images;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::optional<GroupScores> overall;  // empty when no image carried a label
  std::map<std::string, GroupScores> by_dataset;
  std::map<std::string, GroupScores> by_pathology;
};

/// Called once per successfully segmented scan, possibly from a worker thread.
using ResultSink = std::function<void(std::size_t index, const ManifestEntry&, const GrayImage& scan,
                                      const SegmentationResult&, const LabelMask* truth)>;

namespace detail {

using octseg::detail::fail;
using octseg::detail::require;

// Labels on another grid are brought to the canonical one by nearest neighbour.
inline LabelMask canonical_labels(const LabelMask& m) {
  if (m.size() == kCanonicalSize) return m;
  LabelMask out(kCanonicalSize);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      const int sx = std::min(m.width() - 1, static_cast<int>((x + 0.5) * m.width() / out.width()));
      const int sy = std::min(m.height() - 1, static_cast<int>((y + 0.5) * m.height() / out.height()));
      out.at(x, y) = m.at(sx, sy);
    }
  return out;
}

inline ImageRecord process_entry(std::size_t index, const ManifestEntry& entry, const PipelineConfig& cfg,
                                 double tolerance, const ResultSink& sink) {
  ImageRecord rec{entry, std::nullopt, std::nullopt, 0};
  auto record = [&](const std::string& stage, const Error& e) {
    rec.failure = Failure{stage, e.what(), e.kind()};
  };
  GrayImage scan;
  try {
    scan = io::read_scan(entry.scan_path);
  } catch (const Error& e) {
    record("read_scan", e);
    return rec;
  }
  std::optional<LabelMask> truth;
  if (entry.label_path) {
    try {
      truth = canonical_labels(io::read_mask(*entry.label_path));
    } catch (const Error& e) {
      record("read_label", e);
      return rec;
    }
  }
  SegmentationResult result;
  try {
    result = segment_scan(scan, cfg);
  } catch (const PipelineError& e) {
    rec.failure = Failure{e.stage(), e.reason(), e.kind()};
    return rec;
  } catch (const Error& e) {
    record("segment_scan", e);
    return rec;
  }
  rec.clamped_columns = result.junctions.clamped_columns;
  if (truth) rec.evaluation = metrics::evaluate_image(result.mask, *truth, tolerance);
  if (sink) sink(index, entry, preprocess(scan), result, truth ? &*truth : nullptr);
  return rec;
}

inline GroupScores score_group(const std::vector<metrics::ImageEvaluation>& evals) {
  GroupScores g;
  g.aggregate = metrics::aggregate(evals);
  g.classes = metrics::pooled_class_scores(evals);
  for (const auto& e : evals) g.confusion += e.confusion;
  return g;
}

}  // namespace detail

/// Recomputes success counts and the grouped scores from `r.images`.
inline void summarize(RunReport& r) {
  std::vector<metrics::ImageEvaluation> all;
  std::map<std::string, std::vector<metrics::ImageEvaluation>> datasets, pathologies;
  r.successes = r.failures = 0;
  for (const ImageRecord& rec : r.images) {
    if (rec.failure) {
      ++r.failures;
      continue;
    }
    ++r.successes;
    if (!rec.evaluation) continue;
    all.push_back(*rec.evaluation);
    datasets[rec.entry.dataset].push_back(*rec.evaluation);
    pathologies[rec.entry.pathology].push_back(*rec.evaluation);
  }
  r.overall.reset();
  r.by_dataset.clear();
  r.by_pathology.clear();
  if (!all.empty()) r.overall = detail::score_group(all);
  for (const auto& [tag, evals] : datasets) r.by_dataset[tag] = detail::score_group(evals);
  for (const auto& [tag, evals] : pathologies) r.by_pathology[tag] = detail::score_group(evals);
}

/// Segments every entry with `parallelism` workers and scores those with
/// labels. Per-scan failures are recorded; the batch only fails as a whole
/// when no scan could be read. Results are merged in manifest order, so the
/// report does not depend on scheduling.
inline RunReport run_batch(const std::vector<ManifestEntry>& manifest, const PipelineConfig& cfg,
                           int parallelism = 1, const ResultSink& sink = {}) {
  cfg.validate();
  detail::require(parallelism >= 1, ErrorKind::Parameter, "run_batch: parallelism must be >= 1");
  if (manifest.empty()) detail::fail(ErrorKind::EmptyCorpus, "manifest has no entries");

  RunReport report;
  report.config = cfg;
  report.bf_tolerance = cfg.bf_tolerance.value_or(metrics::default_bf_tolerance(kCanonicalSize));
  report.images.resize(manifest.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < manifest.size(); i = next++)
      report.images[i] = detail::process_entry(i, manifest[i], cfg, report.bf_tolerance, sink);
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism), manifest.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  }

  bool any_read = false;
  for (const ImageRecord& rec : report.images)
    if (!rec.failure || rec.failure->stage != "read_scan") any_read = true;
  if (!any_read) detail::fail(ErrorKind::EmptyCorpus, "no scan in the manifest could be read");
  summarize(report);
  return report;
}

// ---------------------------------------------------------------------------
// Report emission

namespace detail {

inline json class_scores_json(const metrics::ClassScores& s) {
  return {{"accuracy", s.accuracy}, {"iou", s.iou}, {"dsc", s.dsc}, {"bf", s.bf}, {"absent", s.absent}};
}

inline json per_class_json(const metrics::PerClass& pc) {
  json j = json::object();
  for (Compartment c : kCompartments) j[std::string(name_of(c))] = class_scores_json(pc[index_of(c)]);
  return j;
}

inline json confusion_json(const metrics::ConfusionMatrix& m) {
  json counts = json::array();
  json rates = json::array();
  const auto r = m.normalized();
  for (int i = 0; i < kClassCount; ++i) {
    counts.push_back(m.counts()[i]);
    rates.push_back(r[i]);
  }
  return {{"rows", "truth"}, {"columns", "predicted"}, {"counts", counts}, {"normalized", rates}};
}

inline json group_json(const GroupScores& g) {
  const auto& a = g.aggregate;
  return {{"images", a.images},
          {"global_accuracy", a.global_accuracy},
          {"mean_accuracy", a.mean_accuracy},
          {"mean_iou", a.mean_iou},
          {"weighted_iou", a.weighted_iou},
          {"mean_bf", a.mean_bf},
          {"pooled_bf", a.pooled_bf},
          {"classes", per_class_json(g.classes)},
          {"confusion", confusion_json(g.confusion)}};
}

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
}

}  // namespace detail

inline json report_json(const RunReport& r) {
  json images = json::array();
  for (const ImageRecord& rec : r.images) {
    json j{{"scan_path", rec.entry.scan_path},
           {"label_path", rec.entry.label_path ? json(*rec.entry.label_path) : json(nullptr)},
           {"dataset", rec.entry.dataset},
           {"pathology", rec.entry.pathology},
           {"status", rec.ok() ? "ok" : "failed"}};
    if (rec.failure)
      j["failure"] = {{"stage", rec.failure->stage},
                      {"kind", to_string(rec.failure->kind)},
                      {"reason", rec.failure->reason}};
    else
      j["clamped_columns"] = rec.clamped_columns;
    if (rec.evaluation) {
      j["classes"] = detail::per_class_json(rec.evaluation->scores);
      j["mean_bf"] = rec.evaluation->mean_bf();
    }
    images.push_back(std::move(j));
  }
  json out{{"config", to_json(r.config)},
           {"bf_tolerance", r.bf_tolerance},
           {"image_count", r.images.size()},
           {"successes", r.successes},
           {"failures", r.failures},
           {"overall", r.overall ? detail::group_json(*r.overall) : json(nullptr)},
           {"by_dataset", json::object()},
           {"by_pathology", json::object()},
           {"images", images}};
  for (const auto& [tag, g] : r.by_dataset) out["by_dataset"][tag] = detail::group_json(g);
  for (const auto& [tag, g] : r.by_pathology) out["by_pathology"][tag] = detail::group_json(g);
  return out;
}

/// metric x class, pooled over the corpus.
inline std::string class_metrics_csv(const GroupScores& g) {
  std::ostringstream s;
  s << "metric";
  for (Compartment c : kCompartments) s << ',' << display_name(c);
  s << '\n';
  const std::pair<const char*, double metrics::ClassScores::*> rows[] = {
      {"IoU", &metrics::ClassScores::iou},
      {"DSC", &metrics::ClassScores::dsc},
      {"Accuracy", &metrics::ClassScores::accuracy},
      {"Mean BF Score", &metrics::ClassScores::bf}};
  for (const auto& [name, field] : rows) {
    s << name;
    for (const auto& cs : g.classes) s << ',' << detail::fixed3(cs.*field);
    s << '\n';
  }
  return s.str();
}

/// metric x dataset tag, with an Overall column last.
inline std::string dataset_metrics_csv(const RunReport& r) {
  std::vector<std::pair<std::string, const GroupScores*>> cols;
  for (const auto& [tag, g] : r.by_dataset) cols.emplace_back(tag.empty() ? "(untagged)" : tag, &g);
  if (r.overall) cols.emplace_back("Overall", &*r.overall);
  std::ostringstream s;
  s << "metric";
  for (const auto& c : cols) s << ',' << c.first;
  s << '\n';
  const std::pair<const char*, double metrics::AggregateScores::*> rows[] = {
      {"Global Accuracy", &metrics::AggregateScores::global_accuracy},
      {"Mean Accuracy", &metrics::AggregateScores::mean_accuracy},
      {"Mean IoU", &metrics::AggregateScores::mean_iou},
      {"Weighted IoU", &metrics::AggregateScores::weighted_iou},
      {"Mean BF Score", &metrics::AggregateScores::mean_bf}};
  for (const auto& [name, field] : rows) {
    s << name;
    for (const auto& c : cols) s << ',' << detail::fixed3(c.second->aggregate.*field);
    s << '\n';
  }
  return s.str();
}

/// 4x4 row-normalised confusion, rows = truth, columns = prediction.
inline std::string confusion_csv(const metrics::ConfusionMatrix& m) {
  std::ostringstream s;
  s << "truth\\predicted";
  for (Compartment c : kCompartments) s << ',' << display_name(c);
  s << '\n';
  const auto r = m.normalized();
  for (Compartment c : kCompartments) {
    s << display_name(c);
    for (double v : r[index_of(c)]) s << ',' << detail::fixed3(v);
    s << '\n';
  }
  return s.str();
}

/// Writes metrics.json always; the CSV tables only when labels were scored.
inline std::vector<fs::path> emit_report(const RunReport& r, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) detail::fail(ErrorKind::Io, "cannot create output directory " + dir.string());
  std::vector<fs::path> written;
  auto put = [&](const char* name, const std::string& text) {
    detail::write_text(dir / name, text);
    written.push_back(dir / name);
  };
  put("metrics.json", report_json(r).dump(2) + "\n");
  if (r.overall) {
    put("class_metrics.csv", class_metrics_csv(*r.overall));
    put("dataset_metrics.csv", dataset_metrics_csv(r));
    put("confusion.csv", confusion_csv(r.overall->confusion));
  }
  return written;
}

}  // namespace octseg::harness
