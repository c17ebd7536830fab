// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "octseg/octseg.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace octseg;
using octseg::testgen::Gen;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kWienerTol = 1e-9;
constexpr double kFloatTol = 1e-12;
constexpr double kPsdTol = 1e-9;
constexpr double kAlignCos = 0.99;
constexpr double kCurveTol = 1e-6;
constexpr double kMeanIouSpeckle = 0.90;
constexpr double kMeanIouClean = 0.97;
constexpr double kMaxMaePx = 3.0;
constexpr double kRowSumTol = 1e-9;
constexpr int kPhantoms = 20;
constexpr std::uint64_t kSeedBase = 1000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mae(const BoundaryCurve& a, const BoundaryCurve& b) {
  double s = 0;
  for (int x = 0; x < a.width(); ++x) s += std::abs(*a[x] - *b[x]);
  return s / a.width();
}

// 1 ---------------------------------------------------------------------------
// Reference values are rounded to 3 decimals: a pair holds when dsc() maps the
// IoU rounding interval onto a range that meets the DSC rounding interval.
Outcome reference_pairs() {
  const double pairs[4][2] = {{0.969, 0.984}, {0.893, 0.944}, {0.711, 0.831}, {0.921, 0.959}};
  Outcome o{true, ""};
  for (const auto& p : pairs) {
    const double lo = metrics::dsc(p[0] - 0.0005), hi = metrics::dsc(p[0] + 0.0005);
    const bool ok = hi >= p[1] - 0.0005 && lo < p[1] + 0.0005;
    o.pass = o.pass && ok;
    o.detail += fmt("%.3f->%.5f (ref %.3f, range [%.5f,%.5f]%s) ", p[0], metrics::dsc(p[0]), p[1], lo, hi,
                    ok ? "" : " MISS");
  }
  return o;
}

// 2 ---------------------------------------------------------------------------
Outcome metric_oracles() {
  Gen g(2);
  int mismatches = 0;
  for (int t = 0; t < 100; ++t) {
    const LabelMask p = g.labels(16, 16), q = g.labels(16, 16);
    const auto conf = metrics::confusion(p, q);
    if (conf.counts() != oracle::confusion(p, q)) ++mismatches;
    for (int c = 0; c < kClassCount; ++c) {
      const auto k = metrics::count_pixels(p, q, static_cast<Compartment>(c));
      const auto r = oracle::counts(p, q, c);
      if (k.tp != r.tp || k.tn != r.tn || k.fp != r.fp || k.fn != r.fn) ++mismatches;
      const double total = static_cast<double>(r.tp + r.tn + r.fp + r.fn);
      const double acc = (r.tp + r.tn) / total;
      const double denom = static_cast<double>(r.tp + r.fp + r.fn);
      const double iou = denom == 0 ? 1.0 : r.tp / denom;
      if (std::abs(metrics::accuracy(k) - acc) > kFloatTol) ++mismatches;
      if (std::abs(metrics::iou(k) - iou) > kFloatTol) ++mismatches;
    }
    const auto rates = conf.normalized();
    const auto raw = oracle::confusion(p, q);
    for (int i = 0; i < kClassCount; ++i) {
      double row = 0;
      for (auto v : raw[i]) row += static_cast<double>(v);
      for (int j = 0; j < kClassCount; ++j)
        if (row > 0 && std::abs(rates[i][j] - raw[i][j] / row) > kFloatTol) ++mismatches;
    }
  }
  return {mismatches == 0, fmt("100 random 16x16 pairs, %d mismatches", mismatches)};
}

// 3 ---------------------------------------------------------------------------
Outcome wiener_check() {
  Gen g(3);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const GrayImage img = g.gray(8, 8);
    const int n = g.odd(3, 7), m = g.odd(3, 7);
    const bool automatic = g.coin();
    const double v = g.real(0.0, 0.05);
    const GrayImage out =
        filters::wiener(img, {n, m, automatic ? std::nullopt : std::optional<double>(v)});
    const GrayImage ref = oracle::wiener(img, n, m, v, automatic);
    for (std::size_t i = 0; i < ref.pixels().size(); ++i)
      worst = std::max(worst, std::abs(out.pixels()[i] - ref.pixels()[i]));
  }
  bool constant_ok = true;
  for (int t = 0; t < 10; ++t) {
    const GrayImage c(8, 8, g.real(0, 1));
    constant_ok = constant_ok && filters::wiener(c, {g.odd(3, 7), g.odd(3, 7), std::nullopt}) == c &&
                  filters::wiener(c, {3, 5, g.real(0, 0.1)}) == c;
  }
  return {worst <= kWienerTol && constant_ok,
          fmt("max |diff| %.3g over 50 images (tol %.0e); constant identity %s", worst, kWienerTol,
              constant_ok ? "exact" : "BROKEN")};
}

// 4 ---------------------------------------------------------------------------
Outcome tensor_check() {
  bool zero = true;
  const auto cf = filters::structure_tensor(GrayImage(40, 30, 0.6), 1.0, 2.5);
  for (const GrayImage* p : {&cf.jxx, &cf.jxy, &cf.jyy})
    for (double v : p->pixels()) zero = zero && v == 0.0;

  double min_cos = 1.0;
  Gen g(4);
  for (int t = 0; t < 8; ++t) {
    const double ang = g.real(0, 2 * std::numbers::pi);
    const double gx = std::cos(ang), gy = std::sin(ang);
    GrayImage ramp(64, 48);
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 64; ++x) ramp.at(x, y) = 0.5 + 0.004 * (gx * (x - 32) + gy * (y - 24));
    const auto f = filters::structure_tensor(ramp, 1.0, 2.5);
    for (int y = 12; y < 36; ++y)
      for (int x = 12; x < 52; ++x) {
        const auto e = filters::eigen_symmetric(f.jxx.at(x, y), f.jxy.at(x, y), f.jyy.at(x, y));
        min_cos = std::min(min_cos, std::abs(e.dir_x * gx + e.dir_y * gy));
      }
  }

  double min_eig = 0.0;
  for (int t = 0; t < 10; ++t) {
    const auto f = filters::structure_tensor(g.gray(32, 24), g.real(0.5, 2.0), g.real(0.5, 3.0));
    for (std::size_t i = 0; i < f.jxx.pixels().size(); ++i)
      min_eig = std::min(min_eig, filters::eigen_symmetric(f.jxx.pixels()[i], f.jxy.pixels()[i],
                                                           f.jyy.pixels()[i]).minor);
  }
  return {zero && min_cos > kAlignCos && min_eig >= -kPsdTol,
          fmt("constant->zero %s; min |cos| on ramps %.6f (> %.2f); min eigenvalue %.3g (>= -%.0e)",
              zero ? "yes" : "NO", min_cos, kAlignCos, min_eig, kPsdTol)};
}

// 5 ---------------------------------------------------------------------------
Outcome curve_check() {
  Gen g(5);
  double worst_fill = 0, worst_fit = 0;
  int knots_changed = 0;
  for (int t = 0; t < 50; ++t) {
    const std::array<double, 4> c{g.real(120, 240), g.real(-30, 30), g.real(-30, 30), g.real(-15, 15)};
    BoundaryCurve truth(480, 360);
    for (int x = 0; x < 480; ++x) truth[x] = phantom::curve_row(c, x, 480);
    BoundaryCurve gappy = truth;
    for (int gaps = g.integer(1, 4); gaps > 0; --gaps) {
      const int a = g.integer(1, 460), len = g.integer(1, 12);
      for (int x = a; x < a + len; ++x) gappy[x].reset();
    }
    const BoundaryCurve r = repair_spline(gappy);
    for (int x = 0; x < 480; ++x) {
      worst_fill = std::max(worst_fill, std::abs(*r[x] - *truth[x]));
      if (gappy[x] && r[x] != gappy[x]) ++knots_changed;
    }
    const BoundaryCurve s = smooth_polyfit(truth, 3);
    for (int x = 0; x < 480; ++x) worst_fit = std::max(worst_fit, std::abs(*s[x] - *truth[x]));
  }
  return {worst_fill <= kCurveTol && worst_fit <= kCurveTol && knots_changed == 0,
          fmt("spline fill max err %.3g, polyfit max err %.3g (tol %.0e), altered knots %d", worst_fill, worst_fit,
              kCurveTol, knots_changed)};
}

// 6 ---------------------------------------------------------------------------
struct PhantomRun {
  double mean_iou = 0;
  double mae[3] = {0, 0, 0};
  int failures = 0;
};

PhantomRun phantom_run(double speckle) {
  PhantomRun out;
  std::vector<metrics::ImageEvaluation> evals;
  for (int i = 0; i < kPhantoms; ++i) {
    const auto p = phantom::generate(phantom::random_spec(kSeedBase + i, speckle));
    try {
      const auto r = segment_scan(p.scan, PipelineConfig{});
      evals.push_back(metrics::evaluate_image(r.mask, p.mask, metrics::default_bf_tolerance()));
      out.mae[0] += mae(r.junctions.ilm, p.junctions.ilm) / kPhantoms;
      out.mae[1] += mae(r.junctions.rpe, p.junctions.rpe) / kPhantoms;
      out.mae[2] += mae(r.junctions.cs, p.junctions.cs) / kPhantoms;
    } catch (const Error&) {
      ++out.failures;
    }
  }
  if (!evals.empty()) out.mean_iou = metrics::aggregate(evals).mean_iou;
  return out;
}

Outcome phantom_end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  const PhantomRun noisy = phantom_run(0.2);
  const PhantomRun clean = phantom_run(0.0);
  const double secs = seconds_since(t0);
  const double worst_mae = std::max({noisy.mae[0], noisy.mae[1], noisy.mae[2]});
  const bool ok = noisy.failures == 0 && clean.failures == 0 && noisy.mean_iou >= kMeanIouSpeckle &&
                  worst_mae <= kMaxMaePx && clean.mean_iou >= kMeanIouClean && secs <= 30.0;
  return {ok, fmt("speckle 0.2: mIoU %.4f (>= %.2f), MAE ilm/rpe/cs %.2f/%.2f/%.2f px (<= %.0f); "
                  "speckle 0: mIoU %.4f (>= %.2f); failures %d+%d; %.1f s (<= 30)",
                  noisy.mean_iou, kMeanIouSpeckle, noisy.mae[0], noisy.mae[1], noisy.mae[2], kMaxMaePx,
                  clean.mean_iou, kMeanIouClean, noisy.failures, clean.failures, secs)};
}

// 7 ---------------------------------------------------------------------------
std::vector<harness::ManifestEntry> write_phantom_corpus(const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream m(dir / "manifest.jsonl");
  const char* datasets[] = {"Bioptigen", "Cirrus", "Spectralis", "Topcon"};
  for (int i = 0; i < kPhantoms; ++i) {
    const auto p = phantom::generate(phantom::random_spec(kSeedBase + i, 0.2));
    const std::string scan = fmt("scan_%02d.png", i), mask = fmt("mask_%02d.png", i);
    io::write_gray(dir / scan, p.scan);
    io::write_mask(dir / mask, p.mask);
    m << nlohmann::json{{"scan_path", scan}, {"label_path", mask}, {"dataset", datasets[i % 4]},
                        {"pathology", i % 3 ? "Healthy" : "AMD"}}
             .dump()
      << '\n';
  }
  m.close();
  return harness::load_manifest(dir / "manifest.jsonl");
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const fs::path& work, harness::RunReport& keep) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto manifest = write_phantom_corpus(work / "corpus");
  std::vector<std::string> blobs;
  const int levels[] = {1, 8, 1};
  for (int k = 0; k < 3; ++k) {
    const auto report = harness::run_batch(manifest, PipelineConfig{}, levels[k]);
    const fs::path out = work / fmt("report_%d", k);
    harness::emit_report(report, out);
    blobs.push_back(read_all(out / "metrics.json"));
    if (k == 0) keep = report;
  }
  const double secs = seconds_since(t0);
  const bool same = !blobs[0].empty() && blobs[0] == blobs[1] && blobs[0] == blobs[2];
  const bool complete = keep.successes == kPhantoms && keep.overall && keep.overall->aggregate.mean_iou >= 0.90;
  return {same && complete && secs <= 60.0,
          fmt("metrics.json identical at parallelism 1/8/1: %s (%zu bytes); %zu/%d successes, mIoU %.4f; %.1f s "
              "(<= 60)",
              same ? "yes" : "NO", blobs[0].size(), keep.successes, kPhantoms,
              keep.overall ? keep.overall->aggregate.mean_iou : 0.0, secs)};
}

// 8 ---------------------------------------------------------------------------
Outcome confusion_contract(const harness::RunReport& baseline) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_row = 0;
  auto check_rows = [&](const metrics::ConfusionMatrix& m) {
    for (const auto& row : m.normalized()) {
      double s = 0;
      for (double v : row) s += v;
      worst_row = std::max(worst_row, std::abs(s - 1.0));
    }
  };
  if (baseline.overall) check_rows(baseline.overall->confusion);

  metrics::ConfusionMatrix corrupted;
  for (int i = 0; i < 5; ++i) {
    const auto p = phantom::generate(phantom::random_spec(kSeedBase + i, 0.2));
    auto r = segment_scan(p.scan, PipelineConfig{});
    for (int x = 0; x < r.junctions.width(); ++x) r.junctions.cs[x] = std::min(359.0, *r.junctions.cs[x] + 10.0);
    corrupted += metrics::confusion(compose_mask(r.junctions), p.mask);
  }
  check_rows(corrupted);
  const auto rates = corrupted.normalized();
  const double s2c = rates[3][2], c2s = rates[2][3];
  const double secs = seconds_since(t0);
  return {worst_row <= kRowSumTol && s2c > c2s && secs <= 10.0,
          fmt("max |row sum - 1| %.2g (tol %.0e); CS+10 px: sclera->choroid %.4f > choroid->sclera %.4f; %.1f s "
              "(<= 10)",
              worst_row, kRowSumTol, s2c, c2s, secs)};
}

// 9 ---------------------------------------------------------------------------
Outcome partition_check() {
  Gen g(9);
  int bad_columns = 0, bad_pixels = 0;
  for (int t = 0; t < 30; ++t) {
    JunctionSet js;
    if (t < 10) {
      js = phantom::ground_truth_junctions(phantom::random_spec(static_cast<std::uint64_t>(t), 0.0));
    } else {
      js = {BoundaryCurve(480, 360), BoundaryCurve(480, 360), BoundaryCurve(480, 360), 360, 0};
      for (int x = 0; x < 480; ++x) {
        js.ilm[x] = g.real(0, 359);
        js.rpe[x] = g.real(0, 359);
        js.cs[x] = g.real(0, 359);
      }
    }
    const LabelMask m = compose_mask(js);
    for (int x = 0; x < 480; ++x) {
      int n = 0;
      bool mono = true;
      for (int y = 0; y < 360; ++y) {
        n += m.at(x, y) < kClassCount;
        if (y && m.at(x, y) < m.at(x, y - 1)) mono = false;
      }
      if (!mono || n != 360) ++bad_columns;
    }
    const GrayImage scan = g.gray(480, 360);
    std::array<GrayImage, kClassCount> parts;
    for (Compartment c : kCompartments) parts[index_of(c)] = extract_compartment(scan, m, c);
    for (std::size_t i = 0; i < scan.pixels().size(); ++i) {
      int owners = 0;
      double sum = 0;
      for (const auto& part : parts) {
        owners += part.pixels()[i] != 0.0;
        sum += part.pixels()[i];
      }
      const int owner = m.pixels()[i];
      if (sum != scan.pixels()[i] || owners > 1 || parts[owner].pixels()[i] != scan.pixels()[i]) ++bad_pixels;
    }
  }
  return {bad_columns == 0 && bad_pixels == 0,
          fmt("30 masks: %d non-monotone or short columns, %d pixels outside an exact partition", bad_columns,
              bad_pixels)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"octseg acceptance suite"};
  std::string work = (fs::temp_directory_path() / "octseg_acceptance").string();
  app.add_option("--work-dir", work, "Scratch directory for the batch-run criterion");
  CLI11_PARSE(app, argc, argv);
  fs::remove_all(work);
  fs::create_directories(work);

  harness::RunReport baseline;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"iou-dsc-reference-pairs", reference_pairs},
      {"metric-oracle-equivalence", metric_oracles},
      {"wiener-correctness", wiener_check},
      {"structure-tensor-properties", tensor_check},
      {"curve-repair-exactness", curve_check},
      {"phantom-end-to-end", phantom_end_to_end},
      {"determinism-order-independence", [&] { return determinism(work, baseline); }},
      {"confusion-matrix-contract", [&] { return confusion_contract(baseline); }},
      {"mask-partition-properties", partition_check},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
