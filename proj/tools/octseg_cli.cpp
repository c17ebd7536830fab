// octseg command-line front end: segment, extract, evaluate, phantom.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "octseg/octseg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kFatal = 3 };

// Errors from the library mapped onto the documented exit codes.
int exit_code_for(const octseg::Error& e) {
  if (dynamic_cast<const octseg::PipelineError*>(&e)) return kFatal;
  switch (e.kind()) {
    case octseg::ErrorKind::Io:
    case octseg::ErrorKind::Parse: return kIo;
    case octseg::ErrorKind::EmptyCorpus: return kFatal;
    case octseg::ErrorKind::Parameter: return kUsage;
    default: return kFatal;
  }
}

octseg::PipelineConfig config_or_exit(const std::string& path) {
  try {
    return octseg::resolve_config(path);
  } catch (const octseg::Error& e) {
    // A config that parses but fails validation is a bad file, not bad usage.
    throw octseg::Error(e.kind() == octseg::ErrorKind::Io ? e.kind() : octseg::ErrorKind::Parse, e.what());
  }
}

json curve_array(const octseg::BoundaryCurve& c) {
  json a = json::array();
  for (int x = 0; x < c.width(); ++x) a.push_back(c[x] ? json(*c[x]) : json(nullptr));
  return a;
}

json curves_json(const octseg::JunctionSet& js) {
  return {{"width", js.width()},
          {"height", js.height},
          {"ilm", curve_array(js.ilm)},
          {"rpe", curve_array(js.rpe)},
          {"cs", curve_array(js.cs)},
          {"clamped_columns", js.clamped_columns}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw octseg::Error(octseg::ErrorKind::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Junction curves drawn over the scan: ILM red, RPE yellow, CS cyan.
octseg::RgbImage render_curves(const octseg::GrayImage& scan, const octseg::JunctionSet& js) {
  octseg::RgbImage out(scan.width(), scan.height());
  for (int y = 0; y < scan.height(); ++y)
    for (int x = 0; x < scan.width(); ++x) out.set(x, y, scan.at(x, y), scan.at(x, y), scan.at(x, y));
  auto draw = [&](const octseg::BoundaryCurve& c, double r, double g, double b) {
    for (int x = 0; x < c.width(); ++x)
      if (c[x]) {
        const int y = std::clamp(static_cast<int>(std::lround(*c[x])), 0, scan.height() - 1);
        out.set(x, y, r, g, b);
      }
  };
  draw(js.ilm, 1, 0, 0);
  draw(js.rpe, 1, 1, 0);
  draw(js.cs, 0, 1, 1);
  return out;
}

octseg::Compartment parse_class(const std::string& name) {
  const auto c = octseg::compartment_from_name(name);
  if (!c) throw octseg::Error(octseg::ErrorKind::Parameter, "unknown class '" + name + "'");
  return *c;
}

// ---------------------------------------------------------------------------

struct SegmentArgs {
  std::string input, config, out_mask, out_curves, out_render;
};

int run_segment(const SegmentArgs& a) {
  const octseg::PipelineConfig cfg = config_or_exit(a.config);
  const octseg::GrayImage scan = octseg::io::read_scan(a.input);
  const octseg::SegmentationResult r = octseg::segment_scan(scan, cfg);
  octseg::io::write_mask(a.out_mask, r.mask);
  write_json(a.out_curves, curves_json(r.junctions));
  if (!a.out_render.empty()) octseg::io::write_rgb(a.out_render, render_curves(octseg::preprocess(scan), r.junctions));
  if (r.junctions.clamped_columns)
    std::cerr << "warning: " << r.junctions.clamped_columns << " columns clamped to restore ordering\n";
  return kOk;
}

struct ExtractArgs {
  std::string input, mask, cls, out;
};

int run_extract(const ExtractArgs& a) {
  const octseg::Compartment c = parse_class(a.cls);
  octseg::GrayImage scan = octseg::io::read_scan(a.input);
  const octseg::LabelMask mask = octseg::io::read_mask(a.mask);
  if (scan.size() != mask.size()) scan = octseg::preprocess(scan);
  octseg::io::write_gray(a.out, octseg::extract_compartment(scan, mask, c));
  return kOk;
}

struct EvaluateArgs {
  std::string manifest, config, out_dir, overlay_class;
  int parallelism = 1;
};

int run_evaluate(const EvaluateArgs& a) {
  const octseg::PipelineConfig cfg = config_or_exit(a.config);
  const auto manifest = octseg::harness::load_manifest(a.manifest);
  const fs::path out_dir(a.out_dir);
  octseg::harness::ResultSink sink;
  std::mutex err_mutex;
  if (!a.overlay_class.empty()) {
    const octseg::Compartment c = parse_class(a.overlay_class);
    fs::create_directories(out_dir / "overlays");
    sink = [&, c](std::size_t i, const octseg::harness::ManifestEntry& e, const octseg::GrayImage& scan,
                  const octseg::SegmentationResult& r, const octseg::LabelMask* truth) {
      if (!truth) return;
      char prefix[16];
      std::snprintf(prefix, sizeof prefix, "%04zu_", i);
      const fs::path p = out_dir / "overlays" / (prefix + fs::path(e.scan_path).stem().string() + ".png");
      try {
        octseg::io::write_rgb(p, octseg::render_overlay(scan, r.mask, *truth, c));
      } catch (const octseg::Error& err) {
        std::lock_guard lock(err_mutex);
        std::cerr << "warning: " << err.what() << '\n';
      }
    };
  }
  const auto report = octseg::harness::run_batch(manifest, cfg, a.parallelism, sink);
  octseg::harness::emit_report(report, out_dir);
  for (const auto& rec : report.images)
    if (rec.failure)
      std::cerr << rec.entry.scan_path << ": failed at " << rec.failure->stage << ": " << rec.failure->reason
                << '\n';
  std::cout << report.successes << " of " << report.images.size() << " scans segmented";
  if (report.overall) std::cout << ", mean IoU " << octseg::harness::detail::fixed3(report.overall->aggregate.mean_iou);
  std::cout << '\n';
  return report.successes == 0 ? kFatal : kOk;
}

struct PhantomArgs {
  std::string spec, out_dir;
  int count = 1;
  std::uint64_t seed = 0;
};

octseg::phantom::Cubic read_cubic(const json& j, const char* key) {
  if (!j.is_array() || j.empty() || j.size() > 4)
    throw octseg::Error(octseg::ErrorKind::Parse, std::string("phantom spec: ") + key +
                                                      " must be an array of 1 to 4 coefficients");
  octseg::phantom::Cubic c{0, 0, 0, 0};
  for (std::size_t i = 0; i < j.size(); ++i) c[i] = j[i].get<double>();
  return c;
}

// Curves given in the spec are used for every phantom; omitted curves are
// drawn at random per phantom.
octseg::phantom::PhantomSpec phantom_spec(const json& j, std::uint64_t seed) {
  const double speckle = j.value("speckle_strength", 0.0);
  auto spec = octseg::phantom::random_spec(seed, speckle);
  if (j.contains("ilm")) spec.ilm = read_cubic(j["ilm"], "ilm");
  if (j.contains("rpe")) spec.rpe = read_cubic(j["rpe"], "rpe");
  if (j.contains("cs")) spec.cs = read_cubic(j["cs"], "cs");
  if (j.contains("reflectivity")) {
    const json& r = j["reflectivity"];
    spec.reflectivity.vitreous = r.value("vitreous", spec.reflectivity.vitreous);
    spec.reflectivity.retina = r.value("retina", spec.reflectivity.retina);
    spec.reflectivity.choroid = r.value("choroid", spec.reflectivity.choroid);
    spec.reflectivity.sclera = r.value("sclera", spec.reflectivity.sclera);
  }
  spec.rpe_band_intensity = j.value("rpe_band_intensity", spec.rpe_band_intensity);
  spec.rpe_band_halfwidth = j.value("rpe_band_halfwidth", spec.rpe_band_halfwidth);
  return spec;
}

int run_phantom(const PhantomArgs& a) {
  json spec_json = json::object();
  if (!a.spec.empty()) {
    std::ifstream in(a.spec);
    if (!in) throw octseg::Error(octseg::ErrorKind::Io, "cannot open " + a.spec);
    try {
      spec_json = json::parse(in);
    } catch (const json::exception& e) {
      throw octseg::Error(octseg::ErrorKind::Parse, a.spec + ": " + e.what());
    }
  }
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  std::ofstream manifest(dir / "manifest.jsonl");
  if (!manifest) throw octseg::Error(octseg::ErrorKind::Io, "cannot write " + (dir / "manifest.jsonl").string());
  const std::string dataset = spec_json.value("dataset", "phantom");
  const std::string pathology = spec_json.value("pathology", "healthy");
  for (int i = 0; i < a.count; ++i) {
    octseg::phantom::PhantomSpec spec;
    try {
      spec = phantom_spec(spec_json, a.seed + static_cast<std::uint64_t>(i));
    } catch (const json::exception& e) {
      throw octseg::Error(octseg::ErrorKind::Parse, "phantom spec: " + std::string(e.what()));
    }
    const auto p = octseg::phantom::generate(spec);
    char stem[32];
    std::snprintf(stem, sizeof stem, "%04d", i);
    const std::string scan = std::string("scan_") + stem + ".png";
    const std::string mask = std::string("mask_") + stem + ".png";
    octseg::io::write_gray(dir / scan, p.scan);
    octseg::io::write_mask(dir / mask, p.mask);
    json curves = curves_json(p.junctions);
    curves["seed"] = spec.seed;
    write_json(dir / (std::string("curves_") + stem + ".json"), curves);
    manifest << json{{"scan_path", scan}, {"label_path", mask}, {"dataset", dataset}, {"pathology", pathology}}.dump()
             << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posterior-eye OCT compartment segmentation"};
  app.require_subcommand(1);

  SegmentArgs seg;
  auto* s = app.add_subcommand("segment", "Segment one B-scan");
  s->add_option("--input", seg.input, "Scan image (PNG or PGM)")->required();
  s->add_option("--config", seg.config, "Config JSON (default: $OCTSEG_CONFIG, else built-in)");
  s->add_option("--out-mask", seg.out_mask, "Class-id mask PNG")->required();
  s->add_option("--out-curves", seg.out_curves, "Junction curves JSON")->required();
  s->add_option("--out-render", seg.out_render, "Scan with the curves drawn on it");

  ExtractArgs ext;
  auto* e = app.add_subcommand("extract", "Cut one compartment out of a scan");
  e->add_option("--input", ext.input, "Scan image")->required();
  e->add_option("--mask", ext.mask, "Class-id mask PNG")->required();
  e->add_option("--class", ext.cls, "vitreous, retina, choroid or sclera")->required();
  e->add_option("--out", ext.out, "Output image")->required();

  EvaluateArgs ev;
  auto* v = app.add_subcommand("evaluate", "Segment and score a manifest of scans");
  v->add_option("--manifest", ev.manifest, "JSON-lines manifest")->required();
  v->add_option("--config", ev.config, "Config JSON (default: $OCTSEG_CONFIG, else built-in)");
  v->add_option("--out-dir", ev.out_dir, "Report directory")->required();
  v->add_option("--parallelism", ev.parallelism, "Worker threads")->check(CLI::PositiveNumber);
  v->add_option("--overlay-class", ev.overlay_class, "Write FP/FN overlays for this class");

  PhantomArgs ph;
  auto* p = app.add_subcommand("phantom", "Generate synthetic B-scans with ground truth");
  p->add_option("--spec", ph.spec, "Phantom spec JSON");
  p->add_option("--count", ph.count, "Number of phantoms")->check(CLI::PositiveNumber);
  p->add_option("--seed", ph.seed, "Seed of the first phantom");
  p->add_option("--out-dir", ph.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return run_segment(seg);
    if (*e) return run_extract(ext);
    if (*v) return run_evaluate(ev);
    if (*p) return run_phantom(ph);
  } catch (const octseg::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return exit_code_for(err);
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kIo;
  }
  return kUsage;
}
