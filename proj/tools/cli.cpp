#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pothole/pipeline.hpp"
#include "pothole/testkit/synth.hpp"
#include "pothole/text_io.hpp"

namespace pothole {
namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
  std::optional<std::string> method;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", o.sets, "override one setting, key=value (repeatable)");
  cmd->add_option("--seed", o.seed, "seed for all randomised steps");
  cmd->add_option("--tau", o.tau, "damage threshold in frame units");
  cmd->add_option("--method", o.method, "histogram threshold: otsu or triangle")
      ->check(CLI::IsMember({"otsu", "triangle"}));
}

PipelineConfig build_config(const CommonOptions& o) {
  PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : load_config(o.config);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(Errc::invalid_argument, "--set expects key=value, got " + s);
    auto trim = [](std::string t) {
      const auto b = t.find_first_not_of(" \t");
      const auto e = t.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    cfg.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  if (o.seed) cfg.ransac.seed = *o.seed;
  if (o.tau) cfg.tau = *o.tau;
  if (o.method) cfg.set("threshold_method", *o.method);
  if (cfg.camera && cfg.disparity_scale) cfg.camera->disparity_scale = *cfg.disparity_scale;
  cfg.validate();
  return cfg;
}

RansacConfig ransac_of(const PipelineConfig& cfg) {
  RansacConfig r = cfg.ransac;
  r.inlier_threshold = cfg.inlier_threshold();
  return r;
}

DisparityImage load_input(const fs::path& path, const PipelineConfig& cfg) {
  return load_disparity(path, cfg.disparity_scale, cfg.invalid_value);
}

std::string sidecar(const std::string& out, const char* suffix) {
  const fs::path p(out);
  return (p.parent_path() / p.stem()).string() + suffix;
}

std::string file_id(std::string id) {
  std::replace(id.begin(), id.end(), '/', '_');
  return id;
}

std::string detection_report(const DetectionResult& r) {
  std::ostringstream os;
  os << format_fit_report(r.fit);
  os << "threshold = " << format_double(r.threshold.threshold) << '\n';
  os << "threshold_bin = " << r.threshold.bin << '\n';
  os << "road_pixels = " << r.fit.point_count << '\n';
  os << "damaged_pixels = " << r.mask.damaged_count() << '\n';
  os << "regions = " << r.mask.regions.size() << '\n';
  for (const auto& reg : r.mask.regions) {
    os << "region" << reg.id << " = " << reg.area << ' ' << reg.min_u << ' ' << reg.min_v << ' ' << reg.max_u << ' '
       << reg.max_v << ' ' << format_double(reg.centroid_u) << ' ' << format_double(reg.centroid_v) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

struct TransformArgs {
  CommonOptions common;
  std::string disparity, out, model, vdisp;
  double out_scale = 256.0;
  double vdisp_bin_width = 1.0;
};

int cmd_transform(const TransformArgs& a, std::ostream& out) {
  const PipelineConfig cfg = build_config(a.common);
  const DisparityImage disp = load_input(a.disparity, cfg);
  const RoadDisparityModel model = fit_model(collect_road_samples(disp, cfg.fit_stride));
  const TransformedDisparity t = transform_disparity(disp, model);
  save_disparity(DisparityImage(t.values, t.valid), a.out, a.out_scale);
  const std::string model_path = a.model.empty() ? sidecar(a.out, ".model.txt") : a.model;
  write_model(model_path, t.model);
  if (!a.vdisp.empty()) {
    const VDisparityMap map = build_v_disparity(disp, a.vdisp_bin_width);
    RawRaster raw{map.bins, map.rows, 16, {}};
    raw.samples.reserve(map.counts.size());
    for (const auto c : map.counts) raw.samples.push_back(static_cast<std::uint16_t>(std::min<std::uint32_t>(c, 65535)));
    write_raster(a.vdisp, raw);
  }
  out << format_model(t.model);
  return 0;
}

struct FitArgs {
  CommonOptions common;
  std::string disparity, ply, mask, out, ply_out;
  std::optional<unsigned> threads;
};

int cmd_fit_surface(const FitArgs& a, std::ostream& out) {
  PipelineConfig cfg = build_config(a.common);
  if (a.threads) cfg.ransac.threads = *a.threads;
  SurfacePoints points;
  SurfaceFrame frame = SurfaceFrame::metric_xz;
  if (!a.ply.empty()) {
    points = surface_points(read_ply(a.ply));
  } else {
    DisparityImage disp = load_input(a.disparity, cfg);
    if (!a.mask.empty()) {
      const BinaryMask sel = load_mask(a.mask);
      if (!sel.same_shape(disp.width(), disp.height())) {
        throw Error(Errc::dimension_mismatch, "mask and disparity differ in size");
      }
      for (int v = 0; v < disp.height(); ++v) {
        for (int u = 0; u < disp.width(); ++u) {
          if (!sel(u, v)) disp.invalidate(u, v);
        }
      }
    }
    if (cfg.camera) {
      const PointCloud3D cloud = disparity_to_pointcloud(disp, *cfg.camera, cfg.min_disparity);
      if (!a.ply_out.empty()) write_ply(a.ply_out, cloud);
      points = surface_points(cloud);
    } else {
      frame = SurfaceFrame::image_uv;
      points = surface_points(disp);
    }
  }
  const FitReport report = ransac_fit(points, ransac_of(cfg), frame);
  if (a.out.empty()) {
    out << format_fit_report(report);
  } else {
    write_fit_report(a.out, report);
  }
  return 0;
}

struct DetectArgs {
  CommonOptions common;
  std::string disparity, out, report, model;
  std::optional<unsigned> threads;
};

int cmd_detect(const DetectArgs& a, std::ostream& out) {
  PipelineConfig cfg = build_config(a.common);
  if (a.threads) cfg.ransac.threads = *a.threads;
  const DetectionResult r = detect_potholes(load_input(a.disparity, cfg), cfg);
  save_mask(r.mask, a.out);
  write_model(a.model.empty() ? sidecar(a.out, ".model.txt") : a.model, r.transformed.model);
  const std::string report = detection_report(r);
  write_file_atomic(a.report.empty() ? sidecar(a.out, ".report.txt") : a.report, report);
  out << "regions = " << r.mask.regions.size() << "\ndamaged_pixels = " << r.mask.damaged_count() << '\n';
  return 0;
}

struct EvalArgs {
  std::string pred, gt, out;
};

std::map<std::string, fs::path> masks_by_key(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::io, "not a directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    if (ext != ".png" && ext != ".pgm") continue;
    const std::string stem = e.path().stem().string();
    // Inputs sharing the directory with masks are not masks.
    if (stem.ends_with("_disp") || stem.ends_with("_tdisp") || stem.ends_with("_rgb")) continue;
    out.emplace(sample_key(e.path()), e.path());
  }
  return out;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto preds = masks_by_key(a.pred);
  const auto gts = masks_by_key(a.gt);
  std::vector<EvalReport> reports;
  for (const auto& [key, gt_path] : gts) {
    const auto it = preds.find(key);
    if (it == preds.end()) {
      err << "warning: no prediction for " << key << '\n';
      continue;
    }
    EvalReport r = evaluate(load_mask(it->second), load_mask(gt_path));
    r.id = key;
    reports.push_back(std::move(r));
  }
  if (reports.empty()) throw Error(Errc::empty_selection, "no prediction/ground-truth pairs found");
  const std::string csv = format_eval_csv(summarize(std::move(reports)));
  if (a.out.empty()) {
    out << csv;
  } else {
    write_file_atomic(a.out, csv);
  }
  return 0;
}

struct SynthArgs {
  std::string out;
  int count = 10;
  std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const auto specs = testkit::detection_suite(a.count, a.seed);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "scene_%03zu", i);
    testkit::write_scene(a.out, stem, specs[i], testkit::generate_scene(specs[i]));
  }
  out << "scenes = " << specs.size() << '\n';
  return 0;
}

struct BatchArgs {
  CommonOptions common;
  std::string root, layout, out;
  unsigned threads = 1;
};

int cmd_batch(const BatchArgs& a, std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = build_config(a.common);
  const DatasetListing listing = load_dataset(a.root, parse_layout(a.layout));
  for (const auto& w : listing.warnings) err << "warning: " << w << '\n';
  fs::create_directories(a.out);

  const std::size_t n = listing.samples.size();
  std::vector<std::optional<EvalReport>> reports(n);
  std::vector<std::string> failures(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const DatasetSample& s = listing.samples[i];
      try {
        DamageMask mask;
        if (s.disparity) {
          mask = detect_potholes(load_input(*s.disparity, cfg), cfg).mask;
        } else {
          const DisparityImage t = load_input(*s.transformed, cfg);
          mask = detect_from_transformed(t.values(), t.validity(), cfg);
        }
        save_mask(mask, fs::path(a.out) / (file_id(s.id) + "_mask.png"));
        EvalReport r = evaluate(mask, load_mask(s.label));
        r.id = s.id;
        reports[i] = std::move(r);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned workers = std::max(1u, std::min<unsigned>(a.threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }

  std::vector<EvalReport> done;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (reports[i]) {
      done.push_back(*reports[i]);
    } else {
      ++failed;
      err << "error: " << listing.samples[i].id << ": " << failures[i] << '\n';
    }
  }
  if (!done.empty()) {
    const EvalSummary summary = summarize(std::move(done));
    write_file_atomic(fs::path(a.out) / "metrics.csv", format_eval_csv(summary));
    char line[160];
    std::snprintf(line, sizeof line, "images = %zu\nfailed = %zu\nmean_iou = %.6f\nmean_f_score = %.6f\n",
                  summary.images.size(), failed, summary.mean.iou, summary.mean.f_score);
    out << line;
  } else {
    out << "images = 0\nfailed = " << failed << '\n';
  }
  return failed == 0 && n > 0 ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pothole detection from dense disparity images", "pothole"};
  app.require_subcommand(1);

  TransformArgs ta;
  auto* transform = app.add_subcommand("transform", "fit the road model and write the transformed disparity");
  add_common(transform, ta.common);
  transform->add_option("--disparity", ta.disparity, "disparity raster")->required()->check(CLI::ExistingFile);
  transform->add_option("--out", ta.out, "transformed disparity raster")->required();
  transform->add_option("--model", ta.model, "model sidecar (default <out>.model.txt)");
  transform->add_option("--out-scale", ta.out_scale, "raw units per px in the output raster")
      ->check(CLI::PositiveNumber);
  transform->add_option("--vdisp", ta.vdisp, "also write the v-disparity map");
  transform->add_option("--vdisp-bin-width", ta.vdisp_bin_width, "v-disparity bin width, px")
      ->check(CLI::PositiveNumber);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit-surface", "robust quadratic surface fit");
  add_common(fit, fa.common);
  auto* fit_disp = fit->add_option("--disparity", fa.disparity, "disparity raster")->check(CLI::ExistingFile);
  auto* fit_ply = fit->add_option("--ply", fa.ply, "ASCII PLY point cloud (metric frame)")->check(CLI::ExistingFile);
  fit_disp->excludes(fit_ply);
  fit->add_option("--mask", fa.mask, "restrict the fit to nonzero mask pixels")->check(CLI::ExistingFile)->needs(fit_disp);
  fit->add_option("--out", fa.out, "fit report (default stdout)");
  fit->add_option("--ply-out", fa.ply_out, "write the back-projected cloud (needs camera settings)");
  fit->add_option("--threads", fa.threads, "RANSAC worker threads")->check(CLI::PositiveNumber);

  DetectArgs da;
  auto* detect = app.add_subcommand("detect", "detect potholes in one disparity image");
  add_common(detect, da.common);
  detect->add_option("--disparity", da.disparity, "disparity raster")->required()->check(CLI::ExistingFile);
  detect->add_option("--out", da.out, "damage mask raster")->required();
  detect->add_option("--report", da.report, "report sidecar (default <out>.report.txt)");
  detect->add_option("--model", da.model, "model sidecar (default <out>.model.txt)");
  detect->add_option("--threads", da.threads, "RANSAC worker threads")->check(CLI::PositiveNumber);

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "pixel metrics of predicted masks against ground truth");
  eval->add_option("--pred", ea.pred, "prediction directory")->required();
  eval->add_option("--gt", ea.gt, "ground-truth directory")->required();
  eval->add_option("--out", ea.out, "CSV output (default stdout)");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "generate synthetic scenes in the flat-pairs layout");
  synth->add_option("--out", sa.out, "output directory")->required();
  synth->add_option("--count", sa.count, "number of scenes")->check(CLI::PositiveNumber);
  synth->add_option("--seed", sa.seed, "scene seed");

  BatchArgs ba;
  auto* batch = app.add_subcommand("batch", "detect over a dataset and evaluate");
  add_common(batch, ba.common);
  batch->add_option("--root", ba.root, "dataset root")->required()->check(CLI::ExistingDirectory);
  batch->add_option("--layout", ba.layout, "stereo-potholes, pothole600 or flat-pairs")
      ->required()
      ->check(CLI::IsMember({"stereo-potholes", "pothole600", "flat-pairs"}));
  batch->add_option("--out", ba.out, "output directory for masks and metrics.csv")->required();
  batch->add_option("--threads", ba.threads, "images processed concurrently")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }
  if (fit->parsed() && fa.disparity.empty() && fa.ply.empty()) {
    err << "usage error: fit-surface needs --disparity or --ply\n";
    return 2;
  }

  try {
    if (transform->parsed()) return cmd_transform(ta, out);
    if (fit->parsed()) return cmd_fit_surface(fa, out);
    if (detect->parsed()) return cmd_detect(da, out);
    if (eval->parsed()) return cmd_eval(ea, out, err);
    if (synth->parsed()) return cmd_synth(sa, out);
    if (batch->parsed()) return cmd_batch(ba, out, err);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace pothole
