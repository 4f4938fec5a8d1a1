#include "ringloc_cli/commands.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI/CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ringloc/cloud.hpp"
#include "ringloc/config.hpp"
#include "ringloc/detect.hpp"
#include "ringloc/error.hpp"
#include "ringloc/eval.hpp"
#include "ringloc/fourier.hpp"
#include "ringloc/image_io.hpp"
#include "ringloc/locate.hpp"
#include "ringloc/pipeline.hpp"
#include "ringloc/simulate.hpp"
#include "ringloc_cli/plot.hpp"
#include "ringloc_cli/run_manifest.hpp"

#ifndef RINGLOC_VERSION
#define RINGLOC_VERSION "unknown"
#endif

namespace ringloc::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Flag combinations CLI11 cannot express; reported like a parse error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void refuse_existing(const fs::path& path, bool overwrite) {
  if (!overwrite && fs::exists(path)) throw IoError(path.string() + " exists (pass --overwrite)");
}

void write_text(const fs::path& path, const std::string& text, bool overwrite) {
  refuse_existing(path, overwrite);
  ensure_parent(path);
  std::ofstream out(path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::string fmt_point(const Eigen::Vector3d& p) {
  std::ostringstream os;
  os << std::setprecision(10) << p.x() << ' ' << p.y() << ' ' << p.z();
  return os.str();
}

GrayImage mask_to_gray(const Mask& mask) {
  GrayImage out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.values().size(); ++i) out.data()[i] = mask.values()[i] ? 255 : 0;
  return out;
}

DepthImage rescale_depth(DepthImage depth, double png_scale) {
  if (png_scale == io::kDepthPngScale) return depth;
  const double f = io::kDepthPngScale / png_scale;
  for (auto& d : depth.data()) d *= f;
  return depth;
}

void dump_artifacts(const pipeline::Artifacts& a, const fs::path& stem) {
  ensure_parent(stem);
  if (a.enhanced) io::write_gray_png(stem.string() + ".enhanced.png", *a.enhanced);
  if (a.mask) io::write_gray_png(stem.string() + ".mask.png", mask_to_gray(*a.mask));
  if (a.roi_cloud) cloud::write_ply(stem.string() + ".roi.ply", *a.roi_cloud);
  spdlog::debug("artifacts written with prefix {}", stem.string());
}

std::optional<std::vector<detect::RoiBox>> load_rois(const std::optional<fs::path>& path, int width, int height) {
  if (!path) return std::nullopt;
  auto doc = detect::ingest_roi(read_text(*path), width, height);
  for (const auto& w : doc.warnings) spdlog::warn("{}: {}", path->string(), w);
  return doc.boxes;
}

pipeline::PipelineConfig pipeline_config(const std::optional<fs::path>& path) {
  if (path) return config::load_pipeline_config(*path);
  return {};
}

// ---------------------------------------------------------------------------
// enhance
// ---------------------------------------------------------------------------

struct EnhanceArgs {
  fs::path in, out;
  double sigma_narrow = 3.0;
  double sigma_wide = 15.0;
  std::optional<fs::path> spectrum;
  std::optional<fs::path> filter;
};

int cmd_enhance(const EnhanceArgs& a, bool overwrite) {
  const GrayImage gray = io::read_gray_png(a.in);
  const fourier::EnhanceOptions opts{a.sigma_narrow, a.sigma_wide};
  refuse_existing(a.out, overwrite);
  ensure_parent(a.out);
  io::write_gray_png(a.out, fourier::enhance(gray, opts));
  if (a.spectrum) {
    refuse_existing(*a.spectrum, overwrite);
    io::write_gray_png(*a.spectrum, fourier::log_magnitude_image(fourier::fft_forward(gray)));
  }
  if (a.filter) {
    refuse_existing(*a.filter, overwrite);
    const auto f = fourier::band_pass_filter(a.sigma_narrow, a.sigma_wide, gray.width(), gray.height());
    io::write_gray_png(*a.filter, fourier::filter_display_image(f));
  }
  spdlog::info("enhanced {} -> {}", a.in.string(), a.out.string());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

struct DetectArgs {
  fs::path in, out;
  std::optional<fs::path> roi_in;
  std::optional<fs::path> config;
};

int cmd_detect(const DetectArgs& a, bool overwrite) {
  const GrayImage gray = io::read_gray_png(a.in);
  std::vector<detect::RoiBox> boxes;
  if (a.roi_in) {
    boxes = *load_rois(a.roi_in, gray.width(), gray.height());
  } else {
    const auto cfg = pipeline_config(a.config);
    auto opts = cfg.detect;
    opts.ring = cfg.ring;
    if (a.config) opts.intrinsics = cfg.intrinsics;
    for (const auto& d : detect::detect_rings(gray, opts)) {
      boxes.push_back(d.roi);
      spdlog::info("ring at ({:.3f}, {:.3f}) r={:.3f} px, rms {:.4f}, circularity {:.4f}", d.circle.xc, d.circle.yc,
                   d.circle.r, d.circle.rms, d.circularity);
    }
  }
  write_text(a.out, detect::rois_to_json(boxes), overwrite);
  std::cout << boxes.size() << " roi(s) -> " << a.out.string() << '\n';
  return boxes.empty() ? kExitRejected : kExitOk;
}

// ---------------------------------------------------------------------------
// locate
// ---------------------------------------------------------------------------

struct LocateArgs {
  std::optional<fs::path> gray, depth, ply, roi, config;
  std::optional<std::string> method;
  fs::path out;
};

void print_result(const pipeline::FrameResult& r) {
  if (const auto c = r.center()) {
    std::cout << r.frame_id << ": accepted center " << fmt_point(*c);
    if (r.pose) std::cout << " normal " << fmt_point(r.pose->normal);
    std::cout << '\n';
  } else {
    std::cout << r.frame_id << ": failed at " << r.failed_stage << " (" << r.message << ")\n";
  }
}

pipeline::FrameResult locate_cloud(const fs::path& ply, const pipeline::PipelineConfig& cfg) {
  pipeline::FrameResult result;
  result.frame_id = ply.stem().string();
  result.method = pipeline::Method::refined;
  PointCloud cloud = cloud::read_ply(ply);
  if (cloud.size() < 10) {
    result.failed_stage = "cloud";
    result.message = "ROI cloud has fewer than 10 points";
    return result;
  }
  if (!cloud.has_normals()) cloud = cloud::estimate_normals(cloud, std::min(cfg.normals_k, cloud.size() - 1));
  const auto templ = cloud::make_ring_template(cfg.ring, cfg.template_spacing, cfg.template_shape);
  result.pose = refine::locate_marker(cloud, templ, cfg.locate);
  result.ok = result.pose->accepted();
  if (!result.ok) {
    result.failed_stage = "locate";
    result.message = std::string(refine::to_string(result.pose->quality));
  }
  return result;
}

int cmd_locate(const LocateArgs& a, bool overwrite, bool debug) {
  if (a.ply && (a.gray || a.depth)) throw UsageError("locate: --ply excludes --gray/--depth");
  if (!a.ply && !(a.gray && a.depth)) throw UsageError("locate: need --gray and --depth, or --ply");
  refuse_existing(a.out, overwrite);

  if (!a.ply && !a.config) throw UsageError("locate: --config is required with --gray/--depth");
  auto cfg = pipeline_config(a.config);
  if (a.method) cfg.method = pipeline::parse_method(*a.method);

  pipeline::FrameResult result;
  if (a.ply) {
    result = locate_cloud(*a.ply, cfg);
  } else {
    const GrayImage gray = io::read_gray_png(*a.gray);
    const DepthImage depth = io::read_depth_png(*a.depth);
    const auto rois = load_rois(a.roi, gray.width(), gray.height());
    if (rois) cfg.detector = pipeline::DetectorKind::external_roi;
    cfg.validate();
    pipeline::Artifacts artifacts;
    result = pipeline::run_frame(gray, depth, cfg, rois, a.gray->stem().string(), debug ? &artifacts : nullptr);
    if (debug) dump_artifacts(artifacts, a.out.parent_path() / a.out.stem());
  }
  write_text(a.out, pipeline::to_json(result), overwrite);
  print_result(result);
  return result.ok ? kExitOk : kExitRejected;
}

// ---------------------------------------------------------------------------
// locate-batch
// ---------------------------------------------------------------------------

struct BatchArgs {
  fs::path manifest;
  std::optional<fs::path> out;
  std::optional<fs::path> config;
  std::optional<std::string> method;
  int jobs = 1;
};

int cmd_locate_batch(const BatchArgs& a, bool overwrite, bool debug) {
  auto manifest = load_run_manifest(a.manifest);
  if (a.out) manifest.output_dir = *a.out;
  if (manifest.output_dir.empty()) throw UsageError("locate-batch: --out is required");
  manifest.validate();

  auto cfg = pipeline_config(a.config);
  if (!a.config) {
    if (!manifest.intrinsics) throw UsageError("locate-batch: manifest has no intrinsics; pass --config");
    cfg.intrinsics = *manifest.intrinsics;
  }
  if (a.method) cfg.method = pipeline::parse_method(*a.method);
  cfg.validate();

  const fs::path out_dir = manifest.output_dir;
  const fs::path summary_path = out_dir / "results.json";
  refuse_existing(summary_path, overwrite);
  fs::create_directories(out_dir);

  const auto& frames = manifest.frames;
  std::vector<pipeline::FrameResult> results(frames.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < frames.size(); i = next++) {
      try {
        const auto& f = frames[i];
        const GrayImage gray = io::read_gray_png(f.gray);
        const DepthImage depth = rescale_depth(io::read_depth_png(f.depth), manifest.depth_scale);
        auto frame_cfg = cfg;
        const auto rois = load_rois(f.roi, gray.width(), gray.height());
        if (rois) frame_cfg.detector = pipeline::DetectorKind::external_roi;
        pipeline::Artifacts artifacts;
        results[i] = pipeline::run_frame(gray, depth, frame_cfg, rois, f.id, debug ? &artifacts : nullptr);
        write_text(out_dir / (f.id + ".json"), pipeline::to_json(results[i]), true);
        if (debug) dump_artifacts(artifacts, out_dir / "debug" / f.id);
        spdlog::debug("{}: {}", f.id, results[i].ok ? "accepted" : results[i].failed_stage);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = frames.size();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(a.jobs, static_cast<int>(frames.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  json summary;
  summary["method"] = pipeline::to_string(cfg.method);
  summary["frames"] = json::array();
  std::size_t failures = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& r = results[i];
    json entry{{"id", frames[i].id}, {"ok", r.ok}, {"result", frames[i].id + ".json"}};
    if (const auto c = r.center()) entry["center"] = {c->x(), c->y(), c->z()};
    if (!r.ok) {
      entry["failed_stage"] = r.failed_stage;
      ++failures;
    }
    if (frames[i].value) entry["value"] = *frames[i].value;
    summary["frames"].push_back(entry);
    if (spdlog::should_log(spdlog::level::info)) print_result(r);
  }
  write_text(summary_path, summary.dump(2), overwrite);
  std::cout << frames.size() - failures << '/' << frames.size() << " frames accepted -> " << summary_path.string()
            << '\n';
  return failures == 0 ? kExitOk : kExitRejected;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  fs::path config, out;
  bool single_shot = false;
  int runs = 1;
  int jobs = 1;
};

int cmd_simulate(const SimulateArgs& a, bool overwrite) {
  auto sim_cfg = config::load_simulation_config(a.config);
  if (a.single_shot) sim_cfg.scene.single_shot = true;
  sim_cfg.scene.validate();
  std::vector<sim::SweepItem> items;
  if (sim_cfg.sweep) {
    const auto& s = *sim_cfg.sweep;
    items = sim::plan_sweep(sim_cfg.scene, s.axis, s.values, s.runs_per_value);
  } else {
    items = sim::plan_sweep(sim_cfg.scene, sim::SweepAxis::distance, {sim_cfg.scene.distance}, a.runs);
  }
  const auto out = sim::write_sweep(items, a.out, a.jobs, overwrite);
  std::cout << out.frames << " frame(s) -> " << out.manifest.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  fs::path in;
  std::optional<fs::path> baseline;
  std::optional<fs::path> out;
  std::optional<fs::path> plot;
  std::string std_convention = "population";
};

struct Runs {
  std::vector<eval::RunRecord> records;
  std::vector<std::optional<double>> values;
};

eval::RunRecord record_from_json(const json& j, const std::string& id_key) {
  eval::RunRecord r;
  r.id = j.value(id_key, std::string{});
  if (j.value("ok", false) && j.contains("center")) {
    const auto& c = j["center"];
    r.center = Point3(c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>());
  }
  return r;
}

// A results directory from locate-batch, a single summary document, a
// directory of per-frame results, or a whitespace table of centers.
Runs load_runs(const fs::path& path) {
  Runs runs;
  auto from_summary = [&](const fs::path& p) {
    try {
      const json doc = json::parse(read_text(p));
      for (const auto& f : doc.at("frames")) {
        runs.records.push_back(record_from_json(f, "id"));
        runs.values.push_back(f.contains("value") ? std::optional<double>(f["value"].get<double>()) : std::nullopt);
      }
    } catch (const json::exception& e) {
      throw ParseError(p.string() + ": " + e.what());
    }
  };
  if (fs::is_directory(path)) {
    if (fs::exists(path / "results.json")) {
      from_summary(path / "results.json");
      return runs;
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      json doc;
      try {
        doc = json::parse(read_text(f));
      } catch (const json::exception&) {
        continue;
      }
      if (!doc.is_object() || !doc.contains("frame_id") || !doc.contains("ok")) continue;
      runs.records.push_back(record_from_json(doc, "frame_id"));
      runs.values.emplace_back();
    }
    if (runs.records.empty()) throw ParseError(path.string() + ": no frame results found");
    return runs;
  }
  if (path.extension() == ".json") {
    from_summary(path);
    return runs;
  }
  runs.records = eval::parse_runs_table(read_text(path));
  runs.values.resize(runs.records.size());
  return runs;
}

std::vector<TrendPoint> trend(const Runs& runs, eval::StdConvention conv) {
  std::map<double, std::vector<eval::RunRecord>> groups;
  for (std::size_t i = 0; i < runs.records.size(); ++i) {
    if (runs.values[i]) groups[*runs.values[i]].push_back(runs.records[i]);
  }
  std::vector<TrendPoint> points;
  if (groups.size() < 2) return points;
  for (const auto& [value, records] : groups) {
    try {
      points.push_back({value, eval::repeatability(records, conv)});
    } catch (const InvalidArgument& e) {
      spdlog::warn("trend: value {} skipped ({})", value, e.what());
    }
  }
  return points;
}

int cmd_evaluate(const EvaluateArgs& a, bool overwrite) {
  const auto conv = a.std_convention == "sample" ? eval::StdConvention::sample : eval::StdConvention::population;
  const Runs runs = load_runs(a.in);
  const auto report = eval::repeatability(runs.records, conv);

  fs::path report_path;
  if (a.out) {
    report_path = *a.out;
  } else if (fs::is_directory(a.in)) {
    report_path = a.in / "report.json";
  }
  std::cout << eval::format_table(report);
  if (!report_path.empty()) {
    write_text(report_path, eval::to_json(report), overwrite);
    spdlog::info("report -> {}", report_path.string());
  }

  if (a.baseline) {
    const auto base = eval::repeatability(load_runs(*a.baseline).records, conv);
    const auto cmp = eval::compare(base, report);
    std::cout << "\nbaseline\n" << eval::format_table(base);
    std::cout << std::setprecision(10) << "\nmean deviation: baseline " << base.mean_deviation << ", refined "
              << report.mean_deviation << ", ratio " << cmp.deviation_ratio << '\n'
              << "failure rate: baseline " << cmp.baseline_failure_rate << ", refined " << cmp.refined_failure_rate
              << '\n';
    if (!report_path.empty()) {
      write_text(report_path.parent_path() / "baseline_report.json", eval::to_json(base), overwrite);
      write_text(report_path.parent_path() / "comparison.json", eval::to_json(cmp), overwrite);
    }
  }

  if (a.plot) {
    fs::create_directories(*a.plot);
    write_text(*a.plot / "scatter.csv", scatter_csv(report), overwrite);
    write_text(*a.plot / "scatter.svg", scatter_svg(report, "repeatability"), overwrite);
    const auto points = trend(runs, conv);
    if (!points.empty()) {
      write_text(*a.plot / "trend.csv", trend_csv(points, "value"), overwrite);
      write_text(*a.plot / "trend.svg", trend_svg(points, "sweep value"), overwrite);
    }
    spdlog::info("plots -> {}", a.plot->string());
  }
  return kExitOk;
}

void setup_logging(const std::string& level) {
  auto logger = std::make_shared<spdlog::logger>("ringloc", std::make_shared<spdlog::sinks::stderr_color_sink_mt>());
  logger->set_pattern("[%l] %v");
  if (level == "quiet") {
    logger->set_level(spdlog::level::err);
  } else if (level == "debug") {
    logger->set_level(spdlog::level::debug);
  } else {
    logger->set_level(spdlog::level::info);
  }
  spdlog::set_default_logger(logger);
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Annular fiducial marker localisation from grayscale + depth frames"};
  app.set_version_flag("--version", std::string("ringloc ") + RINGLOC_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  std::string log_level = "info";
  bool overwrite = false;
  app.add_option("--log-level", log_level, "quiet, info or debug (debug also dumps intermediate artifacts)")
      ->check(CLI::IsMember({"quiet", "info", "debug"}));
  app.add_flag("--overwrite", overwrite, "Replace existing outputs");

  auto* enhance = app.add_subcommand("enhance", "Fourier band-pass enhancement of a grayscale image");
  EnhanceArgs ea;
  enhance->add_option("--in", ea.in)->required()->check(CLI::ExistingFile);
  enhance->add_option("--out", ea.out)->required();
  enhance->add_option("--sigma-narrow", ea.sigma_narrow)->capture_default_str();
  enhance->add_option("--sigma-wide", ea.sigma_wide)->capture_default_str();
  enhance->add_option("--dump-spectrum", ea.spectrum, "Log-magnitude spectrum as an 8-bit image");
  enhance->add_option("--dump-filter", ea.filter, "Band-pass gains as an 8-bit image");

  auto* det = app.add_subcommand("detect", "Classical ring detection, writes ROI boxes");
  DetectArgs da;
  det->add_option("--in", da.in)->required()->check(CLI::ExistingFile);
  det->add_option("--out", da.out)->required();
  det->add_option("--roi-in", da.roi_in, "Use these boxes instead of the classical detector")
      ->check(CLI::ExistingFile);
  det->add_option("--config", da.config)->check(CLI::ExistingFile);

  auto* loc = app.add_subcommand("locate", "Locate the marker in one frame or one ROI cloud");
  LocateArgs la;
  loc->add_option("--gray", la.gray)->check(CLI::ExistingFile);
  loc->add_option("--depth", la.depth, "16-bit PNG, 0.1 mm units")->check(CLI::ExistingFile);
  loc->add_option("--ply", la.ply, "ASCII PLY ROI cloud instead of images")->check(CLI::ExistingFile);
  loc->add_option("--config", la.config)->check(CLI::ExistingFile);
  loc->add_option("--roi", la.roi)->check(CLI::ExistingFile);
  loc->add_option("--method", la.method)->check(CLI::IsMember({"baseline", "refined"}));
  loc->add_option("--out", la.out)->required();

  auto* batch = app.add_subcommand("locate-batch", "Locate the marker in every frame of a manifest");
  BatchArgs ba;
  batch->add_option("--manifest", ba.manifest)->required()->check(CLI::ExistingFile);
  batch->add_option("--out", ba.out);
  batch->add_option("--config", ba.config)->check(CLI::ExistingFile);
  batch->add_option("--method", ba.method)->check(CLI::IsMember({"baseline", "refined"}));
  batch->add_option("--jobs", ba.jobs)->check(CLI::PositiveNumber)->capture_default_str();

  auto* simu = app.add_subcommand("simulate", "Render synthetic structured-light frames");
  SimulateArgs sa;
  simu->add_option("--config", sa.config)->required()->check(CLI::ExistingFile);
  simu->add_option("--out", sa.out)->required();
  simu->add_flag("--single-shot", sa.single_shot, "Speckle the grayscale image as in one-shot capture");
  simu->add_option("--runs", sa.runs, "Frames when the config has no [sweep]")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simu->add_option("--jobs", sa.jobs)->check(CLI::PositiveNumber)->capture_default_str();

  auto* ev = app.add_subcommand("evaluate", "Repeatability statistics over located centers");
  EvaluateArgs va;
  ev->add_option("--in", va.in, "Results directory, results.json or a table of x y z rows")
      ->required()
      ->check(CLI::ExistingPath);
  ev->add_option("--baseline", va.baseline)->check(CLI::ExistingPath);
  ev->add_option("--out", va.out, "Report path (default <in>/report.json for directories)");
  ev->add_option("--plot", va.plot, "Directory for SVG/CSV scatter and sweep trend");
  ev->add_option("--std", va.std_convention)->check(CLI::IsMember({"population", "sample"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  setup_logging(log_level);
  const bool debug = log_level == "debug";
  try {
    if (enhance->parsed()) return cmd_enhance(ea, overwrite);
    if (det->parsed()) return cmd_detect(da, overwrite);
    if (loc->parsed()) return cmd_locate(la, overwrite, debug);
    if (batch->parsed()) return cmd_locate_batch(ba, overwrite, debug);
    if (simu->parsed()) return cmd_simulate(sa, overwrite);
    if (ev->parsed()) return cmd_evaluate(va, overwrite);
  } catch (const UsageError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace ringloc::cli
