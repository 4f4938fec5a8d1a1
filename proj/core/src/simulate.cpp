#include "ringloc/simulate.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "ringloc/camera.hpp"
#include "ringloc/image_io.hpp"
#include "ringloc/imgproc.hpp"

namespace ringloc::sim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kSupersample = 4;

enum class Hit { none, top, wall, surface };

struct RayHit {
  Hit kind = Hit::none;
  double t = kInf;
  Point3 local = Point3::Zero();
};

struct Scene {
  const SceneConfig& cfg;
  Eigen::Matrix3d r_t;  // camera -> local rotation
  Point3 origin;        // camera centre in local coordinates
  double r_in;
  double r_out;
  double h;

  explicit Scene(const SceneConfig& c)
      : cfg(c), r_in(c.ring.inner_radius()), r_out(c.ring.outer_radius()), h(c.ring.thickness) {
    const RigidTransform pose = c.pose();
    r_t = pose.rotation().transpose();
    origin = -(r_t * pose.translation());
  }

  void consider(RayHit& best, Hit kind, double t, const Vector3& d) const {
    if (!(t > 1e-9) || t >= best.t) return;
    best = {kind, t, origin + t * d};
  }

  void cylinder(RayHit& best, double radius, const Vector3& d) const {
    const double a = d.x() * d.x() + d.y() * d.y();
    if (a < 1e-18) return;
    const double b = 2.0 * (origin.x() * d.x() + origin.y() * d.y());
    const double c = origin.x() * origin.x() + origin.y() * origin.y() - radius * radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return;
    const double sq = std::sqrt(disc);
    for (const double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
      const double z = origin.z() + t * d.z();
      if (z >= 0.0 && z <= h) consider(best, Hit::wall, t, d);
    }
  }

  // Ray through pixel coordinates (u, v); the camera-frame direction has unit
  // z so the hit parameter is the depth.
  RayHit cast(double u, double v) const {
    const auto& k = cfg.intrinsics;
    const Vector3 dir_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
    const Vector3 d = r_t * dir_cam;
    RayHit best;

    if (std::abs(d.z()) > 1e-15) {
      const double t = (h - origin.z()) / d.z();
      const Point3 p = origin + t * d;
      const double rho = std::hypot(p.x(), p.y());
      if (rho >= r_in && rho <= r_out) consider(best, Hit::top, t, d);
    }
    cylinder(best, r_out, d);
    cylinder(best, r_in, d);

    if (cfg.surface.kind == SurfaceKind::plane) {
      if (std::abs(d.z()) > 1e-15) consider(best, Hit::surface, -origin.z() / d.z(), d);
    } else {
      const double radius = cfg.surface.radius_mm;
      const Vector3 oc = origin - Point3(0.0, 0.0, -radius);
      const double a = d.squaredNorm();
      const double b = 2.0 * oc.dot(d);
      const double c = oc.squaredNorm() - radius * radius;
      const double disc = b * b - 4.0 * a * c;
      if (disc >= 0.0) consider(best, Hit::surface, (-b - std::sqrt(disc)) / (2.0 * a), d);
    }
    return best;
  }

  double shade(const RayHit& hit) const {
    const double light = cfg.lighting_level;
    switch (hit.kind) {
      case Hit::top:
        return 220.0 * light;
      case Hit::wall:
        return 170.0 * light;
      case Hit::surface: {
        const double rho = std::hypot(hit.local.x(), hit.local.y());
        if (rho > r_out && rho <= r_out + cfg.contrast_ring_width) return 20.0 * light;
        return 90.0 * light;
      }
      case Hit::none:
        break;
    }
    return 90.0 * light;
  }
};

// Independent engines per noise source, so toggling one never shifts another.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt)};
  return std::mt19937_64(seq);
}

void check_fraction(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
}

nlohmann::json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::string dump(const nlohmann::json& j) {
  // nlohmann prints doubles with round-trip precision (17 significant digits).
  return j.dump(2);
}

}  // namespace

void NoiseModel::validate() const {
  for (double v : {z_sigma_at_400, z_sigma_slope, blur_px_at_400, blur_slope}) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("noise parameters must be finite and >= 0");
  }
  check_fraction(speckle_density, "speckle_density");
  check_fraction(dropout_rate, "dropout_rate");
}

double NoiseModel::z_sigma(double distance_mm) const {
  return std::max(0.0, z_sigma_at_400 + z_sigma_slope * (distance_mm - 400.0));
}

double NoiseModel::blur_sigma(double distance_mm) const {
  return std::max(0.0, blur_px_at_400 + blur_slope * (distance_mm - 400.0));
}

void SceneConfig::validate() const {
  if (!(distance >= 200.0 && distance <= 800.0)) throw InvalidArgument("distance must lie in [200, 800] mm");
  if (!(tilt >= 0.0 && tilt <= 45.0)) throw InvalidArgument("tilt must lie in [0, 45] degrees");
  if (!std::isfinite(offset_x) || !std::isfinite(offset_y)) throw InvalidArgument("offsets must be finite");
  ring.validate();
  intrinsics.validate();
  if (!intrinsics.bound()) throw InvalidArgument("scene intrinsics need an image size");
  check_fraction(lighting_level, "lighting_level");
  if (!(contrast_ring_width >= 0.0)) throw InvalidArgument("contrast_ring_width must be >= 0");
  if (surface.kind == SurfaceKind::sphere && !(surface.radius_mm > ring.outer_radius())) {
    throw InvalidArgument("sphere radius must exceed the ring's outer radius");
  }
  noise.validate();
  if (pose().translation().z() <= 0.0) throw InvalidArgument("marker must lie in front of the camera");
}

RigidTransform SceneConfig::pose() const {
  if (marker_pose) return *marker_pose;
  // Ring +z (outward) faces the camera at zero tilt.
  const Eigen::Matrix3d facing = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
  const Eigen::Matrix3d tilt_rot =
      Eigen::AngleAxisd(tilt * std::numbers::pi / 180.0, Vector3::UnitX()).toRotationMatrix();
  return RigidTransform::orthonormalized(tilt_rot * facing, Vector3(offset_x, offset_y, distance));
}

double exact_depth(const SceneConfig& config, double u, double v) {
  const Scene scene(config);
  const RayHit hit = scene.cast(u, v);
  return hit.kind == Hit::none ? 0.0 : hit.t;
}

Frame render(const SceneConfig& config) {
  config.validate();
  const Scene scene(config);
  const auto& intr = config.intrinsics;
  const int w = intr.width;
  const int h = intr.height;
  const RigidTransform pose = config.pose();

  Frame frame;
  frame.truth.center = pose.translation();
  frame.truth.normal = pose.rotate(Vector3::UnitZ());
  frame.truth.projected_center = project(frame.truth.center, intr);
  frame.truth.projected_outer_radius = config.ring.outer_radius() * intr.fx / frame.truth.center.z();

  // Depth: one ray per pixel centre.
  std::vector<double> depth(static_cast<std::size_t>(w) * h, 0.0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const RayHit hit = scene.cast(u, v);
      if (hit.kind != Hit::none) depth[static_cast<std::size_t>(v) * w + u] = hit.t;
    }
  }
  const double sigma_z = config.noise.z_sigma(frame.truth.center.z());
  if (sigma_z > 0.0) {
    auto rng = stream(config.seed, 1);
    std::normal_distribution<double> gauss(0.0, sigma_z);
    for (double& d : depth) {
      if (d > 0.0) d = std::max(0.0, d + gauss(rng));
    }
  }
  if (config.noise.dropout_rate > 0.0) {
    auto rng = stream(config.seed, 2);
    std::bernoulli_distribution drop(config.noise.dropout_rate);
    for (double& d : depth) {
      if (drop(rng)) d = 0.0;
    }
  }
  frame.depth = DepthImage(w, h, std::move(depth));

  // Gray: supersampled only where the ring or its dark band can appear.
  const double background = 90.0 * config.lighting_level;
  RealImage gray(w, h, background);
  const double reach = config.ring.outer_radius() + config.contrast_ring_width + config.ring.thickness + 2.0;
  const Point3 mid = pose.apply(Point3(0.0, 0.0, config.ring.thickness / 2.0));
  const double z_near = std::max(mid.z() - reach, 1.0);
  const double pix_reach = reach * std::max(intr.fx, intr.fy) / z_near + 3.0;
  const Pixel c = project(mid, intr);
  const int u0 = std::max(0, static_cast<int>(std::floor(c.x() - pix_reach)));
  const int u1 = std::min(w - 1, static_cast<int>(std::ceil(c.x() + pix_reach)));
  const int v0 = std::max(0, static_cast<int>(std::floor(c.y() - pix_reach)));
  const int v1 = std::min(h - 1, static_cast<int>(std::ceil(c.y() + pix_reach)));
  for (int v = v0; v <= v1; ++v) {
    for (int u = u0; u <= u1; ++u) {
      double acc = 0.0;
      for (int j = 0; j < kSupersample; ++j) {
        for (int i = 0; i < kSupersample; ++i) {
          const double su = u - 0.5 + (i + 0.5) / kSupersample;
          const double sv = v - 0.5 + (j + 0.5) / kSupersample;
          acc += scene.shade(scene.cast(su, sv));
        }
      }
      gray(u, v) = acc / (kSupersample * kSupersample);
    }
  }
  const double blur = config.noise.blur_sigma(frame.truth.center.z());
  if (blur > 0.0) gray = imgproc::gaussian_blur(gray, blur);

  double speckle = config.noise.speckle_density;
  if (config.single_shot && speckle == 0.0) speckle = 0.05;
  std::vector<std::uint8_t> out(gray.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(gray.data()[i]), 0L, 255L));
  }
  if (speckle > 0.0) {
    auto rng = stream(config.seed, 3);
    std::bernoulli_distribution hit(speckle);
    for (auto& px : out) {
      if (hit(rng)) px = 255;
    }
  }
  frame.gray = GrayImage(w, h, std::move(out));
  return frame;
}

std::vector<SweepItem> plan_sweep(const SceneConfig& base, SweepAxis axis, const std::vector<double>& values,
                                  int runs_per_value) {
  if (values.empty()) throw InvalidArgument("plan_sweep: no values");
  if (runs_per_value < 1) throw InvalidArgument("plan_sweep: runs_per_value must be >= 1");
  std::vector<SweepItem> items;
  std::uint64_t index = 0;
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    for (int run = 0; run < runs_per_value; ++run, ++index) {
      SceneConfig cfg = base;
      switch (axis) {
        case SweepAxis::distance:
          cfg.distance = values[vi];
          break;
        case SweepAxis::tilt:
          cfg.tilt = values[vi];
          break;
        case SweepAxis::noise:
          cfg.noise.z_sigma_at_400 = values[vi];
          break;
      }
      cfg.seed = base.seed + index;
      cfg.validate();
      std::ostringstream id;
      id << to_string(axis) << '_' << std::setw(3) << std::setfill('0') << vi << '_' << std::setw(4) << run;
      items.push_back({id.str(), values[vi], cfg});
    }
  }
  return items;
}

SweepOutput write_sweep(const std::vector<SweepItem>& items, const std::filesystem::path& out_dir, int jobs,
                        bool overwrite) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  const fs::path manifest_path = out_dir / "manifest.json";
  if (fs::exists(manifest_path) && !overwrite) {
    throw IoError(manifest_path.string() + " exists (use overwrite)");
  }

  std::vector<nlohmann::json> entries(items.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        const auto& item = items[i];
        const Frame frame = render(item.config);
        const std::string gray_name = item.id + "_gray.png";
        const std::string depth_name = item.id + "_depth.png";
        const std::string truth_name = item.id + "_truth.json";
        io::write_gray_png(out_dir / gray_name, frame.gray);
        io::write_depth_png(out_dir / depth_name, frame.depth);
        std::ofstream truth(out_dir / truth_name);
        truth << ground_truth_to_json(frame.truth) << '\n';
        if (!truth) throw IoError("failed writing " + (out_dir / truth_name).string());
        entries[i] = {{"id", item.id},
                      {"gray", gray_name},
                      {"depth", depth_name},
                      {"truth", truth_name},
                      {"value", item.value},
                      {"seed", item.config.seed}};
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = items.size();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(items.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  nlohmann::json manifest;
  manifest["depth_scale"] = io::kDepthPngScale;
  if (!items.empty()) {
    const auto& intr = items.front().config.intrinsics;
    manifest["intrinsics"] = {{"fx", intr.fx}, {"fy", intr.fy}, {"cx", intr.cx},
                              {"cy", intr.cy}, {"width", intr.width}, {"height", intr.height}};
  }
  manifest["frames"] = entries;
  std::ofstream out(manifest_path);
  out << dump(manifest) << '\n';
  if (!out) throw IoError("failed writing " + manifest_path.string());
  return {manifest_path, items.size()};
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::distance:
      return "distance";
    case SweepAxis::tilt:
      return "tilt";
    case SweepAxis::noise:
      return "noise";
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "distance") return SweepAxis::distance;
  if (text == "tilt") return SweepAxis::tilt;
  if (text == "noise") return SweepAxis::noise;
  throw ParseError("unknown sweep axis '" + text + "'");
}

std::string ground_truth_to_json(const GroundTruth& truth) {
  const nlohmann::json j = {{"center", vec_json(truth.center)},
                            {"normal", vec_json(truth.normal)},
                            {"projected_center", vec_json(truth.projected_center)},
                            {"projected_outer_radius", truth.projected_outer_radius}};
  return dump(j);
}

GroundTruth ground_truth_from_json(const std::string& document) {
  try {
    const auto j = nlohmann::json::parse(document);
    GroundTruth t;
    for (int i = 0; i < 3; ++i) {
      t.center(i) = j.at("center").at(i).get<double>();
      t.normal(i) = j.at("normal").at(i).get<double>();
    }
    for (int i = 0; i < 2; ++i) t.projected_center(i) = j.at("projected_center").at(i).get<double>();
    t.projected_outer_radius = j.at("projected_outer_radius").get<double>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("ground truth: ") + e.what());
  }
}

}  // namespace ringloc::sim
