#include "ringloc/cloud.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "ringloc/camera.hpp"
#include "ringloc/kdtree.hpp"

namespace ringloc::cloud {
namespace {

Vector3 toward_camera(const Vector3& n, const Point3& p) { return n.dot(-p) < 0.0 ? -n : n; }

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

PointCloud depth_to_cloud(std::span<const roi::DepthSample> survivors,
                          const CameraIntrinsics& intrinsics) {
  if (survivors.empty()) throw EmptyCloud("depth_to_cloud: no surviving depth samples");
  std::vector<Point3> points;
  points.reserve(survivors.size());
  for (const auto& s : survivors) points.push_back(back_project(s.u, s.v, s.depth, intrinsics));
  return PointCloud(std::move(points));
}

PointCloud clamp_extent(const PointCloud& cloud, double max_extent_mm) {
  if (!(max_extent_mm > 0.0)) throw InvalidArgument("clamp_extent: extent must be positive");
  if (cloud.empty()) return cloud;
  Point3 center;
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> coords;
    coords.reserve(cloud.size());
    for (const auto& p : cloud.points()) coords.push_back(p[axis]);
    center[axis] = median(std::move(coords));
  }
  const double limit2 = 0.25 * max_extent_mm * max_extent_mm;
  std::vector<Point3> points;
  std::vector<Vector3> normals;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if ((cloud.points()[i] - center).squaredNorm() > limit2) continue;
    points.push_back(cloud.points()[i]);
    if (cloud.has_normals()) normals.push_back(cloud.normals()[i]);
  }
  if (cloud.has_normals()) return PointCloud(std::move(points), std::move(normals));
  return PointCloud(std::move(points));
}

PointCloud estimate_normals(const PointCloud& cloud, std::size_t k) {
  if (k < 3) throw InvalidArgument("estimate_normals: k must be >= 3");
  if (cloud.size() < k + 1) throw InvalidArgument("estimate_normals: cloud must have more than k points");
  const KdTree tree(cloud.points());
  std::vector<Vector3> normals;
  normals.reserve(cloud.size());
  for (const auto& p : cloud.points()) {
    const auto nbrs = tree.knn(p, k);
    Point3 mean = Point3::Zero();
    for (const auto& n : nbrs) mean += cloud.points()[n.index];
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& n : nbrs) {
      const Vector3 d = cloud.points()[n.index] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const auto& ev = eig.eigenvalues();
    if (ev(1) <= 1e-12 * std::max(ev(2), 1e-300)) {
      throw DegenerateFit("estimate_normals: collinear neighbourhood has no defined normal");
    }
    normals.push_back(toward_camera(eig.eigenvectors().col(0).normalized(), p));
  }
  return PointCloud(cloud.points(), std::move(normals));
}

PlaneFit fit_plane(const PointCloud& cloud) {
  if (cloud.size() < 3) throw DegenerateFit("fit_plane: needs at least 3 points");
  PlaneFit fit;
  fit.centroid = cloud.centroid();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : cloud.points()) {
    const Vector3 d = p - fit.centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(cloud.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  if (eig.eigenvalues()(1) <= 1e-12 * std::max(eig.eigenvalues()(2), 1e-300)) {
    throw DegenerateFit("fit_plane: points are collinear");
  }
  fit.eigenvalues = eig.eigenvalues();
  Vector3 n = eig.eigenvectors().col(0).normalized();
  fit.normal = n.dot(-fit.centroid) < 0.0 ? Vector3(-n) : n;
  fit.rms = std::sqrt(std::max(0.0, eig.eigenvalues()(0)));
  return fit;
}

RingTemplate make_ring_template(const RingSpec& spec, double sample_spacing, TemplateShape shape) {
  spec.validate();
  const double r_in = spec.inner_radius();
  const double r_out = spec.outer_radius();
  const double width = r_out - r_in;
  if (!(sample_spacing > 0.0) || sample_spacing > width / 4.0) {
    throw InvalidArgument("make_ring_template: spacing must lie in (0, (outer - inner radius) / 4]");
  }

  std::vector<Point3> points;
  std::vector<Vector3> normals;
  const double top_z = shape == TemplateShape::flat ? 0.0 : spec.thickness;

  // Concentric circles filling [r0, r1] at height z, facing +z.
  auto disk = [&](double r0, double r1, double z) {
    const int n_radial = std::max(1, static_cast<int>(std::lround((r1 - r0) / sample_spacing)));
    const double dr = (r1 - r0) / n_radial;
    for (int i = 0; i < n_radial; ++i) {
      const double r = r0 + (i + 0.5) * dr;
      const int n = std::max(3, static_cast<int>(std::lround(2.0 * std::numbers::pi * r / sample_spacing)));
      const double phase = (i % 2 == 0) ? 0.0 : std::numbers::pi / n;
      for (int j = 0; j < n; ++j) {
        const double a = 2.0 * std::numbers::pi * j / n + phase;
        points.emplace_back(r * std::cos(a), r * std::sin(a), z);
        normals.emplace_back(0.0, 0.0, 1.0);
      }
    }
  };

  disk(r_in, r_out, top_z);

  if (shape != TemplateShape::flat) {
    const int n_z = std::max(1, static_cast<int>(std::lround(spec.thickness / sample_spacing)));
    const double dz = spec.thickness / n_z;
    for (const double r : {r_in, r_out}) {
      const double sign = r == r_out ? 1.0 : -1.0;
      const int n = std::max(3, static_cast<int>(std::lround(2.0 * std::numbers::pi * r / sample_spacing)));
      for (int k = 0; k < n_z; ++k) {
        const double z = (k + 0.5) * dz;
        const double phase = (k % 2 == 0) ? 0.0 : std::numbers::pi / n;
        for (int j = 0; j < n; ++j) {
          const double a = 2.0 * std::numbers::pi * j / n + phase;
          points.emplace_back(r * std::cos(a), r * std::sin(a), z);
          normals.emplace_back(sign * std::cos(a), sign * std::sin(a), 0.0);
        }
      }
    }
  }
  if (shape == TemplateShape::seated) {
    disk(0.0, r_in, 0.0);
    disk(r_out, r_out + kSeatedCollar, 0.0);
  }

  Point3 centroid = Point3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  // Radial symmetry puts the xy centroid at the origin up to round-off; only the
  // axial offset is removed so radii stay exact.
  centroid.x() = 0.0;
  centroid.y() = 0.0;
  for (auto& p : points) p -= centroid;

  RingTemplate tpl{PointCloud(std::move(points), std::move(normals)), spec, sample_spacing, shape,
                   Point3(0.0, 0.0, -centroid.z())};
  if (shape == TemplateShape::flat) tpl.base_center = Point3(0.0, 0.0, -spec.thickness);
  return tpl;
}

std::string to_ply(const PointCloud& cloud) {
  std::ostringstream out;
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_normals()) out << "property double nx\nproperty double ny\nproperty double nz\n";
  out << "end_header\n" << std::setprecision(12);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points()[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z();
    if (cloud.has_normals()) {
      const auto& n = cloud.normals()[i];
      out << ' ' << n.x() << ' ' << n.y() << ' ' << n.z();
    }
    out << '\n';
  }
  return out.str();
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_ply(cloud);
  if (!out) throw IoError("failed writing " + path.string());
}

PointCloud parse_ply(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw ParseError("PLY: missing magic");
  std::size_t vertices = 0;
  bool vertex_element = false;
  std::vector<std::string> props;
  bool ascii = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      std::string name;
      std::size_t count = 0;
      ls >> name >> count;
      vertex_element = name == "vertex";
      if (vertex_element) vertices = count;
    } else if (word == "property" && vertex_element) {
      std::string type;
      std::string name;
      ls >> type >> name;
      if (type == "list") throw ParseError("PLY: list properties on vertices are not supported");
      props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!ascii) throw ParseError("PLY: only ASCII format is supported");
  auto find = [&](const std::string& name) -> int {
    const auto it = std::find(props.begin(), props.end(), name);
    return it == props.end() ? -1 : static_cast<int>(it - props.begin());
  };
  const int ix = find("x"), iy = find("y"), iz = find("z");
  const int inx = find("nx"), iny = find("ny"), inz = find("nz");
  if (ix < 0 || iy < 0 || iz < 0) throw ParseError("PLY: x, y, z properties are required");
  const bool has_normals = inx >= 0 && iny >= 0 && inz >= 0;

  std::vector<Point3> points;
  std::vector<Vector3> normals;
  points.reserve(vertices);
  std::vector<double> row(props.size());
  for (std::size_t i = 0; i < vertices; ++i) {
    for (auto& value : row) {
      if (!(in >> value)) throw ParseError("PLY: truncated vertex data");
    }
    points.emplace_back(row[ix], row[iy], row[iz]);
    if (has_normals) {
      Vector3 n(row[inx], row[iny], row[inz]);
      // Text round-off can leave normals a hair off unit length.
      if (n.norm() > 0.0) n.normalize();
      normals.push_back(n);
    }
  }
  if (has_normals) return PointCloud(std::move(points), std::move(normals));
  return PointCloud(std::move(points));
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_ply(buffer.str());
}

}  // namespace ringloc::cloud
