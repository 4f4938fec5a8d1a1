#include "ringloc/imgproc.hpp"

#include <algorithm>
#include <cmath>

namespace ringloc::imgproc {
namespace {

int mirror(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& w : k) w /= sum;
  return k;
}

// Clockwise (y down) starting at west.
constexpr std::array<PixelCoord, 8> kNeighbours{{{-1, 0}, {-1, -1}, {0, -1}, {1, -1},
                                                 {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

int neighbour_index(int du, int dv) {
  for (int i = 0; i < 8; ++i) {
    if (kNeighbours[i].u == du && kNeighbours[i].v == dv) return i;
  }
  return -1;
}

}  // namespace

RealImage gaussian_blur(const RealImage& image, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian_blur: sigma must be > 0");
  const auto k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const int w = image.width();
  const int h = image.height();
  RealImage tmp(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * image(mirror(u + i, w), v);
      tmp(u, v) = acc;
    }
  }
  RealImage out(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * tmp(u, mirror(v + i, h));
      out(u, v) = acc;
    }
  }
  return out;
}

GrayImage gaussian_blur(const GrayImage& image, double sigma) {
  std::vector<double> values(image.data().begin(), image.data().end());
  const auto blurred = gaussian_blur(RealImage(image.width(), image.height(), std::move(values)), sigma);
  GrayImage out(image.width(), image.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = static_cast<std::uint8_t>(std::clamp(std::lround(blurred.data()[i]), 0L, 255L));
  }
  return out;
}

RealImage sobel_magnitude(const RealImage& image) {
  const int w = image.width();
  const int h = image.height();
  auto at = [&](int u, int v) { return image(std::clamp(u, 0, w - 1), std::clamp(v, 0, h - 1)); };
  RealImage out(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double gx = (at(u + 1, v - 1) + 2.0 * at(u + 1, v) + at(u + 1, v + 1)) -
                        (at(u - 1, v - 1) + 2.0 * at(u - 1, v) + at(u - 1, v + 1));
      const double gy = (at(u - 1, v + 1) + 2.0 * at(u, v + 1) + at(u + 1, v + 1)) -
                        (at(u - 1, v - 1) + 2.0 * at(u, v - 1) + at(u + 1, v - 1));
      out(u, v) = std::hypot(gx, gy);
    }
  }
  return out;
}

std::array<std::uint64_t, 256> histogram(const GrayImage& image) {
  std::array<std::uint64_t, 256> hist{};
  for (auto value : image.data()) ++hist[value];
  return hist;
}

int otsu_threshold(const std::array<std::uint64_t, 256>& hist) {
  double total = 0.0;
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) {
    total += static_cast<double>(hist[i]);
    sum_all += i * static_cast<double>(hist[i]);
  }
  if (total == 0.0) return 0;
  double best = -1.0;
  int best_t = 0;
  double w0 = 0.0;
  double sum0 = 0.0;
  for (int t = 0; t < 255; ++t) {
    w0 += static_cast<double>(hist[t]);
    sum0 += t * static_cast<double>(hist[t]);
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

BinaryImage erode3x3(const BinaryImage& image) {
  const int w = image.width();
  const int h = image.height();
  BinaryImage out(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      std::uint8_t keep = 1;
      for (int dv = -1; dv <= 1 && keep; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          if (!image.contains(u + du, v + dv) || !image(u + du, v + dv)) {
            keep = 0;
            break;
          }
        }
      }
      out(u, v) = keep;
    }
  }
  return out;
}

BinaryImage dilate3x3(const BinaryImage& image) {
  const int w = image.width();
  const int h = image.height();
  BinaryImage out(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      std::uint8_t hit = 0;
      for (int dv = -1; dv <= 1 && !hit; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          if (image.contains(u + du, v + dv) && image(u + du, v + dv)) {
            hit = 1;
            break;
          }
        }
      }
      out(u, v) = hit;
    }
  }
  return out;
}

BinaryImage open3x3(const BinaryImage& image) { return dilate3x3(erode3x3(image)); }

Contour trace_outer_contour(const std::vector<int>& labels, int width, int height, int label,
                            PixelCoord start) {
  auto inside = [&](PixelCoord p) {
    return p.u >= 0 && p.v >= 0 && p.u < width && p.v < height &&
           labels[static_cast<std::size_t>(p.v) * width + p.u] == label;
  };
  Contour contour{start};
  PixelCoord p = start;
  PixelCoord back{start.u - 1, start.v};
  const std::size_t max_steps = 4 * static_cast<std::size_t>(width) * height + 8;
  for (std::size_t step = 0; step < max_steps; ++step) {
    const int k = neighbour_index(back.u - p.u, back.v - p.v);
    PixelCoord prev = back;
    bool found = false;
    PixelCoord next{};
    for (int i = 1; i <= 8; ++i) {
      const auto& d = kNeighbours[(k + i) % 8];
      const PixelCoord q{p.u + d.u, p.v + d.v};
      if (inside(q)) {
        next = q;
        found = true;
        break;
      }
      prev = q;
    }
    if (!found) return contour;  // isolated pixel
    // Back at the start and about to repeat the first move: the loop is closed.
    // The state after a move depends only on (p, next), so this is exact.
    if (p == start && contour.size() > 1 && next == contour[1]) {
      contour.pop_back();
      return contour;
    }
    back = prev;
    p = next;
    contour.push_back(p);
  }
  return contour;
}

bool is_closed(const Contour& contour) {
  if (contour.empty()) return false;
  if (contour.size() == 1) return true;
  for (std::size_t i = 0; i < contour.size(); ++i) {
    const auto& a = contour[i];
    const auto& b = contour[(i + 1) % contour.size()];
    if (std::abs(a.u - b.u) > 1 || std::abs(a.v - b.v) > 1) return false;
  }
  return true;
}

double contour_length(const Contour& contour) {
  const std::size_t n = contour.size();
  if (n < 2) return 0.0;
  std::vector<int> codes;
  codes.reserve(n);
  int axial = 0;
  int diagonal = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = contour[i];
    const auto& b = contour[(i + 1) % n];
    const int du = b.u - a.u;
    const int dv = b.v - a.v;
    if (du == 0 && dv == 0) continue;
    codes.push_back(neighbour_index(du, dv));
    if (du != 0 && dv != 0) {
      ++diagonal;
    } else {
      ++axial;
    }
  }
  int corners = 0;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] != codes[(i + 1) % codes.size()]) ++corners;
  }
  return 0.980 * axial + 1.406 * diagonal - 0.091 * corners;
}

double contour_polygon_area(const Contour& contour) {
  const std::size_t n = contour.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = contour[i];
    const auto& b = contour[(i + 1) % n];
    twice += static_cast<double>(a.u) * b.v - static_cast<double>(b.u) * a.v;
  }
  return std::abs(twice) / 2.0;
}

}  // namespace ringloc::imgproc
