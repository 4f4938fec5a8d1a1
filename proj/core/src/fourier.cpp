#include "ringloc/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace ringloc::fourier {
namespace {

// FFTW planning is not thread-safe; execution with new-array plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftwBuffer {
 public:
  explicit FftwBuffer(std::size_t n)
      : data_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data_) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data_); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  fftw_complex* get() noexcept { return data_; }

 private:
  fftw_complex* data_;
};

/// Unnormalized 2D DFT of a row-major buffer in place (out-of-place internally).
std::vector<std::complex<double>> dft2(const std::vector<std::complex<double>>& in, int width,
                                       int height, int sign) {
  const std::size_t n = in.size();
  FftwBuffer src(n);
  FftwBuffer dst(n);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(height, width, src.get(), dst.get(), sign, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) {
    src.get()[i][0] = in[i].real();
    src.get()[i][1] = in[i].imag();
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {dst.get()[i][0], dst.get()[i][1]};
  return out;
}

// Natural-order index k -> centred index (k + N/2) mod N, and back.
int to_centered(int k, int n) { return (k + n / 2) % n; }
int from_centered(int k, int n) { return (k - n / 2 + n) % n; }

Spectrum forward_real(std::span<const double> values, int width, int height) {
  std::vector<std::complex<double>> in(values.begin(), values.end());
  auto raw = dft2(in, width, height, FFTW_FORWARD);
  const double scale = 1.0 / std::sqrt(static_cast<double>(width) * height);
  std::vector<std::complex<double>> centered(raw.size());
  for (int v = 0; v < height; ++v) {
    const int cv = to_centered(v, height);
    for (int u = 0; u < width; ++u) {
      centered[static_cast<std::size_t>(cv) * width + to_centered(u, width)] =
          raw[static_cast<std::size_t>(v) * width + u] * scale;
    }
  }
  return Spectrum(width, height, std::move(centered));
}

}  // namespace

Spectrum::Spectrum(int width, int height, std::vector<std::complex<double>> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) throw InvalidArgument("spectrum dimensions must be >= 1");
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw DimensionMismatch("spectrum data length does not match width*height");
  }
}

Spectrum fft_forward(const RealImage& image) {
  return forward_real(image.data(), image.width(), image.height());
}

Spectrum fft_forward(const GrayImage& image) { return fft_forward(to_real(image)); }

RealImage fft_inverse(const Spectrum& spectrum) {
  const int width = spectrum.width();
  const int height = spectrum.height();
  std::vector<std::complex<double>> natural(spectrum.data().size());
  for (int v = 0; v < height; ++v) {
    const int nv = from_centered(v, height);
    for (int u = 0; u < width; ++u) {
      natural[static_cast<std::size_t>(nv) * width + from_centered(u, width)] = spectrum(u, v);
    }
  }
  auto raw = dft2(natural, width, height, FFTW_BACKWARD);
  const double scale = 1.0 / std::sqrt(static_cast<double>(width) * height);
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i].real() * scale;
  return RealImage(width, height, std::move(out));
}

FrequencyFilter gen_gauss_filter(double sigma, int width, int height) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("gen_gauss_filter: sigma must be > 0");
  FrequencyFilter filter(width, height);
  const int uc = width / 2;
  const int vc = height / 2;
  const double denom = 2.0 * sigma * sigma;
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const double du = u - uc;
      const double dv = v - vc;
      filter(u, v) = std::exp(-(du * du + dv * dv) / denom);
    }
  }
  return filter;
}

FrequencyFilter band_pass_filter(double sigma_narrow, double sigma_wide, int width, int height) {
  if (!(sigma_narrow > 0.0 && sigma_narrow < sigma_wide)) {
    throw InvalidArgument("band_pass_filter: requires 0 < sigma_narrow < sigma_wide");
  }
  auto wide = gen_gauss_filter(sigma_wide, width, height);
  const auto narrow = gen_gauss_filter(sigma_narrow, width, height);
  for (std::size_t i = 0; i < wide.size(); ++i) wide.data()[i] -= narrow.data()[i];
  return wide;
}

Spectrum apply_filter(const Spectrum& spectrum, const FrequencyFilter& filter) {
  if (!filter.same_shape(spectrum.width(), spectrum.height())) {
    throw DimensionMismatch("filter and spectrum dimensions differ");
  }
  std::vector<std::complex<double>> out(spectrum.data());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= filter.data()[i];
  return Spectrum(spectrum.width(), spectrum.height(), std::move(out));
}

RealImage enhance_response(const RealImage& image, const EnhanceOptions& options) {
  const auto filter =
      band_pass_filter(options.sigma_narrow, options.sigma_wide, image.width(), image.height());
  return fft_inverse(apply_filter(fft_forward(image), filter));
}

RealImage enhance_response(const GrayImage& image, const EnhanceOptions& options) {
  return enhance_response(to_real(image), options);
}

GrayImage enhance(const GrayImage& image, const EnhanceOptions& options) {
  return rescale_to_gray(enhance_response(image, options));
}

GrayImage rescale_to_gray(const RealImage& image) {
  const auto [lo, hi] = std::minmax_element(image.data().begin(), image.data().end());
  const double span = *hi - *lo;
  GrayImage out(image.width(), image.height());
  // Flat frames carry no structure; relative tolerance absorbs FFT round-off.
  if (span <= 1e-9 * std::max(1.0, std::max(std::abs(*lo), std::abs(*hi)))) return out;
  for (std::size_t i = 0; i < image.size(); ++i) {
    out.data()[i] = static_cast<std::uint8_t>(std::lround(255.0 * (image.data()[i] - *lo) / span));
  }
  return out;
}

GrayImage clamp_to_gray(const RealImage& image) {
  GrayImage out(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    out.data()[i] = static_cast<std::uint8_t>(std::clamp(std::lround(image.data()[i]), 0L, 255L));
  }
  return out;
}

RealImage to_real(const GrayImage& image) {
  std::vector<double> values(image.data().begin(), image.data().end());
  return RealImage(image.width(), image.height(), std::move(values));
}

GrayImage log_magnitude_image(const Spectrum& spectrum) {
  std::vector<double> mags(spectrum.data().size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::log1p(std::abs(spectrum.data()[i]));
  return rescale_to_gray(RealImage(spectrum.width(), spectrum.height(), std::move(mags)));
}

GrayImage filter_display_image(const FrequencyFilter& filter) {
  GrayImage out(filter.width(), filter.height());
  for (std::size_t i = 0; i < filter.size(); ++i) {
    out.data()[i] = static_cast<std::uint8_t>(
        std::clamp(std::lround(128.0 + 127.0 * filter.data()[i]), 0L, 255L));
  }
  return out;
}

}  // namespace ringloc::fourier
