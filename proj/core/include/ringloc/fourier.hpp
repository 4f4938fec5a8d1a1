#pragma once

#include <complex>
#include <vector>

#include "ringloc/types.hpp"

namespace ringloc::fourier {

/// DC-centred 2D spectrum. Bin (u, v) holds frequency (u - W/2, v - H/2)
/// (integer division), so the DC term sits at (W/2, H/2).
///
/// Transforms are unitary: both directions scale by 1/sqrt(W*H), so the
/// spectrum carries the same energy as the image (Parseval).
class Spectrum {
 public:
  Spectrum(int width, int height, std::vector<std::complex<double>> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int dc_u() const noexcept { return width_ / 2; }
  int dc_v() const noexcept { return height_ / 2; }

  const std::complex<double>& operator()(int u, int v) const {
    return data_[static_cast<std::size_t>(v) * width_ + u];
  }
  const std::vector<std::complex<double>>& data() const noexcept { return data_; }

 private:
  int width_;
  int height_;
  std::vector<std::complex<double>> data_;
};

struct FilterTag {
  static void validate(std::span<const double> values) {
    for (double g : values) {
      if (!std::isfinite(g)) throw InvalidArgument("frequency filter gains must be finite");
    }
  }
};

/// Real gains laid out like Spectrum (DC at (W/2, H/2)).
using FrequencyFilter = Raster<double, FilterTag>;

Spectrum fft_forward(const GrayImage& image);
Spectrum fft_forward(const RealImage& image);

/// Real part of the inverse transform, not clamped.
RealImage fft_inverse(const Spectrum& spectrum);

/// Isotropic Gaussian gain exp(-r^2 / 2 sigma^2), r in frequency bins from DC.
FrequencyFilter gen_gauss_filter(double sigma, int width, int height);

/// Difference of Gaussians gauss(sigma_wide) - gauss(sigma_narrow): zero at DC,
/// vanishing at high frequency, positive in between.
FrequencyFilter band_pass_filter(double sigma_narrow, double sigma_wide, int width, int height);

/// Pointwise product; dimensions must match.
Spectrum apply_filter(const Spectrum& spectrum, const FrequencyFilter& filter);

struct EnhanceOptions {
  double sigma_narrow = 3.0;
  double sigma_wide = 15.0;
};

/// Band-passed image before rescaling (zero mean, may be negative).
RealImage enhance_response(const RealImage& image, const EnhanceOptions& options = {});
RealImage enhance_response(const GrayImage& image, const EnhanceOptions& options = {});

/// enhance_response rescaled per frame by min/max onto [0, 255]. A flat
/// response maps to all zeros.
GrayImage enhance(const GrayImage& image, const EnhanceOptions& options = {});

/// Affine min/max map onto [0, 255]; flat input maps to 0.
GrayImage rescale_to_gray(const RealImage& image);

/// Rounds and clamps to [0, 255].
GrayImage clamp_to_gray(const RealImage& image);

RealImage to_real(const GrayImage& image);

/// log(1 + |F|) rescaled to 8 bits, for spectrogram inspection.
GrayImage log_magnitude_image(const Spectrum& spectrum);

/// Filter gains as a viewable byte image using the conventional 128 offset.
GrayImage filter_display_image(const FrequencyFilter& filter);

}  // namespace ringloc::fourier
