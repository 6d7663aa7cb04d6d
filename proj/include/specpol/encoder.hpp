#pragma once

// Diffractive encoder: per-band linear convolution with the PSF kernels,
// response weighting, RGB accumulation and the sensor noise model; plus the
// four-measurement acquisition protocol.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "specpol/core.hpp"
#include "specpol/cube.hpp"
#include "specpol/fft.hpp"
#include "specpol/optics.hpp"
#include "specpol/polarimetry.hpp"
#include "specpol/response.hpp"

namespace specpol {

enum class NoiseKind { kNone, kGaussian, kPoissonGaussian };

struct NoiseModel {
  NoiseKind kind = NoiseKind::kNone;
  double sigma = 0.0;        // read-noise std, intensity units
  double peak = 1000.0;      // photon scale for the Poisson stage
  std::uint64_t seed = 0;
  bool quantize_12bit = false;

  void validate() const {
    if (sigma < 0.0) throw config_error("NoiseModel: sigma must be >= 0");
    if (kind == NoiseKind::kPoissonGaussian && !(peak > 0.0)) {
      throw config_error("NoiseModel: peak must be > 0 for Poisson noise");
    }
  }
};

/// sigma given as a fraction of the image's 99th-percentile intensity,
/// converted to absolute units. Convenience for CLI-style relative sigmas.
inline double sigma_from_relative(const RGBImage& image, double fraction) {
  std::vector<double> sorted(image.data);
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty()) return 0.0;
  const std::size_t idx =
      std::min(sorted.size() - 1, static_cast<std::size_t>(0.99 * (sorted.size() - 1)));
  return fraction * sorted[idx];
}

namespace detail {

inline void apply_noise(RGBImage& image, const NoiseModel& noise) {
  if (noise.kind == NoiseKind::kNone && !noise.quantize_12bit) return;
  Rng rng(noise.seed);
  if (noise.kind == NoiseKind::kPoissonGaussian) {
    for (double& v : image.data) {
      const double photons = std::max(v, 0.0) * noise.peak;
      v = static_cast<double>(rng.poisson(photons)) / noise.peak;
    }
  }
  if (noise.kind == NoiseKind::kGaussian || noise.kind == NoiseKind::kPoissonGaussian) {
    if (noise.sigma > 0.0) {
      for (double& v : image.data) v += noise.sigma * rng.normal();
    }
  }
  if (noise.quantize_12bit) {
    // 12-bit RAW capture model: clamp to [0, max] and round to 4096 levels.
    double peak = 0.0;
    for (double v : image.data) peak = std::max(peak, v);
    if (peak > 0.0) {
      const double step = peak / 4095.0;
      for (double& v : image.data) {
        v = std::clamp(v, 0.0, peak);
        v = std::round(v / step) * step;
      }
    }
  }
}

/// Forward spectra of every kernel on the padded grid, kernel center (k/2,
/// k/2) aligned to bin (0,0) so that the padded product, cropped at row/col
/// k/2, realizes linear convolution with centered kernels.
inline std::vector<std::vector<std::complex<double>>> kernel_spectra_padded(
    const PsfStack& psfs, int rows, int cols) {
  const int bands = psfs.grid.count;
  std::vector<std::vector<std::complex<double>>> spectra(static_cast<std::size_t>(bands));
  parallel_for(static_cast<std::size_t>(bands), [&](std::size_t b) {
    const auto& kern = psfs.kernels[b];
    std::vector<std::complex<double>> padded(static_cast<std::size_t>(rows) * cols);
    for (int i = 0; i < psfs.crop; ++i) {
      for (int j = 0; j < psfs.crop; ++j) {
        padded[static_cast<std::size_t>(i) * cols + j] =
            kern[static_cast<std::size_t>(i) * psfs.crop + j];
      }
    }
    spectra[b].resize(padded.size());
    fft::forward2d(rows, cols, padded.data(), spectra[b].data());
  });
  return spectra;
}

}  // namespace detail

/// Encode a spectral cube into one RGB image: for each channel, the sum over
/// bands of (kernel * band) . weight(band, channel), computed as zero-padded
/// linear convolution via padded Fourier transforms, then the noise model.
inline RGBImage encode(const SpectralCube& scene, const PsfStack& psfs,
                       const ResponseTable& response, const NoiseModel& noise) {
  if (!(scene.grid == psfs.grid)) throw shape_error("encode: scene/PSF grid mismatch");
  if (!(scene.grid == response.grid)) throw shape_error("encode: scene/response grid mismatch");
  noise.validate();

  const int h = scene.height, w = scene.width, k = psfs.crop;
  const int rows = h + k - 1, cols = w + k - 1;
  const std::size_t padded = static_cast<std::size_t>(rows) * cols;
  const int bands = scene.grid.count;

  const auto kernel_spectra = detail::kernel_spectra_padded(psfs, rows, cols);

  // Per-band scene spectra in parallel, then a fixed-order accumulation so
  // the result does not depend on the thread schedule.
  std::vector<std::vector<std::complex<double>>> scene_spectra(
      static_cast<std::size_t>(bands));
  parallel_for(static_cast<std::size_t>(bands), [&](std::size_t b) {
    std::vector<std::complex<double>> pad(padded);
    const auto band = scene.band(static_cast<int>(b));
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        pad[static_cast<std::size_t>(i) * cols + j] =
            band[static_cast<std::size_t>(i) * w + j];
      }
    }
    scene_spectra[b].resize(padded);
    fft::forward2d(rows, cols, pad.data(), scene_spectra[b].data());
  });

  RGBImage out = RGBImage::zeros(h, w);
  std::vector<std::complex<double>> accum(padded), spatial(padded);
  for (int c = 0; c < 3; ++c) {
    std::fill(accum.begin(), accum.end(), std::complex<double>{});
    for (int b = 0; b < bands; ++b) {
      const double weight = response.weight(b, c);
      if (weight == 0.0) continue;
      const auto& ks = kernel_spectra[static_cast<std::size_t>(b)];
      const auto& xs = scene_spectra[static_cast<std::size_t>(b)];
      for (std::size_t i = 0; i < padded; ++i) accum[i] += weight * ks[i] * xs[i];
    }
    fft::backward2d(rows, cols, accum.data(), spatial.data());
    const double scale = 1.0 / static_cast<double>(padded);
    auto plane = out.plane(c);
    const int off = k / 2;
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        plane[static_cast<std::size_t>(i) * w + j] =
            spatial[static_cast<std::size_t>(i + off) * cols + (j + off)].real() * scale;
      }
    }
  }
  detail::apply_noise(out, noise);
  return out;
}

/// The four RGB measurements of one scene plus their analyzer metadata.
struct MeasurementSet {
  std::array<RGBImage, 4> m;
  std::array<AnalyzerConfig, 4> configs = kAcquisitionProtocol;
  std::array<std::uint64_t, 4> seeds{};
  std::uint64_t master_seed = 0;
};

/// Acquire M1..M4 through the four analyzer configurations. One PsfStack
/// serves all four (the element's phase encoding is polarization-blind);
/// noise seeds are derived deterministically from the master seed.
inline MeasurementSet acquire_four(const PolarizedScene& scene, const PsfStack& psfs,
                                   const ResponseTable& response, const NoiseModel& noise) {
  MeasurementSet set;
  set.master_seed = noise.seed;
  for (int i = 0; i < 4; ++i) {
    const SpectralCube cube = analyzer_intensity(scene, set.configs[static_cast<std::size_t>(i)]);
    NoiseModel local = noise;
    local.seed = derive_seed(noise.seed, static_cast<std::uint64_t>(i));
    set.seeds[static_cast<std::size_t>(i)] = local.seed;
    set.m[static_cast<std::size_t>(i)] = encode(cube, psfs, response, local);
  }
  return set;
}

}  // namespace specpol
