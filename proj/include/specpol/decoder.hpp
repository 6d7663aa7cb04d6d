#pragma once

// Classical reconstruction: regularized Wiener deconvolution per (band,
// channel), response-weighted fusion, and optional projected-gradient
// refinement against the exact noiseless forward model.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "specpol/core.hpp"
#include "specpol/cube.hpp"
#include "specpol/encoder.hpp"
#include "specpol/fft.hpp"
#include "specpol/optics.hpp"
#include "specpol/response.hpp"

namespace specpol {

enum class FusionMode { kResponseWeighted, kChannelMean };

struct DeconvConfig {
  double epsilon = 1e-3;  // Wiener floor, relative to peak |F(P)|^2
  FusionMode fusion = FusionMode::kResponseWeighted;
  int iterations = 0;     // projected-gradient refinement steps
  double step = 1.0;      // initial refinement step size
  bool clip_negative = true;

  void validate() const {
    if (epsilon < 0.0) throw config_error("DeconvConfig: epsilon must be >= 0");
    if (iterations < 0) throw config_error("DeconvConfig: iterations must be >= 0");
  }
};

/// Wiener deconvolution of one plane by one kernel:
///   F^-1( F(I) conj(F(P)) / (|F(P)|^2 + epsilon * max|F(P)|^2) )
/// with the kernel zero-padded and center-aligned to the image grid.
/// epsilon = 0 demands a null-free kernel spectrum.
inline std::vector<double> wiener_band(const std::vector<double>& image, int height,
                                       int width, const std::vector<double>& kernel,
                                       int k, double epsilon) {
  if (image.size() != static_cast<std::size_t>(height) * width) {
    throw shape_error("wiener_band: image size mismatch");
  }
  if (kernel.size() != static_cast<std::size_t>(k) * k) {
    throw shape_error("wiener_band: kernel size mismatch");
  }
  if (epsilon < 0.0) throw config_error("wiener_band: epsilon must be >= 0");

  const std::size_t total = static_cast<std::size_t>(height) * width;
  std::vector<std::complex<double>> buffer(total), image_spec(total), kernel_spec(total);

  const auto embedded = fft::embed_kernel_centered(kernel, k, height, width);
  for (std::size_t i = 0; i < total; ++i) buffer[i] = embedded[i];
  fft::forward2d(height, width, buffer.data(), kernel_spec.data());

  for (std::size_t i = 0; i < total; ++i) buffer[i] = image[i];
  fft::forward2d(height, width, buffer.data(), image_spec.data());

  double peak_power = 0.0;
  for (const auto& v : kernel_spec) peak_power = std::max(peak_power, std::norm(v));
  const double floor = epsilon * peak_power;
  if (floor <= 0.0) {
    for (std::size_t i = 0; i < total; ++i) {
      if (std::norm(kernel_spec[i]) <= 0.0) {
        const int u = static_cast<int>(i) / width;
        const int v = static_cast<int>(i) % width;
        throw numeric_error("wiener_band: kernel spectrum is zero at frequency bin (" +
                            std::to_string(u) + ", " + std::to_string(v) +
                            ") and epsilon = 0");
      }
    }
  }

  for (std::size_t i = 0; i < total; ++i) {
    buffer[i] = image_spec[i] * std::conj(kernel_spec[i]) /
                (std::norm(kernel_spec[i]) + floor);
  }
  fft::backward2d(height, width, buffer.data(), image_spec.data());
  std::vector<double> out(total);
  const double scale = 1.0 / static_cast<double>(total);
  for (std::size_t i = 0; i < total; ++i) out[i] = image_spec[i].real() * scale;
  return out;
}

/// Per-(band, channel) Wiener estimates: the H x W x bands x 3 tensor the
/// paper's DECONV stage emits, cross-band residue included.
struct DeconvTensor {
  int height = 0;
  int width = 0;
  WavelengthGrid grid;
  std::vector<std::vector<double>> slices;  // [band * 3 + channel], each H*W

  std::vector<double>& at(int band, int channel) {
    return slices[static_cast<std::size_t>(band) * 3 + channel];
  }
  const std::vector<double>& at(int band, int channel) const {
    return slices[static_cast<std::size_t>(band) * 3 + channel];
  }
};

inline DeconvTensor deconv_all(const RGBImage& measurement, const PsfStack& psfs,
                               const DeconvConfig& cfg) {
  cfg.validate();
  DeconvTensor tensor;
  tensor.height = measurement.height;
  tensor.width = measurement.width;
  tensor.grid = psfs.grid;
  const int bands = psfs.grid.count;
  tensor.slices.assign(static_cast<std::size_t>(bands) * 3, {});
  parallel_for(static_cast<std::size_t>(bands) * 3, [&](std::size_t idx) {
    const int band = static_cast<int>(idx) / 3;
    const int channel = static_cast<int>(idx) % 3;
    const auto plane = measurement.plane(channel);
    std::vector<double> image(plane.begin(), plane.end());
    tensor.slices[idx] = wiener_band(image, measurement.height, measurement.width,
                                     psfs.kernel(band), psfs.crop, cfg.epsilon);
  });
  return tensor;
}

namespace detail {

/// RESPONSE_WEIGHTED fusion weights for one band: least-squares combination
/// w_c = R_c / sum_c R_c^2 (dividing the per-channel response factor back
/// out), then normalized to unit spectral DC gain. Kernels are L1-normalized,
/// so at DC the fused estimate of band b mixes band b' with weight
/// sum_c w_c R(b',c); dividing by the row sum makes that mixing row-stochastic
/// and keeps overlapping-response fusions at the right overall level.
inline std::array<double, 3> fusion_weights(const ResponseTable& response, int band) {
  std::array<double, 3> w{};
  double norm = 0.0;
  for (int c = 0; c < 3; ++c) norm += sqr(response.weight(band, c));
  if (!(norm > 0.0)) {
    throw config_error("fuse: all response weights are zero for band " +
                       std::to_string(band));
  }
  for (int c = 0; c < 3; ++c) w[static_cast<std::size_t>(c)] = response.weight(band, c) / norm;
  double gain = 0.0;
  for (int other = 0; other < response.grid.count; ++other) {
    for (int c = 0; c < 3; ++c) {
      gain += w[static_cast<std::size_t>(c)] * response.weight(other, c);
    }
  }
  for (double& v : w) v /= gain;
  return w;
}

}  // namespace detail

/// Fuse the per-channel estimates into a spectral cube. RESPONSE_WEIGHTED is
/// the per-band least-squares combination at unit spectral gain (see
/// fusion_weights); CHANNEL_MEAN is the plain mean. Clips to >= 0 when
/// cfg.clip_negative.
inline SpectralCube fuse(const DeconvTensor& tensor, const ResponseTable& response,
                         const DeconvConfig& cfg) {
  cfg.validate();
  if (!(tensor.grid == response.grid)) throw shape_error("fuse: response grid mismatch");
  SpectralCube cube = SpectralCube::zeros(tensor.height, tensor.width, tensor.grid);
  const std::size_t plane = cube.plane_size();
  for (int b = 0; b < tensor.grid.count; ++b) {
    std::array<double, 3> weights{};
    if (cfg.fusion == FusionMode::kChannelMean) {
      weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    } else {
      weights = detail::fusion_weights(response, b);
    }
    auto band = cube.band(b);
    for (int c = 0; c < 3; ++c) {
      const auto& slice = tensor.at(b, c);
      for (std::size_t i = 0; i < plane; ++i) {
        band[i] += weights[static_cast<std::size_t>(c)] * slice[i];
      }
    }
  }
  if (cfg.clip_negative) {
    for (double& v : cube.data) v = std::max(v, 0.0);
  }
  return cube;
}

/// 0.5 * || encode(cube) - measurement ||^2 under the noiseless model.
inline double data_fidelity(const SpectralCube& cube, const RGBImage& measurement,
                            const PsfStack& psfs, const ResponseTable& response) {
  const RGBImage predicted = encode(cube, psfs, response, NoiseModel{});
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.data.size(); ++i) {
    acc += sqr(predicted.data[i] - measurement.data[i]);
  }
  return 0.5 * acc;
}

namespace detail {

/// Gradient of data_fidelity with respect to the cube: per band, the
/// correlation of the RGB residual with that band's kernel, response-weighted.
inline SpectralCube fidelity_gradient(const SpectralCube& cube, const RGBImage& measurement,
                                      const PsfStack& psfs, const ResponseTable& response) {
  const RGBImage predicted = encode(cube, psfs, response, NoiseModel{});
  const int h = cube.height, w = cube.width, k = psfs.crop;
  const int rows = h + k - 1, cols = w + k - 1;
  const std::size_t padded = static_cast<std::size_t>(rows) * cols;

  const auto kernel_spectra = kernel_spectra_padded(psfs, rows, cols);

  // Residual spectra per channel. The adjoint of "pad, multiply, crop at
  // offset k/2" is "embed at offset k/2, multiply by conj, crop at origin".
  std::vector<std::vector<std::complex<double>>> residual_spec(3);
  parallel_for(3, [&](std::size_t c) {
    std::vector<std::complex<double>> pad(padded);
    const int off = k / 2;
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        pad[static_cast<std::size_t>(i + off) * cols + (j + off)] =
            predicted.at(static_cast<int>(c), i, j) - measurement.at(static_cast<int>(c), i, j);
      }
    }
    residual_spec[c].resize(padded);
    fft::forward2d(rows, cols, pad.data(), residual_spec[c].data());
  });

  SpectralCube grad = SpectralCube::zeros(h, w, cube.grid);
  parallel_for(static_cast<std::size_t>(cube.grid.count), [&](std::size_t b) {
    std::vector<std::complex<double>> accum(padded), spatial(padded);
    for (int c = 0; c < 3; ++c) {
      const double weight = response.weight(static_cast<int>(b), c);
      if (weight == 0.0) continue;
      const auto& ks = kernel_spectra[b];
      const auto& rs = residual_spec[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < padded; ++i) accum[i] += weight * std::conj(ks[i]) * rs[i];
    }
    fft::backward2d(rows, cols, accum.data(), spatial.data());
    const double scale = 1.0 / static_cast<double>(padded);
    auto band = grad.band(static_cast<int>(b));
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        band[static_cast<std::size_t>(i) * w + j] =
            spatial[static_cast<std::size_t>(i) * cols + j].real() * scale;
      }
    }
  });
  return grad;
}

}  // namespace detail

/// Projected gradient descent on the data fidelity with nonnegativity
/// projection and backtracking; the objective never increases across
/// accepted steps. The objective is quadratic, so the unprojected exact
/// line-search step <g,g>/<Ag,Ag> is used as the trial step, scaled by
/// cfg.step.
inline SpectralCube refine(SpectralCube cube, const RGBImage& measurement,
                           const PsfStack& psfs, const ResponseTable& response,
                           const DeconvConfig& cfg) {
  if (cfg.iterations <= 0) return cube;
  for (double& v : cube.data) v = std::max(v, 0.0);
  double objective = data_fidelity(cube, measurement, psfs, response);
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const SpectralCube grad = detail::fidelity_gradient(cube, measurement, psfs, response);
    double grad_norm2 = 0.0;
    for (double g : grad.data) grad_norm2 += sqr(g);
    if (!(grad_norm2 > 0.0)) break;
    const RGBImage forward_grad = encode(grad, psfs, response, NoiseModel{});
    double curvature = 0.0;
    for (double v : forward_grad.data) curvature += sqr(v);
    if (!(curvature > 0.0)) break;  // gradient lies in the forward null space
    double step = cfg.step * grad_norm2 / curvature;

    bool accepted = false;
    for (int tries = 0; tries < 30; ++tries) {
      SpectralCube candidate = cube;
      for (std::size_t i = 0; i < candidate.data.size(); ++i) {
        candidate.data[i] = std::max(candidate.data[i] - step * grad.data[i], 0.0);
      }
      const double cand_obj = data_fidelity(candidate, measurement, psfs, response);
      if (cand_obj <= objective) {
        cube = std::move(candidate);
        objective = cand_obj;
        accepted = true;
        break;
      }
      step *= 0.5;  // projection can break the unconstrained descent step
    }
    if (!accepted) break;
  }
  return cube;
}

/// Full classical decode of one measurement: DECONV, fusion, optional
/// refinement.
inline SpectralCube decode(const RGBImage& measurement, const PsfStack& psfs,
                           const ResponseTable& response, const DeconvConfig& cfg) {
  SpectralCube cube = fuse(deconv_all(measurement, psfs, cfg), response, cfg);
  if (cfg.iterations > 0) cube = refine(cube, measurement, psfs, response, cfg);
  return cube;
}

}  // namespace specpol
