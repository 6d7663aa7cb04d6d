#pragma once

// Reconstruction quality metrics: PSNR, SSIM, spectral cosine fidelity.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "specpol/core.hpp"
#include "specpol/cube.hpp"

namespace specpol {

constexpr double kPsnrCap = 100.0;  // dB; keeps zero-MSE comparisons finite

inline double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw shape_error("mse: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += sqr(a[i] - b[i]);
  return a.empty() ? 0.0 : acc / static_cast<double>(a.size());
}

/// 10*log10(peak^2 / MSE), capped at 100 dB.
inline double psnr_from_mse(double mean_sq, double peak) {
  if (!(peak > 0.0)) throw config_error("psnr: peak must be > 0");
  if (mean_sq <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(sqr(peak) / mean_sq));
}

inline double psnr(const SpectralCube& a, const SpectralCube& b, double peak) {
  if (!a.same_shape(b)) throw shape_error("psnr: cube shape mismatch");
  return psnr_from_mse(mse(std::span(a.data), std::span(b.data)), peak);
}

// ---------------------------------------------------------------------------
// SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, averaged
// over the valid region (no boundary padding), like the reference
// implementation.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> ssim_window() {
  constexpr int kSize = 11;
  constexpr double kSigma = 1.5;
  std::vector<double> w(kSize * kSize);
  double total = 0.0;
  for (int i = 0; i < kSize; ++i) {
    for (int j = 0; j < kSize; ++j) {
      const double dy = i - (kSize - 1) / 2.0;
      const double dx = j - (kSize - 1) / 2.0;
      w[static_cast<std::size_t>(i) * kSize + j] =
          std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
      total += w[static_cast<std::size_t>(i) * kSize + j];
    }
  }
  for (double& v : w) v /= total;
  return w;
}

}  // namespace detail

inline double ssim(std::span<const double> a, std::span<const double> b, int height,
                   int width, double peak) {
  if (a.size() != b.size() ||
      a.size() != static_cast<std::size_t>(height) * width) {
    throw shape_error("ssim: image shape mismatch");
  }
  constexpr int kWin = 11;
  if (height < kWin || width < kWin) {
    throw config_error("ssim: image smaller than the 11x11 window");
  }
  if (!(peak > 0.0)) throw config_error("ssim: peak must be > 0");
  const double c1 = sqr(0.01 * peak);
  const double c2 = sqr(0.03 * peak);
  static const std::vector<double> window = detail::ssim_window();

  double acc = 0.0;
  std::size_t count = 0;
  for (int r = 0; r + kWin <= height; ++r) {
    for (int c = 0; c + kWin <= width; ++c) {
      double ma = 0.0, mb = 0.0, maa = 0.0, mbb = 0.0, mab = 0.0;
      for (int i = 0; i < kWin; ++i) {
        for (int j = 0; j < kWin; ++j) {
          const double wv = window[static_cast<std::size_t>(i) * kWin + j];
          const double va = a[static_cast<std::size_t>(r + i) * width + (c + j)];
          const double vb = b[static_cast<std::size_t>(r + i) * width + (c + j)];
          ma += wv * va;
          mb += wv * vb;
          maa += wv * va * va;
          mbb += wv * vb * vb;
          mab += wv * va * vb;
        }
      }
      const double var_a = maa - ma * ma;
      const double var_b = mbb - mb * mb;
      const double cov = mab - ma * mb;
      acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
             ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

/// Cube-level SSIM: mean over bands.
inline double ssim(const SpectralCube& a, const SpectralCube& b, double peak) {
  if (!a.same_shape(b)) throw shape_error("ssim: cube shape mismatch");
  double acc = 0.0;
  for (int band = 0; band < a.grid.count; ++band) {
    acc += ssim(a.band(band), b.band(band), a.height, a.width, peak);
  }
  return acc / a.grid.count;
}

/// Spectral cosine similarity as a percentage, clipped to [0, 100].
inline double spectral_fidelity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw shape_error("spectral_fidelity: size mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += sqr(a[i]);
    nb += sqr(b[i]);
  }
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw config_error("spectral_fidelity: zero spectrum");
  }
  return std::clamp(100.0 * dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 100.0);
}

struct MetricReport {
  double psnr_db = 0.0;
  double ssim_value = 0.0;
  double mse_value = 0.0;
  double fidelity_percent = 0.0;  // mean over pixels with nonzero spectra
  std::vector<double> per_band_psnr;
};

/// Full report between a reconstruction and a reference. peak <= 0 selects
/// the reference cube's maximum.
inline MetricReport compute_report(const SpectralCube& recon, const SpectralCube& reference,
                                   double peak = 0.0) {
  if (!recon.same_shape(reference)) throw shape_error("compute_report: shape mismatch");
  if (peak <= 0.0) {
    for (double v : reference.data) peak = std::max(peak, v);
    if (peak <= 0.0) peak = 1.0;
  }
  MetricReport rep;
  rep.mse_value = mse(std::span(recon.data), std::span(reference.data));
  rep.psnr_db = psnr_from_mse(rep.mse_value, peak);
  rep.ssim_value = ssim(recon, reference, peak);
  rep.per_band_psnr.resize(static_cast<std::size_t>(recon.grid.count));
  for (int b = 0; b < recon.grid.count; ++b) {
    rep.per_band_psnr[static_cast<std::size_t>(b)] =
        psnr_from_mse(mse(recon.band(b), reference.band(b)), peak);
  }
  // mean spectral fidelity over pixels where both spectra are nonzero
  double acc = 0.0;
  std::size_t used = 0;
  const std::size_t plane = recon.plane_size();
  std::vector<double> sa(static_cast<std::size_t>(recon.grid.count));
  std::vector<double> sb(sa.size());
  for (std::size_t p = 0; p < plane; ++p) {
    double na = 0.0, nb = 0.0;
    for (int b = 0; b < recon.grid.count; ++b) {
      sa[static_cast<std::size_t>(b)] = recon.data[static_cast<std::size_t>(b) * plane + p];
      sb[static_cast<std::size_t>(b)] =
          reference.data[static_cast<std::size_t>(b) * plane + p];
      na += sqr(sa[static_cast<std::size_t>(b)]);
      nb += sqr(sb[static_cast<std::size_t>(b)]);
    }
    if (na > 0.0 && nb > 0.0) {
      acc += spectral_fidelity(sa, sb);
      ++used;
    }
  }
  rep.fidelity_percent = used ? acc / static_cast<double>(used) : 0.0;
  return rep;
}

}  // namespace specpol
