#pragma once

// Rotationally symmetric diffractive element: 512-entry radial height
// profile, its rasterization onto an even n x n grid, level quantization and
// per-level fabrication error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "specpol/core.hpp"

namespace specpol {

constexpr int kProfileEntries = 512;
constexpr double kApertureRadius = 512.0;   // in profile-index units (= pixels)
constexpr double kDefaultDepth = 1.5369e-6;  // meters
constexpr int kDefaultLevels = 16;
constexpr int kDefaultGridSize = 1024;
constexpr double kDefaultPitch = 4e-6;  // meters

/// Radial ring heights in meters, ring 0 at the center.
struct HeightProfile {
  std::vector<double> w;

  static HeightProfile zeros() {
    return HeightProfile{std::vector<double>(kProfileEntries, 0.0)};
  }

  static HeightProfile constant(double value) {
    return HeightProfile{std::vector<double>(kProfileEntries, value)};
  }

  static HeightProfile random(std::uint64_t seed, double depth_max = kDefaultDepth) {
    Rng rng(seed);
    HeightProfile p = zeros();
    for (double& v : p.w) v = rng.uniform(0.0, depth_max);
    return p;
  }

  void validate(double depth_max = kDefaultDepth) const {
    if (w.size() != kProfileEntries) {
      throw config_error("HeightProfile: expected 512 entries");
    }
    for (double v : w) {
      if (!std::isfinite(v) || v < 0.0 || v > depth_max) {
        throw config_error("HeightProfile: entry outside [0, depth_max]");
      }
    }
  }
};

struct QuantizationInfo {
  int levels;
  double depth;
};

/// Rasterized n x n height map plus its aperture support.
struct HeightMap {
  int n = 0;
  double pitch = kDefaultPitch;
  std::vector<double> h;          // meters, row-major
  std::vector<std::uint8_t> mask; // aperture support
  std::optional<QuantizationInfo> quant;

  double at(int row, int col) const { return h[static_cast<std::size_t>(row) * n + col]; }
  bool inside(int row, int col) const {
    return mask[static_cast<std::size_t>(row) * n + col] != 0;
  }
};

/// round-half-away-from-zero ring index for a radius in profile units.
inline int ring_index(double r) { return static_cast<int>(std::llround(r)); }

namespace detail {

// Center sits on pixel (n/2, n/2). Offsets on an even grid run -n/2..n/2-1,
// which is not closed under quarter turns: the extreme row/column (offset
// -n/2) has no rotation partner. Those pixels are kept out of the aperture so
// that every rasterized map, and hence every PSF, is exactly symmetric under
// the 90/180/270 degree grid rotations about the center pixel. At n = 1024
// this drops exactly the two grid points with r = 512.
inline bool aperture_hit(int di, int dj, double r, int n) {
  const int half = n / 2;
  return r <= kApertureRadius && di > -half && dj > -half;
}

}  // namespace detail

/// Rasterize the radial profile onto an even n x n grid: each pixel takes the
/// ring value w[round(r)] inside the aperture and 0 outside. Ring index 512
/// (reachable for r in [511.5, 512)) maps to the last profile entry.
inline HeightMap rasterize(const HeightProfile& profile, int n = kDefaultGridSize,
                           double pitch = kDefaultPitch) {
  if (n <= 0 || n % 2 != 0) throw config_error("rasterize: grid size must be even");
  if (profile.w.size() != kProfileEntries) {
    throw config_error("rasterize: profile must have 512 entries");
  }
  for (double v : profile.w) {
    if (!std::isfinite(v)) throw config_error("rasterize: non-finite profile entry");
  }
  HeightMap map;
  map.n = n;
  map.pitch = pitch;
  map.h.assign(static_cast<std::size_t>(n) * n, 0.0);
  map.mask.assign(static_cast<std::size_t>(n) * n, 0);
  const int half = n / 2;
  for (int i = 0; i < n; ++i) {
    const int di = i - half;
    for (int j = 0; j < n; ++j) {
      const int dj = j - half;
      const double r = std::hypot(static_cast<double>(di), static_cast<double>(dj));
      if (!detail::aperture_hit(di, dj, r, n)) continue;
      const int ring = ring_index(r);
      if (ring > kProfileEntries) continue;
      const std::size_t idx = static_cast<std::size_t>(i) * n + j;
      map.mask[idx] = 1;
      map.h[idx] = profile.w[static_cast<std::size_t>(std::min(ring, kProfileEntries - 1))];
    }
  }
  return map;
}

/// Adjoint of rasterize: accumulate a gradient image over each ring,
/// restricted to the aperture. Satisfies <rasterize(w), g> = <w, adjoint(g)>.
inline std::vector<double> rasterize_adjoint(const std::vector<double>& grad,
                                             int n = kDefaultGridSize) {
  if (n <= 0 || n % 2 != 0) throw config_error("rasterize_adjoint: grid size must be even");
  if (grad.size() != static_cast<std::size_t>(n) * n) {
    throw shape_error("rasterize_adjoint: gradient size does not match grid");
  }
  std::vector<double> out(kProfileEntries, 0.0);
  const int half = n / 2;
  for (int i = 0; i < n; ++i) {
    const int di = i - half;
    for (int j = 0; j < n; ++j) {
      const int dj = j - half;
      const double r = std::hypot(static_cast<double>(di), static_cast<double>(dj));
      if (!detail::aperture_hit(di, dj, r, n)) continue;
      const int ring = ring_index(r);
      if (ring > kProfileEntries) continue;
      out[static_cast<std::size_t>(std::min(ring, kProfileEntries - 1))] +=
          grad[static_cast<std::size_t>(i) * n + j];
    }
  }
  return out;
}

/// Snap every height to the nearest of levels values uniformly spanning
/// [0, depth]. Idempotent projection.
inline HeightMap quantize(const HeightMap& map, int levels = kDefaultLevels,
                          double depth = kDefaultDepth) {
  if (levels < 2) throw config_error("quantize: need at least 2 levels");
  HeightMap out = map;
  const double step = depth / (levels - 1);
  for (double& v : out.h) {
    double k = std::round(v / step);
    k = std::clamp(k, 0.0, static_cast<double>(levels - 1));
    v = k * step;
  }
  out.quant = QuantizationInfo{levels, depth};
  return out;
}

/// Apply one independent zero-mean height perturbation per quantization
/// level, uniform in [-step_error, +step_error]. Models lithographic etch
/// depth error, which is global per step, not per pixel.
inline HeightMap perturb_fabrication(const HeightMap& map, double step_error,
                                     std::uint64_t seed) {
  if (step_error < 0.0) throw config_error("perturb_fabrication: step_error must be >= 0");
  if (!map.quant) throw config_error("perturb_fabrication: map is not quantized");
  HeightMap out = map;
  if (step_error == 0.0) return out;
  const int levels = map.quant->levels;
  const double step = map.quant->depth / (levels - 1);
  Rng rng(seed);
  std::vector<double> delta(static_cast<std::size_t>(levels));
  for (double& d : delta) d = rng.uniform(-step_error, step_error);
  const std::size_t total = out.h.size();
  for (std::size_t i = 0; i < total; ++i) {
    if (!out.mask[i]) continue;
    int level = static_cast<int>(std::llround(out.h[i] / step));
    level = std::clamp(level, 0, levels - 1);
    out.h[i] += delta[static_cast<std::size_t>(level)];
  }
  return out;
}

}  // namespace specpol
