#pragma once

// Four-configuration analyzer model, Stokes inversion and DoLP/AoLP maps.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "specpol/core.hpp"
#include "specpol/cube.hpp"

namespace specpol {

/// The four acquisition configurations: linear polarizer at 0/90/45 degrees,
/// and quarter-wave plate (fast axis 0) followed by the 45-degree polarizer.
enum class AnalyzerConfig { kLinear0, kLinear90, kLinear45, kQwp0Linear45 };

constexpr std::array<AnalyzerConfig, 4> kAcquisitionProtocol = {
    AnalyzerConfig::kLinear0, AnalyzerConfig::kLinear90, AnalyzerConfig::kLinear45,
    AnalyzerConfig::kQwp0Linear45};

inline std::string to_string(AnalyzerConfig c) {
  switch (c) {
    case AnalyzerConfig::kLinear0: return "LINEAR_0";
    case AnalyzerConfig::kLinear90: return "LINEAR_90";
    case AnalyzerConfig::kLinear45: return "LINEAR_45";
    case AnalyzerConfig::kQwp0Linear45: return "QWP0_LINEAR_45";
  }
  return "?";
}

inline AnalyzerConfig analyzer_from_string(const std::string& s) {
  if (s == "LINEAR_0") return AnalyzerConfig::kLinear0;
  if (s == "LINEAR_90") return AnalyzerConfig::kLinear90;
  if (s == "LINEAR_45") return AnalyzerConfig::kLinear45;
  if (s == "QWP0_LINEAR_45") return AnalyzerConfig::kQwp0Linear45;
  throw format_error("unknown analyzer config: " + s);
}

/// Ground-truth scene: per-pixel per-band Stokes vectors.
struct PolarizedScene {
  StokesCube stokes;
};

/// Intensity cube seen through one analyzer configuration. Defined so that
/// the four cubes invert exactly through stokes_from_measurements:
///   P1=(S0+S1)/2, P2=(S0-S1)/2, P3=(S0+S2)/2, P4=(S0-S3)/2.
/// Right-circular light carries S3 > 0 under this sign convention.
inline SpectralCube analyzer_intensity(const PolarizedScene& scene, AnalyzerConfig config) {
  const StokesCube& st = scene.stokes;
  SpectralCube out = SpectralCube::zeros(st.height, st.width, st.grid);
  const std::size_t n = st.volume();
  int comp;
  double sign;
  switch (config) {
    case AnalyzerConfig::kLinear0: comp = 1; sign = 1.0; break;
    case AnalyzerConfig::kLinear90: comp = 1; sign = -1.0; break;
    case AnalyzerConfig::kLinear45: comp = 2; sign = 1.0; break;
    case AnalyzerConfig::kQwp0Linear45: comp = 3; sign = -1.0; break;
    default: throw config_error("analyzer_intensity: bad config");
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.data[i] = 0.5 * (st.s[0][i] + sign * st.s[static_cast<std::size_t>(comp)][i]);
  }
  return out;
}

/// Invert the four analyzer cubes back to Stokes components:
///   S0 = P1+P2, S1 = P1-P2, S2 = 2*P3-S0, S3 = S0-2*P4.
/// Pure arithmetic; no clamping.
inline StokesCube stokes_from_measurements(const SpectralCube& p1, const SpectralCube& p2,
                                           const SpectralCube& p3, const SpectralCube& p4) {
  if (!p1.same_shape(p2) || !p1.same_shape(p3) || !p1.same_shape(p4)) {
    throw shape_error("stokes_from_measurements: measurement cubes differ in shape");
  }
  StokesCube out = StokesCube::zeros(p1.height, p1.width, p1.grid);
  const std::size_t n = out.volume();
  for (std::size_t i = 0; i < n; ++i) {
    const double s0 = p1.data[i] + p2.data[i];
    out.s[0][i] = s0;
    out.s[1][i] = p1.data[i] - p2.data[i];
    out.s[2][i] = 2.0 * p3.data[i] - s0;
    out.s[3][i] = s0 - 2.0 * p4.data[i];
  }
  return out;
}

/// Degree and angle of linear polarization for one band. DoLP is clamped to
/// [0,1]; AoLP = atan2(S2,S1)/2 in (-pi/2, pi/2]. Dark pixels (S0 = 0) map
/// to DoLP 0, AoLP 0 by convention.
struct PolarimetricMaps {
  int height = 0;
  int width = 0;
  std::vector<double> dolp;
  std::vector<double> aolp;
};

inline PolarimetricMaps dolp_aolp(const StokesCube& stokes, int band) {
  if (band < 0 || band >= stokes.grid.count) throw config_error("dolp_aolp: band out of range");
  PolarimetricMaps maps;
  maps.height = stokes.height;
  maps.width = stokes.width;
  const std::size_t plane = stokes.plane_size();
  maps.dolp.assign(plane, 0.0);
  maps.aolp.assign(plane, 0.0);
  const std::size_t base = static_cast<std::size_t>(band) * plane;
  for (std::size_t i = 0; i < plane; ++i) {
    const double s0 = stokes.s[0][base + i];
    const double s1 = stokes.s[1][base + i];
    const double s2 = stokes.s[2][base + i];
    if (s0 <= 0.0 || (s1 == 0.0 && s2 == 0.0)) continue;
    maps.dolp[i] = std::clamp(std::sqrt(s1 * s1 + s2 * s2) / s0, 0.0, 1.0);
    double a = 0.5 * std::atan2(s2, s1);
    if (a <= -0.5 * M_PI) a += M_PI;  // fold the open end onto +pi/2
    maps.aolp[i] = a;
  }
  return maps;
}

/// Circular mean of axial angles (period pi): mean of the doubled angles on
/// the unit circle, halved. The right average for AoLP data, where values
/// near +pi/2 and -pi/2 are neighbors.
inline double circular_mean_aolp(const std::vector<double>& angles) {
  double c = 0.0, s = 0.0;
  for (double a : angles) {
    c += std::cos(2.0 * a);
    s += std::sin(2.0 * a);
  }
  return 0.5 * std::atan2(s, c);
}

/// Absolute axial distance between two AoLP values, in [0, pi/2].
inline double aolp_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), M_PI);
  return std::min(d, M_PI - d);
}

}  // namespace specpol
