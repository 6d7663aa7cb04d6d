#pragma once

// Scalar wave-optics engine: per-wavelength complex field at the element and
// the PSF stack |F{U}|^2, with fused-silica dispersion.

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "specpol/core.hpp"
#include "specpol/doe.hpp"
#include "specpol/fft.hpp"
#include "specpol/grid.hpp"

namespace specpol {

/// Which quadratic-phase reading to use. kPaperLiteral keeps the source
/// term (x^2+y^2)/z and the +(x^2+y^2)/(2f) lens sign exactly as printed;
/// kPhysical uses the paraxial (x^2+y^2)/(2z) and a converging -1/(2f).
enum class PhaseConvention { kPaperLiteral, kPhysical };

inline std::string to_string(PhaseConvention c) {
  return c == PhaseConvention::kPaperLiteral ? "PAPER_LITERAL" : "PHYSICAL";
}

/// Three-term Sellmeier dispersion, lambda in micrometers inside the form.
struct SellmeierCoefficients {
  std::array<double, 3> b;
  std::array<double, 3> c;  // squared resonance wavelengths, um^2

  /// Malitson fused-silica coefficients.
  static SellmeierCoefficients fused_silica() {
    return {{0.6961663, 0.4079426, 0.8974794},
            {sqr(0.0684043), sqr(0.1162414), sqr(9.896161)}};
  }
};

struct OpticalConfig {
  double z = 1.0;    // source distance, meters
  double f = 0.050;  // focal length, meters
  PhaseConvention convention = PhaseConvention::kPaperLiteral;
  SellmeierCoefficients sellmeier = SellmeierCoefficients::fused_silica();

  void validate() const {
    if (!(z > 0.0) || !(f > 0.0)) throw config_error("OpticalConfig: z and f must be > 0");
  }

  /// Coefficient of (x^2+y^2) in the source phase (no lens).
  double spherical_coeff() const {
    return convention == PhaseConvention::kPaperLiteral ? 1.0 / z : 1.0 / (2.0 * z);
  }

  /// Coefficient of (x^2+y^2) contributed by the lens.
  double lens_coeff() const {
    return convention == PhaseConvention::kPaperLiteral ? 1.0 / (2.0 * f)
                                                        : -1.0 / (2.0 * f);
  }
};

/// Fused-silica refractive index at a wavelength in nanometers.
inline double refractive_index(double lambda_nm,
                               const SellmeierCoefficients& coeffs =
                                   SellmeierCoefficients::fused_silica()) {
  if (!(lambda_nm >= 300.0) || !(lambda_nm <= 1000.0)) {
    throw std::domain_error("refractive_index: wavelength outside 300-1000 nm validity");
  }
  const double l2 = sqr(lambda_nm * 1e-3);
  double n2 = 1.0;
  for (int i = 0; i < 3; ++i) n2 += coeffs.b[static_cast<std::size_t>(i)] * l2 /
                                    (l2 - coeffs.c[static_cast<std::size_t>(i)]);
  return std::sqrt(n2);
}

struct ComplexField {
  int n = 0;
  double pitch = kDefaultPitch;
  std::vector<std::complex<double>> u;
};

namespace detail {

/// Field just after the element with an extra quadratic coefficient folded
/// in (0 for U1 itself, the lens coefficient for U3).
inline ComplexField field_with_quadratic(const OpticalConfig& config, const HeightMap& map,
                                         double lambda_nm, double quad_coeff) {
  const double lambda = lambda_nm * 1e-9;
  const double k = 2.0 * M_PI / lambda;
  const double n_lambda = refractive_index(lambda_nm, config.sellmeier);
  const int n = map.n;
  ComplexField field;
  field.n = n;
  field.pitch = map.pitch;
  field.u.assign(static_cast<std::size_t>(n) * n, {0.0, 0.0});
  const int half = n / 2;
  for (int i = 0; i < n; ++i) {
    const double y = (i - half) * map.pitch;
    for (int j = 0; j < n; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * n + j;
      if (!map.mask[idx]) continue;
      const double x = (j - half) * map.pitch;
      const double phase = k * (quad_coeff * (x * x + y * y) + (n_lambda - 1.0) * map.h[idx]);
      field.u[idx] = std::polar(1.0, phase);
    }
  }
  return field;
}

}  // namespace detail

/// Field right after the element: unit amplitude inside the
/// aperture, spherical source phase plus the material phase (n_lambda-1)*h.
inline ComplexField field_at_element(const OpticalConfig& config, const HeightMap& map,
                                     double lambda_nm) {
  config.validate();
  return detail::field_with_quadratic(config, map, lambda_nm, config.spherical_coeff());
}

/// Per-wavelength PSF kernels: k x k crops around the zero-frequency bin,
/// each L1-normalized. energy_fraction records how much of the total
/// pre-normalization energy the crop captured (1.0 for focused designs).
struct PsfStack {
  WavelengthGrid grid;
  int crop = 64;
  std::vector<std::vector<double>> kernels;
  std::vector<double> energy_fraction;
  // provenance echo for the sidecar
  OpticalConfig config;
  int source_n = kDefaultGridSize;
  double source_pitch = kDefaultPitch;

  const std::vector<double>& kernel(int band) const {
    return kernels[static_cast<std::size_t>(band)];
  }
};

/// Compute the PSF stack of a height map over a wavelength grid. The sensor
/// field is modeled as the DFT of the full field with the lens quadratic
/// folded in; the squared magnitude is centered, cropped to crop x crop and
/// normalized to unit L1. Bands are computed in parallel.
inline PsfStack psf(const OpticalConfig& config, const HeightMap& map,
                    const WavelengthGrid& grid, int crop = 64) {
  config.validate();
  const int n = map.n;
  if (crop > n) throw config_error("psf: crop exceeds the optical grid");
  if (crop <= 0 || crop % 2 != 0) throw config_error("psf: crop must be even and positive");

  PsfStack stack;
  stack.grid = grid;
  stack.crop = crop;
  stack.config = config;
  stack.source_n = n;
  stack.source_pitch = map.pitch;
  stack.kernels.assign(static_cast<std::size_t>(grid.count), {});
  stack.energy_fraction.assign(static_cast<std::size_t>(grid.count), 0.0);

  const double quad = config.spherical_coeff() + config.lens_coeff();
  parallel_for(static_cast<std::size_t>(grid.count), [&](std::size_t band) {
    const double lambda_nm = grid.wavelength(static_cast<int>(band));
    ComplexField field = detail::field_with_quadratic(config, map, lambda_nm, quad);
    std::vector<std::complex<double>> spectrum(field.u.size());
    fft::forward2d(n, n, field.u.data(), spectrum.data());
    std::vector<double> intensity(field.u.size());
    double total = 0.0;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
      intensity[i] = std::norm(spectrum[i]);
      total += intensity[i];
    }
    if (!(total > 0.0)) {
      throw numeric_error("psf: empty aperture produced a zero field");
    }
    fft::fftshift2d(intensity, n, n);
    std::vector<double> crop_data(static_cast<std::size_t>(crop) * crop);
    const int r0 = n / 2 - crop / 2;
    double crop_sum = 0.0;
    for (int i = 0; i < crop; ++i) {
      for (int j = 0; j < crop; ++j) {
        const double v = intensity[static_cast<std::size_t>(r0 + i) * n + (r0 + j)];
        crop_data[static_cast<std::size_t>(i) * crop + j] = v;
        crop_sum += v;
      }
    }
    if (!(crop_sum > 0.0)) {
      throw numeric_error("psf: crop window captured no energy");
    }
    for (double& v : crop_data) v /= crop_sum;
    stack.kernels[band] = std::move(crop_data);
    stack.energy_fraction[band] = crop_sum / total;
  });
  return stack;
}

/// Profile that cancels the net quadratic phase at lambda0 by wrapping it
/// into [0, lambda0/(n-1)): a ring-quantized diffractive lens. Useful as an
/// optimizer start and for focused-system demos.
inline HeightProfile focusing_profile(const OpticalConfig& config, double lambda0_nm,
                                      double pitch = kDefaultPitch) {
  config.validate();
  const double lambda0 = lambda0_nm * 1e-9;
  const double n0 = refractive_index(lambda0_nm, config.sellmeier);
  const double quad = config.spherical_coeff() + config.lens_coeff();
  const double wrap = lambda0 / (n0 - 1.0);  // height step worth one wave
  HeightProfile profile = HeightProfile::zeros();
  for (int ring = 0; ring < kProfileEntries; ++ring) {
    const double r = ring * pitch;
    const double target = -quad * r * r / (n0 - 1.0);  // height canceling the phase
    profile.w[static_cast<std::size_t>(ring)] = target - wrap * std::floor(target / wrap);
  }
  return profile;
}

}  // namespace specpol
