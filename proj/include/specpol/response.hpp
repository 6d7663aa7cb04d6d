#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "specpol/core.hpp"
#include "specpol/grid.hpp"

namespace specpol {

/// Radiometric response: polarizer transmittance T(lambda) and per-channel
/// camera response Rc(lambda). The encoder weight is their product.
struct ResponseTable {
  WavelengthGrid grid;
  std::vector<double> t_polarizer;          // count entries in [0, 1]
  std::vector<std::array<double, 3>> r_camera;  // count x {R,G,B}, >= 0

  double weight(int band, int channel) const {
    return t_polarizer[static_cast<std::size_t>(band)] *
           r_camera[static_cast<std::size_t>(band)][static_cast<std::size_t>(channel)];
  }

  void validate() const {
    const auto n = static_cast<std::size_t>(grid.count);
    if (t_polarizer.size() != n || r_camera.size() != n) {
      throw shape_error("ResponseTable: row count does not match the wavelength grid");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!(t_polarizer[i] >= 0.0) || !(t_polarizer[i] <= 1.0)) {
        throw config_error("ResponseTable: t_polarizer out of [0,1]");
      }
      for (double v : r_camera[i]) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw config_error("ResponseTable: negative or non-finite camera response");
        }
      }
    }
  }
};

// Default camera curves: Gaussians centered at 610/540/470 nm with 70 nm
// FWHM. The paper never publishes its response, so these are stand-ins that
// any CSV can override. t_polarizer defaults to 1.0 because the analyzer
// model already carries the ideal polarizer's 1/2; pass 0.5 when encoding
// plain intensity cubes without the analyzer stage.
inline ResponseTable make_default_response(const WavelengthGrid& grid,
                                           double t_polarizer = 1.0) {
  constexpr double kCenters[3] = {610.0, 540.0, 470.0};
  constexpr double kFwhm = 70.0;
  const double sigma = kFwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  ResponseTable table;
  table.grid = grid;
  table.t_polarizer.assign(static_cast<std::size_t>(grid.count), t_polarizer);
  table.r_camera.resize(static_cast<std::size_t>(grid.count));
  for (int b = 0; b < grid.count; ++b) {
    const double lambda = grid.wavelength(b);
    for (int c = 0; c < 3; ++c) {
      table.r_camera[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)] =
          std::exp(-sqr(lambda - kCenters[c]) / (2.0 * sqr(sigma)));
    }
  }
  return table;
}

}  // namespace specpol
