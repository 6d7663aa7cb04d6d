#pragma once

#include <cmath>
#include <vector>

#include "specpol/core.hpp"

namespace specpol {

/// Uniform wavelength sampling in nanometers. Default is the 400-700 nm
/// visible range at 10 nm steps (31 bands).
struct WavelengthGrid {
  double lambda_min = 400.0;
  double lambda_max = 700.0;
  double step = 10.0;
  int count = 31;

  static WavelengthGrid make(double lo, double hi, double step_nm) {
    if (!(step_nm > 0.0) || !(hi >= lo)) {
      throw config_error("WavelengthGrid: require lambda_max >= lambda_min and step > 0");
    }
    const double bands = (hi - lo) / step_nm + 1.0;
    const int n = static_cast<int>(std::llround(bands));
    if (std::abs(bands - n) > 1e-9) {
      throw config_error("WavelengthGrid: step does not evenly divide the range");
    }
    return WavelengthGrid{lo, hi, step_nm, n};
  }

  double wavelength(int band) const { return lambda_min + step * band; }

  std::vector<double> wavelengths() const {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = wavelength(i);
    return out;
  }

  bool operator==(const WavelengthGrid& o) const {
    return lambda_min == o.lambda_min && lambda_max == o.lambda_max && step == o.step &&
           count == o.count;
  }
};

inline WavelengthGrid default_grid() { return WavelengthGrid::make(400.0, 700.0, 10.0); }

}  // namespace specpol
