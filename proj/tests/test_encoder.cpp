#include <gtest/gtest.h>

#include <cmath>

#include "specpol/encoder.hpp"

using namespace specpol;

namespace {

// Identity stack: centered delta kernels in every band.
PsfStack delta_stack(const WavelengthGrid& grid, int k = 8) {
  PsfStack stack;
  stack.grid = grid;
  stack.crop = k;
  stack.kernels.assign(static_cast<std::size_t>(grid.count),
                       std::vector<double>(static_cast<std::size_t>(k) * k, 0.0));
  for (auto& kern : stack.kernels) kern[static_cast<std::size_t>(k / 2) * k + k / 2] = 1.0;
  stack.energy_fraction.assign(static_cast<std::size_t>(grid.count), 1.0);
  return stack;
}

ResponseTable unit_response(const WavelengthGrid& grid) {
  ResponseTable t;
  t.grid = grid;
  t.t_polarizer.assign(static_cast<std::size_t>(grid.count), 1.0);
  t.r_camera.assign(static_cast<std::size_t>(grid.count), {1.0, 1.0, 1.0});
  return t;
}

SpectralCube random_cube(std::uint64_t seed, int h, int w, const WavelengthGrid& grid) {
  SpectralCube cube = SpectralCube::zeros(h, w, grid);
  Rng rng(seed);
  for (double& v : cube.data) v = rng.uniform01();
  return cube;
}

PsfStack gaussian_stack(const WavelengthGrid& grid, int k = 8) {
  PsfStack stack = delta_stack(grid, k);
  for (int b = 0; b < grid.count; ++b) {
    auto& kern = stack.kernels[static_cast<std::size_t>(b)];
    double total = 0.0;
    const double sigma = 0.8 + 0.15 * b;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        const double d2 = sqr(i - k / 2) + sqr(j - k / 2);
        kern[static_cast<std::size_t>(i) * k + j] = std::exp(-d2 / (2 * sqr(sigma)));
        total += kern[static_cast<std::size_t>(i) * k + j];
      }
    }
    for (double& v : kern) v /= total;
  }
  return stack;
}

}  // namespace

TEST(Encode, IdentityKernelsSumBands) {
  const WavelengthGrid grid = WavelengthGrid::make(500, 540, 10);
  const SpectralCube scene = random_cube(1, 12, 12, grid);
  const RGBImage out = encode(scene, delta_stack(grid), unit_response(grid), NoiseModel{});
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 12; ++j) {
        double expect = 0.0;
        for (int b = 0; b < grid.count; ++b) expect += scene.at(b, i, j);
        EXPECT_NEAR(out.at(c, i, j), expect, 1e-10 * std::max(1.0, expect));
      }
    }
  }
}

TEST(Encode, ZeroSceneGivesZeroImage) {
  const WavelengthGrid grid = WavelengthGrid::make(500, 540, 20);
  const SpectralCube scene = SpectralCube::zeros(8, 8, grid);
  const RGBImage out = encode(scene, gaussian_stack(grid), unit_response(grid), NoiseModel{});
  for (double v : out.data) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Encode, SingleBandImpulseReproducesKernel) {
  // one bright pixel in band j -> channel c equals weight * kernel centered there
  const WavelengthGrid grid = WavelengthGrid::make(500, 540, 10);
  const int h = 16, w = 16, k = 8;
  const PsfStack stack = gaussian_stack(grid, k);
  ResponseTable resp = make_default_response(grid, 0.5);
  SpectralCube scene = SpectralCube::zeros(h, w, grid);
  const int band = 2, row = 7, col = 9;
  scene.at(band, row, col) = 3.0;

  const RGBImage out = encode(scene, stack, resp, NoiseModel{});
  const auto& kern = stack.kernels[band];
  for (int c = 0; c < 3; ++c) {
    const double weight = resp.weight(band, c);
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        // direct convolution oracle: kernel center lands on (row, col)
        const int ki = i - row + k / 2, kj = j - col + k / 2;
        const double expect = (ki >= 0 && ki < k && kj >= 0 && kj < k)
                                  ? 3.0 * weight * kern[static_cast<std::size_t>(ki) * k + kj]
                                  : 0.0;
        EXPECT_NEAR(out.at(c, i, j), expect, 1e-12);
      }
    }
  }
}

TEST(Encode, LinearInScene) {
  const WavelengthGrid grid = WavelengthGrid::make(500, 560, 20);
  const PsfStack stack = gaussian_stack(grid);
  const ResponseTable resp = make_default_response(grid, 0.5);
  const SpectralCube x = random_cube(2, 10, 14, grid);
  const SpectralCube y = random_cube(3, 10, 14, grid);
  const double a = 1.7, b = -0.4;
  SpectralCube combo = x;
  for (std::size_t i = 0; i < combo.data.size(); ++i) {
    combo.data[i] = a * x.data[i] + b * y.data[i];
  }
  const RGBImage ex = encode(x, stack, resp, NoiseModel{});
  const RGBImage ey = encode(y, stack, resp, NoiseModel{});
  const RGBImage ec = encode(combo, stack, resp, NoiseModel{});
  double scale = 0.0;
  for (double v : ec.data) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < ec.data.size(); ++i) {
    EXPECT_NEAR(ec.data[i], a * ex.data[i] + b * ey.data[i], 1e-10 * scale);
  }
}

TEST(Encode, NonnegativeForNonnegativeInputs) {
  const WavelengthGrid grid = WavelengthGrid::make(450, 650, 50);
  const SpectralCube scene = random_cube(4, 16, 16, grid);
  const RGBImage out =
      encode(scene, gaussian_stack(grid), make_default_response(grid, 0.5), NoiseModel{});
  double peak = 0.0;
  for (double v : out.data) peak = std::max(peak, v);
  for (double v : out.data) EXPECT_GE(v, -1e-12 * peak);
}

TEST(Encode, TranslationEquivariantInInterior) {
  const WavelengthGrid grid = WavelengthGrid::make(500, 520, 20);
  const int h = 24, w = 24, dx = 3, dy = 2;
  const PsfStack stack = gaussian_stack(grid);
  const ResponseTable resp = unit_response(grid);
  SpectralCube scene = SpectralCube::zeros(h, w, grid);
  Rng rng(5);
  // content away from borders so the shift stays interior
  for (int b = 0; b < grid.count; ++b) {
    for (int i = 8; i < 16; ++i) {
      for (int j = 8; j < 16; ++j) scene.at(b, i, j) = rng.uniform01();
    }
  }
  SpectralCube shifted = SpectralCube::zeros(h, w, grid);
  for (int b = 0; b < grid.count; ++b) {
    for (int i = 8; i < 16; ++i) {
      for (int j = 8; j < 16; ++j) shifted.at(b, i + dy, j + dx) = scene.at(b, i, j);
    }
  }
  const RGBImage a = encode(scene, stack, resp, NoiseModel{});
  const RGBImage b = encode(shifted, stack, resp, NoiseModel{});
  for (int c = 0; c < 3; ++c) {
    for (int i = 4; i < h - 4 - dy; ++i) {
      for (int j = 4; j < w - 4 - dx; ++j) {
        EXPECT_NEAR(a.at(c, i, j), b.at(c, i + dy, j + dx), 1e-12);
      }
    }
  }
}

TEST(Encode, GridMismatchRejected) {
  const WavelengthGrid g1 = WavelengthGrid::make(500, 540, 10);
  const WavelengthGrid g2 = WavelengthGrid::make(500, 540, 20);
  const SpectralCube scene = SpectralCube::zeros(8, 8, g1);
  EXPECT_THROW(encode(scene, delta_stack(g2), unit_response(g1), NoiseModel{}), shape_error);
  EXPECT_THROW(encode(scene, delta_stack(g1), unit_response(g2), NoiseModel{}), shape_error);
}

TEST(Encode, GaussianNoiseDeterministicPerSeed) {
  const WavelengthGrid grid = WavelengthGrid::make(500, 520, 20);
  const SpectralCube scene = random_cube(6, 8, 8, grid);
  NoiseModel noise;
  noise.kind = NoiseKind::kGaussian;
  noise.sigma = 0.05;
  noise.seed = 123;
  const RGBImage a = encode(scene, delta_stack(grid), unit_response(grid), noise);
  const RGBImage b = encode(scene, delta_stack(grid), unit_response(grid), noise);
  EXPECT_EQ(a.data, b.data);
  noise.seed = 124;
  const RGBImage c = encode(scene, delta_stack(grid), unit_response(grid), noise);
  EXPECT_NE(a.data, c.data);
}

TEST(AcquireFour, UnpolarizedSceneGivesIdenticalMeasurements) {
  const WavelengthGrid grid = WavelengthGrid::make(500, 560, 20);
  StokesCube st = StokesCube::zeros(12, 12, grid);
  Rng rng(7);
  for (std::size_t i = 0; i < st.volume(); ++i) st.s[0][i] = rng.uniform01();
  const MeasurementSet set = acquire_four(PolarizedScene{st}, gaussian_stack(grid),
                                          make_default_response(grid), NoiseModel{});
  for (int i = 1; i < 4; ++i) {
    EXPECT_EQ(set.m[0].data, set.m[static_cast<std::size_t>(i)].data);
  }
}

TEST(AcquireFour, HorizontalSceneZeroesM2) {
  const WavelengthGrid grid = WavelengthGrid::make(500, 560, 20);
  StokesCube st = StokesCube::zeros(10, 10, grid);
  Rng rng(8);
  for (std::size_t i = 0; i < st.volume(); ++i) {
    st.s[0][i] = rng.uniform01();
    st.s[1][i] = st.s[0][i];  // fully horizontal
  }
  const MeasurementSet set = acquire_four(PolarizedScene{st}, gaussian_stack(grid),
                                          make_default_response(grid), NoiseModel{});
  for (double v : set.m[1].data) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(AcquireFour, MeasurementSumMatchesS0Encode) {
  // linearity: M1 + M2 equals the encode of the S0 cube
  const WavelengthGrid grid = WavelengthGrid::make(500, 560, 20);
  StokesCube st = StokesCube::zeros(10, 10, grid);
  Rng rng(9);
  for (std::size_t i = 0; i < st.volume(); ++i) {
    st.s[0][i] = rng.uniform01();
    st.s[1][i] = 0.5 * st.s[0][i];
    st.s[3][i] = 0.25 * st.s[0][i];
  }
  const PsfStack stack = gaussian_stack(grid);
  const ResponseTable resp = make_default_response(grid);
  const MeasurementSet set = acquire_four(PolarizedScene{st}, stack, resp, NoiseModel{});
  const RGBImage s0_image = encode(st.component(0), stack, resp, NoiseModel{});
  double peak = 0.0;
  for (double v : s0_image.data) peak = std::max(peak, std::abs(v));
  for (std::size_t i = 0; i < s0_image.data.size(); ++i) {
    EXPECT_NEAR(set.m[0].data[i] + set.m[1].data[i], s0_image.data[i], 1e-10 * peak);
  }
}

TEST(AcquireFour, SeedsDistinctAndDerived) {
  const WavelengthGrid grid = WavelengthGrid::make(500, 520, 20);
  StokesCube st = StokesCube::zeros(6, 6, grid);
  for (std::size_t i = 0; i < st.volume(); ++i) st.s[0][i] = 1.0;
  NoiseModel noise;
  noise.kind = NoiseKind::kGaussian;
  noise.sigma = 0.01;
  noise.seed = 42;
  const MeasurementSet a = acquire_four(PolarizedScene{st}, delta_stack(grid),
                                        make_default_response(grid), noise);
  const MeasurementSet b = acquire_four(PolarizedScene{st}, delta_stack(grid),
                                        make_default_response(grid), noise);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(a.seeds[static_cast<std::size_t>(i)], b.seeds[static_cast<std::size_t>(i)]);
    EXPECT_EQ(a.m[static_cast<std::size_t>(i)].data, b.m[static_cast<std::size_t>(i)].data);
    for (int j = i + 1; j < 4; ++j) {
      EXPECT_NE(a.seeds[static_cast<std::size_t>(i)], a.seeds[static_cast<std::size_t>(j)]);
    }
  }
  // unpolarized scene: noiseless signals identical, realized noise differs
  EXPECT_NE(a.m[0].data, a.m[1].data);
}

TEST(NoiseModel, PoissonGaussianDeterministicAndUnbiased) {
  const WavelengthGrid grid = WavelengthGrid::make(500, 500, 10);
  SpectralCube scene = SpectralCube::zeros(64, 64, grid);
  for (double& v : scene.data) v = 0.8;
  NoiseModel noise;
  noise.kind = NoiseKind::kPoissonGaussian;
  noise.peak = 2000.0;
  noise.sigma = 0.002;
  noise.seed = 31;
  const RGBImage a = encode(scene, delta_stack(grid), unit_response(grid), noise);
  const RGBImage b = encode(scene, delta_stack(grid), unit_response(grid), noise);
  EXPECT_EQ(a.data, b.data);
  // sample mean close to the clean level for a large pixel count
  double mean = 0.0;
  for (double v : a.data) mean += v;
  mean /= static_cast<double>(a.data.size());
  EXPECT_NEAR(mean, 0.8, 0.01);
  EXPECT_THROW([&] {
    NoiseModel bad = noise;
    bad.peak = 0.0;
    bad.validate();
  }(), config_error);
}

TEST(NoiseModel, TwelveBitQuantizationLevels) {
  const WavelengthGrid grid = WavelengthGrid::make(500, 500, 10);
  SpectralCube scene = SpectralCube::zeros(8, 8, grid);
  Rng rng(10);
  for (double& v : scene.data) v = rng.uniform01();
  NoiseModel noise;
  noise.quantize_12bit = true;
  const RGBImage out = encode(scene, delta_stack(grid), unit_response(grid), noise);
  double peak = 0.0;
  for (double v : out.data) peak = std::max(peak, v);
  const double step = peak / 4095.0;
  for (double v : out.data) {
    const double level = v / step;
    EXPECT_NEAR(level, std::round(level), 1e-6);
  }
}
