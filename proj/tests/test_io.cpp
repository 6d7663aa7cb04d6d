#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "specpol/io.hpp"
#include "specpol/scenes.hpp"

using namespace specpol;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("specpol_io_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()
                                            ->current_test_info()
                                            ->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

// random values exactly representable in float32, so the f32le round trip is
// bit-exact
SpectralCube random_f32_cube(std::uint64_t seed, int h, int w, int bands) {
  SpectralCube cube = SpectralCube::zeros(
      h, w, WavelengthGrid::make(400, 400 + 10.0 * (bands - 1), 10));
  Rng rng(seed);
  for (double& v : cube.data) v = static_cast<float>(rng.uniform01());
  return cube;
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_F(IoTest, CubeRoundTripBitExact) {
  const SpectralCube cube = random_f32_cube(1, 8, 8, 31);
  write_cube(cube, path("a.cube"));
  const SpectralCube back = read_cube(path("a.cube"));
  EXPECT_EQ(back.height, cube.height);
  EXPECT_EQ(back.width, cube.width);
  EXPECT_TRUE(back.grid == cube.grid);
  EXPECT_EQ(back.data, cube.data);

  // writes are byte-stable
  write_cube(back, path("b.cube"));
  EXPECT_EQ(slurp(path("a.cube")), slurp(path("b.cube")));
  EXPECT_EQ(slurp(path("a.cube.json")), slurp(path("b.cube.json")));
}

TEST_F(IoTest, TruncatedPayloadRejected) {
  const SpectralCube cube = random_f32_cube(2, 8, 8, 4);
  write_cube(cube, path("t.cube"));
  fs::resize_file(path("t.cube"), fs::file_size(path("t.cube")) - 4);
  try {
    read_cube(path("t.cube"));
    FAIL() << "expected format_error";
  } catch (const format_error& e) {
    EXPECT_NE(std::string(e.what()).find("payload length"), std::string::npos);
  }
}

TEST_F(IoTest, WavelengthCountMismatchRejected) {
  const SpectralCube cube = random_f32_cube(3, 4, 4, 4);
  write_cube(cube, path("w.cube"));
  // tamper: drop one wavelength from the sidecar
  json j;
  {
    std::ifstream in(path("w.cube.json"));
    in >> j;
  }
  j["wavelengths"].erase(3);
  {
    std::ofstream out(path("w.cube.json"), std::ios::trunc);
    out << j.dump(2);
  }
  EXPECT_THROW(read_cube(path("w.cube")), format_error);
}

TEST_F(IoTest, UnknownDtypeAndLayoutRejected) {
  const SpectralCube cube = random_f32_cube(4, 4, 4, 3);
  write_cube(cube, path("d.cube"));
  json j;
  {
    std::ifstream in(path("d.cube.json"));
    in >> j;
  }
  json bad_dtype = j;
  bad_dtype["dtype"] = "f64le";
  {
    std::ofstream out(path("d.cube.json"), std::ios::trunc);
    out << bad_dtype.dump(2);
  }
  EXPECT_THROW(read_cube(path("d.cube")), format_error);
  json bad_layout = j;
  bad_layout["layout"] = "pixel-major";
  {
    std::ofstream out(path("d.cube.json"), std::ios::trunc);
    out << bad_layout.dump(2);
  }
  EXPECT_THROW(read_cube(path("d.cube")), format_error);
}

TEST_F(IoTest, StokesAndProfileAndPsfRoundTrip) {
  StokesCube st = StokesCube::zeros(6, 5, WavelengthGrid::make(500, 540, 20));
  Rng rng(5);
  for (auto& comp : st.s) {
    for (double& v : comp) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  }
  write_stokes(st, path("s.stokes"));
  const StokesCube st2 = read_stokes(path("s.stokes"));
  for (int c = 0; c < 4; ++c) {
    EXPECT_EQ(st2.s[static_cast<std::size_t>(c)], st.s[static_cast<std::size_t>(c)]);
  }

  HeightProfile profile = HeightProfile::zeros();
  for (int i = 0; i < kProfileEntries; ++i) {
    profile.w[static_cast<std::size_t>(i)] = static_cast<float>(i * 1e-9);
  }
  write_profile(profile, path("p.prof"));
  EXPECT_EQ(read_profile(path("p.prof")).w, profile.w);

  PsfStack stack;
  stack.grid = WavelengthGrid::make(500, 520, 10);
  stack.crop = 4;
  stack.kernels.assign(3, std::vector<double>(16, 0.0));
  for (int b = 0; b < 3; ++b) {
    stack.kernels[static_cast<std::size_t>(b)][static_cast<std::size_t>(5 + b)] = 1.0f;
  }
  stack.energy_fraction.assign(3, 1.0);
  write_psf_stack(stack, path("k.psf"));
  const PsfStack stack2 = read_psf_stack(path("k.psf"));
  EXPECT_EQ(stack2.crop, 4);
  EXPECT_TRUE(stack2.grid == stack.grid);
  for (int b = 0; b < 3; ++b) {
    EXPECT_EQ(stack2.kernels[static_cast<std::size_t>(b)],
              stack.kernels[static_cast<std::size_t>(b)]);
  }
}

TEST_F(IoTest, HeightMapRoundTripRestoresMask) {
  HeightProfile profile = HeightProfile::zeros();
  for (int i = 0; i < kProfileEntries; ++i) {
    profile.w[static_cast<std::size_t>(i)] =
        static_cast<float>((i % 16) * kDefaultDepth / 15.0);
  }
  const HeightMap map = quantize(rasterize(profile, 128));
  write_heightmap(map, path("m.hmap"));
  const HeightMap back = read_heightmap(path("m.hmap"));
  EXPECT_EQ(back.n, map.n);
  EXPECT_DOUBLE_EQ(back.pitch, map.pitch);
  ASSERT_EQ(back.h.size(), map.h.size());
  for (std::size_t i = 0; i < map.h.size(); ++i) {
    EXPECT_EQ(back.h[i], static_cast<double>(static_cast<float>(map.h[i])));
  }
  EXPECT_EQ(back.mask, map.mask);
  ASSERT_TRUE(back.quant.has_value());
  EXPECT_EQ(back.quant->levels, map.quant->levels);
}

TEST_F(IoTest, MeasurementSetRoundTrip) {
  MeasurementSet set;
  Rng rng(6);
  for (int i = 0; i < 4; ++i) {
    set.m[static_cast<std::size_t>(i)] = RGBImage::zeros(5, 7);
    for (double& v : set.m[static_cast<std::size_t>(i)].data) {
      v = static_cast<float>(rng.uniform01());
    }
    set.seeds[static_cast<std::size_t>(i)] = 100 + static_cast<std::uint64_t>(i);
  }
  set.master_seed = 42;
  write_measurement_set(set, path("meas"), "stack.psf");
  const MeasurementSet back = read_measurement_set(path("meas"));
  EXPECT_EQ(back.master_seed, 42u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(back.m[static_cast<std::size_t>(i)].data,
              set.m[static_cast<std::size_t>(i)].data);
    EXPECT_EQ(back.configs[static_cast<std::size_t>(i)],
              set.configs[static_cast<std::size_t>(i)]);
    EXPECT_EQ(back.seeds[static_cast<std::size_t>(i)],
              set.seeds[static_cast<std::size_t>(i)]);
  }
}

TEST_F(IoTest, ResponseCsvRoundTrip) {
  const WavelengthGrid grid = default_grid();
  const ResponseTable table = make_default_response(grid, 0.5);
  write_response_csv(table, path("resp.csv"));
  const ResponseTable back = read_response_csv(path("resp.csv"), grid);
  for (int b = 0; b < grid.count; ++b) {
    EXPECT_NEAR(back.t_polarizer[static_cast<std::size_t>(b)],
                table.t_polarizer[static_cast<std::size_t>(b)], 1e-7);
    for (int c = 0; c < 3; ++c) {
      EXPECT_NEAR(back.r_camera[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)],
                  table.r_camera[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)],
                  1e-7);
    }
  }
}

TEST_F(IoTest, SynthesizedRgbGreenDominantAt550) {
  const WavelengthGrid grid = default_grid();
  SpectralCube cube = SpectralCube::zeros(4, 4, grid);
  const int band550 = 15;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) cube.at(band550, i, j) = 2.0;
  }
  const RGBImage img = synthesize_rgb(cube, make_default_response(grid));
  EXPECT_GT(img.at(1, 0, 0), img.at(0, 0, 0));
  EXPECT_GT(img.at(1, 0, 0), img.at(2, 0, 0));
  EXPECT_DOUBLE_EQ(img.at(1, 0, 0), 1.0);  // normalized to max
}

TEST_F(IoTest, SynthesizedRgbScaleInvariantAndZeroSafe) {
  const WavelengthGrid grid = WavelengthGrid::make(500, 540, 20);
  SpectralCube cube = SpectralCube::zeros(4, 4, grid);
  Rng rng(7);
  for (double& v : cube.data) v = rng.uniform01();
  const ResponseTable resp = make_default_response(grid);
  const RGBImage a = synthesize_rgb(cube, resp);
  SpectralCube doubled = cube;
  for (double& v : doubled.data) v *= 2.0;
  const RGBImage b = synthesize_rgb(doubled, resp);
  for (std::size_t i = 0; i < a.data.size(); ++i) EXPECT_NEAR(a.data[i], b.data[i], 1e-12);

  const RGBImage z = synthesize_rgb(SpectralCube::zeros(4, 4, grid), resp);
  for (double v : z.data) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST_F(IoTest, PngWriteReadRoundTrip) {
  std::vector<double> gray(16 * 16);
  Rng rng(8);
  for (double& v : gray) v = rng.uniform01();
  write_gray_png(path("g.png"), gray, 16, 16, 16);
  const GrayImage back = read_gray_png(path("g.png"));
  ASSERT_EQ(back.height, 16);
  ASSERT_EQ(back.width, 16);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    EXPECT_NEAR(back.data[i], gray[i], 1.0 / 65535.0);
  }
}

TEST_F(IoTest, IngestPngStack) {
  const WavelengthGrid grid = default_grid();
  fs::create_directories(path("stack"));
  Rng rng(9);
  std::vector<std::vector<double>> bands(31, std::vector<double>(16 * 16));
  for (int b = 0; b < 31; ++b) {
    for (double& v : bands[static_cast<std::size_t>(b)]) {
      v = std::round(rng.uniform01() * 65535.0) / 65535.0;  // representable
    }
    char name[40];
    std::snprintf(name, sizeof name, "stack/band_%02d.png", b);
    write_gray_png(path(name), bands[static_cast<std::size_t>(b)], 16, 16, 16);
  }
  const SpectralCube cube =
      ingest_external_cube(path("stack"), ExternalFormat::kPlanarPngStack);
  EXPECT_EQ(cube.height, 16);
  EXPECT_EQ(cube.width, 16);
  EXPECT_TRUE(cube.grid == grid);
  for (int b = 0; b < 31; ++b) {
    const auto band = cube.band(b);
    for (std::size_t i = 0; i < band.size(); ++i) {
      EXPECT_NEAR(band[i], bands[static_cast<std::size_t>(b)][i], 1e-4);
    }
  }
}

TEST_F(IoTest, IngestResamplesSixteenBandSource) {
  // 400-700 in 16 bands (20 nm): target band at 410 nm is the average of
  // the 400 and 420 source samples
  fs::create_directories(path("coarse"));
  for (int b = 0; b < 16; ++b) {
    char name[48];
    std::snprintf(name, sizeof name, "coarse/band_%02d.txt", b);
    std::ofstream out(path(name));
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) out << (b * 0.05) << " ";
      out << "\n";
    }
  }
  const SpectralCube cube = ingest_external_cube(path("coarse"), ExternalFormat::kMatrixText);
  EXPECT_EQ(cube.grid.count, 31);
  // band 1 = 410 nm: midpoint of source bands 0 (400 nm) and 1 (420 nm)
  EXPECT_NEAR(cube.at(1, 0, 0), 0.5 * (0.0 + 0.05), 1e-12);
  // band 2 = 420 nm: exactly source band 1
  EXPECT_NEAR(cube.at(2, 0, 0), 0.05, 1e-12);
}

TEST_F(IoTest, IngestMissingBandNamed) {
  fs::create_directories(path("gap"));
  for (int b = 0; b < 6; ++b) {
    if (b == 3) continue;
    char name[40];
    std::snprintf(name, sizeof name, "gap/band_%02d.txt", b);
    std::ofstream out(path(name));
    out << "1 2\n3 4\n";
  }
  try {
    ingest_external_cube(path("gap"), ExternalFormat::kMatrixText);
    FAIL() << "expected format_error";
  } catch (const format_error& e) {
    EXPECT_NE(std::string(e.what()).find("index 3"), std::string::npos);
  }
}

TEST_F(IoTest, IngestInconsistentDimensionsRejected) {
  fs::create_directories(path("bad"));
  {
    std::ofstream out(path("bad/band_00.txt"));
    out << "1 2\n3 4\n";
  }
  {
    std::ofstream out(path("bad/band_01.txt"));
    out << "1 2 3\n4 5 6\n";
  }
  EXPECT_THROW(ingest_external_cube(path("bad"), ExternalFormat::kMatrixText), format_error);
}

TEST_F(IoTest, SceneGeneratorsSatisfyTheirContracts) {
  const WavelengthGrid grid = WavelengthGrid::make(450, 650, 50);
  const PolarizedScene target = make_polar_target(64, grid);
  // quadrant AoLP by construction
  const PolarimetricMaps maps = dolp_aolp(target.stokes, 2);
  const double expected[4] = {0.0, M_PI / 4, M_PI / 2, -M_PI / 4};
  for (int q = 0; q < 4; ++q) {
    const Region reg = quadrant_interior(64, q, 4);
    for (int i = reg.row0; i < reg.row1; ++i) {
      for (int j = reg.col0; j < reg.col1; ++j) {
        EXPECT_NEAR(aolp_distance(maps.aolp[static_cast<std::size_t>(i) * 64 + j],
                                  expected[q]),
                    0.0, 1e-12);
        EXPECT_NEAR(maps.dolp[static_cast<std::size_t>(i) * 64 + j], 1.0, 1e-12);
      }
    }
  }
  EXPECT_EQ(count_physical_violations(target.stokes), 0u);

  const PolarizedScene circular = make_circular_scene(96, grid);
  EXPECT_EQ(count_physical_violations(circular.stokes), 0u);
  // both signs of S3 present
  double smin = 0.0, smax = 0.0;
  for (double v : circular.stokes.s[3]) {
    smin = std::min(smin, v);
    smax = std::max(smax, v);
  }
  EXPECT_GT(smax, 0.0);
  EXPECT_LT(smin, 0.0);

  const SpectralCube checker = make_checker_cube(64, grid);
  EXPECT_TRUE(validate_cube(checker).ok);
}
