#pragma once

// File formats: raw float32 payloads with JSON sidecars for every artifact
// type, PNG/CSV exports, and external dataset ingestion. All formats are
// little-endian with sorted JSON keys, so outputs are byte-stable.

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specpol/cube.hpp"
#include "specpol/doe.hpp"
#include "specpol/encoder.hpp"
#include "specpol/grid.hpp"
#include "specpol/optics.hpp"
#include "specpol/png_io.hpp"
#include "specpol/polarimetry.hpp"
#include "specpol/response.hpp"

static_assert(std::endian::native == std::endian::little,
              "raw f32le payloads assume a little-endian host");

namespace specpol {

using json = nlohmann::json;

namespace detail {

inline std::string sidecar_path(const std::string& path) { return path + ".json"; }

inline void write_file(const std::string& path, const void* data, std::size_t bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw format_error("cannot open for writing: " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out) throw format_error("short write: " + path);
}

inline std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw format_error("cannot open: " + path);
  const std::streamsize bytes = in.tellg();
  in.seekg(0);
  std::vector<char> buffer(static_cast<std::size_t>(bytes));
  in.read(buffer.data(), bytes);
  if (!in) throw format_error("short read: " + path);
  return buffer;
}

inline void write_payload_f32(const std::string& path, const std::vector<double>& data) {
  std::vector<float> f32(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) f32[i] = static_cast<float>(data[i]);
  write_file(path, f32.data(), f32.size() * sizeof(float));
}

inline std::vector<double> read_payload_f32(const std::string& path, std::size_t expected,
                                            const std::string& what) {
  const std::vector<char> raw = read_file(path);
  if (raw.size() != expected * sizeof(float)) {
    throw format_error(what + ": payload length " + std::to_string(raw.size()) +
                       " bytes does not match header (expected " +
                       std::to_string(expected * sizeof(float)) + ")");
  }
  std::vector<float> f32(expected);
  std::memcpy(f32.data(), raw.data(), raw.size());
  std::vector<double> out(expected);
  for (std::size_t i = 0; i < expected; ++i) out[i] = f32[i];
  return out;
}

inline void write_sidecar(const std::string& path, const json& j) {
  std::ofstream out(sidecar_path(path), std::ios::trunc);
  if (!out) throw format_error("cannot open for writing: " + sidecar_path(path));
  out << j.dump(2) << "\n";
}

inline json read_sidecar(const std::string& path) {
  std::ifstream in(sidecar_path(path));
  if (!in) throw format_error("missing sidecar: " + sidecar_path(path));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw format_error("bad sidecar " + sidecar_path(path) + ": " + e.what());
  }
  return j;
}

template <typename T>
T require(const json& j, const std::string& key, const std::string& what) {
  if (!j.contains(key)) throw format_error(what + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw format_error(what + ": field '" + key + "' has the wrong type");
  }
}

inline json grid_to_json(const WavelengthGrid& g) {
  return json{{"count", g.count},
              {"lambda_max", g.lambda_max},
              {"lambda_min", g.lambda_min},
              {"step", g.step}};
}

inline WavelengthGrid grid_from_json(const json& j, const std::string& what) {
  const WavelengthGrid g = WavelengthGrid::make(require<double>(j, "lambda_min", what),
                                                require<double>(j, "lambda_max", what),
                                                require<double>(j, "step", what));
  if (require<int>(j, "count", what) != g.count) {
    throw format_error(what + ": field 'count' is inconsistent with the range");
  }
  return g;
}

/// Wavelength list consistent with width*height*bands payload bookkeeping.
inline WavelengthGrid grid_from_wavelengths(const std::vector<double>& ws,
                                            const std::string& what) {
  if (ws.empty()) throw format_error(what + ": field 'wavelengths' is empty");
  if (ws.size() == 1) return WavelengthGrid::make(ws[0], ws[0], 10.0);
  const double step = ws[1] - ws[0];
  for (std::size_t i = 1; i < ws.size(); ++i) {
    if (std::abs(ws[i] - ws[i - 1] - step) > 1e-9) {
      throw format_error(what + ": field 'wavelengths' is not uniformly spaced");
    }
  }
  return WavelengthGrid::make(ws.front(), ws.back(), step);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// SpectralCube <-> .cube (raw f32le band-major + sidecar)
// ---------------------------------------------------------------------------

inline void write_cube(const SpectralCube& cube, const std::string& path) {
  detail::write_sidecar(path, json{{"bands", cube.grid.count},
                                   {"dtype", "f32le"},
                                   {"height", cube.height},
                                   {"layout", "band-major"},
                                   {"wavelengths", cube.grid.wavelengths()},
                                   {"width", cube.width}});
  detail::write_payload_f32(path, cube.data);
}

inline SpectralCube read_cube(const std::string& path) {
  const json j = detail::read_sidecar(path);
  const std::string what = "cube " + path;
  const int width = detail::require<int>(j, "width", what);
  const int height = detail::require<int>(j, "height", what);
  const int bands = detail::require<int>(j, "bands", what);
  if (detail::require<std::string>(j, "dtype", what) != "f32le") {
    throw format_error(what + ": unknown dtype (expected 'f32le')");
  }
  if (detail::require<std::string>(j, "layout", what) != "band-major") {
    throw format_error(what + ": unknown layout (expected 'band-major')");
  }
  const auto ws = detail::require<std::vector<double>>(j, "wavelengths", what);
  if (static_cast<int>(ws.size()) != bands) {
    throw format_error(what + ": field 'wavelengths' has " + std::to_string(ws.size()) +
                       " entries but bands = " + std::to_string(bands));
  }
  SpectralCube cube;
  cube.height = height;
  cube.width = width;
  cube.grid = detail::grid_from_wavelengths(ws, what);
  cube.data = detail::read_payload_f32(
      path, static_cast<std::size_t>(width) * height * bands, what);
  return cube;
}

// ---------------------------------------------------------------------------
// StokesCube <-> .stokes (component-band-major payload)
// ---------------------------------------------------------------------------

inline void write_stokes(const StokesCube& cube, const std::string& path) {
  detail::write_sidecar(path, json{{"bands", cube.grid.count},
                                   {"components", {"s0", "s1", "s2", "s3"}},
                                   {"dtype", "f32le"},
                                   {"height", cube.height},
                                   {"layout", "component-band-major"},
                                   {"wavelengths", cube.grid.wavelengths()},
                                   {"width", cube.width}});
  std::vector<double> all;
  all.reserve(cube.volume() * 4);
  for (const auto& comp : cube.s) all.insert(all.end(), comp.begin(), comp.end());
  detail::write_payload_f32(path, all);
}

inline StokesCube read_stokes(const std::string& path) {
  const json j = detail::read_sidecar(path);
  const std::string what = "stokes " + path;
  const int width = detail::require<int>(j, "width", what);
  const int height = detail::require<int>(j, "height", what);
  const int bands = detail::require<int>(j, "bands", what);
  const auto ws = detail::require<std::vector<double>>(j, "wavelengths", what);
  if (static_cast<int>(ws.size()) != bands) {
    throw format_error(what + ": wavelength count does not match bands");
  }
  if (detail::require<std::string>(j, "layout", what) != "component-band-major") {
    throw format_error(what + ": unknown layout");
  }
  StokesCube cube = StokesCube::zeros(height, width, detail::grid_from_wavelengths(ws, what));
  const std::size_t volume = cube.volume();
  const std::vector<double> all = detail::read_payload_f32(path, volume * 4, what);
  for (int c = 0; c < 4; ++c) {
    std::copy(all.begin() + static_cast<std::ptrdiff_t>(c * volume),
              all.begin() + static_cast<std::ptrdiff_t>((c + 1) * volume),
              cube.s[static_cast<std::size_t>(c)].begin());
  }
  return cube;
}

// ---------------------------------------------------------------------------
// RGBImage <-> .rgbf (planar channel-major)
// ---------------------------------------------------------------------------

inline void write_rgb(const RGBImage& image, const std::string& path) {
  detail::write_sidecar(path, json{{"channels", 3},
                                   {"dtype", "f32le"},
                                   {"height", image.height},
                                   {"layout", "channel-major"},
                                   {"width", image.width}});
  detail::write_payload_f32(path, image.data);
}

inline RGBImage read_rgb(const std::string& path) {
  const json j = detail::read_sidecar(path);
  const std::string what = "rgb " + path;
  RGBImage image;
  image.height = detail::require<int>(j, "height", what);
  image.width = detail::require<int>(j, "width", what);
  if (detail::require<int>(j, "channels", what) != 3) {
    throw format_error(what + ": field 'channels' must be 3");
  }
  image.data = detail::read_payload_f32(
      path, static_cast<std::size_t>(image.height) * image.width * 3, what);
  return image;
}

// ---------------------------------------------------------------------------
// HeightProfile / HeightMap / PsfStack
// ---------------------------------------------------------------------------

inline void write_profile(const HeightProfile& profile, const std::string& path) {
  detail::write_sidecar(path, json{{"depth_max", kDefaultDepth},
                                   {"dtype", "f32le"},
                                   {"entries", kProfileEntries}});
  detail::write_payload_f32(path, profile.w);
}

inline HeightProfile read_profile(const std::string& path) {
  const json j = detail::read_sidecar(path);
  const std::string what = "profile " + path;
  const int entries = detail::require<int>(j, "entries", what);
  if (entries != kProfileEntries) {
    throw format_error(what + ": field 'entries' must be 512");
  }
  HeightProfile profile;
  profile.w = detail::read_payload_f32(path, kProfileEntries, what);
  return profile;
}

inline void write_heightmap(const HeightMap& map, const std::string& path) {
  json j{{"dtype", "f32le"}, {"n", map.n}, {"pitch", map.pitch}};
  if (map.quant) {
    j["depth"] = map.quant->depth;
    j["levels"] = map.quant->levels;
  }
  detail::write_sidecar(path, j);
  detail::write_payload_f32(path, map.h);
}

inline HeightMap read_heightmap(const std::string& path) {
  const json j = detail::read_sidecar(path);
  const std::string what = "heightmap " + path;
  HeightMap map;
  map.n = detail::require<int>(j, "n", what);
  map.pitch = detail::require<double>(j, "pitch", what);
  if (map.n <= 0 || map.n % 2 != 0) throw format_error(what + ": field 'n' must be even");
  map.h = detail::read_payload_f32(path, static_cast<std::size_t>(map.n) * map.n, what);
  if (j.contains("levels") && j.contains("depth")) {
    map.quant = QuantizationInfo{j.at("levels").get<int>(), j.at("depth").get<double>()};
  }
  // the aperture mask is derived, not stored
  map.mask.assign(map.h.size(), 0);
  const int half = map.n / 2;
  for (int i = 0; i < map.n; ++i) {
    for (int k = 0; k < map.n; ++k) {
      const double r = std::hypot(static_cast<double>(i - half), static_cast<double>(k - half));
      if (detail::aperture_hit(i - half, k - half, r, map.n)) {
        map.mask[static_cast<std::size_t>(i) * map.n + k] = 1;
      }
    }
  }
  return map;
}

inline void write_psf_stack(const PsfStack& stack, const std::string& path) {
  detail::write_sidecar(
      path, json{{"config",
                  json{{"convention", to_string(stack.config.convention)},
                       {"f", stack.config.f},
                       {"pitch", stack.source_pitch},
                       {"source_n", stack.source_n},
                       {"z", stack.config.z}}},
                 {"dtype", "f32le"},
                 {"grid", detail::grid_to_json(stack.grid)},
                 {"k", stack.crop},
                 {"layout", "band-major"}});
  std::vector<double> all;
  all.reserve(static_cast<std::size_t>(stack.grid.count) * stack.crop * stack.crop);
  for (const auto& kern : stack.kernels) all.insert(all.end(), kern.begin(), kern.end());
  detail::write_payload_f32(path, all);
}

inline PsfStack read_psf_stack(const std::string& path) {
  const json j = detail::read_sidecar(path);
  const std::string what = "psf " + path;
  PsfStack stack;
  stack.crop = detail::require<int>(j, "k", what);
  stack.grid = detail::grid_from_json(detail::require<json>(j, "grid", what), what);
  if (j.contains("config")) {
    const json cfg = j.at("config");
    if (cfg.contains("z")) stack.config.z = cfg.at("z").get<double>();
    if (cfg.contains("f")) stack.config.f = cfg.at("f").get<double>();
    if (cfg.contains("convention") && cfg.at("convention") == "PHYSICAL") {
      stack.config.convention = PhaseConvention::kPhysical;
    }
    if (cfg.contains("source_n")) stack.source_n = cfg.at("source_n").get<int>();
    if (cfg.contains("pitch")) stack.source_pitch = cfg.at("pitch").get<double>();
  }
  const std::size_t per_kernel = static_cast<std::size_t>(stack.crop) * stack.crop;
  const std::vector<double> all = detail::read_payload_f32(
      path, per_kernel * static_cast<std::size_t>(stack.grid.count), what);
  stack.kernels.resize(static_cast<std::size_t>(stack.grid.count));
  stack.energy_fraction.assign(static_cast<std::size_t>(stack.grid.count), 1.0);
  for (int b = 0; b < stack.grid.count; ++b) {
    auto& kern = stack.kernels[static_cast<std::size_t>(b)];
    kern.assign(all.begin() + static_cast<std::ptrdiff_t>(b * per_kernel),
                all.begin() + static_cast<std::ptrdiff_t>((b + 1) * per_kernel));
    // restore the unit-L1 invariant the float32 payload rounds away
    double total = 0.0;
    for (double v : kern) total += v;
    if (!(total > 0.0)) {
      throw format_error(what + ": kernel " + std::to_string(b) + " has no energy");
    }
    for (double& v : kern) v /= total;
  }
  return stack;
}

// ---------------------------------------------------------------------------
// MeasurementSet <-> directory with m1..m4.rgbf + manifest.json
// ---------------------------------------------------------------------------

inline void write_measurement_set(const MeasurementSet& set, const std::string& dir,
                                  const std::string& psf_reference = "") {
  std::filesystem::create_directories(dir);
  json files = json::array();
  for (int i = 0; i < 4; ++i) {
    const std::string name = "m" + std::to_string(i + 1) + ".rgbf";
    write_rgb(set.m[static_cast<std::size_t>(i)], dir + "/" + name);
    files.push_back(json{{"analyzer", to_string(set.configs[static_cast<std::size_t>(i)])},
                         {"file", name},
                         {"seed", set.seeds[static_cast<std::size_t>(i)]}});
  }
  detail::write_sidecar(dir + "/manifest",
                        json{{"master_seed", set.master_seed},
                             {"measurements", files},
                             {"psf", psf_reference}});
}

inline MeasurementSet read_measurement_set(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw format_error("missing manifest: " + dir + "/manifest.json");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw format_error(std::string("bad manifest: ") + e.what());
  }
  const std::string what = "manifest " + dir;
  const json files = detail::require<json>(j, "measurements", what);
  if (!files.is_array() || files.size() != 4) {
    throw format_error(what + ": exactly four measurements required");
  }
  MeasurementSet set;
  set.master_seed = detail::require<std::uint64_t>(j, "master_seed", what);
  for (int i = 0; i < 4; ++i) {
    const json& f = files.at(static_cast<std::size_t>(i));
    set.m[static_cast<std::size_t>(i)] =
        read_rgb(dir + "/" + detail::require<std::string>(f, "file", what));
    set.configs[static_cast<std::size_t>(i)] =
        analyzer_from_string(detail::require<std::string>(f, "analyzer", what));
    set.seeds[static_cast<std::size_t>(i)] = detail::require<std::uint64_t>(f, "seed", what);
  }
  for (int i = 0; i < 4; ++i) {
    for (int k = i + 1; k < 4; ++k) {
      if (set.configs[static_cast<std::size_t>(i)] == set.configs[static_cast<std::size_t>(k)]) {
        throw format_error(what + ": analyzer configs must be distinct");
      }
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// Response CSV: wavelength_nm,t_polarizer,r,g,b
// ---------------------------------------------------------------------------

inline void write_response_csv(const ResponseTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw format_error("cannot open for writing: " + path);
  out << "wavelength_nm,t_polarizer,r,g,b\n";
  char line[160];
  for (int b = 0; b < table.grid.count; ++b) {
    std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g,%.9g\n", table.grid.wavelength(b),
                  table.t_polarizer[static_cast<std::size_t>(b)],
                  table.r_camera[static_cast<std::size_t>(b)][0],
                  table.r_camera[static_cast<std::size_t>(b)][1],
                  table.r_camera[static_cast<std::size_t>(b)][2]);
    out << line;
  }
}

inline ResponseTable read_response_csv(const std::string& path, const WavelengthGrid& grid) {
  std::ifstream in(path);
  if (!in) throw format_error("cannot open: " + path);
  ResponseTable table;
  table.grid = grid;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    double values[5];
    for (int i = 0; i < 5; ++i) {
      if (!std::getline(ss, field, ',')) {
        throw format_error("response csv: short row '" + line + "'");
      }
      values[i] = std::stod(field);
    }
    table.t_polarizer.push_back(values[1]);
    table.r_camera.push_back({values[2], values[3], values[4]});
  }
  if (static_cast<int>(table.t_polarizer.size()) != grid.count) {
    throw format_error("response csv: row count does not match the wavelength grid");
  }
  table.validate();
  return table;
}

/// Spectral curve CSV: wavelength_nm,value rows.
inline void write_curve_csv(const WavelengthGrid& grid, const std::vector<double>& values,
                            const std::string& path) {
  if (values.size() != static_cast<std::size_t>(grid.count)) {
    throw shape_error("write_curve_csv: value count mismatch");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw format_error("cannot open for writing: " + path);
  out << "wavelength_nm,value\n";
  char line[80];
  for (int b = 0; b < grid.count; ++b) {
    std::snprintf(line, sizeof line, "%.9g,%.9g\n", grid.wavelength(b),
                  values[static_cast<std::size_t>(b)]);
    out << line;
  }
}

// ---------------------------------------------------------------------------
// RGB synthesis and PNG exports
// ---------------------------------------------------------------------------

/// Camera-weighted RGB of a cube: channel c = sum_bands cube * r_camera(c),
/// normalized to [0,1] by the image maximum (all-zero cubes stay black).
inline RGBImage synthesize_rgb(const SpectralCube& cube, const ResponseTable& response) {
  if (!(cube.grid == response.grid)) throw shape_error("synthesize_rgb: grid mismatch");
  RGBImage image = RGBImage::zeros(cube.height, cube.width);
  const std::size_t plane = cube.plane_size();
  for (int c = 0; c < 3; ++c) {
    auto out = image.plane(c);
    for (int b = 0; b < cube.grid.count; ++b) {
      const double w =
          response.r_camera[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)];
      const auto band = cube.band(b);
      for (std::size_t i = 0; i < plane; ++i) out[i] += w * band[i];
    }
  }
  double peak = 0.0;
  for (double v : image.data) peak = std::max(peak, v);
  if (peak > 0.0) {
    for (double& v : image.data) v /= peak;
  }
  return image;
}

inline void write_rgb_image_png(const RGBImage& image, const std::string& path,
                                int bit_depth = 8) {
  std::vector<double> r(image.plane(0).begin(), image.plane(0).end());
  std::vector<double> g(image.plane(1).begin(), image.plane(1).end());
  std::vector<double> b(image.plane(2).begin(), image.plane(2).end());
  write_rgb_png(path, r, g, b, image.height, image.width, bit_depth);
}

/// DoLP as 8-bit grayscale, AoLP through the cyclic colormap.
inline void write_polarimetric_pngs(const PolarimetricMaps& maps, const std::string& dolp_path,
                                    const std::string& aolp_path) {
  write_gray_png(dolp_path, maps.dolp, maps.height, maps.width);
  const std::size_t plane = maps.aolp.size();
  std::vector<double> r(plane), g(plane), b(plane);
  for (std::size_t i = 0; i < plane; ++i) {
    aolp_to_rgb(maps.aolp[i], r[i], g[i], b[i]);
  }
  write_rgb_png(aolp_path, r, g, b, maps.height, maps.width, 8);
}

// ---------------------------------------------------------------------------
// External dataset ingestion
// ---------------------------------------------------------------------------

enum class ExternalFormat { kMatrixText, kPlanarPngStack };

namespace detail {

inline std::vector<std::string> band_files(const std::string& dir, const std::string& ext) {
  std::vector<std::string> files;
  if (!std::filesystem::is_directory(dir)) {
    throw format_error("ingest: not a directory: " + dir);
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw format_error("ingest: no " + ext + " band files in " + dir);

  // Numbered stacks (band_000.png, ...) must be gap-free: a hole means a
  // missing band file, reported by index.
  std::vector<long> indices;
  for (const auto& f : files) {
    const std::string stem = std::filesystem::path(f).stem().string();
    std::size_t end = stem.size();
    while (end > 0 && std::isdigit(static_cast<unsigned char>(stem[end - 1]))) --end;
    if (end == stem.size()) {
      indices.clear();
      break;
    }
    indices.push_back(std::stol(stem.substr(end)));
  }
  if (indices.size() == files.size()) {
    std::sort(indices.begin(), indices.end());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const long expected = indices.front() + static_cast<long>(i);
      if (indices[i] != expected) {
        throw format_error("ingest: missing band file index " + std::to_string(expected) +
                           " in " + dir);
      }
    }
  }
  return files;
}

inline std::vector<std::vector<double>> read_matrix_text(const std::string& path, int& height,
                                                         int& width) {
  std::ifstream in(path);
  if (!in) throw format_error("ingest: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw format_error("ingest: empty matrix file " + path);
  height = static_cast<int>(rows.size());
  width = static_cast<int>(rows[0].size());
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != width) {
      throw format_error("ingest: ragged rows in " + path);
    }
  }
  return rows;
}

/// Linear resampling from a uniform source grid onto the target grid.
inline SpectralCube resample_linear(const SpectralCube& src, const WavelengthGrid& target) {
  if (src.grid == target) return src;
  SpectralCube out = SpectralCube::zeros(src.height, src.width, target);
  const std::size_t plane = src.plane_size();
  for (int b = 0; b < target.count; ++b) {
    const double lambda = target.wavelength(b);
    double pos = (lambda - src.grid.lambda_min) / src.grid.step;
    pos = std::clamp(pos, 0.0, static_cast<double>(src.grid.count - 1));
    const int lo = static_cast<int>(std::floor(pos));
    const int hi = std::min(lo + 1, src.grid.count - 1);
    const double t = pos - lo;
    auto dst = out.band(b);
    const auto a = src.band(lo);
    const auto c = src.band(hi);
    for (std::size_t i = 0; i < plane; ++i) dst[i] = (1.0 - t) * a[i] + t * c[i];
  }
  return out;
}

}  // namespace detail

/// Convert band-per-file PNG stacks or whitespace matrix text into a cube on
/// the target grid (default 31 bands over 400-700 nm). The source files,
/// sorted by name, are assumed to span 400-700 nm uniformly; a differing
/// band count is resampled linearly.
inline SpectralCube ingest_external_cube(const std::string& dir, ExternalFormat format,
                                         const WavelengthGrid& target = default_grid()) {
  const std::vector<std::string> files = detail::band_files(
      dir, format == ExternalFormat::kPlanarPngStack ? ".png" : ".txt");
  const int bands = static_cast<int>(files.size());
  const WavelengthGrid source =
      bands == 1 ? target
                 : WavelengthGrid::make(target.lambda_min, target.lambda_max,
                                        (target.lambda_max - target.lambda_min) / (bands - 1));

  SpectralCube cube;
  for (int b = 0; b < bands; ++b) {
    int h = 0, w = 0;
    std::vector<double> plane;
    if (format == ExternalFormat::kPlanarPngStack) {
      const GrayImage img = read_gray_png(files[static_cast<std::size_t>(b)]);
      h = img.height;
      w = img.width;
      plane = img.data;
    } else {
      const auto rows =
          detail::read_matrix_text(files[static_cast<std::size_t>(b)], h, w);
      plane.reserve(static_cast<std::size_t>(h) * w);
      for (const auto& row : rows) plane.insert(plane.end(), row.begin(), row.end());
    }
    if (b == 0) {
      cube = SpectralCube::zeros(h, w, source);
    } else if (h != cube.height || w != cube.width) {
      throw format_error("ingest: band " + std::to_string(b) + " (" +
                         files[static_cast<std::size_t>(b)] + ") has inconsistent dimensions");
    }
    std::copy(plane.begin(), plane.end(), cube.band(b).begin());
  }
  return detail::resample_linear(cube, target);
}

}  // namespace specpol
