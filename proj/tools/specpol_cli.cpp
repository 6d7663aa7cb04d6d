// Command-line surface over the library: PSF simulation, scene encoding,
// classical decoding, profile optimization, metrics and scene generation.
// Exit codes: 0 success, 1 runtime/numerical error, 2 configuration error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specpol/decoder.hpp"
#include "specpol/doe.hpp"
#include "specpol/encoder.hpp"
#include "specpol/io.hpp"
#include "specpol/metrics.hpp"
#include "specpol/optics.hpp"
#include "specpol/optimizer.hpp"
#include "specpol/png_io.hpp"
#include "specpol/scenes.hpp"

namespace {

using specpol::json;

// ---------------------------------------------------------------------------
// Run configuration file. Schema-validated: unknown keys are rejected.
// ---------------------------------------------------------------------------

struct RunConfig {
  specpol::WavelengthGrid grid = specpol::default_grid();
  specpol::OpticalConfig optics;
  int optics_n = specpol::kDefaultGridSize;
  double pitch = specpol::kDefaultPitch;
  specpol::DeconvConfig deconv;
  specpol::NoiseModel noise;
  double sigma_rel = -1.0;  // >= 0: sigma as a fraction of the 99th percentile
  std::string response_csv;
  double t_polarizer = 1.0;
  std::uint64_t seed = 0;
};

void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    if (!ok) throw specpol::config_error("config: unknown key '" + key + "' in " + where);
  }
}

RunConfig load_run_config(const std::string& path) {
  RunConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw specpol::config_error("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw specpol::config_error(std::string("config: parse error: ") + e.what());
  }
  reject_unknown_keys(j, {"grid", "optics", "deconv", "noise", "response", "seed"}, "root");

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    reject_unknown_keys(g, {"lambda_min", "lambda_max", "step"}, "grid");
    cfg.grid = specpol::WavelengthGrid::make(g.value("lambda_min", 400.0),
                                             g.value("lambda_max", 700.0),
                                             g.value("step", 10.0));
  }
  if (j.contains("optics")) {
    const json& o = j.at("optics");
    reject_unknown_keys(o, {"z", "f", "convention", "n", "pitch", "sellmeier"}, "optics");
    cfg.optics.z = o.value("z", cfg.optics.z);
    cfg.optics.f = o.value("f", cfg.optics.f);
    cfg.optics_n = o.value("n", cfg.optics_n);
    cfg.pitch = o.value("pitch", cfg.pitch);
    if (o.contains("convention")) {
      const std::string conv = o.at("convention").get<std::string>();
      if (conv == "PAPER_LITERAL") {
        cfg.optics.convention = specpol::PhaseConvention::kPaperLiteral;
      } else if (conv == "PHYSICAL") {
        cfg.optics.convention = specpol::PhaseConvention::kPhysical;
      } else {
        throw specpol::config_error("config: convention must be PAPER_LITERAL or PHYSICAL");
      }
    }
    if (o.contains("sellmeier")) {
      const json& s = o.at("sellmeier");
      reject_unknown_keys(s, {"b", "c"}, "sellmeier");
      const auto b = s.at("b").get<std::vector<double>>();
      const auto c = s.at("c").get<std::vector<double>>();
      if (b.size() != 3 || c.size() != 3) {
        throw specpol::config_error("config: sellmeier needs three b and three c terms");
      }
      cfg.optics.sellmeier = {{b[0], b[1], b[2]}, {c[0], c[1], c[2]}};
    }
  }
  if (j.contains("deconv")) {
    const json& d = j.at("deconv");
    reject_unknown_keys(d, {"epsilon", "fusion", "iterations", "step", "clip_negative"},
                        "deconv");
    cfg.deconv.epsilon = d.value("epsilon", cfg.deconv.epsilon);
    cfg.deconv.iterations = d.value("iterations", cfg.deconv.iterations);
    cfg.deconv.step = d.value("step", cfg.deconv.step);
    cfg.deconv.clip_negative = d.value("clip_negative", cfg.deconv.clip_negative);
    if (d.contains("fusion")) {
      const std::string f = d.at("fusion").get<std::string>();
      if (f == "RESPONSE_WEIGHTED") {
        cfg.deconv.fusion = specpol::FusionMode::kResponseWeighted;
      } else if (f == "CHANNEL_MEAN") {
        cfg.deconv.fusion = specpol::FusionMode::kChannelMean;
      } else {
        throw specpol::config_error("config: fusion must be RESPONSE_WEIGHTED or CHANNEL_MEAN");
      }
    }
  }
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    reject_unknown_keys(n, {"kind", "sigma", "sigma_rel", "peak", "seed", "quantize_12bit"},
                        "noise");
    if (n.contains("kind")) {
      const std::string kind = n.at("kind").get<std::string>();
      if (kind == "NONE") {
        cfg.noise.kind = specpol::NoiseKind::kNone;
      } else if (kind == "GAUSSIAN") {
        cfg.noise.kind = specpol::NoiseKind::kGaussian;
      } else if (kind == "POISSON_GAUSSIAN") {
        cfg.noise.kind = specpol::NoiseKind::kPoissonGaussian;
      } else {
        throw specpol::config_error("config: noise kind must be NONE, GAUSSIAN or "
                                    "POISSON_GAUSSIAN");
      }
    }
    cfg.noise.sigma = n.value("sigma", cfg.noise.sigma);
    cfg.sigma_rel = n.value("sigma_rel", cfg.sigma_rel);
    cfg.noise.peak = n.value("peak", cfg.noise.peak);
    cfg.noise.seed = n.value("seed", cfg.noise.seed);
    cfg.noise.quantize_12bit = n.value("quantize_12bit", cfg.noise.quantize_12bit);
  }
  if (j.contains("response")) {
    const json& r = j.at("response");
    reject_unknown_keys(r, {"csv", "t_polarizer"}, "response");
    cfg.response_csv = r.value("csv", cfg.response_csv);
    cfg.t_polarizer = r.value("t_polarizer", cfg.t_polarizer);
  }
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

specpol::ResponseTable resolve_response(const RunConfig& cfg) {
  if (!cfg.response_csv.empty()) {
    return specpol::read_response_csv(cfg.response_csv, cfg.grid);
  }
  return specpol::make_default_response(cfg.grid, cfg.t_polarizer);
}

specpol::NoiseModel resolve_noise(const RunConfig& cfg, const specpol::RGBImage& reference) {
  specpol::NoiseModel noise = cfg.noise;
  if (cfg.sigma_rel >= 0.0) {
    noise.sigma = specpol::sigma_from_relative(reference, cfg.sigma_rel);
  }
  return noise;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_psf(const std::string& profile_path, const std::string& config_path,
            const std::string& out_path, int crop, int levels, bool quantize_map) {
  const RunConfig cfg = load_run_config(config_path);
  const specpol::HeightProfile profile = specpol::read_profile(profile_path);
  specpol::HeightMap map = specpol::rasterize(profile, cfg.optics_n, cfg.pitch);
  if (quantize_map) map = specpol::quantize(map, levels);
  const specpol::PsfStack stack = specpol::psf(cfg.optics, map, cfg.grid, crop);
  specpol::write_psf_stack(stack, out_path);
  for (int b = 0; b < stack.grid.count; ++b) {
    std::printf("band %2d  lambda %.0f nm  energy-in-crop %.6f\n", b,
                stack.grid.wavelength(b),
                stack.energy_fraction[static_cast<std::size_t>(b)]);
    // linear-to-max 8-bit preview
    const auto& kern = stack.kernel(b);
    double peak = 0.0;
    for (double v : kern) peak = std::max(peak, v);
    std::vector<double> preview(kern.size());
    for (std::size_t i = 0; i < kern.size(); ++i) {
      preview[i] = peak > 0.0 ? kern[i] / peak : 0.0;
    }
    char name[64];
    std::snprintf(name, sizeof name, "_band%02d.png", b);
    specpol::write_gray_png(out_path + name, preview, stack.crop, stack.crop);
  }
  return 0;
}

int cmd_encode(const std::string& scene_path, const std::string& psf_path,
               const std::string& config_path, const std::string& out_path, bool four) {
  const RunConfig cfg0 = load_run_config(config_path);
  const specpol::PsfStack stack = specpol::read_psf_stack(psf_path);
  RunConfig cfg = cfg0;
  cfg.grid = stack.grid;  // measurements follow the PSF grid
  const specpol::ResponseTable response = resolve_response(cfg);
  if (four) {
    const specpol::StokesCube stokes = specpol::read_stokes(scene_path);
    const specpol::PolarizedScene scene{stokes};
    // relative sigma resolves against the noiseless S0 encode
    specpol::NoiseModel noise = cfg.noise;
    if (cfg.sigma_rel >= 0.0) {
      const specpol::RGBImage reference =
          specpol::encode(stokes.component(0), stack, response, specpol::NoiseModel{});
      noise.sigma = specpol::sigma_from_relative(reference, cfg.sigma_rel);
    }
    const specpol::MeasurementSet set = specpol::acquire_four(scene, stack, response, noise);
    specpol::write_measurement_set(set, out_path, psf_path);
    std::printf("wrote 4 measurements + manifest to %s\n", out_path.c_str());
  } else {
    const specpol::SpectralCube cube = specpol::read_cube(scene_path);
    const specpol::RGBImage clean =
        specpol::encode(cube, stack, response, specpol::NoiseModel{});
    const specpol::NoiseModel noise = resolve_noise(cfg, clean);
    const specpol::RGBImage image = specpol::encode(cube, stack, response, noise);
    specpol::write_rgb(image, out_path);
    std::printf("wrote %s\n", out_path.c_str());
  }
  return 0;
}

int cmd_decode(const std::string& measurement_path, const std::string& manifest_dir,
               const std::string& psf_path, const std::string& config_path,
               const std::string& out_prefix, int band, double epsilon, int iterations) {
  RunConfig cfg = load_run_config(config_path);
  const specpol::PsfStack stack = specpol::read_psf_stack(psf_path);
  cfg.grid = stack.grid;
  if (epsilon >= 0.0) cfg.deconv.epsilon = epsilon;
  if (iterations >= 0) cfg.deconv.iterations = iterations;
  const specpol::ResponseTable response = resolve_response(cfg);

  if (!manifest_dir.empty()) {
    const specpol::MeasurementSet set = specpol::read_measurement_set(manifest_dir);
    // the Stokes inversion needs the raw linear estimates: clipping the four
    // intensity cubes before the inversion arithmetic would bias S1..S3
    specpol::DeconvConfig stokes_cfg = cfg.deconv;
    stokes_cfg.clip_negative = false;
    std::array<specpol::SpectralCube, 4> cubes;
    for (int i = 0; i < 4; ++i) {
      cubes[static_cast<std::size_t>(i)] =
          specpol::decode(set.m[static_cast<std::size_t>(i)], stack, response, stokes_cfg);
    }
    const specpol::StokesCube stokes =
        specpol::stokes_from_measurements(cubes[0], cubes[1], cubes[2], cubes[3]);
    if (band < 0 || band >= stokes.grid.count) {
      throw specpol::config_error("decode: --band out of range");
    }
    specpol::write_stokes(stokes, out_prefix + ".stokes");
    const specpol::PolarimetricMaps maps = specpol::dolp_aolp(stokes, band);
    specpol::write_polarimetric_pngs(maps, out_prefix + "_dolp.png", out_prefix + "_aolp.png");
    specpol::detail::write_payload_f32(out_prefix + "_dolp.f32", maps.dolp);
    specpol::detail::write_payload_f32(out_prefix + "_aolp.f32", maps.aolp);
    std::printf("wrote %s.stokes and DoLP/AoLP maps for band %d\n", out_prefix.c_str(), band);
  } else {
    const specpol::RGBImage measurement = specpol::read_rgb(measurement_path);
    const specpol::SpectralCube cube =
        specpol::decode(measurement, stack, response, cfg.deconv);
    specpol::write_cube(cube, out_prefix);
    std::printf("wrote %s\n", out_prefix.c_str());
  }
  return 0;
}

int cmd_optimize(const std::string& config_path, const std::string& scenes_dir,
                 const std::string& out_dir, const std::string& objective_name,
                 int iterations, double step, int optics_n, int crop, std::uint64_t seed,
                 const std::string& init_profile) {
  const RunConfig cfg = load_run_config(config_path);
  specpol::DesignProblem problem;
  problem.optical = cfg.optics;
  problem.grid = cfg.grid;
  problem.response = resolve_response(cfg);
  problem.deconv = cfg.deconv;
  problem.deconv.clip_negative = false;  // smooth objective path
  problem.optics_n = optics_n > 0 ? optics_n : 128;
  problem.pitch = cfg.pitch;
  problem.crop = crop > 0 ? crop : 16;
  problem.iterations = iterations;
  if (step > 0.0) problem.step_size = step;
  problem.seed = seed != 0 ? seed : cfg.seed;
  if (objective_name == "recon-mse") {
    problem.objective = specpol::Objective::kReconMse;
  } else if (objective_name == "psf-incoherence") {
    problem.objective = specpol::Objective::kPsfIncoherence;
  } else {
    throw specpol::config_error("optimize: objective must be recon-mse or psf-incoherence");
  }
  if (!init_profile.empty()) problem.initial = specpol::read_profile(init_profile);

  if (problem.objective == specpol::Objective::kReconMse) {
    if (scenes_dir.empty()) {
      throw specpol::config_error("optimize: recon-mse needs --scenes");
    }
    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(scenes_dir)) {
      if (entry.path().extension() == ".cube") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) problem.training_scenes.push_back(specpol::read_cube(f));
    if (problem.training_scenes.empty()) {
      throw specpol::config_error("optimize: no .cube scenes in " + scenes_dir);
    }
  }

  const specpol::OptimizeResult result = specpol::optimize(problem);
  std::filesystem::create_directories(out_dir);
  specpol::write_profile(result.profile, out_dir + "/final.prof");
  specpol::write_profile(result.quantized_profile, out_dir + "/final_quantized.prof");
  {
    std::ofstream csv(out_dir + "/trajectory.csv", std::ios::trunc);
    csv << "iteration,objective,step\n";
    char line[96];
    for (std::size_t i = 0; i < result.objective_trace.size(); ++i) {
      std::snprintf(line, sizeof line, "%zu,%.12e,%.6e\n", i, result.objective_trace[i],
                    result.step_trace[i]);
      csv << line;
    }
  }
  std::printf("objective: initial %.6e final %.6e quantized(16) %.6e\n",
              result.objective_trace.front(), result.objective_trace.back(),
              result.quantized_objective);
  std::printf("wrote %s/final.prof, final_quantized.prof, trajectory.csv\n", out_dir.c_str());
  return 0;
}

int cmd_metrics(const std::string& a_path, const std::string& b_path, double peak,
                bool table) {
  const specpol::SpectralCube a = specpol::read_cube(a_path);
  const specpol::SpectralCube b = specpol::read_cube(b_path);
  const specpol::MetricReport rep = specpol::compute_report(a, b, peak);
  json out{{"fidelity_percent", rep.fidelity_percent},
           {"mse", rep.mse_value},
           {"per_band_psnr_db", rep.per_band_psnr},
           {"psnr_db", rep.psnr_db},
           {"ssim", rep.ssim_value}};
  std::printf("%s\n", out.dump(2).c_str());
  if (table) {
    const bool color = std::getenv("NO_COLOR") == nullptr;
    const char* bold = color ? "\033[1m" : "";
    const char* reset = color ? "\033[0m" : "";
    std::fprintf(stderr, "%s%-10s %12s%s\n", bold, "metric", "value", reset);
    std::fprintf(stderr, "%-10s %12.4f\n", "psnr_db", rep.psnr_db);
    std::fprintf(stderr, "%-10s %12.6f\n", "ssim", rep.ssim_value);
    std::fprintf(stderr, "%-10s %12.6e\n", "mse", rep.mse_value);
    std::fprintf(stderr, "%-10s %12.2f\n", "fidelity%%", rep.fidelity_percent);
  }
  return 0;
}

int cmd_render(const std::string& cube_path, const std::string& out_path,
               const std::string& config_path, int bits, const std::string& curve,
               const std::string& curve_out) {
  RunConfig cfg = load_run_config(config_path);
  const specpol::SpectralCube cube = specpol::read_cube(cube_path);
  cfg.grid = cube.grid;
  const specpol::ResponseTable response = resolve_response(cfg);
  const specpol::RGBImage image = specpol::synthesize_rgb(cube, response);
  specpol::write_rgb_image_png(image, out_path, bits);
  std::printf("wrote %s\n", out_path.c_str());
  if (!curve.empty()) {
    const std::size_t comma = curve.find(',');
    if (comma == std::string::npos || curve_out.empty()) {
      throw specpol::config_error("render: --curve needs 'row,col' and --curve-out");
    }
    const int row = std::stoi(curve.substr(0, comma));
    const int col = std::stoi(curve.substr(comma + 1));
    if (row < 0 || row >= cube.height || col < 0 || col >= cube.width) {
      throw specpol::config_error("render: --curve pixel out of range");
    }
    std::vector<double> spectrum(static_cast<std::size_t>(cube.grid.count));
    for (int b = 0; b < cube.grid.count; ++b) {
      spectrum[static_cast<std::size_t>(b)] = cube.at(b, row, col);
    }
    specpol::write_curve_csv(cube.grid, spectrum, curve_out);
    std::printf("wrote %s\n", curve_out.c_str());
  }
  return 0;
}

int cmd_gen_profile(const std::string& kind, const std::string& out_path,
                    const std::string& config_path, double lambda0, std::uint64_t seed) {
  const RunConfig cfg = load_run_config(config_path);
  specpol::HeightProfile profile = specpol::HeightProfile::zeros();
  if (kind == "flat") {
    // zeros
  } else if (kind == "random") {
    profile = specpol::HeightProfile::random(seed);
  } else if (kind == "focusing") {
    profile = specpol::focusing_profile(cfg.optics, lambda0, cfg.pitch);
  } else {
    throw specpol::config_error("gen-profile: kind must be flat, random or focusing");
  }
  specpol::write_profile(profile, out_path);
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

int cmd_gen_scene(const std::string& kind, const std::string& out_path, int size,
                  const std::string& angles_csv) {
  const specpol::WavelengthGrid grid = specpol::default_grid();
  if (kind == "checker") {
    specpol::write_cube(specpol::make_checker_cube(size, grid), out_path);
  } else if (kind == "polar-target") {
    std::array<double, 4> angles = {0.0, 45.0, 90.0, -45.0};
    if (!angles_csv.empty()) {
      std::istringstream ss(angles_csv);
      std::string field;
      for (int i = 0; i < 4; ++i) {
        if (!std::getline(ss, field, ',')) {
          throw specpol::config_error("gen-scene: --angles needs four comma-separated values");
        }
        angles[static_cast<std::size_t>(i)] = std::stod(field);
      }
    }
    specpol::write_stokes(specpol::make_polar_target(size, grid, angles).stokes, out_path);
  } else if (kind == "circular") {
    specpol::write_stokes(specpol::make_circular_scene(size, grid).stokes, out_path);
  } else {
    throw specpol::config_error("gen-scene: kind must be checker, polar-target or circular");
  }
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffractive spectro-polarimetric imaging toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "cap worker threads (0 = hardware)");

  auto* psf = app.add_subcommand("psf", "simulate the per-wavelength PSF stack");
  std::string psf_profile, psf_config, psf_out;
  int psf_crop = 64, psf_levels = specpol::kDefaultLevels;
  bool psf_quantize = false;
  psf->add_option("--profile", psf_profile, "height profile (.prof)")->required();
  psf->add_option("--config", psf_config, "run config JSON");
  psf->add_option("--out", psf_out, "output PSF stack path")->required();
  psf->add_option("--crop", psf_crop, "kernel crop size (even)");
  psf->add_flag("--quantize", psf_quantize, "quantize the height map first");
  psf->add_option("--levels", psf_levels, "quantization levels");

  auto* enc = app.add_subcommand("encode", "encode a scene into RGB measurement(s)");
  std::string enc_scene, enc_psf, enc_config, enc_out;
  bool enc_four = false;
  enc->add_option("--scene", enc_scene, "scene (.cube, or .stokes with --four)")->required();
  enc->add_option("--psf", enc_psf, "PSF stack")->required();
  enc->add_option("--config", enc_config, "run config JSON");
  enc->add_option("--out", enc_out, "output path (file, or directory with --four)")
      ->required();
  enc->add_flag("--four", enc_four, "acquire the four analyzer measurements");

  auto* dec = app.add_subcommand("decode", "reconstruct spectral/Stokes data");
  std::string dec_measurement, dec_manifest, dec_psf, dec_config, dec_out;
  int dec_band = 19;  // 590 nm on the default grid
  double dec_epsilon = -1.0;
  int dec_iterations = -1;
  dec->add_option("--measurement", dec_measurement, "single RGB measurement (.rgbf)");
  dec->add_option("--manifest", dec_manifest, "measurement-set directory");
  dec->add_option("--psf", dec_psf, "PSF stack")->required();
  dec->add_option("--config", dec_config, "run config JSON");
  dec->add_option("--out", dec_out, "output path/prefix")->required();
  dec->add_option("--band", dec_band, "band index for DoLP/AoLP maps");
  dec->add_option("--epsilon", dec_epsilon, "Wiener regularizer override");
  dec->add_option("--iterations", dec_iterations, "refinement iterations override");

  auto* opt = app.add_subcommand("optimize", "optimize the radial height profile");
  std::string opt_config, opt_scenes, opt_out, opt_objective = "psf-incoherence", opt_init;
  int opt_iterations = 50, opt_n = 128, opt_crop = 16;
  double opt_step = -1.0;
  std::uint64_t opt_seed = 0;
  opt->add_option("--config", opt_config, "run config JSON");
  opt->add_option("--scenes", opt_scenes, "directory of training .cube scenes");
  opt->add_option("--out", opt_out, "output directory")->required();
  opt->add_option("--objective", opt_objective, "recon-mse | psf-incoherence");
  opt->add_option("--iterations", opt_iterations, "descent iterations");
  opt->add_option("--step", opt_step, "initial step size (meters)");
  opt->add_option("--grid-n", opt_n, "optical grid size");
  opt->add_option("--crop", opt_crop, "PSF crop inside the objective");
  opt->add_option("--seed", opt_seed, "random start seed");
  opt->add_option("--init", opt_init, "initial profile (.prof)");

  auto* met = app.add_subcommand("metrics", "compare two cubes");
  std::string met_a, met_b;
  double met_peak = 0.0;
  bool met_table = false;
  met->add_option("--a", met_a, "reconstruction cube")->required();
  met->add_option("--b", met_b, "reference cube")->required();
  met->add_option("--peak", met_peak, "PSNR peak (default: reference max)");
  met->add_flag("--table", met_table, "also print a human-readable table to stderr");

  auto* ren = app.add_subcommand("render", "synthesize an RGB PNG from a cube");
  std::string ren_cube, ren_out, ren_config;
  int ren_bits = 8;
  ren->add_option("--cube", ren_cube, "input cube")->required();
  ren->add_option("--out", ren_out, "output PNG")->required();
  ren->add_option("--config", ren_config, "run config JSON");
  ren->add_option("--bits", ren_bits, "8 or 16");
  std::string ren_curve, ren_curve_out;
  ren->add_option("--curve", ren_curve, "export the spectrum at pixel 'row,col'");
  ren->add_option("--curve-out", ren_curve_out, "spectral curve CSV path");

  auto* gen = app.add_subcommand("gen-scene", "generate a synthetic test scene");
  std::string gen_kind, gen_out, gen_angles;
  int gen_size = 256;
  gen->add_option("--kind", gen_kind, "checker | polar-target | circular")->required();
  gen->add_option("--out", gen_out, "output path")->required();
  gen->add_option("--size", gen_size, "scene size in pixels");
  gen->add_option("--angles", gen_angles, "polar-target quadrant angles, degrees (4 CSV)");

  auto* genp = app.add_subcommand("gen-profile", "generate a height profile");
  std::string genp_kind, genp_out, genp_config;
  double genp_lambda = 550.0;
  std::uint64_t genp_seed = 1;
  genp->add_option("--kind", genp_kind, "flat | random | focusing")->required();
  genp->add_option("--out", genp_out, "output path")->required();
  genp->add_option("--config", genp_config, "run config JSON");
  genp->add_option("--lambda", genp_lambda, "design wavelength for focusing (nm)");
  genp->add_option("--seed", genp_seed, "seed for random profiles");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) specpol::set_max_threads(threads);

  try {
    if (*psf) return cmd_psf(psf_profile, psf_config, psf_out, psf_crop, psf_levels,
                             psf_quantize);
    if (*enc) return cmd_encode(enc_scene, enc_psf, enc_config, enc_out, enc_four);
    if (*dec) {
      if (dec_measurement.empty() == dec_manifest.empty()) {
        throw specpol::config_error("decode: exactly one of --measurement/--manifest");
      }
      return cmd_decode(dec_measurement, dec_manifest, dec_psf, dec_config, dec_out,
                        dec_band, dec_epsilon, dec_iterations);
    }
    if (*opt) return cmd_optimize(opt_config, opt_scenes, opt_out, opt_objective,
                                  opt_iterations, opt_step, opt_n, opt_crop, opt_seed,
                                  opt_init);
    if (*met) return cmd_metrics(met_a, met_b, met_peak, met_table);
    if (*ren) return cmd_render(ren_cube, ren_out, ren_config, ren_bits, ren_curve,
                                ren_curve_out);
    if (*gen) return cmd_gen_scene(gen_kind, gen_out, gen_size, gen_angles);
    if (*genp) return cmd_gen_profile(genp_kind, genp_out, genp_config, genp_lambda,
                                      genp_seed);
  } catch (const specpol::config_error& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
