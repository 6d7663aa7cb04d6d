#pragma once

// Gradient-based design of the radial height profile. The adjoint chain runs
// loss -> fusion -> Wiener -> |F{U}|^2 -> element phase -> ring sums, all on
// the smooth path (no quantization, no clipping inside the differentiated
// chain). Quantization is applied only after continuous optimization, with a
// before/after objective report.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specpol/core.hpp"
#include "specpol/cube.hpp"
#include "specpol/decoder.hpp"
#include "specpol/doe.hpp"
#include "specpol/encoder.hpp"
#include "specpol/fft.hpp"
#include "specpol/optics.hpp"
#include "specpol/response.hpp"

namespace specpol {

enum class Objective { kReconMse, kPsfIncoherence };

struct DesignProblem {
  std::vector<SpectralCube> training_scenes;  // required for RECON_MSE
  OpticalConfig optical;
  WavelengthGrid grid = WavelengthGrid::make(400, 680, 40);  // desk scale: 8 bands
  ResponseTable response;
  Objective objective = Objective::kPsfIncoherence;
  int optics_n = 128;
  double pitch = kDefaultPitch;
  int crop = 16;
  double depth_max = kDefaultDepth;  // bounds [0, depth_max]
  int iterations = 50;
  double step_size = 1e-8;  // meters of height per unit preconditioned gradient
  std::uint64_t seed = 0;
  DeconvConfig deconv;  // epsilon for the RECON_MSE inner Wiener stage
  std::optional<HeightProfile> initial;

  void validate() const {
    optical.validate();
    if (optics_n <= 0 || optics_n % 2 != 0) {
      throw config_error("DesignProblem: optics_n must be even");
    }
    if (crop <= 0 || crop % 2 != 0 || crop > optics_n) {
      throw config_error("DesignProblem: crop must be even and <= optics_n");
    }
    if (!(depth_max > 0.0)) throw config_error("DesignProblem: depth_max must be > 0");
    if (iterations < 0) throw config_error("DesignProblem: iterations must be >= 0");
    if (objective == Objective::kReconMse) {
      if (training_scenes.empty()) {
        throw config_error("DesignProblem: RECON_MSE needs at least one training scene");
      }
      for (const auto& scene : training_scenes) {
        if (!(scene.grid == grid)) {
          throw config_error("DesignProblem: scene grid differs from the problem grid");
        }
      }
      if (!(response.grid == grid)) {
        throw config_error("DesignProblem: response grid differs from the problem grid");
      }
    }
  }
};

struct GradientReport {
  std::vector<double> analytic;           // 512 entries
  std::vector<double> finite_difference;  // populated at probe indices
  std::vector<int> probe_indices;
  double max_rel_error = 0.0;
};

struct OptimizeResult {
  HeightProfile profile;
  std::vector<double> objective_trace;  // objective after each iteration (0 = start)
  std::vector<double> step_trace;
  double quantized_objective = 0.0;  // objective after terminal 16-level quantization
  HeightProfile quantized_profile;
};

namespace detail {

using cd = std::complex<double>;

/// Everything the reverse pass needs from one band's forward PSF evaluation.
struct BandForward {
  double k_material = 0.0;  // k * (n_lambda - 1), phase per meter of height
  std::vector<cd> field;    // U on the full grid
  std::vector<cd> spectrum; // F{U}
  std::vector<double> kernel;  // normalized crop
  double crop_sum = 0.0;       // pre-normalization energy in the crop
};

struct PsfForward {
  std::vector<BandForward> bands;
  HeightMap map;
};

inline PsfForward psf_forward(const DesignProblem& problem, const HeightProfile& profile) {
  PsfForward fwd;
  fwd.map = rasterize(profile, problem.optics_n, problem.pitch);
  fwd.bands.resize(static_cast<std::size_t>(problem.grid.count));
  const int n = problem.optics_n;
  const double quad = problem.optical.spherical_coeff() + problem.optical.lens_coeff();
  parallel_for(fwd.bands.size(), [&](std::size_t b) {
    BandForward& band = fwd.bands[b];
    const double lambda_nm = problem.grid.wavelength(static_cast<int>(b));
    const double k = 2.0 * M_PI / (lambda_nm * 1e-9);
    band.k_material = k * (refractive_index(lambda_nm, problem.optical.sellmeier) - 1.0);

    ComplexField field = field_with_quadratic(problem.optical, fwd.map, lambda_nm, quad);
    band.field = std::move(field.u);
    band.spectrum.resize(band.field.size());
    fft::forward2d(n, n, band.field.data(), band.spectrum.data());

    std::vector<double> intensity(band.field.size());
    for (std::size_t i = 0; i < intensity.size(); ++i) {
      intensity[i] = std::norm(band.spectrum[i]);
    }
    fft::fftshift2d(intensity, n, n);
    const int kk = problem.crop;
    const int r0 = n / 2 - kk / 2;
    band.kernel.assign(static_cast<std::size_t>(kk) * kk, 0.0);
    band.crop_sum = 0.0;
    for (int i = 0; i < kk; ++i) {
      for (int j = 0; j < kk; ++j) {
        const double v = intensity[static_cast<std::size_t>(r0 + i) * n + (r0 + j)];
        band.kernel[static_cast<std::size_t>(i) * kk + j] = v;
        band.crop_sum += v;
      }
    }
    if (!(band.crop_sum > 0.0)) {
      throw numeric_error("optimizer: PSF crop captured no energy");
    }
    for (double& v : band.kernel) v /= band.crop_sum;
  });
  return fwd;
}

inline PsfStack stack_from_forward(const DesignProblem& problem, const PsfForward& fwd) {
  PsfStack stack;
  stack.grid = problem.grid;
  stack.crop = problem.crop;
  stack.config = problem.optical;
  stack.source_n = problem.optics_n;
  stack.source_pitch = problem.pitch;
  stack.kernels.reserve(fwd.bands.size());
  for (const auto& band : fwd.bands) stack.kernels.push_back(band.kernel);
  stack.energy_fraction.assign(fwd.bands.size(), 1.0);
  return stack;
}

// -- PSF incoherence objective ---------------------------------------------
// J = sum_{a != b} <p_a, p_b>^2 - sum_a p_a(center)

inline double psf_incoherence_value(const std::vector<std::vector<double>>& kernels,
                                    int crop) {
  const std::size_t bands = kernels.size();
  double cross = 0.0;
  for (std::size_t a = 0; a < bands; ++a) {
    for (std::size_t b = a + 1; b < bands; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < kernels[a].size(); ++i) dot += kernels[a][i] * kernels[b][i];
      cross += 2.0 * dot * dot;  // ordered pairs
    }
  }
  double focus = 0.0;
  const std::size_t center = static_cast<std::size_t>(crop / 2) * crop + crop / 2;
  for (const auto& kern : kernels) focus += kern[center];
  return cross - focus;
}

/// dJ/dp for each band under the incoherence objective.
inline std::vector<std::vector<double>> psf_incoherence_head(
    const std::vector<std::vector<double>>& kernels, int crop) {
  const std::size_t bands = kernels.size();
  std::vector<std::vector<double>> head(bands,
                                        std::vector<double>(kernels[0].size(), 0.0));
  for (std::size_t a = 0; a < bands; ++a) {
    for (std::size_t b = 0; b < bands; ++b) {
      if (a == b) continue;
      double dot = 0.0;
      for (std::size_t i = 0; i < kernels[a].size(); ++i) dot += kernels[a][i] * kernels[b][i];
      for (std::size_t i = 0; i < kernels[a].size(); ++i) {
        head[a][i] += 4.0 * dot * kernels[b][i];
      }
    }
  }
  const std::size_t center = static_cast<std::size_t>(crop / 2) * crop + crop / 2;
  for (auto& h : head) h[center] -= 1.0;
  return head;
}

// -- RECON_MSE objective -----------------------------------------------------
// Mean over scenes of mean squared reconstruction error through
// encode -> Wiener -> response-weighted fusion (iterations = 0, no clip).

struct ReconWork {
  // per scene caches for the reverse pass
  struct Scene {
    std::vector<std::vector<cd>> scene_spec;    // per band, padded grid
    std::vector<std::vector<cd>> y_spec;        // per channel, H grid (FFT of Y_c)
    std::vector<std::vector<cd>> wiener_spec;   // per band*3, H grid (before IFFT)
    std::vector<std::vector<double>> residual;  // per band, H*W (recon - X)
  };
  std::vector<std::vector<cd>> kernel_spec_pad;  // per band, padded grid
  std::vector<std::vector<cd>> kernel_spec_h;    // per band, H grid
  std::vector<Scene> scenes;
  double value = 0.0;
};

inline ReconWork recon_forward(const DesignProblem& problem,
                               const std::vector<std::vector<double>>& kernels) {
  const int bands = problem.grid.count;
  const int kk = problem.crop;
  const int h = problem.training_scenes.front().height;
  const int w = problem.training_scenes.front().width;
  const int rows = h + kk - 1, cols = w + kk - 1;
  const std::size_t padded = static_cast<std::size_t>(rows) * cols;
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  const double eps = problem.deconv.epsilon;  // |F(P)| peaks at the DC bin = 1

  ReconWork work;
  work.kernel_spec_pad.resize(static_cast<std::size_t>(bands));
  work.kernel_spec_h.resize(static_cast<std::size_t>(bands));
  parallel_for(static_cast<std::size_t>(bands), [&](std::size_t b) {
    std::vector<cd> buf(padded);
    for (int i = 0; i < kk; ++i) {
      for (int j = 0; j < kk; ++j) {
        buf[static_cast<std::size_t>(i) * cols + j] =
            kernels[b][static_cast<std::size_t>(i) * kk + j];
      }
    }
    work.kernel_spec_pad[b].resize(padded);
    fft::forward2d(rows, cols, buf.data(), work.kernel_spec_pad[b].data());

    const auto embedded = fft::embed_kernel_centered(kernels[b], kk, h, w);
    std::vector<cd> bufh(hw);
    for (std::size_t i = 0; i < hw; ++i) bufh[i] = embedded[i];
    work.kernel_spec_h[b].resize(hw);
    fft::forward2d(h, w, bufh.data(), work.kernel_spec_h[b].data());
  });

  // the same unit-gain least-squares weights fuse() applies
  std::vector<std::array<double, 3>> fusion(static_cast<std::size_t>(bands));
  for (int b = 0; b < bands; ++b) fusion[static_cast<std::size_t>(b)] = fusion_weights(problem.response, b);

  const double voxel_norm = 1.0 / (static_cast<double>(problem.training_scenes.size()) *
                                   static_cast<double>(hw) * bands);
  work.scenes.resize(problem.training_scenes.size());
  double value = 0.0;
  for (std::size_t s = 0; s < problem.training_scenes.size(); ++s) {
    const SpectralCube& scene = problem.training_scenes[s];
    ReconWork::Scene& ws = work.scenes[s];

    ws.scene_spec.resize(static_cast<std::size_t>(bands));
    parallel_for(static_cast<std::size_t>(bands), [&](std::size_t b) {
      std::vector<cd> buf(padded);
      const auto band = scene.band(static_cast<int>(b));
      for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
          buf[static_cast<std::size_t>(i) * cols + j] = band[static_cast<std::size_t>(i) * w + j];
        }
      }
      ws.scene_spec[b].resize(padded);
      fft::forward2d(rows, cols, buf.data(), ws.scene_spec[b].data());
    });

    // encode: Y_c = crop(IFFT(sum_b R K X)) / padded
    ws.y_spec.assign(3, std::vector<cd>(hw));
    for (int c = 0; c < 3; ++c) {
      std::vector<cd> accum(padded);
      for (int b = 0; b < bands; ++b) {
        const double weight = problem.response.weight(b, c);
        if (weight == 0.0) continue;
        const auto& ks = work.kernel_spec_pad[static_cast<std::size_t>(b)];
        const auto& xs = ws.scene_spec[static_cast<std::size_t>(b)];
        for (std::size_t i = 0; i < padded; ++i) accum[i] += weight * ks[i] * xs[i];
      }
      std::vector<cd> spatial(padded);
      fft::backward2d(rows, cols, accum.data(), spatial.data());
      std::vector<cd> y(hw);
      const double scale = 1.0 / static_cast<double>(padded);
      const int off = kk / 2;
      for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
          y[static_cast<std::size_t>(i) * w + j] =
              spatial[static_cast<std::size_t>(i + off) * cols + (j + off)].real() * scale;
        }
      }
      fft::forward2d(h, w, y.data(), ws.y_spec[static_cast<std::size_t>(c)].data());
    }

    // Wiener per (band, channel) and fusion
    ws.wiener_spec.assign(static_cast<std::size_t>(bands) * 3, {});
    ws.residual.assign(static_cast<std::size_t>(bands), std::vector<double>(hw));
    parallel_for(static_cast<std::size_t>(bands), [&](std::size_t b) {
      const auto& kh = work.kernel_spec_h[b];
      std::vector<double> recon(hw, 0.0);
      std::vector<cd> spec(hw), spatial(hw);
      for (int c = 0; c < 3; ++c) {
        const auto& y = ws.y_spec[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < hw; ++i) {
          spec[i] = y[i] * std::conj(kh[i]) / (std::norm(kh[i]) + eps);
        }
        ws.wiener_spec[b * 3 + static_cast<std::size_t>(c)] = spec;
        fft::backward2d(h, w, spec.data(), spatial.data());
        const double fw = fusion[b][static_cast<std::size_t>(c)] / static_cast<double>(hw);
        for (std::size_t i = 0; i < hw; ++i) recon[i] += fw * spatial[i].real();
      }
      const auto band = scene.band(static_cast<int>(b));
      for (std::size_t i = 0; i < hw; ++i) {
        ws.residual[b][i] = recon[i] - band[i];
      }
    });
    for (int b = 0; b < bands; ++b) {
      for (double r : ws.residual[static_cast<std::size_t>(b)]) value += sqr(r) * voxel_norm;
    }
  }
  work.value = value;
  return work;
}

/// dJ/dkernel for every band under RECON_MSE, via the cached forward state.
inline std::vector<std::vector<double>> recon_head(const DesignProblem& problem,
                                                   const ReconWork& work) {
  const int bands = problem.grid.count;
  const int kk = problem.crop;
  const int h = problem.training_scenes.front().height;
  const int w = problem.training_scenes.front().width;
  const int rows = h + kk - 1, cols = w + kk - 1;
  const std::size_t padded = static_cast<std::size_t>(rows) * cols;
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  const double eps = problem.deconv.epsilon;

  std::vector<std::array<double, 3>> fusion(static_cast<std::size_t>(bands));
  for (int b = 0; b < bands; ++b) fusion[static_cast<std::size_t>(b)] = fusion_weights(problem.response, b);
  const double voxel_norm = 1.0 / (static_cast<double>(problem.training_scenes.size()) *
                                   static_cast<double>(hw) * bands);

  std::vector<std::vector<double>> head(static_cast<std::size_t>(bands),
                                        std::vector<double>(static_cast<std::size_t>(kk) * kk,
                                                            0.0));
  for (const auto& ws : work.scenes) {
    // per-(band, channel) cotangent contributions to the Y_c spectra,
    // collected in parallel and summed in fixed order afterwards
    std::vector<std::vector<cd>> gy_contrib(static_cast<std::size_t>(bands) * 3);

    // Wiener stage reverse, accumulating into the kernel (H grid) and Y
    parallel_for(static_cast<std::size_t>(bands), [&](std::size_t b) {
      const auto& kh = work.kernel_spec_h[b];
      std::vector<cd> gkh(hw);
      std::vector<cd> gz(hw), gw(hw);
      for (int c = 0; c < 3; ++c) {
        // dJ/dZ = 2/(S*V) * fusion_weight * residual, and Z = Re(IFFT(W))/hw,
        // so the W cotangent is the forward FFT of dJ/dZ / hw.
        const double coeff =
            2.0 * voxel_norm * fusion[b][static_cast<std::size_t>(c)] / static_cast<double>(hw);
        for (std::size_t i = 0; i < hw; ++i) gz[i] = coeff * ws.residual[b][i];
        fft::forward2d(h, w, gz.data(), gw.data());
        const auto& y = ws.y_spec[static_cast<std::size_t>(c)];
        const auto& wsp = ws.wiener_spec[b * 3 + static_cast<std::size_t>(c)];
        std::vector<cd> gy(hw);
        for (std::size_t i = 0; i < hw; ++i) {
          const double denom = std::norm(kh[i]) + eps;
          // W = Y conj(K) / D, D = |K|^2 + eps. With the convention
          // dJ = Re(conj(g) dz):
          //   gY = gW K / D
          //   gK = conj(gW) Y / D          (numerator, through conj(K))
          //      + 2 dJdD K, dJdD = -Re(conj(gW) W) / D   (denominator)
          const cd gwi = gw[i];
          gy[i] = gwi * kh[i] / denom;
          const cd gnum = std::conj(gwi) * y[i] / denom;
          const double dJdD = -(std::conj(gwi) * wsp[i]).real() / denom;
          gkh[i] += gnum + 2.0 * dJdD * kh[i];
        }
        gy_contrib[b * 3 + static_cast<std::size_t>(c)] = std::move(gy);
      }
      // kernel cotangent (H grid) -> kernel pixels: gather the centered embed
      std::vector<cd> gk_spatial(hw);
      fft::backward2d(h, w, gkh.data(), gk_spatial.data());
      const int half = kk / 2;
      for (int i = 0; i < kk; ++i) {
        const int r = ((i - half) % h + h) % h;
        for (int j = 0; j < kk; ++j) {
          const int col = ((j - half) % w + w) % w;
          head[b][static_cast<std::size_t>(i) * kk + j] +=
              gk_spatial[static_cast<std::size_t>(r) * w + col].real();
        }
      }
    });
    std::vector<std::vector<cd>> gy_spec(3, std::vector<cd>(hw));
    for (int c = 0; c < 3; ++c) {
      for (int b = 0; b < bands; ++b) {
        const auto& contrib =
            gy_contrib[static_cast<std::size_t>(b) * 3 + static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < hw; ++i) {
          gy_spec[static_cast<std::size_t>(c)][i] += contrib[i];
        }
      }
    }

    // encode stage reverse: Y_c = crop(Re(IFFT(sum_b R K X))) / padded
    for (int c = 0; c < 3; ++c) {
      // cotangent of the spatial crop output
      std::vector<cd> gy_spatial(hw);
      fft::backward2d(h, w, gy_spec[static_cast<std::size_t>(c)].data(), gy_spatial.data());
      std::vector<cd> gpad(padded);
      const int off = kk / 2;
      const double scale = 1.0 / static_cast<double>(padded);
      for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
          gpad[static_cast<std::size_t>(i + off) * cols + (j + off)] =
              gy_spatial[static_cast<std::size_t>(i) * w + j].real() * scale;
        }
      }
      std::vector<cd> gspec(padded);
      fft::forward2d(rows, cols, gpad.data(), gspec.data());
      for (int b = 0; b < bands; ++b) {
        const double weight = problem.response.weight(b, c);
        if (weight == 0.0) continue;
        const auto& xs = ws.scene_spec[static_cast<std::size_t>(b)];
        // gK_pad = conj(gspec)? no: gK += gspec * conj(weight * X)
        std::vector<cd> gkpad(padded);
        for (std::size_t i = 0; i < padded; ++i) {
          gkpad[i] = gspec[i] * std::conj(weight * xs[i]);
        }
        std::vector<cd> gk_spatial(padded);
        fft::backward2d(rows, cols, gkpad.data(), gk_spatial.data());
        for (int i = 0; i < kk; ++i) {
          for (int j = 0; j < kk; ++j) {
            head[static_cast<std::size_t>(b)][static_cast<std::size_t>(i) * kk + j] +=
                gk_spatial[static_cast<std::size_t>(i) * cols + j].real();
          }
        }
      }
    }
  }
  return head;
}

/// Reverse through normalize -> crop -> |F{U}|^2 -> phase -> ring sums.
inline std::vector<double> kernel_head_to_profile(const DesignProblem& problem,
                                                  const PsfForward& fwd,
                                                  const std::vector<std::vector<double>>& head) {
  const int n = problem.optics_n;
  const int kk = problem.crop;
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  std::vector<std::vector<double>> per_band(fwd.bands.size());
  parallel_for(fwd.bands.size(), [&](std::size_t b) {
    const BandForward& band = fwd.bands[b];
    // normalize adjoint: q = (g - <g, p>) / sigma on the crop
    double dot = 0.0;
    for (std::size_t i = 0; i < band.kernel.size(); ++i) dot += head[b][i] * band.kernel[i];
    std::vector<double> q(nn, 0.0);
    const int r0 = n / 2 - kk / 2;
    for (int i = 0; i < kk; ++i) {
      for (int j = 0; j < kk; ++j) {
        q[static_cast<std::size_t>(r0 + i) * n + (r0 + j)] =
            (head[b][static_cast<std::size_t>(i) * kk + j] - dot) / band.crop_sum;
      }
    }
    fft::fftshift2d(q, n, n);  // undo the shift (even n: self-inverse)

    // |G|^2 and DFT adjoint: B = IFFT_unnorm(q .* G), dJ/dphase = -2 Im(U conj(B))
    std::vector<cd> qg(nn), back(nn);
    for (std::size_t i = 0; i < nn; ++i) qg[i] = q[i] * band.spectrum[i];
    fft::backward2d(n, n, qg.data(), back.data());
    std::vector<double> dh(nn, 0.0);
    for (std::size_t i = 0; i < nn; ++i) {
      if (!fwd.map.mask[i]) continue;
      const double dphase = -2.0 * std::imag(band.field[i] * std::conj(back[i]));
      dh[i] = band.k_material * dphase;
    }
    per_band[b] = rasterize_adjoint(dh, n);
  });
  std::vector<double> grad(kProfileEntries, 0.0);
  for (const auto& g : per_band) {
    for (int i = 0; i < kProfileEntries; ++i) {
      grad[static_cast<std::size_t>(i)] += g[static_cast<std::size_t>(i)];
    }
  }
  return grad;
}

}  // namespace detail

/// Objective value at a profile. RECON_MSE runs the full classical chain
/// (iterations = 0 fusion, no clipping) over the training scenes;
/// PSF_INCOHERENCE scores pairwise kernel overlap minus center energy.
inline double objective_value(const DesignProblem& problem, const HeightProfile& profile) {
  problem.validate();
  const detail::PsfForward fwd = detail::psf_forward(problem, profile);
  std::vector<std::vector<double>> kernels;
  kernels.reserve(fwd.bands.size());
  for (const auto& band : fwd.bands) kernels.push_back(band.kernel);
  double value = 0.0;
  if (problem.objective == Objective::kPsfIncoherence) {
    value = detail::psf_incoherence_value(kernels, problem.crop);
  } else {
    value = detail::recon_forward(problem, kernels).value;
  }
  if (!std::isfinite(value)) {
    throw numeric_error("objective_value: non-finite objective");
  }
  return value;
}

/// Analytic gradient of the objective with respect to the 512 profile
/// entries, by the adjoint chain.
inline std::vector<double> gradient(const DesignProblem& problem,
                                    const HeightProfile& profile) {
  problem.validate();
  const detail::PsfForward fwd = detail::psf_forward(problem, profile);
  std::vector<std::vector<double>> kernels;
  kernels.reserve(fwd.bands.size());
  for (const auto& band : fwd.bands) kernels.push_back(band.kernel);

  std::vector<std::vector<double>> head;
  if (problem.objective == Objective::kPsfIncoherence) {
    head = detail::psf_incoherence_head(kernels, problem.crop);
  } else {
    const detail::ReconWork work = detail::recon_forward(problem, kernels);
    if (!std::isfinite(work.value)) {
      throw numeric_error("gradient: non-finite objective");
    }
    head = detail::recon_head(problem, work);
  }
  return detail::kernel_head_to_profile(problem, fwd, head);
}

/// Ring indices that the rasterization actually samples at this grid size;
/// gradients vanish identically outside them. Derived through the adjoint so
/// it always matches the rasterization rule.
inline std::vector<int> active_rings(const DesignProblem& problem) {
  const int n = problem.optics_n;
  const std::vector<double> counts =
      rasterize_adjoint(std::vector<double>(static_cast<std::size_t>(n) * n, 1.0), n);
  std::vector<int> rings;
  for (int i = 0; i < kProfileEntries; ++i) {
    if (counts[static_cast<std::size_t>(i)] > 0.0) rings.push_back(i);
  }
  return rings;
}

/// Analytic vs central finite-difference gradient at random probe indices.
/// The reference is Richardson-extrapolated from central differences at
/// fd_step and fd_step/2, which cancels the quadratic truncation term that
/// otherwise dominates on high-curvature rings.
inline GradientReport gradient_check(const DesignProblem& problem, const HeightProfile& profile,
                                     int probes = 16, double fd_step = 1e-9,
                                     std::uint64_t seed = 1) {
  GradientReport report;
  report.analytic = gradient(problem, profile);
  report.finite_difference.assign(kProfileEntries, 0.0);

  const std::vector<int> rings = active_rings(problem);
  Rng rng(seed);
  double grad_scale = 0.0;
  for (double g : report.analytic) grad_scale = std::max(grad_scale, std::abs(g));

  auto central = [&](int idx, double h) {
    HeightProfile plus = profile, minus = profile;
    plus.w[static_cast<std::size_t>(idx)] += h;
    minus.w[static_cast<std::size_t>(idx)] -= h;
    return (objective_value(problem, plus) - objective_value(problem, minus)) / (2.0 * h);
  };

  for (int p = 0; p < probes; ++p) {
    const int idx = rings[static_cast<std::size_t>(rng.uniform01() * rings.size()) %
                          rings.size()];
    report.probe_indices.push_back(idx);
    const double coarse = central(idx, fd_step);
    const double fine = central(idx, 0.5 * fd_step);
    const double fd = (4.0 * fine - coarse) / 3.0;
    report.finite_difference[static_cast<std::size_t>(idx)] = fd;
    const double analytic = report.analytic[static_cast<std::size_t>(idx)];
    const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-9 * grad_scale});
    if (denom > 0.0) {
      report.max_rel_error = std::max(report.max_rel_error, std::abs(analytic - fd) / denom);
    }
  }
  return report;
}

/// Projected first-order descent with RMS per-coordinate step scaling and
/// backtracking. The objective never increases across accepted steps; the
/// profile stays inside [0, depth_max]. A terminal 16-level quantization
/// report is attached.
inline OptimizeResult optimize(const DesignProblem& problem) {
  problem.validate();
  HeightProfile current = problem.initial
                              ? *problem.initial
                              : HeightProfile::random(problem.seed, problem.depth_max);
  for (double& v : current.w) v = std::clamp(v, 0.0, problem.depth_max);

  OptimizeResult result;
  double objective = objective_value(problem, current);
  if (!std::isfinite(objective)) {
    throw config_error("optimize: objective is not finite at the starting profile");
  }
  result.objective_trace.push_back(objective);
  result.step_trace.push_back(0.0);

  double step = problem.step_size;
  std::vector<double> rms(kProfileEntries, 0.0);
  for (int iter = 0; iter < problem.iterations; ++iter) {
    const std::vector<double> grad = gradient(problem, current);
    double grad_peak = 0.0;
    for (double g : grad) grad_peak = std::max(grad_peak, std::abs(g));
    if (!(grad_peak > 0.0)) break;

    // RMSProp-style per-coordinate scaling keeps inner and outer rings at
    // comparable effective step sizes.
    for (int i = 0; i < kProfileEntries; ++i) {
      rms[static_cast<std::size_t>(i)] =
          0.9 * rms[static_cast<std::size_t>(i)] + 0.1 * sqr(grad[static_cast<std::size_t>(i)]);
    }
    std::vector<double> direction(kProfileEntries);
    for (int i = 0; i < kProfileEntries; ++i) {
      direction[static_cast<std::size_t>(i)] =
          grad[static_cast<std::size_t>(i)] /
          (std::sqrt(rms[static_cast<std::size_t>(i)]) + 1e-12 * grad_peak);
    }

    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      HeightProfile candidate = current;
      for (int i = 0; i < kProfileEntries; ++i) {
        candidate.w[static_cast<std::size_t>(i)] =
            std::clamp(candidate.w[static_cast<std::size_t>(i)] -
                           step * direction[static_cast<std::size_t>(i)],
                       0.0, problem.depth_max);
      }
      const double cand_obj = objective_value(problem, candidate);
      if (cand_obj <= objective) {
        current = std::move(candidate);
        objective = cand_obj;
        accepted = true;
        step = std::min(step * 1.25, problem.depth_max);
      } else {
        step *= 0.5;
      }
    }
    result.objective_trace.push_back(objective);
    result.step_trace.push_back(step);
    if (!accepted) break;  // no descent direction at any reachable step
  }

  result.profile = current;
  HeightProfile quantized = current;
  const double qstep = problem.depth_max / (kDefaultLevels - 1);
  for (double& v : quantized.w) v = std::round(v / qstep) * qstep;
  result.quantized_profile = quantized;
  result.quantized_objective = objective_value(problem, quantized);
  return result;
}

}  // namespace specpol
