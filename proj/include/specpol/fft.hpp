#pragma once

// Thin FFTW3 front end: cached unaligned plans per shape, plus the small
// grid-layout helpers (fftshift, padded embeds) the optics/encoder/decoder
// share. Plan creation is serialized; execution runs concurrently on
// caller-owned buffers.

#include <complex>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "specpol/core.hpp"

namespace specpol::fft {

using cdouble = std::complex<double>;

namespace detail {

struct PlanCache {
  std::mutex mutex;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }

  fftw_plan get(int rows, int cols, int sign) {
    std::lock_guard<std::mutex> lock(mutex);
    const auto key = std::make_tuple(rows, cols, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    // FFTW_UNALIGNED so the plan stays valid for arbitrary caller buffers.
    fftw_complex* dummy_in = fftw_alloc_complex(static_cast<std::size_t>(rows) * cols);
    fftw_complex* dummy_out = fftw_alloc_complex(static_cast<std::size_t>(rows) * cols);
    fftw_plan plan = fftw_plan_dft_2d(rows, cols, dummy_in, dummy_out, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(dummy_in);
    fftw_free(dummy_out);
    plans.emplace(key, plan);
    return plan;
  }
};

inline PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

inline void execute(int rows, int cols, int sign, const cdouble* in, cdouble* out) {
  fftw_plan plan = cache().get(rows, cols, sign);
  fftw_execute_dft(plan,
                   reinterpret_cast<fftw_complex*>(const_cast<cdouble*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace detail

/// Unnormalized forward DFT, out-of-place (in != out).
inline void forward2d(int rows, int cols, const cdouble* in, cdouble* out) {
  detail::execute(rows, cols, FFTW_FORWARD, in, out);
}

/// Unnormalized inverse DFT (scale by 1/(rows*cols) for the true inverse).
inline void backward2d(int rows, int cols, const cdouble* in, cdouble* out) {
  detail::execute(rows, cols, FFTW_BACKWARD, in, out);
}

/// Quadrant swap moving the zero-frequency bin to (rows/2, cols/2).
/// Requires even dimensions, where fftshift is its own inverse.
template <typename T>
void fftshift2d(std::vector<T>& a, int rows, int cols) {
  if (rows % 2 != 0 || cols % 2 != 0) {
    throw config_error("fftshift2d: even dimensions required");
  }
  const int hr = rows / 2, hc = cols / 2;
  for (int i = 0; i < hr; ++i) {
    for (int j = 0; j < cols; ++j) {
      const int i2 = i + hr;
      const int j2 = j < hc ? j + hc : j - hc;
      std::swap(a[static_cast<std::size_t>(i) * cols + j],
                a[static_cast<std::size_t>(i2) * cols + j2]);
    }
  }
}

/// Copy src (h x w) into the top-left corner of a zeroed dst (rows x cols).
template <typename T>
std::vector<T> embed_topleft(const std::vector<T>& src, int h, int w, int rows, int cols) {
  std::vector<T> dst(static_cast<std::size_t>(rows) * cols, T{});
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      dst[static_cast<std::size_t>(i) * cols + j] = src[static_cast<std::size_t>(i) * w + j];
    }
  }
  return dst;
}

/// Embed a k x k kernel into rows x cols with its center bin (k/2, k/2)
/// wrapped to (0, 0). This is the alignment under which a centered delta
/// kernel has a flat unit spectrum.
template <typename T>
std::vector<T> embed_kernel_centered(const std::vector<T>& kernel, int k, int rows,
                                     int cols) {
  std::vector<T> dst(static_cast<std::size_t>(rows) * cols, T{});
  const int half = k / 2;
  for (int i = 0; i < k; ++i) {
    const int r = ((i - half) % rows + rows) % rows;
    for (int j = 0; j < k; ++j) {
      const int c = ((j - half) % cols + cols) % cols;
      dst[static_cast<std::size_t>(r) * cols + c] +=
          kernel[static_cast<std::size_t>(i) * k + j];
    }
  }
  return dst;
}

}  // namespace specpol::fft
