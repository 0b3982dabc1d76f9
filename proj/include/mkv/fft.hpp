#pragma once

// Thin RAII layer over FFTW's real-to-complex transforms.
//
// Plans are created once per transform length and shared process-wide; the
// planner is guarded by a mutex because FFTW planning is not thread-safe.
// Execution goes through the new-array interface, so every RealTransform owns
// private buffers and distinct instances may run concurrently.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>

namespace mkv::fft {

namespace detail {

struct PlanPair {
  fftw_plan forward = nullptr;   // r2c
  fftw_plan backward = nullptr;  // c2r

  PlanPair() = default;
  PlanPair(const PlanPair&) = delete;
  PlanPair& operator=(const PlanPair&) = delete;
  ~PlanPair() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

inline std::shared_ptr<const PlanPair> plans_for(std::size_t n) {
  static std::map<std::size_t, std::shared_ptr<PlanPair>> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  auto plans = std::make_shared<PlanPair>();
  double* real = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(n / 2 + 1);
  // FFTW_ESTIMATE keeps planning deterministic; the transforms here are short
  // and the measured plans gain little.
  const unsigned flags = FFTW_ESTIMATE;
  plans->forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spec, flags);
  plans->backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real, flags | FFTW_DESTROY_INPUT);
  fftw_free(real);
  fftw_free(spec);
  cache.emplace(n, plans);
  return plans;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

}  // namespace detail

/// Unnormalized real DFT pair of a fixed length n with owned scratch buffers.
///
/// forward():  X_k = sum_j x_j exp(-2 pi i jk/n),  k = 0..n/2
/// backward(): x_j = sum_{k=-n/2+1}^{n/2} X_k exp(+2 pi i jk/n) using the
///             Hermitian extension of the half spectrum.
class RealTransform {
 public:
  explicit RealTransform(std::size_t n)
      : n_(n),
        plans_(detail::plans_for(n)),
        real_(fftw_alloc_real(n)),
        spec_(reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n / 2 + 1))) {}

  RealTransform(const RealTransform& other) : RealTransform(other.n_) {}
  RealTransform& operator=(const RealTransform& other) {
    if (this != &other) *this = RealTransform(other.n_);
    return *this;
  }
  RealTransform(RealTransform&&) noexcept = default;
  RealTransform& operator=(RealTransform&&) noexcept = default;

  std::size_t size() const noexcept { return n_; }

  std::span<double> real() noexcept { return {real_.get(), n_}; }
  std::span<const double> real() const noexcept { return {real_.get(), n_}; }
  std::span<std::complex<double>> spectrum() noexcept { return {spec_.get(), n_ / 2 + 1}; }
  std::span<const std::complex<double>> spectrum() const noexcept { return {spec_.get(), n_ / 2 + 1}; }

  /// real() -> spectrum()
  void forward() {
    fftw_execute_dft_r2c(plans_->forward, real_.get(), reinterpret_cast<fftw_complex*>(spec_.get()));
  }

  /// spectrum() -> real(); spectrum() is clobbered.
  void backward() {
    fftw_execute_dft_c2r(plans_->backward, reinterpret_cast<fftw_complex*>(spec_.get()), real_.get());
  }

 private:
  std::size_t n_;
  std::shared_ptr<const detail::PlanPair> plans_;
  std::unique_ptr<double, detail::FftwFree> real_;
  std::unique_ptr<std::complex<double>, detail::FftwFree> spec_;
};

}  // namespace mkv::fft
