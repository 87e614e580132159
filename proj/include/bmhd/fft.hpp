#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "bmhd/error.hpp"

namespace bmhd::fft {

namespace detail {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// FFTW planning is not thread-safe; execution through the new-array interface is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(int n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<std::complex<double>> a(static_cast<std::size_t>(n) * n), b(a.size());
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p{fftw_plan_dft_2d(n, n, pa, pb, FFTW_FORWARD, flags),
               fftw_plan_dft_2d(n, n, pa, pb, FFTW_BACKWARD, flags)};
    plans_.emplace(n, p);
    return p;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  std::mutex mutex_;
  std::map<int, PlanPair> plans_;
};

}  // namespace detail

/// Unnormalized 2D DFT with the e^{-ikx} sign convention. `in` and `out` hold n*n values.
inline void forward_2d(int n, const std::complex<double>* in, std::complex<double>* out) {
  auto plan = detail::PlanCache::instance().get(n).forward;
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

/// Unnormalized 2D inverse DFT (e^{+ikx}).
inline void backward_2d(int n, const std::complex<double>* in, std::complex<double>* out) {
  auto plan = detail::PlanCache::instance().get(n).backward;
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace bmhd::fft
