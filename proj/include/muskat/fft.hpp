#pragma once

// Thin wrapper over FFTW3 complex-to-complex transforms with a process-wide
// plan cache. Plans are created with FFTW_ESTIMATE | FFTW_UNALIGNED so they
// run on plain std::vector storage and give reproducible results.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace muskat::detail {

class FftPlanCache {
 public:
  // The FFTW planner is not thread-safe; executing existing plans is.
  static fftw_plan plan_for(std::size_t n, int sign) {
    static FftPlanCache cache;
    std::scoped_lock lock(cache.mutex_);
    const auto key = std::make_pair(n, sign);
    if (auto it = cache.plans_.find(key); it != cache.plans_.end()) {
      return it->second;
    }
    std::vector<std::complex<double>> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.plans_.emplace(key, plan);
    return plan;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

 private:
  FftPlanCache() = default;
  ~FftPlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
  std::mutex mutex_;
};

// In-place DFT; sign = FFTW_FORWARD sums e^{-ik a_j}, FFTW_BACKWARD e^{+ik a_j}.
inline void dft_inplace(std::complex<double>* data, std::size_t n, int sign) {
  fftw_plan plan = FftPlanCache::plan_for(n, sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, buf, buf);
}

// Smallest power of two >= n (and >= 8), the preferred grid size.
inline std::size_t fft_size(std::size_t n) {
  std::size_t m = 8;
  while (m < n) m <<= 1;
  return m;
}

}  // namespace muskat::detail
