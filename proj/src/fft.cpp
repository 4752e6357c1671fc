#include "varlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace varlab::fft {
namespace {

// FFTW planning is not thread-safe; execution with new-array API is.
// Plans are created with FFTW_UNALIGNED so any std::complex buffer works.
class PlanCache {
 public:
  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<cplx> scratch(n);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), p, p, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("fftw: plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void run(std::span<cplx> data, int sign) {
  if (data.empty()) return;
  fftw_plan plan = cache().get(data.size(), sign);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

}  // namespace

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void forward(std::span<cplx> data) { run(data, FFTW_FORWARD); }

void inverse(std::span<cplx> data) { run(data, FFTW_BACKWARD); }

void inverse_normalized(std::span<cplx> data) {
  run(data, FFTW_BACKWARD);
  const double s = 1.0 / static_cast<double>(data.size());
  for (auto& z : data) z *= s;
}

}  // namespace varlab::fft
