#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace mildns::detail {

namespace {

// FFTW plan creation is not thread-safe; execution with fftw_execute_dft is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = 1;
    int dims[3];
    for (int i = 0; i < dim; ++i) {
      dims[i] = n;
      total *= static_cast<std::size_t>(n);
    }
    std::vector<std::complex<double>> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan =
        fftw_plan_dft(dim, dims, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace

void fft_forward(int dim, int n, std::span<const double> in, std::span<std::complex<double>> out) {
  const std::size_t total = in.size();
  for (std::size_t i = 0; i < total; ++i) out[i] = in[i];
  auto* buf = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(PlanCache::instance().get(dim, n, FFTW_FORWARD), buf, buf);
  const double scale = 1.0 / static_cast<double>(total);
  for (auto& c : out) c *= scale;
}

void fft_inverse(int dim, int n, std::span<const std::complex<double>> in, std::span<double> out) {
  std::vector<std::complex<double>> work(in.begin(), in.end());
  fft_backward_inplace(dim, n, work);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = work[i].real();
}

void fft_backward_inplace(int dim, int n, std::span<std::complex<double>> data) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(PlanCache::instance().get(dim, n, FFTW_BACKWARD), buf, buf);
}

}  // namespace mildns::detail
