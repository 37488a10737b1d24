#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <mutex>

#include "arw/errors.hpp"

namespace arw::detail {
namespace {

// FFTW's planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
std::unique_ptr<T[], FftwFree> fftw_buffer(std::size_t count) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(count, 1)));
  if (p == nullptr) throw MemoryBudgetExceeded("fftw_malloc failed");
  return std::unique_ptr<T[], FftwFree>(p);
}

std::vector<int> dims_of(int d, int M) { return std::vector<int>(static_cast<std::size_t>(d), M); }

std::size_t real_size(int d, int M) {
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(M);
  return total;
}

}  // namespace

std::size_t half_spectrum_size(int d, int M) {
  std::size_t total = static_cast<std::size_t>(M / 2 + 1);
  for (int i = 0; i + 1 < d; ++i) total *= static_cast<std::size_t>(M);
  return total;
}

std::vector<double> inverse_real_transform(int d, int M, std::vector<std::complex<double>> spectrum) {
  const std::size_t nreal = real_size(d, M);
  auto in = fftw_buffer<fftw_complex>(spectrum.size());
  std::copy(spectrum.begin(), spectrum.end(), reinterpret_cast<std::complex<double>*>(in.get()));
  spectrum.clear();
  spectrum.shrink_to_fit();
  auto out = fftw_buffer<double>(nreal);
  const auto dims = dims_of(d, M);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_c2r(d, dims.data(), in.get(), out.get(), FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw Error("fftw planning failed");
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return std::vector<double>(out.get(), out.get() + nreal);
}

std::vector<std::complex<double>> forward_real_transform(int d, int M, std::span<const double> values) {
  const std::size_t nreal = real_size(d, M);
  if (values.size() != nreal) throw Error("forward_real_transform: size mismatch");
  const std::size_t nhalf = half_spectrum_size(d, M);
  auto in = fftw_buffer<double>(nreal);
  std::copy(values.begin(), values.end(), in.get());
  auto out = fftw_buffer<fftw_complex>(nhalf);
  const auto dims = dims_of(d, M);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c(d, dims.data(), in.get(), out.get(), FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw Error("fftw planning failed");
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  const auto* c = reinterpret_cast<const std::complex<double>*>(out.get());
  return std::vector<std::complex<double>>(c, c + nhalf);
}

}  // namespace arw::detail
