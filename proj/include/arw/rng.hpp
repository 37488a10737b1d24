#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace arw {

// Per-trial normal stream. The engine state is a pure function of
// (master_seed, trial_index): std::seed_seq and std::mt19937_64 are fully
// specified by the standard, and the uniform-to-normal map below is ours, so
// draws are bit-identical across platforms and thread schedules.
class NormalStream {
 public:
  NormalStream(std::uint64_t master_seed, std::uint64_t trial_index, std::uint32_t salt = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(trial_index), static_cast<std::uint32_t>(trial_index >> 32), salt};
    engine_.seed(seq);
  }

  // Uniform on (0, 1), 53-bit resolution.
  double uniform() {
    double u;
    do {
      u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    } while (u == 0.0);
    return u;
  }

  // Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace arw
