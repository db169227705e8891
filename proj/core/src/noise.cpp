#include "nlos/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "nlos/threading.hpp"

namespace nlos {
namespace detail {

uint64_t poisson_inversion(double mean, SplitMixGen& gen) {
  double limit = std::exp(-mean);
  double product = gen.uniform();
  uint64_t count = 0;
  while (product > limit) {
    ++count;
    product *= gen.uniform();
  }
  return count;
}

uint64_t poisson_ptrs(double mean, SplitMixGen& gen) {
  double b = 0.931 + 2.53 * std::sqrt(mean);
  double a = -0.059 + 0.02483 * b;
  double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  double v_r = 0.9277 - 3.6224 / (b - 2.0);
  double log_mean = std::log(mean);

  for (;;) {
    double u = gen.uniform() - 0.5;
    double v = gen.uniform();
    double us = 0.5 - std::abs(u);
    double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    double k = kf;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_mean - mean - std::lgamma(k + 1.0)) {
      return static_cast<uint64_t>(kf);
    }
  }
}

uint64_t poisson_sample(double mean, SplitMixGen& gen) {
  if (mean <= 0.0) return 0;
  return mean < 30.0 ? poisson_inversion(mean, gen) : poisson_ptrs(mean, gen);
}

}  // namespace detail

double scale_for_peak_photons(const TransientVolume& clean, double peak_photons) {
  double peak = clean.peak();
  if (peak <= 0.0) throw std::invalid_argument("volume has no signal to scale");
  return peak_photons / peak;
}

TransientVolume add_spad_noise(const TransientVolume& clean, const SpadNoiseOptions& options) {
  if (options.scale_c <= 0.0) throw std::invalid_argument("C must be positive");
  if (options.base_min < 0.0 || options.base_max < options.base_min) {
    throw std::invalid_argument("base-noise range must satisfy 0 <= a <= b");
  }
  if (!clean.finite_nonnegative()) {
    throw std::invalid_argument("input volume has negative or non-finite entries");
  }

  TransientVolume noisy = clean;

  // global base level, one draw per volume
  uint64_t seed_state = options.seed;
  double global_base =
      options.base_min + (options.base_max - options.base_min) *
                             (static_cast<double>(splitmix64(seed_state) >> 11) * 0x1.0p-53);

  parallel_for(static_cast<int64_t>(clean.data.size()), [&](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; ++i) {
      detail::SplitMixGen gen{options.seed ^ (0x9e3779b97f4a7c15ull * (static_cast<uint64_t>(i) + 1))};
      double base = global_base;
      if (options.per_bin_base) {
        base = options.base_min + (options.base_max - options.base_min) * gen.uniform();
      }
      double mean = options.scale_c * clean.data[i] + base;
      noisy.data[i] = static_cast<double>(detail::poisson_sample(mean, gen));
    }
  });
  return noisy;
}

}  // namespace nlos
