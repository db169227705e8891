#pragma once

#include <cstdint>

#include "nlos/rng.hpp"
#include "nlos/transient.hpp"

namespace nlos {

struct SpadNoiseOptions {
  double scale_c = 1.0;       // signal scale constant C
  double base_min = 0.0;      // B ~ uniform[base_min, base_max]
  double base_max = 0.0;
  uint64_t seed = 0;
  bool per_bin_base = false;  // draw B per bin instead of once per volume
};

// SPAD-style measurement noise: every bin is replaced by a Poisson draw with
// mean C * m + B, where B is one uniform base-noise draw per volume. Output
// entries are non-negative integer counts. Per-bin RNG streams are derived
// from (seed, bin index), so results do not depend on scheduling.
TransientVolume add_spad_noise(const TransientVolume& clean, const SpadNoiseOptions& options);

// C such that the peak bin of the clean volume maps to `peak_photons` counts.
double scale_for_peak_photons(const TransientVolume& clean, double peak_photons);

namespace detail {

// Per-bin counter-based generator.
struct SplitMixGen {
  uint64_t state;
  double uniform() {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
  }
};

// Knuth multiplication method; O(mean) draws.
uint64_t poisson_inversion(double mean, SplitMixGen& gen);
// Hormann's transformed rejection (PTRS); O(1) for large means.
uint64_t poisson_ptrs(double mean, SplitMixGen& gen);
// Dispatches at mean 30.
uint64_t poisson_sample(double mean, SplitMixGen& gen);

}  // namespace detail

}  // namespace nlos
