#pragma once

#include <cstdint>
#include <random>

namespace proseg {

// Mixes identifiers into a stream seed so every sampling site draws from its
// own independent, reproducible stream (seed, sweep, phase, item). Splitmix64.
uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0, uint64_t c = 0);

// All sampling goes through this wrapper. The primitive samplers are
// implemented by hand (see distributions.cpp for gamma/poisson) so results
// do not depend on standard-library distribution internals.
class RandomSource {
 public:
  explicit RandomSource(uint64_t seed) : engine_(seed) {}

  // [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds, unbiased via rejection
  int uniform_int(int lo, int hi);

  // standard normal, Box-Muller
  double normal();

  // unnormalized weights; throws if total mass is zero
  int categorical(const double* w, int n);

  // log-domain weights, -inf allowed; throws if all -inf
  int categorical_log(const double* logw, int n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace proseg
