#include "proseg/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "proseg/numeric.hpp"

namespace proseg {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b, uint64_t c) {
  uint64_t s = splitmix64(master);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  s = splitmix64(s ^ c);
  return s;
}

int RandomSource::uniform_int(int lo, int hi) {
  if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
  uint64_t span = static_cast<uint64_t>(hi) - static_cast<uint64_t>(lo) + 1;
  uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return lo + static_cast<int>(v % span);
}

double RandomSource::normal() {
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int RandomSource::categorical(const double* w, int n) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += w[i];
  if (!(total > 0.0)) throw std::runtime_error("categorical: zero total mass");
  double u = uniform() * total;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += w[i];
    if (u < acc) return i;
  }
  return n - 1;
}

int RandomSource::categorical_log(const double* logw, int n) {
  double m = kNegInf;
  for (int i = 0; i < n; ++i)
    if (logw[i] > m) m = logw[i];
  if (m == kNegInf) throw std::runtime_error("categorical_log: all weights are -inf");
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += std::exp(logw[i] - m);
  double u = uniform() * total;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += std::exp(logw[i] - m);
    if (u < acc) return i;
  }
  return n - 1;
}

}  // namespace proseg
