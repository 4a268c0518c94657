#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace transitq::rng {

// All sampling goes through std::mt19937_64 plus the portable transforms
// below, so a seed reproduces the same stream on every standard library.
using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent substream for (master seed, stream index). Streams do not
// depend on how many other streams are drawn.
inline Engine substream(std::uint64_t master, std::uint64_t index) {
  return Engine(splitmix64(splitmix64(master) ^ splitmix64(index + 0x5851f42d4c957f2dULL)));
}

// Uniform on [0, 1) with 53 random bits.
template <typename G>
double uniform01(G& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

template <typename G>
double exponential(G& g, double rate) {
  return -std::log1p(-uniform01(g)) / rate;
}

namespace detail {

template <typename G>
std::int64_t poisson_inversion(G& g, double mean) {
  const double p0 = std::exp(-mean);
  double u = uniform01(g);
  std::int64_t k = 0;
  double p = p0;
  double cdf = p0;
  while (u > cdf) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
    if (p < 1e-300 && static_cast<double>(k) > mean) break;
  }
  return k;
}

// Hoermann's transformed rejection with squeeze (PTRS), for mean >= 10.
template <typename G>
std::int64_t poisson_ptrs(G& g, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform01(g) - 0.5;
    const double v = uniform01(g);
    const double us = 0.5 - std::fabs(u);
    const auto k = static_cast<std::int64_t>(
        std::floor((2.0 * a / us + b) * u + mean + 0.43));
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + static_cast<double>(k) * loglam -
            std::lgamma(static_cast<double>(k) + 1.0))
      return k;
  }
}

}  // namespace detail

// Inversion below a mean of 30, PTRS above.
template <typename G>
std::int64_t poisson(G& g, double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean < 30.0) return detail::poisson_inversion(g, mean);
  return detail::poisson_ptrs(g, mean);
}

template <typename G>
int binomial(G& g, int n, double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  int k = 0;
  for (int i = 0; i < n; ++i) k += uniform01(g) < p ? 1 : 0;
  return k;
}

}  // namespace transitq::rng
