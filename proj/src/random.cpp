#include "pnp/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pnp {

std::uint64_t hash_counter(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t counter) {
  // 53 bits, shifted into (0,1) so log() and division are always safe.
  return (static_cast<double>(hash_counter(seed, counter) >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(std::uint64_t seed, std::uint64_t counter) {
  const double u1 = uniform01(seed, 2 * counter);
  const double u2 = uniform01(seed, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int poisson_sample(double mean, std::uint64_t seed, std::uint64_t counter) {
  if (mean < 0.0) throw std::invalid_argument("poisson_sample: negative mean");
  if (mean == 0.0) return 0;
  const double u = uniform01(seed, counter);
  double p = std::exp(-mean);
  double cdf = p;
  int k = 0;
  while (u > cdf) {
    ++k;
    p *= mean / k;
    cdf += p;
    if (k > 10'000'000) throw std::runtime_error("poisson_sample: inversion failed to terminate");
  }
  return k;
}

Image add_gaussian_noise(const Image& img, double std_dev, std::uint64_t seed) {
  if (std_dev < 0.0) throw std::invalid_argument("add_gaussian_noise: negative std");
  if (std_dev == 0.0) return img;
  Image out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    out[i] = img[i] + std_dev * standard_normal(seed, i);
  }
  return out;
}

}  // namespace pnp
