#pragma once

#include <cstdint>

#include "pnp/image.hpp"

namespace pnp {

// Counter-based generator: every variate is a pure function of (seed, counter),
// so parallel and serial evaluation orders produce identical streams.

/// SplitMix64-style avalanche of a (seed, counter) pair.
std::uint64_t hash_counter(std::uint64_t seed, std::uint64_t counter);

/// Uniform double in the open interval (0,1).
double uniform01(std::uint64_t seed, std::uint64_t counter);

/// Standard normal via Box-Muller; consumes counters 2*counter and 2*counter+1.
double standard_normal(std::uint64_t seed, std::uint64_t counter);

/// Poisson variate by CDF inversion from a single uniform.
int poisson_sample(double mean, std::uint64_t seed, std::uint64_t counter);

/// i.i.d. additive Gaussian noise, deterministic per seed. No clamping.
Image add_gaussian_noise(const Image& img, double std_dev, std::uint64_t seed);

}  // namespace pnp
