#include "pnp/probe.hpp"

#include <cmath>
#include <vector>

#include "pnp/forward.hpp"
#include "pnp/random.hpp"

namespace pnp {
namespace {

constexpr double kSinkhornTol = 1e-10;
constexpr int kSinkhornSweeps = 100000;

// Two intensity levels in coarse blocks; contrast near the NLM bandwidth is
// where the weights react strongest to perturbations.
Image two_level_scene(int size, double level, std::uint64_t seed) {
  Image img(size, size, 0.0);
  const int block = std::max(2, size / 4);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const std::size_t cell = static_cast<std::size_t>(y / block) * 131 + (x / block);
      img(x, y) = hash_counter(seed, cell) & 1 ? level : 0.0;
    }
  }
  return img;
}

struct Candidate {
  Image img;
  WeightMatrix balanced;
  std::vector<double> denoised;
};

Candidate make_candidate(Image img, const NlmParams& params) {
  WeightMatrix balanced = sinkhorn_knopp(nlm_weights(img, params), kSinkhornTol, kSinkhornSweeps);
  std::vector<double> denoised = balanced.apply(img.data());
  return {std::move(img), std::move(balanced), std::move(denoised)};
}

double pair_kappa(const Candidate& a, const Candidate& b) {
  const double denom = l2_diff(a.img, b.img);
  if (denom == 0.0) return 0.0;
  double num = 0.0;
  for (std::size_t i = 0; i < a.denoised.size(); ++i) {
    const double d = a.denoised[i] - b.denoised[i];
    num += d * d;
  }
  return num / (denom * denom);
}

double pair_fixed_kappa(const Candidate& a, const Candidate& b) {
  const double denom = l2_diff(a.img, b.img);
  if (denom == 0.0) return 0.0;
  const std::vector<double> db = a.balanced.apply(b.img.data());
  double num = 0.0;
  for (std::size_t i = 0; i < db.size(); ++i) {
    const double d = a.denoised[i] - db[i];
    num += d * d;
  }
  return num / (denom * denom);
}

}  // namespace

KappaProbeResult kappa_probe(int size, int max_pairs, const NlmParams& params, std::uint64_t seed) {
  params.validate();
  if (size < 4) throw std::invalid_argument("kappa_probe: size too small");
  if (max_pairs < 1) throw std::invalid_argument("kappa_probe: max_pairs must be >= 1");

  std::vector<Candidate> candidates;

  // Plug-and-Play inpainting with constant rho and the raw balanced-NLM
  // denoiser; every denoiser input is a candidate.
  {
    const Image truth = two_level_scene(size, 3.0 * params.sigma, seed);
    Image mask(size, size);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      mask[i] = uniform01(seed ^ 0x9d2c5680ULL, i) < 0.5 ? 1.0 : 0.0;
    }
    Image y(size, size, 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = mask[i] * truth[i];

    const double rho = 1.0;
    Image x = y;
    Image v = y;
    Image u(size, size, 0.0);
    const int iterations = 10;
    for (int k = 0; k < iterations; ++k) {
      x = interp_prox(y, mask, rho, v - u);
      Image v_tilde = x + u;
      candidates.push_back(make_candidate(v_tilde, params));
      v = Image(size, size, candidates.back().denoised);
      u = u + (x - v);
    }
  }

  // Perturbation pairs around two-level scenes: the base and a version with
  // one block's level nudged, at several contrasts.
  {
    const double s = params.sigma;
    int variant = 0;
    for (double level : {0.5 * s, s, 2.0 * s, 3.0 * s, 5.0 * s}) {
      for (double nudge : {0.02 * s, 0.2 * s, s}) {
        Image base = two_level_scene(size, level, seed + 17 * ++variant);
        Image moved = base;
        const int block = std::max(2, size / 4);
        for (int y = 0; y < block; ++y) {
          for (int x = 0; x < block; ++x) moved(x, y) += nudge;
        }
        candidates.push_back(make_candidate(std::move(base), params));
        candidates.push_back(make_candidate(std::move(moved), params));
      }
    }
  }

  KappaProbeResult result;
  for (std::size_t i = 0; i < candidates.size() && result.pairs_tested < max_pairs; ++i) {
    for (std::size_t j = i + 1; j < candidates.size() && result.pairs_tested < max_pairs; ++j) {
      if (l2_diff(candidates[i].img, candidates[j].img) == 0.0) continue;
      ++result.pairs_tested;
      result.max_kappa = std::max(result.max_kappa, pair_kappa(candidates[i], candidates[j]));
      result.max_fixed_kappa =
          std::max(result.max_fixed_kappa, pair_fixed_kappa(candidates[i], candidates[j]));
    }
  }
  result.found_expansive = result.max_kappa > 1.0;
  return result;
}

}  // namespace pnp
