#pragma once

#include <cstdint>

#include "pnp/denoisers.hpp"
#include "pnp/image.hpp"

namespace pnp {

struct KappaProbeResult {
  double max_kappa = 0.0;        // image-dependent balanced NLM
  double max_fixed_kappa = 0.0;  // fixed-weight linear variant, same pairs
  int pairs_tested = 0;
  bool found_expansive = false;  // max_kappa > 1
};

/// Searches candidate image pairs for expansiveness of image-dependent
/// Sinkhorn-balanced NLM. Candidates come from the iterates of a constant-rho
/// Plug-and-Play inpainting run plus two-level perturbation pairs; the search
/// stops at max_pairs. The fixed-weight ratio is evaluated on every tested
/// pair as the non-expansive control.
KappaProbeResult kappa_probe(int size, int max_pairs, const NlmParams& params, std::uint64_t seed);

}  // namespace pnp
