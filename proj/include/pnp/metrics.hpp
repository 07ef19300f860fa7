#pragma once

#include "pnp/image.hpp"

namespace pnp {

/// PSNR in dB with peak 1.0: 10*log10(1/MSE).
/// Identical inputs return +infinity (the documented cap sentinel).
double psnr(const Image& a, const Image& b);

}  // namespace pnp
