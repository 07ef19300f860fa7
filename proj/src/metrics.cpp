#include "pnp/metrics.hpp"

#include <cmath>
#include <limits>

namespace pnp {

double psnr(const Image& a, const Image& b) {
  require_same_dims(a, b, "psnr");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace pnp
