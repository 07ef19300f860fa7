#pragma once

#include <string>

#include "pnp/fft.hpp"
#include "pnp/image.hpp"
#include "pnp/solver.hpp"

namespace pnp {

/// Exact minimizer of (1/2)||h*x - y||^2 + (rho/2)||x - x_tilde||^2 over the
/// circulant blur h, computed in the Fourier domain.
Image deblur_prox(const Image& y, const Kernel& h, double rho, const Image& x_tilde);

/// Exact minimizer of (1/2)||S x - y||^2 + (rho/2)||x - x_tilde||^2 for a
/// binary sampling mask: elementwise (mask.*y + rho*x_tilde) ./ (mask + rho).
/// Entries of mask must be exactly 0 or 1; y is ignored where mask is 0.
Image interp_prox(const Image& y, const Image& mask, double rho, const Image& x_tilde);

/// 0th polyphase component of h * reverse(h): the autocorrelation taps kept
/// at lags divisible by factor. Output is zero-phase (symmetric, odd,
/// center-anchored).
Kernel polyphase_zeroth(const Kernel& h, int factor);

/// Decimated-blur model G = S H with everything the closed-form prox needs
/// precomputed on the grids.
struct SuperResModel {
  Kernel kernel;
  int factor = 1;
  int width = 0;   // high-res grid
  int height = 0;
  Kernel htilde0;               // tap-level 0th polyphase component
  Spectrum h_spec;              // F(h) on the high-res grid
  std::vector<double> h0_spec;  // spectrum of S H H^T S^T on the low-res grid (real, >= 0)

  static SuperResModel create(const Kernel& h, int factor, int width, int height);
};

/// G x: blur then decimate.
Image sr_forward(const SuperResModel& m, const Image& x);
/// G^T w: zero-fill upsample then correlate.
Image sr_adjoint(const SuperResModel& m, const Image& w);

/// Exact minimizer of (1/2)||G x - y||^2 + (rho/2)||x - x_tilde||^2 via the
/// Woodbury identity: x = (b - G^T (rho I + G G^T)^{-1} G b)/rho with
/// b = G^T y + rho x_tilde; the m x m inverse is a low-rate Fourier division
/// by (h0_spec + rho).
Image superres_prox(const SuperResModel& m, const Image& y, double rho, const Image& x_tilde);

Kernel make_delta_kernel();
Kernel make_gaussian_kernel(int size, double std_dev);
/// Separable bicubic anti-aliasing taps (a = -0.5) for integer factor K,
/// size (4K-1)^2, normalized to unit sum.
Kernel make_bicubic_kernel(int factor);
/// gauss:<size>:<std> | bicubic:<K> | delta | file:<path> (PFM/PGM kernel).
Kernel parse_kernel_spec(const std::string& spec);

ForwardProblem make_deblur_problem(const Image& y, const Kernel& h);
ForwardProblem make_interp_problem(const Image& y, const Image& mask);
ForwardProblem make_superres_problem(const SuperResModel& m, const Image& y_lowres);

}  // namespace pnp
