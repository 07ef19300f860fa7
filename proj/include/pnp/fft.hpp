#pragma once

#include <complex>
#include <vector>

#include "pnp/image.hpp"

namespace pnp {

/// Full complex DFT grid of an image, row-major, same extents.
struct Spectrum {
  int width = 0;
  int height = 0;
  std::vector<std::complex<double>> data;

  std::complex<double>& operator[](std::size_t i) { return data[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return data[i]; }
  std::size_t size() const { return data.size(); }
};

Spectrum fft2(const Image& img);
Spectrum fft2(const Spectrum& in);

/// Inverse 2-D DFT (normalized by 1/(width*height)), real part.
Image ifft2_real(const Spectrum& spec);
Spectrum ifft2(const Spectrum& in);

/// Transfer function of a kernel on a width x height grid.
Spectrum kernel_spectrum(const Kernel& k, int width, int height);

/// Exact circular convolution. The kernel must fit inside the image.
Image circ_conv(const Image& img, const Kernel& k);

}  // namespace pnp
