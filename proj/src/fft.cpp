#include "pnp/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace pnp {
namespace {

// FFTW planning is not thread-safe; execution of private plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<std::complex<double>> transform(const std::vector<std::complex<double>>& in, int width,
                                            int height, int sign) {
  std::vector<std::complex<double>> out(in.size());
  auto* in_ptr = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
  auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    // FFTW_ESTIMATE keeps planning deterministic and leaves the input intact.
    plan = fftw_plan_dft_2d(height, width, in_ptr, out_ptr, sign,
                            FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

Spectrum fft2(const Image& img) {
  std::vector<std::complex<double>> in(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) in[i] = img[i];
  return Spectrum{img.width(), img.height(), transform(in, img.width(), img.height(), FFTW_FORWARD)};
}

Spectrum fft2(const Spectrum& in) {
  return Spectrum{in.width, in.height, transform(in.data, in.width, in.height, FFTW_FORWARD)};
}

Spectrum ifft2(const Spectrum& in) {
  Spectrum out{in.width, in.height, transform(in.data, in.width, in.height, FFTW_BACKWARD)};
  const double scale = 1.0 / (static_cast<double>(in.width) * in.height);
  for (auto& v : out.data) v *= scale;
  return out;
}

Image ifft2_real(const Spectrum& spec) {
  const Spectrum full = ifft2(spec);
  Image out(spec.width, spec.height);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = full[i].real();
  return out;
}

Spectrum kernel_spectrum(const Kernel& k, int width, int height) {
  return fft2(embed_wrapped(k, width, height));
}

Image circ_conv(const Image& img, const Kernel& k) {
  if (k.width() > img.width() || k.height() > img.height()) {
    throw std::invalid_argument("circ_conv: kernel larger than image");
  }
  Spectrum xs = fft2(img);
  const Spectrum hs = kernel_spectrum(k, img.width(), img.height());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] *= hs[i];
  return ifft2_real(xs);
}

}  // namespace pnp
