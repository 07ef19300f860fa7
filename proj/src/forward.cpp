#include "pnp/forward.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

#include "pnp/image_io.hpp"

namespace pnp {

Image deblur_prox(const Image& y, const Kernel& h, double rho, const Image& x_tilde) {
  if (!(rho > 0.0)) throw std::invalid_argument("deblur_prox: rho must be > 0");
  require_same_dims(y, x_tilde, "deblur_prox");
  const Spectrum hs = kernel_spectrum(h, y.width(), y.height());
  const Spectrum ys = fft2(y);
  Spectrum xs = fft2(x_tilde);
  // (conj(F(h)) F(y) + rho F(xt)) / (|F(h)|^2 + rho)
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = (std::conj(hs[i]) * ys[i] + rho * xs[i]) / (std::norm(hs[i]) + rho);
  }
  return ifft2_real(xs);
}

Image interp_prox(const Image& y, const Image& mask, double rho, const Image& x_tilde) {
  if (!(rho > 0.0)) throw std::invalid_argument("interp_prox: rho must be > 0");
  require_same_dims(y, mask, "interp_prox(mask)");
  require_same_dims(y, x_tilde, "interp_prox(x_tilde)");
  Image out(y.width(), y.height());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double m = mask[i];
    if (m == 0.0) {
      out[i] = x_tilde[i];  // unobserved pixels pass x_tilde through untouched
    } else if (m == 1.0) {
      out[i] = (y[i] + rho * x_tilde[i]) / (1.0 + rho);
    } else {
      throw std::invalid_argument("interp_prox: mask entries must be 0 or 1");
    }
  }
  return out;
}

Kernel polyphase_zeroth(const Kernel& h, int factor) {
  if (factor < 1) throw std::invalid_argument("polyphase_zeroth: factor must be >= 1");
  // Autocorrelation a(l) = sum_p h(p) h(p-l); anchors cancel, lag 0 is the
  // center. Only lags divisible by the factor survive decimation at phase 0.
  const int max_lx = (h.width() - 1) / factor;
  const int max_ly = (h.height() - 1) / factor;
  const int out_w = 2 * max_lx + 1;
  const int out_h = 2 * max_ly + 1;
  std::vector<double> taps(static_cast<std::size_t>(out_w) * out_h, 0.0);
  for (int ly = -max_ly; ly <= max_ly; ++ly) {
    for (int lx = -max_lx; lx <= max_lx; ++lx) {
      double acc = 0.0;
      for (int py = 0; py < h.height(); ++py) {
        for (int px = 0; px < h.width(); ++px) {
          const int qx = px - lx * factor;
          const int qy = py - ly * factor;
          if (qx < 0 || qx >= h.width() || qy < 0 || qy >= h.height()) continue;
          acc += h.tap(px, py) * h.tap(qx, qy);
        }
      }
      taps[static_cast<std::size_t>(ly + max_ly) * out_w + (lx + max_lx)] = acc;
    }
  }
  return Kernel(out_w, out_h, std::move(taps));
}

SuperResModel SuperResModel::create(const Kernel& h, int factor, int width, int height) {
  if (factor < 1) throw std::invalid_argument("SuperResModel: factor must be >= 1");
  if (width % factor != 0 || height % factor != 0) {
    throw std::invalid_argument("SuperResModel: high-res extents must be divisible by factor");
  }
  SuperResModel m{h, factor, width, height, polyphase_zeroth(h, factor), {}, {}};
  m.h_spec = kernel_spectrum(h, width, height);

  // Grid form of the polyphase construction: the periodic autocorrelation
  // |F(h)|^2 back in space, decimated at phase 0, transformed at the low
  // rate. This equals the tap-level htilde0 whenever its support fits the
  // low-res grid, and stays exact when it wraps.
  Spectrum hh = m.h_spec;
  for (auto& v : hh.data) v = std::norm(v);
  const Image htilde_grid = ifft2_real(hh);
  const Spectrum low = fft2(downsample(htilde_grid, factor));
  m.h0_spec.resize(low.size());
  for (std::size_t i = 0; i < low.size(); ++i) m.h0_spec[i] = low[i].real();
  return m;
}

Image sr_forward(const SuperResModel& m, const Image& x) {
  if (x.width() != m.width || x.height() != m.height) {
    throw std::invalid_argument("sr_forward: dimension mismatch");
  }
  Spectrum xs = fft2(x);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] *= m.h_spec[i];
  return downsample(ifft2_real(xs), m.factor);
}

Image sr_adjoint(const SuperResModel& m, const Image& w) {
  if (w.width() * m.factor != m.width || w.height() * m.factor != m.height) {
    throw std::invalid_argument("sr_adjoint: dimension mismatch");
  }
  Spectrum ws = fft2(upsample(w, m.factor));
  for (std::size_t i = 0; i < ws.size(); ++i) ws[i] *= std::conj(m.h_spec[i]);
  return ifft2_real(ws);
}

Image superres_prox(const SuperResModel& m, const Image& y, double rho, const Image& x_tilde) {
  if (!(rho > 0.0)) throw std::invalid_argument("superres_prox: rho must be > 0");
  if (x_tilde.width() != m.width || x_tilde.height() != m.height) {
    throw std::invalid_argument("superres_prox: x_tilde dimension mismatch");
  }
  const Image b = sr_adjoint(m, y) + rho * x_tilde;
  Spectrum gb = fft2(sr_forward(m, b));
  for (std::size_t i = 0; i < gb.size(); ++i) gb[i] /= m.h0_spec[i] + rho;
  const Image correction = sr_adjoint(m, ifft2_real(gb));
  return (1.0 / rho) * (b - correction);
}

Kernel make_delta_kernel() { return Kernel(1, 1, {1.0}); }

Kernel make_gaussian_kernel(int size, double std_dev) {
  if (size < 1 || size % 2 == 0) {
    throw std::invalid_argument("make_gaussian_kernel: size must be odd and >= 1");
  }
  if (!(std_dev > 0.0)) throw std::invalid_argument("make_gaussian_kernel: std must be > 0");
  const int r = size / 2;
  std::vector<double> taps(static_cast<std::size_t>(size) * size);
  double sum = 0.0;
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      const double v = std::exp(-(x * x + y * y) / (2.0 * std_dev * std_dev));
      taps[static_cast<std::size_t>(y + r) * size + (x + r)] = v;
      sum += v;
    }
  }
  for (double& t : taps) t /= sum;
  return Kernel(size, size, std::move(taps));
}

namespace {

// Keys cubic, a = -0.5.
double cubic(double s) {
  s = std::abs(s);
  if (s <= 1.0) return 1.5 * s * s * s - 2.5 * s * s + 1.0;
  if (s < 2.0) return -0.5 * (s * s * s - 5.0 * s * s + 8.0 * s - 4.0);
  return 0.0;
}

}  // namespace

Kernel make_bicubic_kernel(int factor) {
  if (factor < 1) throw std::invalid_argument("make_bicubic_kernel: factor must be >= 1");
  if (factor == 1) return make_delta_kernel();
  const int r = 2 * factor - 1;
  const int size = 2 * r + 1;
  std::vector<double> line(size);
  double line_sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    line[i + r] = cubic(static_cast<double>(i) / factor) / factor;
    line_sum += line[i + r];
  }
  for (double& v : line) v /= line_sum;
  std::vector<double> taps(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      taps[static_cast<std::size_t>(y) * size + x] = line[y] * line[x];
    }
  }
  return Kernel(size, size, std::move(taps));
}

Kernel parse_kernel_spec(const std::string& spec) {
  try {
    if (spec == "delta") return make_delta_kernel();
    if (spec.rfind("gauss:", 0) == 0) {
      const std::string rest = spec.substr(6);
      const std::size_t colon = rest.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("gauss needs size and std");
      return make_gaussian_kernel(std::stoi(rest.substr(0, colon)), std::stod(rest.substr(colon + 1)));
    }
    if (spec.rfind("bicubic:", 0) == 0) return make_bicubic_kernel(std::stoi(spec.substr(8)));
    if (spec.rfind("file:", 0) == 0) {
      const Image img = read_image(spec.substr(5));
      return Kernel(img.width(), img.height(), img.data());
    }
  } catch (const std::logic_error& e) {
    throw std::invalid_argument("bad kernel spec '" + spec + "': " + e.what());
  }
  throw std::invalid_argument("unknown kernel spec '" + spec +
                              "' (gauss:<size>:<std> | bicubic:<K> | delta | file:<path>)");
}

namespace {

double max_abs_spectrum(const Spectrum& s) {
  double m = 0.0;
  for (const auto& v : s.data) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

ForwardProblem make_deblur_problem(const Image& y, const Kernel& h) {
  ForwardProblem p;
  p.width = y.width();
  p.height = y.height();
  const Spectrum hs = kernel_spectrum(h, y.width(), y.height());
  const Spectrum ys = fft2(y);
  // Precompute conj(F(h)) F(y) and |F(h)|^2; per call only x_tilde moves.
  auto data_term = std::make_shared<std::vector<std::complex<double>>>(hs.size());
  auto transfer_sq = std::make_shared<std::vector<double>>(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    (*data_term)[i] = std::conj(hs[i]) * ys[i];
    (*transfer_sq)[i] = std::norm(hs[i]);
  }
  // ||grad f||_2/sqrt(n) <= ||H||(||H|| + ||y||/sqrt(n)) over [0,1]^n
  const double op_norm = max_abs_spectrum(hs);
  p.gradient_bound = op_norm * (op_norm + l2_norm(y) / std::sqrt(static_cast<double>(y.size())));
  p.prox = [data_term, transfer_sq](double rho, const Image& x_tilde) {
    Spectrum xs = fft2(x_tilde);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = ((*data_term)[i] + rho * xs[i]) / ((*transfer_sq)[i] + rho);
    }
    return ifft2_real(xs);
  };
  return p;
}

ForwardProblem make_interp_problem(const Image& y, const Image& mask) {
  require_same_dims(y, mask, "make_interp_problem");
  ForwardProblem p;
  p.width = y.width();
  p.height = y.height();
  p.gradient_bound = 1.0 + l2_norm(y) / std::sqrt(static_cast<double>(y.size()));
  p.prox = [y, mask](double rho, const Image& x_tilde) { return interp_prox(y, mask, rho, x_tilde); };
  return p;
}

ForwardProblem make_superres_problem(const SuperResModel& m, const Image& y_lowres) {
  if (y_lowres.width() * m.factor != m.width || y_lowres.height() * m.factor != m.height) {
    throw std::invalid_argument("make_superres_problem: observation dimension mismatch");
  }
  ForwardProblem p;
  p.width = m.width;
  p.height = m.height;
  const double op_norm = max_abs_spectrum(m.h_spec);  // ||G|| <= ||H||
  p.gradient_bound =
      op_norm * (op_norm + l2_norm(y_lowres) / std::sqrt(static_cast<double>(y_lowres.size())));
  auto gty = std::make_shared<Image>(sr_adjoint(m, y_lowres));
  p.prox = [m, gty](double rho, const Image& x_tilde) {
    const Image b = *gty + rho * x_tilde;
    Spectrum gb = fft2(sr_forward(m, b));
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] /= m.h0_spec[i] + rho;
    const Image correction = sr_adjoint(m, ifft2_real(gb));
    return (1.0 / rho) * (b - correction);
  };
  return p;
}

}  // namespace pnp
