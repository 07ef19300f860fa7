#include "pnp/denoisers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pnp {

void NlmParams::validate() const {
  if (patch_radius < 0 || window_radius < 0) {
    throw std::invalid_argument("NlmParams: radii must be >= 0");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("NlmParams: sigma must be > 0");
}

std::vector<double> WeightMatrix::apply(const std::vector<double>& v) const {
  std::vector<double> out(rows_.size(), 0.0);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    double acc = 0.0;
    for (const auto& [j, w] : rows_[i]) acc += w * v[j];
    out[i] = acc;
  }
  return out;
}

std::vector<double> WeightMatrix::row_sums() const {
  std::vector<double> sums(rows_.size(), 0.0);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (const auto& [j, w] : rows_[i]) sums[i] += w;
  }
  return sums;
}

std::vector<double> WeightMatrix::col_sums() const {
  std::vector<double> sums(rows_.size(), 0.0);
  for (const auto& row : rows_) {
    for (const auto& [j, w] : row) sums[j] += w;
  }
  return sums;
}

namespace {

inline int wrap(int v, int n) { return ((v % n) + n) % n; }

// Offset range covering each wrapped neighbor exactly once, even when the
// window exceeds the image period.
std::pair<int, int> offset_range(int radius, int extent) {
  if (2 * radius + 1 >= extent) {
    const int lo = -(extent - 1) / 2;
    return {lo, lo + extent - 1};
  }
  return {-radius, radius};
}

double patch_ssd(const Image& img, int x0, int y0, int x1, int y1, int pr) {
  const int w = img.width();
  const int h = img.height();
  double acc = 0.0;
  for (int py = -pr; py <= pr; ++py) {
    for (int px = -pr; px <= pr; ++px) {
      const double d = img(wrap(x0 + px, w), wrap(y0 + py, h)) - img(wrap(x1 + px, w), wrap(y1 + py, h));
      acc += d * d;
    }
  }
  return acc;
}

}  // namespace

WeightMatrix nlm_weights(const Image& img, const NlmParams& params) {
  params.validate();
  const int w = img.width();
  const int h = img.height();
  const int n = w * h;
  const auto [dx_lo, dx_hi] = offset_range(params.window_radius, w);
  const auto [dy_lo, dy_hi] = offset_range(params.window_radius, h);
  const double inv_two_sigma2 = 1.0 / (2.0 * params.sigma * params.sigma);

  WeightMatrix weights(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int i = y * w + x;
      for (int dy = dy_lo; dy <= dy_hi; ++dy) {
        for (int dx = dx_lo; dx <= dx_hi; ++dx) {
          const int xj = wrap(x + dx, w);
          const int yj = wrap(y + dy, h);
          const int j = yj * w + xj;
          const double ssd = patch_ssd(img, x, y, xj, yj, params.patch_radius);
          weights.add(i, j, std::exp(-ssd * inv_two_sigma2));
        }
      }
    }
  }
  return weights;
}

namespace {

// Balancing state: scalings r, c applied as diag(r) W diag(c).
struct Scaling {
  std::vector<double> r, c;
};

double scaled_sums(const WeightMatrix& w, const Scaling& s, std::vector<double>& row,
                   std::vector<double>& col) {
  const int n = w.size();
  row.assign(n, 0.0);
  col.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (const auto& [j, wij] : w.row(i)) {
      const double v = s.r[i] * wij * s.c[j];
      row[i] += v;
      col[j] += v;
    }
  }
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(row[i] - 1.0));
    worst = std::max(worst, std::abs(col[i] - 1.0));
  }
  return worst;
}

void alternating_sweep(const WeightMatrix& w, Scaling& s) {
  const int n = w.size();
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (const auto& [j, wij] : w.row(i)) row_sum += wij * s.c[j];
    if (row_sum <= 0.0) throw std::runtime_error("sinkhorn_knopp: zero row " + std::to_string(i));
    s.r[i] = 1.0 / row_sum;
  }
  std::vector<double> col(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (const auto& [j, wij] : w.row(i)) col[j] += s.r[i] * wij;
  }
  for (int j = 0; j < n; ++j) {
    if (col[j] <= 0.0) throw std::runtime_error("sinkhorn_knopp: zero column " + std::to_string(j));
    s.c[j] = 1.0 / col[j];
  }
}

// One damped Newton step on the scaling potentials (u, v) = (log r, log c).
// The balancing conditions are the gradient of the convex potential
// sum_ij W_ij e^{u_i + v_j} - sum u - sum v; its Hessian-vector product only
// needs the scaled matrix, so conjugate gradients keep everything sparse.
// Returns false when the step had to be rejected.
bool newton_step(const WeightMatrix& w, Scaling& s, double& worst) {
  const int n = w.size();
  std::vector<double> row, col;
  scaled_sums(w, s, row, col);

  std::vector<double> g(2 * n);
  for (int i = 0; i < n; ++i) g[i] = row[i] - 1.0;
  for (int j = 0; j < n; ++j) g[n + j] = col[j] - 1.0;

  auto hess_apply = [&](const std::vector<double>& p, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      for (const auto& [j, wij] : w.row(i)) {
        const double m = s.r[i] * wij * s.c[j];
        out[i] += m * p[n + j];
        out[n + j] += m * p[i];
      }
    }
    for (int i = 0; i < n; ++i) out[i] += (row[i] + 1e-12) * p[i];
    for (int j = 0; j < n; ++j) out[n + j] += (col[j] + 1e-12) * p[n + j];
  };

  // CG for H d = -g (consistent: the scale-invariance null direction is
  // orthogonal to the gradient).
  std::vector<double> d(2 * n, 0.0), res(2 * n), p(2 * n), hp(2 * n);
  for (int i = 0; i < 2 * n; ++i) res[i] = -g[i];
  p = res;
  double rr = 0.0;
  for (double v : res) rr += v * v;
  const double rr0 = rr;
  for (int it = 0; it < 4 * n && rr > 1e-16 * rr0; ++it) {
    hess_apply(p, hp);
    double php = 0.0;
    for (int i = 0; i < 2 * n; ++i) php += p[i] * hp[i];
    if (php <= 0.0) break;
    const double step = rr / php;
    for (int i = 0; i < 2 * n; ++i) {
      d[i] += step * p[i];
      res[i] -= step * hp[i];
    }
    double rr_next = 0.0;
    for (double v : res) rr_next += v * v;
    const double beta = rr_next / rr;
    rr = rr_next;
    for (int i = 0; i < 2 * n; ++i) p[i] = res[i] + beta * p[i];
  }

  const Scaling saved = s;
  for (double damp = 1.0; damp >= 0.125; damp *= 0.5) {
    bool finite = true;
    for (int i = 0; i < n && finite; ++i) {
      s.r[i] = saved.r[i] * std::exp(damp * d[i]);
      s.c[i] = saved.c[i] * std::exp(damp * d[n + i]);
      finite = std::isfinite(s.r[i]) && std::isfinite(s.c[i]) && s.r[i] > 0.0 && s.c[i] > 0.0;
    }
    if (finite) {
      const double next = scaled_sums(w, s, row, col);
      if (next < worst) {
        worst = next;
        return true;
      }
    }
  }
  s = saved;
  return false;
}

}  // namespace

WeightMatrix sinkhorn_knopp(const WeightMatrix& w, double tol, int max_sweeps) {
  const int n = w.size();
  Scaling s{std::vector<double>(n, 1.0), std::vector<double>(n, 1.0)};
  std::vector<double> row, col;

  // Alternating normalization, the workhorse. Weakly coupled weight graphs
  // contract slowly once the residual is small, so after a warm-up the
  // remaining work is handed to Newton steps toward the same fixed point.
  int work = 0;
  double worst = scaled_sums(w, s, row, col);
  double benchmark = worst;
  bool use_newton = false;
  while (worst > tol) {
    if (work >= max_sweeps) {
      throw std::runtime_error("sinkhorn_knopp: no convergence after " + std::to_string(max_sweeps) +
                               " sweeps, worst row/col residual " + std::to_string(worst));
    }
    if (use_newton) {
      if (!newton_step(w, s, worst)) {
        use_newton = false;  // fall back to plain sweeps for a while
        benchmark = worst;
      }
      ++work;
      continue;
    }
    for (int i = 0; i < 32 && work < max_sweeps; ++i, ++work) alternating_sweep(w, s);
    worst = scaled_sums(w, s, row, col);
    if (worst > 0.5 * benchmark) use_newton = true;  // stagnating
    benchmark = worst;
  }

  WeightMatrix out(n);
  for (int i = 0; i < n; ++i) {
    for (const auto& [j, wij] : w.row(i)) out.add(i, j, s.r[i] * wij * s.c[j]);
  }
  return out;
}

Image denoise_identity(double /*sigma*/, const Image& img) { return img; }

Image denoise_nlm(const NlmParams& params, const Image& img) {
  const WeightMatrix balanced = sinkhorn_knopp(nlm_weights(img, params));
  return Image(img.width(), img.height(), balanced.apply(img.data()));
}

Image denoise_median(int window, const Image& img) {
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("denoise_median: window must be odd and >= 1");
  }
  if (window == 1) return img;
  const int r = window / 2;
  const int w = img.width();
  const int h = img.height();
  Image out(w, h);
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(window) * window);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      vals.clear();
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          vals.push_back(img(wrap(x + dx, w), wrap(y + dy, h)));
        }
      }
      auto mid = vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2);
      std::nth_element(vals.begin(), mid, vals.end());
      out(x, y) = *mid;
    }
  }
  return out;
}

Denoiser make_identity_denoiser() {
  Denoiser d;
  d.denoise = [](double sigma, const Image& img) { return denoise_identity(sigma, img); };
  d.bound_constant = 0.0;
  return d;
}

Denoiser make_nlm_denoiser(int patch_radius, int window_radius) {
  Denoiser d;
  d.denoise = [patch_radius, window_radius](double sigma, const Image& img) {
    if (sigma <= 0.0) return img;
    return denoise_nlm(NlmParams{patch_radius, window_radius, sigma}, img);
  };
  return d;  // no certified bound: raw NLM is not a bounded family
}

Denoiser make_damped_denoiser(std::function<Image(const Image&)> inner, double c0) {
  if (!(c0 > 0.0)) throw std::invalid_argument("make_damped_denoiser: c0 must be > 0");
  Denoiser d;
  d.denoise = [inner = std::move(inner), c0](double sigma, const Image& img) {
    const double t = std::min(1.0, sigma * sigma * c0);
    if (t == 0.0) return img;
    Image smoothed = inner(img);
    require_same_dims(smoothed, img, "damped denoiser inner");
    if (t == 1.0) return smoothed;
    return (1.0 - t) * img + t * smoothed;
  };
  d.bound_constant = c0;
  return d;
}

Denoiser make_damped_nlm_denoiser(double c0, int patch_radius, int window_radius, double bandwidth) {
  NlmParams params{patch_radius, window_radius, bandwidth};
  params.validate();
  return make_damped_denoiser([params](const Image& img) { return denoise_nlm(params, img); }, c0);
}

Denoiser make_median_denoiser(int window) {
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("make_median_denoiser: window must be odd and >= 1");
  }
  Denoiser d;
  d.denoise = [window](double sigma, const Image& img) {
    return sigma < 0.02 ? img : denoise_median(window, img);
  };
  d.bound_constant = 1.0 / (0.02 * 0.02);
  return d;
}

Denoiser parse_denoiser_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = spec.find(':', start);
    parts.push_back(spec.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  try {
    if (parts[0] == "identity" && parts.size() == 1) return make_identity_denoiser();
    if (parts[0] == "nlm" && parts.size() == 3) {
      return make_nlm_denoiser(std::stoi(parts[1]), std::stoi(parts[2]));
    }
    if (parts[0] == "damped-nlm" && parts.size() == 2) {
      return make_damped_nlm_denoiser(std::stod(parts[1]));
    }
    if (parts[0] == "median" && parts.size() == 2) {
      return make_median_denoiser(std::stoi(parts[1]));
    }
  } catch (const std::logic_error&) {
    throw std::invalid_argument("bad denoiser spec '" + spec + "'");
  }
  throw std::invalid_argument("unknown denoiser spec '" + spec +
                              "' (identity | nlm:<patch>:<window> | damped-nlm:<C0> | median:<w>)");
}

CertifyReport certify_bounded(const Denoiser& d, double c, const std::vector<Image>& inputs,
                              const std::vector<double>& sigmas) {
  if (inputs.empty() || sigmas.empty()) {
    throw std::invalid_argument("certify_bounded: empty test set");
  }
  CertifyReport report;
  for (const Image& x : inputs) {
    const double n = static_cast<double>(x.size());
    for (double sigma : sigmas) {
      const Image dx = d.denoise(sigma, x);
      const double num = l2_diff(dx, x) * l2_diff(dx, x) / n;
      const double den = sigma * sigma * c;
      double ratio;
      if (num == 0.0) {
        ratio = 0.0;
      } else if (den == 0.0) {
        ratio = std::numeric_limits<double>::infinity();
      } else {
        ratio = num / den;
      }
      ++report.evaluated;
      if (ratio > report.max_ratio) {
        report.max_ratio = ratio;
        report.worst_sigma = sigma;
      }
    }
  }
  report.pass = report.max_ratio <= 1.0;
  return report;
}

namespace {

// Tight balancing so the doubly stochastic operator-norm bound holds to 1e-8.
constexpr double kKappaSinkhornTol = 1e-10;
constexpr int kKappaSinkhornSweeps = 100000;

}  // namespace

double expansiveness_kappa(const Image& x, const Image& y, const NlmParams& params) {
  require_same_dims(x, y, "expansiveness_kappa");
  const double denom = l2_diff(x, y);
  if (denom == 0.0) throw std::invalid_argument("expansiveness_kappa: x == y, ratio undefined");

  const WeightMatrix wx = sinkhorn_knopp(nlm_weights(x, params), kKappaSinkhornTol, kKappaSinkhornSweeps);
  const WeightMatrix wy = sinkhorn_knopp(nlm_weights(y, params), kKappaSinkhornTol, kKappaSinkhornSweeps);
  const std::vector<double> dx = wx.apply(x.data());
  const std::vector<double> dy = wy.apply(y.data());
  double num = 0.0;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const double d = dx[i] - dy[i];
    num += d * d;
  }
  return num / (denom * denom);
}

double fixed_weight_kappa(const Image& x, const Image& y, const NlmParams& params) {
  require_same_dims(x, y, "fixed_weight_kappa");
  const double denom = l2_diff(x, y);
  if (denom == 0.0) throw std::invalid_argument("fixed_weight_kappa: x == y, ratio undefined");

  const WeightMatrix wx = sinkhorn_knopp(nlm_weights(x, params), kKappaSinkhornTol, kKappaSinkhornSweeps);
  const std::vector<double> dx = wx.apply(x.data());
  const std::vector<double> dy = wx.apply(y.data());
  double num = 0.0;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const double d = dx[i] - dy[i];
    num += d * d;
  }
  return num / (denom * denom);
}

}  // namespace pnp
