#include "pnp/qis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "pnp/image_io.hpp"
#include "pnp/random.hpp"

namespace pnp {

void QisObservation::validate() const {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (ones.size() != n || zeros.size() != n) {
    throw std::invalid_argument("QisObservation: count length does not match dimensions");
  }
  if (jots_per_pixel < 1) throw std::invalid_argument("QisObservation: K must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("QisObservation: alpha must be > 0");
  for (std::size_t j = 0; j < n; ++j) {
    if (ones[j] < 0 || zeros[j] < 0 || ones[j] + zeros[j] != jots_per_pixel) {
      throw std::invalid_argument("QisObservation: counts at pixel " + std::to_string(j) +
                                  " do not sum to K");
    }
  }
}

QisBits qis_simulate(const Image& x, int jots_per_pixel, double alpha, std::uint64_t seed) {
  if (jots_per_pixel < 1) throw std::invalid_argument("qis_simulate: K must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("qis_simulate: alpha must be > 0");
  QisBits out;
  out.width = x.width();
  out.height = x.height();
  out.jots_per_pixel = jots_per_pixel;
  out.bits.resize(x.size() * static_cast<std::size_t>(jots_per_pixel));
  for (std::size_t p = 0; p < x.size(); ++p) {
    const double rate = alpha * x[p] / jots_per_pixel;
    if (rate < 0.0) throw std::invalid_argument("qis_simulate: negative intensity");
    for (int i = 0; i < jots_per_pixel; ++i) {
      const std::size_t jot = p * jots_per_pixel + i;
      out.bits[jot] = poisson_sample(rate, seed, jot) >= 1 ? 1 : 0;
    }
  }
  return out;
}

QisObservation qis_counts(const QisBits& bits, double alpha) {
  const std::size_t n = static_cast<std::size_t>(bits.width) * bits.height;
  if (bits.bits.size() != n * static_cast<std::size_t>(bits.jots_per_pixel)) {
    throw std::invalid_argument("qis_counts: bit field length does not match n*K");
  }
  QisObservation obs;
  obs.width = bits.width;
  obs.height = bits.height;
  obs.jots_per_pixel = bits.jots_per_pixel;
  obs.alpha = alpha;
  obs.ones.assign(n, 0);
  obs.zeros.assign(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    int k1 = 0;
    for (int i = 0; i < bits.jots_per_pixel; ++i) {
      k1 += bits.bits[p * bits.jots_per_pixel + i] ? 1 : 0;
    }
    obs.ones[p] = k1;
    obs.zeros[p] = bits.jots_per_pixel - k1;
  }
  obs.validate();
  return obs;
}

Image qis_mle(const QisObservation& obs) {
  obs.validate();
  const double k = obs.jots_per_pixel;
  Image out(obs.width, obs.height);
  for (std::size_t p = 0; p < out.size(); ++p) {
    if (obs.zeros[p] == 0) {
      out[p] = 1.0;  // saturated
    } else {
      out[p] = std::clamp(-(k / obs.alpha) * std::log(obs.zeros[p] / k), 0.0, 1.0);
    }
  }
  return out;
}

double qis_stationarity_residual(int jots, int k0, double alpha, double rho, double x, double xt) {
  const double k = jots;
  return k * std::exp(-alpha * x / k) * (alpha + rho * (x - xt)) -
         (alpha * k0 + rho * k * (x - xt));
}

double qis_pixel_objective(int jots, int k0, double alpha, double rho, double x, double xt) {
  const double k = jots;
  const int k1 = jots - k0;
  double obj = (alpha * k0 / k) * x + 0.5 * rho * (x - xt) * (x - xt);
  if (k1 > 0) {
    if (x <= 0.0) return std::numeric_limits<double>::infinity();
    obj -= k1 * std::log(-std::expm1(-alpha * x / k));
  }
  return obj;
}

namespace {

// Derivative of the per-pixel objective; strictly increasing from -inf (at
// x -> 0+) to +inf when k1 > 0, so its root brackets cleanly.
double objective_slope(int jots, int k0, double alpha, double rho, double x, double xt) {
  const double k = jots;
  const int k1 = jots - k0;
  const double c = alpha / k;
  return alpha * k0 / k - (alpha * k1 / k) / std::expm1(c * x) + rho * (x - xt);
}

}  // namespace

double qis_solve_pixel(int jots, int k0, double alpha, double rho, double xt) {
  if (!(rho > 0.0)) throw std::invalid_argument("qis_solve_pixel: rho must be > 0");
  const int k1 = jots - k0;
  if (k1 == 0) return xt - alpha / rho;

  double lo = std::max(1e-12, xt - alpha / rho - 1.0);
  double hi = std::max(1.0, xt) + alpha / rho + 1.0;
  // The slope is monotone; widen until it actually brackets.
  int guard = 0;
  while (objective_slope(jots, k0, alpha, rho, lo, xt) > 0.0) {
    lo *= 0.5;
    if (++guard > 200) {
      throw std::runtime_error("qis_solve_pixel: no lower bracket (k0=" + std::to_string(k0) + ")");
    }
  }
  guard = 0;
  while (objective_slope(jots, k0, alpha, rho, hi, xt) < 0.0) {
    hi = 2.0 * hi + 1.0;
    if (++guard > 200) {
      throw std::runtime_error("qis_solve_pixel: no upper bracket (k0=" + std::to_string(k0) + ")");
    }
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (objective_slope(jots, k0, alpha, rho, mid, xt) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);

  // Two Newton steps on the stationarity residual itself.
  const double k = jots;
  const double c = alpha / k;
  for (int step = 0; step < 2; ++step) {
    const double r = qis_stationarity_residual(jots, k0, alpha, rho, x, xt);
    const double e = std::exp(-c * x);
    const double dr = k * e * (rho - c * (alpha + rho * (x - xt))) - rho * k;
    if (dr == 0.0) break;
    const double next = x - r / dr;
    if (!std::isfinite(next) || next <= 0.0) break;
    x = next;
  }
  return x;
}

QisLookup::QisLookup(double alpha, int jots, double rho, double grid_step)
    : alpha_(alpha), jots_(jots), rho_(rho), step_(grid_step) {
  if (!(grid_step > 0.0)) throw std::invalid_argument("QisLookup: grid step must be > 0");
  if (!(rho > 0.0)) throw std::invalid_argument("QisLookup: rho must be > 0");
  if (jots < 1) throw std::invalid_argument("QisLookup: K must be >= 1");
  grid_min_ = -alpha / rho - 1.0;
  const double grid_max = 2.0;
  const double span = grid_max - grid_min_;
  const double points = std::floor(span / grid_step) + 2.0;
  if (points > 2e7) {
    throw std::invalid_argument("QisLookup: table too large (" + std::to_string(points) +
                                " grid points); use direct root finding at this rho");
  }
  const int m = static_cast<int>(points);
  table_.assign(jots + 1, std::vector<double>(m));
  for (int k0 = 0; k0 <= jots; ++k0) {
    for (int i = 0; i < m; ++i) {
      const double xt = grid_min_ + i * grid_step;
      const double root = qis_solve_pixel(jots, k0, alpha, rho, xt);
      if (k0 < jots) {
        // Positive roots keep the residual check well-scaled; the k0 = K
        // column is the exact closed form xt - alpha/rho by construction.
        const double res = qis_stationarity_residual(jots, k0, alpha, rho, root, xt);
        if (std::abs(res) > 1e-9) {
          throw std::runtime_error("QisLookup: stored root residual " + std::to_string(res) +
                                   " at k0=" + std::to_string(k0));
        }
      }
      table_[k0][i] = root;
    }
  }
}

double QisLookup::lookup(int k0, double xt) const {
  if (k0 < 0 || k0 > jots_) throw std::invalid_argument("QisLookup: k0 out of range");
  const auto& column = table_[k0];
  const int m = static_cast<int>(column.size());
  double pos = (xt - grid_min_) / step_;
  pos = std::clamp(pos, 0.0, static_cast<double>(m - 1));
  const int i = std::min(static_cast<int>(pos), m - 2);
  const double frac = pos - i;
  return (1.0 - frac) * column[i] + frac * column[i + 1];
}

QisLookup qis_lookup_build(double alpha, int jots, double rho, double grid_step) {
  return QisLookup(alpha, jots, rho, grid_step);
}

Image qis_prox(const QisObservation& obs, double rho, const Image& x_tilde,
               const QisLookup* lookup) {
  if (!(rho > 0.0)) throw std::invalid_argument("qis_prox: rho must be > 0");
  if (x_tilde.width() != obs.width || x_tilde.height() != obs.height) {
    throw std::invalid_argument("qis_prox: dimension mismatch");
  }
  if (lookup && (lookup->rho() != rho || lookup->alpha() != obs.alpha ||
                 lookup->jots() != obs.jots_per_pixel)) {
    throw std::invalid_argument("qis_prox: lookup built for different (alpha, K, rho)");
  }
  Image out(obs.width, obs.height);
  for (std::size_t p = 0; p < out.size(); ++p) {
    double x;
    if (lookup) {
      x = lookup->lookup(obs.zeros[p], x_tilde[p]);
    } else {
      try {
        x = qis_solve_pixel(obs.jots_per_pixel, obs.zeros[p], obs.alpha, rho, x_tilde[p]);
      } catch (const std::exception& e) {
        throw std::runtime_error("qis_prox: pixel " + std::to_string(p) + ": " + e.what());
      }
    }
    out[p] = std::clamp(x, 0.0, 1.0);
  }
  return out;
}

ForwardProblem make_qis_problem(const QisObservation& obs, bool use_lookup, double lookup_step) {
  obs.validate();
  ForwardProblem p;
  p.width = obs.width;
  p.height = obs.height;
  // grad f is unbounded as x -> 0 whenever some K^1 > 0, so no L is declared.

  struct LookupCache {
    std::unique_ptr<QisLookup> table;
  };
  auto cache = std::make_shared<LookupCache>();
  p.prox = [obs, use_lookup, lookup_step, cache](double rho, const Image& x_tilde) {
    if (use_lookup) {
      if (!cache->table || cache->table->rho() != rho) {
        const double span = 3.0 + obs.alpha / rho;
        if (span / lookup_step <= 2e6) {
          cache->table = std::make_unique<QisLookup>(obs.alpha, obs.jots_per_pixel, rho, lookup_step);
        } else {
          cache->table.reset();  // rho too small for a sane table
        }
      }
      if (cache->table) return qis_prox(obs, rho, x_tilde, cache->table.get());
    }
    return qis_prox(obs, rho, x_tilde);
  };
  return p;
}

void write_qis_bits(const QisBits& bits, const std::string& path) {
  Image img(bits.width * bits.jots_per_pixel, bits.height);
  for (int y = 0; y < bits.height; ++y) {
    for (int x = 0; x < bits.width; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * bits.width + x;
      for (int i = 0; i < bits.jots_per_pixel; ++i) {
        img(x * bits.jots_per_pixel + i, y) = bits.bits[p * bits.jots_per_pixel + i] ? 1.0 : 0.0;
      }
    }
  }
  write_pgm(img, path);
}

QisBits read_qis_bits(const std::string& path, int jots_per_pixel) {
  const Image img = read_pgm(path);
  if (jots_per_pixel < 1 || img.width() % jots_per_pixel != 0) {
    throw std::invalid_argument(path + ": width not divisible by K");
  }
  QisBits bits;
  bits.width = img.width() / jots_per_pixel;
  bits.height = img.height();
  bits.jots_per_pixel = jots_per_pixel;
  bits.bits.resize(img.size());
  for (int y = 0; y < bits.height; ++y) {
    for (int x = 0; x < bits.width; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * bits.width + x;
      for (int i = 0; i < jots_per_pixel; ++i) {
        const double v = img(x * jots_per_pixel + i, y);
        if (v != 0.0 && v != 1.0) throw std::runtime_error(path + ": non-binary jot value");
        bits.bits[p * jots_per_pixel + i] = v == 1.0 ? 1 : 0;
      }
    }
  }
  return bits;
}

}  // namespace pnp
