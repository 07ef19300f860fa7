#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pnp/image.hpp"
#include "pnp/solver.hpp"

namespace pnp {

/// Binary jot field of a quanta image sensor: K jots per pixel stored as a
/// contiguous block, bit of jot i of pixel p at index p*K + i (pixels
/// row-major).
struct QisBits {
  int width = 0;
  int height = 0;
  int jots_per_pixel = 0;
  std::vector<std::uint8_t> bits;
};

/// Per-pixel one/zero counts plus the sensor parameters the likelihood needs.
struct QisObservation {
  int width = 0;
  int height = 0;
  int jots_per_pixel = 0;  // K
  double alpha = 0.0;      // sensor gain; photon rate per jot is alpha*x/K
  std::vector<int> ones;   // K^1 per pixel
  std::vector<int> zeros;  // K^0 per pixel

  void validate() const;
};

/// Per jot, draw Z ~ Poisson(alpha*x_p/K) and emit the bit Z >= 1 (threshold
/// q = 1). Counter-based seeding per jot, so the bit stream is reproducible
/// and order-independent.
QisBits qis_simulate(const Image& x, int jots_per_pixel, double alpha, std::uint64_t seed);

QisObservation qis_counts(const QisBits& bits, double alpha);

/// Closed-form maximum-likelihood baseline: x = -(K/alpha) ln(K0/K), clamped
/// to [0,1]; fully saturated pixels (K0 = 0) map to 1.
Image qis_mle(const QisObservation& obs);

/// Residual of the per-pixel stationarity equation
///   K e^{-alpha x/K} (alpha + rho(x - xt)) = alpha k0 + rho K (x - xt).
double qis_stationarity_residual(int jots, int k0, double alpha, double rho, double x, double xt);

/// Per-pixel prox objective (alpha k0/K) x - k1 log(1 - e^{-alpha x/K})
/// + (rho/2)(x - xt)^2; +inf outside the domain when k1 > 0.
double qis_pixel_objective(int jots, int k0, double alpha, double rho, double x, double xt);

/// Unclamped per-pixel prox solution: xt - alpha/rho when k1 = 0, otherwise
/// the unique positive root of the stationarity equation (bracketing
/// bisection to 1e-12, then Newton polish on the residual).
double qis_solve_pixel(int jots, int k0, double alpha, double rho, double xt);

/// Offline root table indexed by (K0, xt grid) for one (alpha, K, rho);
/// queries interpolate linearly in xt. Entries are stored unclamped.
class QisLookup {
 public:
  QisLookup(double alpha, int jots, double rho, double grid_step);

  double alpha() const { return alpha_; }
  int jots() const { return jots_; }
  double rho() const { return rho_; }
  double grid_min() const { return grid_min_; }
  double grid_step() const { return step_; }
  int grid_points() const { return static_cast<int>(table_.empty() ? 0 : table_[0].size()); }

  double lookup(int k0, double xt) const;
  double stored(int k0, int idx) const { return table_[k0][idx]; }

 private:
  double alpha_;
  int jots_;
  double rho_;
  double grid_min_;
  double step_;
  std::vector<std::vector<double>> table_;
};

QisLookup qis_lookup_build(double alpha, int jots, double rho, double grid_step);

/// Separable prox of the quantized-Poisson likelihood, solved per pixel by
/// root finding (or table lookup when one is supplied); result clamped to
/// [0,1].
Image qis_prox(const QisObservation& obs, double rho, const Image& x_tilde,
               const QisLookup* lookup = nullptr);

/// ForwardProblem wrapper. With use_lookup, tables are rebuilt lazily
/// whenever rho changes and queried instead of solving per pixel; oversized
/// tables (tiny rho) fall back to direct root finding.
ForwardProblem make_qis_problem(const QisObservation& obs, bool use_lookup = false,
                                double lookup_step = 1e-3);

/// Bit-field storage as PGM of 0/255, width*K columns by height rows.
void write_qis_bits(const QisBits& bits, const std::string& path);
QisBits read_qis_bits(const std::string& path, int jots_per_pixel);

}  // namespace pnp
