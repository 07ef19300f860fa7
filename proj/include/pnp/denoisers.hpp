#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pnp/image.hpp"
#include "pnp/solver.hpp"

namespace pnp {

/// Non-local means parameters. sigma is the filter bandwidth (intensity
/// units); patch distances are summed squared differences over
/// (2*patch_radius+1)^2 windows, boundaries circular.
struct NlmParams {
  int patch_radius = 1;
  int window_radius = 2;
  double sigma = 0.1;

  void validate() const;
};

/// Nonnegative n x n weight matrix, sparse by search window, stored by rows.
class WeightMatrix {
 public:
  explicit WeightMatrix(int n) : rows_(n) {}

  int size() const { return static_cast<int>(rows_.size()); }
  void add(int row, int col, double w) { rows_[row].emplace_back(col, w); }

  const std::vector<std::pair<int, double>>& row(int i) const { return rows_[i]; }
  std::vector<std::pair<int, double>>& row(int i) { return rows_[i]; }

  std::vector<double> apply(const std::vector<double>& v) const;
  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;

 private:
  std::vector<std::vector<std::pair<int, double>>> rows_;
};

/// NLM weights W_ij = exp(-||patch_i - patch_j||^2 / (2 sigma^2)) over the
/// search window, wrapped circularly; each (i,j) appears once. Symmetric,
/// with unit self-weights on the diagonal.
WeightMatrix nlm_weights(const Image& img, const NlmParams& params);

/// Alternating row/column balancing until all row and column sums are within
/// tol of 1. Already-balanced input is returned unchanged. Throws on
/// non-convergence, reporting the worst residual.
WeightMatrix sinkhorn_knopp(const WeightMatrix& w, double tol = 1e-8, int max_sweeps = 10000);

Image denoise_identity(double sigma, const Image& img);

/// Sinkhorn-balanced non-local means: x_hat = W_tilde x with weights built
/// from img itself.
Image denoise_nlm(const NlmParams& params, const Image& img);

/// Median filter with a window x window footprint, circular boundaries.
Image denoise_median(int window, const Image& img);

Denoiser make_identity_denoiser();

/// Raw NLM plugged as a denoiser: the solver's sigma_k becomes the bandwidth.
Denoiser make_nlm_denoiser(int patch_radius, int window_radius);

/// Damped wrapper: D_sigma(x) = (1-t) x + t inner(x) with t = min(1, sigma^2 c0).
/// For inner mapping [0,1]^n into itself this satisfies
/// ||D_sigma(x)-x||^2/n <= sigma^2 c0, so bound_constant = c0 is certified.
Denoiser make_damped_denoiser(std::function<Image(const Image&)> inner, double c0);

/// Damped wrapper around NLM with frozen internal parameters.
Denoiser make_damped_nlm_denoiser(double c0, int patch_radius = 1, int window_radius = 2,
                                  double bandwidth = 0.1);

/// Median family: sigma below 0.02 maps to window 1 (identity), which keeps
/// the family bounded with constant 1/0.02^2.
Denoiser make_median_denoiser(int window);

/// Denoiser selection by name: identity | nlm:<patch>:<window> |
/// damped-nlm:<C0> | median:<w>.
Denoiser parse_denoiser_spec(const std::string& spec);

struct CertifyReport {
  double max_ratio = 0.0;  // max over pairs of (||D(x)-x||^2/n) / (sigma^2 C)
  bool pass = false;       // max_ratio <= 1
  int evaluated = 0;
  double worst_sigma = 0.0;
};

/// Empirical check of the bounded-denoiser inequality over a test set.
CertifyReport certify_bounded(const Denoiser& d, double c, const std::vector<Image>& inputs,
                              const std::vector<double>& sigmas);

/// kappa = ||D(x) - D(y)||^2 / ||x - y||^2 with image-dependent balanced
/// weights (W built separately from x and from y). Throws when x == y.
double expansiveness_kappa(const Image& x, const Image& y, const NlmParams& params);

/// Same ratio with one fixed weight matrix (built from x) applied to both
/// inputs; bounded by (1+tol)^2 since the balanced matrix is doubly
/// stochastic.
double fixed_weight_kappa(const Image& x, const Image& y, const NlmParams& params);

}  // namespace pnp
