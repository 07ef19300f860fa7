#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pnp/image.hpp"

namespace pnp {

enum class RhoRule { monotone, adaptive, constant };
enum class StopRule { delta, eps_max };

/// Scalar knobs of the continuation scheme. Construction validates
/// rho0 > 0, gamma > 1, eta in [0,1), tol > 0, max_iter >= 1.
/// rule == constant reproduces the original fixed-rho method (gamma unused).
struct PnPConfig {
  double rho0 = 1e-4;
  double lambda = 1e-4;
  double gamma = 2.0;
  double eta = 0.5;
  double tol = 1e-3;
  RhoRule rule = RhoRule::adaptive;
  int max_iter = 100;

  StopRule stop = StopRule::delta;
  bool return_x = false;       // return x instead of v
  double rho_ceiling = 1e12;   // beyond this, prox -> identity and denoiser -> identity

  PnPConfig() = default;
  PnPConfig(double rho0, double lambda, double gamma, double eta, double tol, RhoRule rule,
            int max_iter);
  void validate() const;
};

/// Solver iterate: the triplet (x, v, u) plus the penalty in effect.
/// u is the scaled multiplier (u/rho in the unscaled formulation).
struct PnPState {
  Image x;
  Image v;
  Image u;
  double rho = 0.0;
  int k = 0;
};

struct TraceRow {
  int k = 0;          // iteration index, 0-based
  double rho = 0.0;   // rho_k in effect while producing iterate k+1
  double sigma = 0.0; // sqrt(lambda/rho_k)
  double delta = 0.0; // Delta_{k+1} = eps1 + eps2 + eps3
  double eps1 = 0.0;  // ||x_{k+1}-x_k||_2 / sqrt(n)
  double eps2 = 0.0;  // ||v_{k+1}-v_k||_2 / sqrt(n)
  double eps3 = 0.0;  // ||u_{k+1}-u_k||_2 / sqrt(n)
  std::optional<double> psnr;
};

struct SolverTrace {
  std::vector<TraceRow> rows;
  double tol = 0.0;

  /// CSV with header k,rho,sigma,delta,eps1,eps2,eps3,psnr; full double
  /// precision so traces round-trip bit-exactly.
  void write_csv(std::ostream& out) const;
  static SolverTrace read_csv(std::istream& in);
};

/// Forward model seen by the solver: its exact proximal operator
/// prox(rho, xt) = argmin f(x) + (rho/2)||x - xt||^2, plus metadata.
struct ForwardProblem {
  std::function<Image(double rho, const Image& x_tilde)> prox;
  int width = 0;
  int height = 0;
  std::optional<double> gradient_bound;  // L with ||grad f||_2/sqrt(n) <= L, when known
};

/// sigma-parameterized denoiser. bound_constant, when set, certifies
/// ||D_sigma(x) - x||^2 / n <= sigma^2 * C for all inputs.
struct Denoiser {
  std::function<Image(double sigma, const Image& noisy)> denoise;
  std::optional<double> bound_constant;
};

struct PnPResult {
  Image solution;  // clamped v (or x when cfg.return_x), the restored image
  SolverTrace trace;
  int iterations = 0;
  double final_delta = 0.0;
  Image x_final;
  Image v_final;
  Image u_final;
};

/// Relative residue between consecutive iterates:
/// (||dx||_2 + ||dv||_2 + ||du||_2) / sqrt(n).
double relative_residue(const PnPState& prev, const PnPState& next);

/// Penalty continuation step. monotone: gamma*rho always; adaptive:
/// gamma*rho iff delta_new >= eta*delta_old; constant: rho.
double update_rho(const PnPConfig& cfg, double rho, double delta_new, double delta_old);

/// Stopping test on one trace row: delta <= tol, or, under StopRule::eps_max,
/// max{eps1, eps2, eps3} <= tol/3. Both comparisons inclusive.
bool check_stop(const PnPConfig& cfg, const TraceRow& row);

struct TraceFit {
  double delta_fit = 0.0;  // fitted geometric rate of delta_k
  double c_fit = 0.0;      // fitted envelope constant (delta_k <~ c * rate^k)
  bool converged = false;
};

/// Least-squares fit of log(delta_k) vs k over the tail half of the trace.
/// Needs at least 5 rows.
TraceFit analyze_trace(const SolverTrace& trace);

/// Plug-and-Play ADMM with continuation. Starts from v = x = init, u = 0,
/// runs until delta <= tol or max_iter, and returns the clamped v iterate
/// together with the full trace. ground_truth, when given, fills the trace
/// PSNR column.
PnPResult pnp_admm(const ForwardProblem& problem, const Denoiser& denoiser, const PnPConfig& cfg,
                   const Image& init, const Image* ground_truth = nullptr);

RhoRule parse_rho_rule(const std::string& name);
std::string to_string(RhoRule rule);

}  // namespace pnp
