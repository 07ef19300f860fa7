#include "pnp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pnp/metrics.hpp"

namespace pnp {

PnPConfig::PnPConfig(double rho0_, double lambda_, double gamma_, double eta_, double tol_,
                     RhoRule rule_, int max_iter_)
    : rho0(rho0_), lambda(lambda_), gamma(gamma_), eta(eta_), tol(tol_), rule(rule_),
      max_iter(max_iter_) {
  validate();
}

void PnPConfig::validate() const {
  if (!(rho0 > 0.0)) throw std::invalid_argument("PnPConfig: rho0 must be > 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("PnPConfig: lambda must be > 0");
  if (rule != RhoRule::constant && !(gamma > 1.0)) {
    throw std::invalid_argument("PnPConfig: gamma must be > 1");
  }
  if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("PnPConfig: eta must be in [0,1)");
  if (!(tol > 0.0)) throw std::invalid_argument("PnPConfig: tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("PnPConfig: max_iter must be >= 1");
  if (!(rho_ceiling > 0.0)) throw std::invalid_argument("PnPConfig: rho_ceiling must be > 0");
}

double relative_residue(const PnPState& prev, const PnPState& next) {
  require_same_dims(prev.x, next.x, "relative_residue(x)");
  require_same_dims(prev.v, next.v, "relative_residue(v)");
  require_same_dims(prev.u, next.u, "relative_residue(u)");
  const double n = static_cast<double>(prev.x.size());
  return (l2_diff(next.x, prev.x) + l2_diff(next.v, prev.v) + l2_diff(next.u, prev.u)) /
         std::sqrt(n);
}

double update_rho(const PnPConfig& cfg, double rho, double delta_new, double delta_old) {
  switch (cfg.rule) {
    case RhoRule::monotone:
      return cfg.gamma * rho;
    case RhoRule::adaptive:
      // Increase on delta_new >= eta*delta_old (boundary included).
      return delta_new >= cfg.eta * delta_old ? cfg.gamma * rho : rho;
    case RhoRule::constant:
      return rho;
  }
  return rho;
}

bool check_stop(const PnPConfig& cfg, const TraceRow& row) {
  if (cfg.stop == StopRule::eps_max) {
    return std::max({row.eps1, row.eps2, row.eps3}) <= cfg.tol / 3.0;
  }
  return row.delta <= cfg.tol;
}

TraceFit analyze_trace(const SolverTrace& trace) {
  const std::size_t n = trace.rows.size();
  if (n < 5) throw std::invalid_argument("analyze_trace: need at least 5 rows");

  // Fit log(delta) = log(c) + k*log(rate) over the tail half.
  double sk = 0.0, sk2 = 0.0, sy = 0.0, sky = 0.0;
  std::size_t m = 0;
  for (std::size_t i = n / 2; i < n; ++i) {
    const TraceRow& row = trace.rows[i];
    if (row.delta <= 0.0) continue;
    const double k = static_cast<double>(row.k);
    const double y = std::log(row.delta);
    sk += k;
    sk2 += k * k;
    sy += y;
    sky += k * y;
    ++m;
  }

  TraceFit fit;
  const double final_delta = trace.rows.back().delta;
  if (m < 2) {
    // Tail already at (numerical) zero: rate 0 by convention.
    fit.delta_fit = 0.0;
    fit.c_fit = 0.0;
    fit.converged = final_delta <= trace.tol;
    return fit;
  }
  const double denom = static_cast<double>(m) * sk2 - sk * sk;
  const double slope = (static_cast<double>(m) * sky - sk * sy) / denom;
  const double intercept = (sy - slope * sk) / static_cast<double>(m);
  fit.delta_fit = std::exp(slope);
  fit.c_fit = std::exp(intercept);
  fit.converged = fit.delta_fit < 1.0 && final_delta <= trace.tol;
  return fit;
}

namespace {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void SolverTrace::write_csv(std::ostream& out) const {
  out << "k,rho,sigma,delta,eps1,eps2,eps3,psnr\n";
  for (const TraceRow& r : rows) {
    out << r.k << ',' << format_full(r.rho) << ',' << format_full(r.sigma) << ','
        << format_full(r.delta) << ',' << format_full(r.eps1) << ',' << format_full(r.eps2) << ','
        << format_full(r.eps3) << ',';
    if (r.psnr) out << format_full(*r.psnr);
    out << '\n';
  }
}

SolverTrace SolverTrace::read_csv(std::istream& in) {
  SolverTrace trace;
  std::string line;
  if (!std::getline(in, line) || line != "k,rho,sigma,delta,eps1,eps2,eps3,psnr") {
    throw std::runtime_error("SolverTrace: bad CSV header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    TraceRow row;
    auto next = [&](const char* name) {
      if (!std::getline(ss, field, ',')) {
        throw std::runtime_error(std::string("SolverTrace: missing field ") + name);
      }
      return field;
    };
    row.k = std::stoi(next("k"));
    row.rho = std::stod(next("rho"));
    row.sigma = std::stod(next("sigma"));
    row.delta = std::stod(next("delta"));
    row.eps1 = std::stod(next("eps1"));
    row.eps2 = std::stod(next("eps2"));
    row.eps3 = std::stod(next("eps3"));
    if (std::getline(ss, field, ',') && !field.empty()) row.psnr = std::stod(field);
    trace.rows.push_back(row);
  }
  return trace;
}

PnPResult pnp_admm(const ForwardProblem& problem, const Denoiser& denoiser, const PnPConfig& cfg,
                   const Image& init, const Image* ground_truth) {
  cfg.validate();
  if (init.width() != problem.width || init.height() != problem.height) {
    throw std::invalid_argument("pnp_admm: init dimensions do not match problem");
  }
  if (ground_truth) require_same_dims(init, *ground_truth, "pnp_admm(ground_truth)");

  const double n = static_cast<double>(init.size());
  const double sqrt_n = std::sqrt(n);

  Image x = init;
  Image v = init;
  Image u(init.width(), init.height(), 0.0);
  double rho = cfg.rho0;
  double delta_prev = 0.0;  // Delta_0 := 0, so the first adaptive step always increases rho

  PnPResult result;
  result.trace.tol = cfg.tol;

  for (int k = 0; k < cfg.max_iter; ++k) {
    const double sigma = std::sqrt(cfg.lambda / rho);
    Image x_next;
    Image v_next;
    if (rho > cfg.rho_ceiling) {
      // Both subproblems collapse to identities in the rho -> infinity limit.
      x_next = v - u;
      v_next = x_next + u;
    } else {
      Image x_tilde = v - u;
      try {
        x_next = problem.prox(rho, x_tilde);
      } catch (const std::exception& e) {
        throw std::runtime_error("pnp_admm: prox failed at iteration " + std::to_string(k) + ": " +
                                 e.what());
      }
      Image v_tilde = x_next + u;
      try {
        v_next = denoiser.denoise(sigma, v_tilde);
      } catch (const std::exception& e) {
        throw std::runtime_error("pnp_admm: denoiser failed at iteration " + std::to_string(k) +
                                 ": " + e.what());
      }
    }
    require_same_dims(x_next, init, "pnp_admm(prox output)");
    require_same_dims(v_next, init, "pnp_admm(denoiser output)");
    Image u_next = u + (x_next - v_next);
    if (!x_next.all_finite() || !v_next.all_finite() || !u_next.all_finite()) {
      throw std::runtime_error("pnp_admm: non-finite iterate at iteration " + std::to_string(k));
    }

    TraceRow row;
    row.k = k;
    row.rho = rho;
    row.sigma = sigma;
    row.eps1 = l2_diff(x_next, x) / sqrt_n;
    row.eps2 = l2_diff(v_next, v) / sqrt_n;
    row.eps3 = l2_diff(u_next, u) / sqrt_n;
    row.delta = row.eps1 + row.eps2 + row.eps3;
    if (ground_truth) row.psnr = psnr(clamp01(v_next), *ground_truth);
    result.trace.rows.push_back(row);

    x = std::move(x_next);
    v = std::move(v_next);
    u = std::move(u_next);

    if (check_stop(cfg, row)) break;
    rho = update_rho(cfg, rho, row.delta, delta_prev);
    delta_prev = row.delta;
  }

  result.iterations = static_cast<int>(result.trace.rows.size());
  result.final_delta = result.trace.rows.empty() ? 0.0 : result.trace.rows.back().delta;
  result.solution = clamp01(cfg.return_x ? x : v);
  result.x_final = std::move(x);
  result.v_final = std::move(v);
  result.u_final = std::move(u);
  return result;
}

RhoRule parse_rho_rule(const std::string& name) {
  if (name == "monotone") return RhoRule::monotone;
  if (name == "adaptive") return RhoRule::adaptive;
  if (name == "constant") return RhoRule::constant;
  throw std::invalid_argument("unknown rho rule '" + name + "' (monotone|adaptive|constant)");
}

std::string to_string(RhoRule rule) {
  switch (rule) {
    case RhoRule::monotone: return "monotone";
    case RhoRule::adaptive: return "adaptive";
    case RhoRule::constant: return "constant";
  }
  return "?";
}

}  // namespace pnp
