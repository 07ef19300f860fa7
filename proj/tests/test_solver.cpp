#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracle.hpp"
#include "pnp/denoisers.hpp"
#include "pnp/forward.hpp"
#include "pnp/metrics.hpp"
#include "pnp/solver.hpp"

using pnp::Image;
using pnp::PnPConfig;
using pnp::PnPState;
using pnp::RhoRule;

TEST_CASE("PnPConfig validates its ranges at construction") {
  CHECK_NOTHROW(PnPConfig(1e-5, 1e-4, 2.0, 0.5, 1e-3, RhoRule::monotone, 100));
  CHECK_THROWS_AS(PnPConfig(0.0, 1e-4, 2.0, 0.5, 1e-3, RhoRule::monotone, 100), std::invalid_argument);
  CHECK_THROWS_AS(PnPConfig(1e-5, 0.0, 2.0, 0.5, 1e-3, RhoRule::monotone, 100), std::invalid_argument);
  CHECK_THROWS_AS(PnPConfig(1e-5, 1e-4, 1.0, 0.5, 1e-3, RhoRule::monotone, 100), std::invalid_argument);
  CHECK_THROWS_AS(PnPConfig(1e-5, 1e-4, 2.0, 1.0, 1e-3, RhoRule::monotone, 100), std::invalid_argument);
  CHECK_THROWS_AS(PnPConfig(1e-5, 1e-4, 2.0, -0.1, 1e-3, RhoRule::monotone, 100), std::invalid_argument);
  CHECK_THROWS_AS(PnPConfig(1e-5, 1e-4, 2.0, 0.5, 0.0, RhoRule::monotone, 100), std::invalid_argument);
  CHECK_THROWS_AS(PnPConfig(1e-5, 1e-4, 2.0, 0.5, 1e-3, RhoRule::monotone, 0), std::invalid_argument);
  // The constant rule reproduces the original fixed-rho method; gamma unused.
  CHECK_NOTHROW(PnPConfig(1e-5, 1e-4, 1.0, 0.5, 1e-3, RhoRule::constant, 100));
}

TEST_CASE("relative_residue") {
  const int w = 5, h = 4;
  PnPState a;
  a.x = oracle::random_image(w, h, 1);
  a.v = oracle::random_image(w, h, 2);
  a.u = oracle::random_image(w, h, 3);
  CHECK(pnp::relative_residue(a, a) == 0.0);

  // One pixel of x differs by d.
  PnPState b = a;
  const double d = 0.37;
  b.x(2, 1) += d;
  CHECK(pnp::relative_residue(a, b) == doctest::Approx(d / std::sqrt(20.0)).epsilon(1e-14));

  PnPState c = a;
  c.x = oracle::random_image(w, h, 4);
  c.v = oracle::random_image(w, h, 5);
  c.u = oracle::random_image(w, h, 6);
  const double want = (pnp::l2_diff(c.x, a.x) + pnp::l2_diff(c.v, a.v) + pnp::l2_diff(c.u, a.u)) /
                      std::sqrt(20.0);
  CHECK(pnp::relative_residue(a, c) == doctest::Approx(want).epsilon(1e-12));

  PnPState bad = a;
  bad.x = Image(3, 3, 0.0);
  CHECK_THROWS_AS(pnp::relative_residue(a, bad), std::invalid_argument);
}

TEST_CASE("update_rho rules") {
  PnPConfig cfg;
  cfg.gamma = 2.5;
  cfg.eta = 0.5;

  cfg.rule = RhoRule::monotone;
  CHECK(pnp::update_rho(cfg, 1e-5, 1.0, 2.0) == doctest::Approx(2.5e-5).epsilon(1e-15));

  cfg.rule = RhoRule::adaptive;
  CHECK(pnp::update_rho(cfg, 1.0, 0.4, 1.0) == 1.0);                       // 0.4 < 0.5
  CHECK(pnp::update_rho(cfg, 1.0, 0.5, 1.0) == doctest::Approx(2.5));     // boundary: >= triggers
  CHECK(pnp::update_rho(cfg, 1.0, 0.7, 1.0) == doctest::Approx(2.5));

  cfg.rule = RhoRule::constant;
  CHECK(pnp::update_rho(cfg, 1.0, 9.0, 0.1) == 1.0);
}

TEST_CASE("check_stop") {
  PnPConfig cfg;
  cfg.tol = 1e-3;
  pnp::TraceRow row;

  row.delta = 9e-4;
  CHECK(pnp::check_stop(cfg, row));
  row.delta = 1e-3;
  CHECK(pnp::check_stop(cfg, row));  // inclusive boundary
  row.delta = 1.1e-3;
  CHECK_FALSE(pnp::check_stop(cfg, row));

  cfg.stop = pnp::StopRule::eps_max;
  row.eps1 = 3e-4;
  row.eps2 = 3e-4;
  row.eps3 = 4e-4;
  CHECK_FALSE(pnp::check_stop(cfg, row));  // max 4e-4 > tol/3
  row.eps3 = 3e-4;
  CHECK(pnp::check_stop(cfg, row));
}

TEST_CASE("analyze_trace fits geometric decay") {
  pnp::SolverTrace trace;
  trace.tol = 1e-3;
  for (int k = 0; k < 20; ++k) {
    pnp::TraceRow row;
    row.k = k;
    row.delta = std::pow(0.5, k);
    trace.rows.push_back(row);
  }
  const auto fit = pnp::analyze_trace(trace);
  CHECK(fit.delta_fit == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(fit.c_fit == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fit.converged);  // final delta 0.5^19 < tol

  pnp::SolverTrace flat;
  flat.tol = 1e-3;
  for (int k = 0; k < 10; ++k) {
    pnp::TraceRow row;
    row.k = k;
    row.delta = 0.25;
    flat.rows.push_back(row);
  }
  const auto flat_fit = pnp::analyze_trace(flat);
  CHECK(flat_fit.delta_fit == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(flat_fit.converged);

  pnp::SolverTrace tiny;
  tiny.rows.resize(4);
  CHECK_THROWS_AS(pnp::analyze_trace(tiny), std::invalid_argument);
}

TEST_CASE("identity denoiser on a pure data term converges to the data") {
  const Image y = oracle::make_scene(16, 16, 7);
  const pnp::ForwardProblem problem = pnp::make_deblur_problem(y, pnp::make_delta_kernel());
  const pnp::Denoiser denoiser = pnp::make_identity_denoiser();
  const Image init(16, 16, 0.5);

  for (RhoRule rule : {RhoRule::constant, RhoRule::monotone, RhoRule::adaptive}) {
    PnPConfig cfg(1e-4, 1e-4, 1.5, 0.5, 1e-8, rule, 500);
    const auto result = pnp::pnp_admm(problem, denoiser, cfg, init);
    CAPTURE(pnp::to_string(rule));
    CHECK(result.final_delta <= 1e-8);
    CHECK(pnp::linf_norm(result.solution - y) <= 1e-3);
    // Residues decay along the run.
    CHECK(result.trace.rows.front().delta > result.trace.rows.back().delta);
  }
}

TEST_CASE("trace identities and rho monotonicity on a desk-scale deblur run") {
  const Image truth = oracle::make_scene(24, 24, 8);
  const Image y = pnp::circ_conv(truth, pnp::make_gaussian_kernel(5, 1.0));
  const pnp::ForwardProblem problem = pnp::make_deblur_problem(y, pnp::make_gaussian_kernel(5, 1.0));
  PnPConfig cfg(1e-4, 1e-4, 1.4, 0.5, 1e-4, RhoRule::adaptive, 60);
  const auto result = pnp::pnp_admm(problem, pnp::make_damped_nlm_denoiser(1.0), cfg, y, &truth);

  REQUIRE(result.trace.rows.size() >= 5);
  double prev_rho = 0.0;
  for (const auto& row : result.trace.rows) {
    CHECK(row.sigma == std::sqrt(cfg.lambda / row.rho));
    CHECK(row.delta == row.eps1 + row.eps2 + row.eps3);
    CHECK(row.rho >= prev_rho);
    REQUIRE(row.psnr.has_value());
    prev_rho = row.rho;
  }

  // Monotone rule: rho_k = rho0 * gamma^k exactly.
  cfg.rule = RhoRule::monotone;
  const auto mono = pnp::pnp_admm(problem, pnp::make_damped_nlm_denoiser(1.0), cfg, y);
  for (const auto& row : mono.trace.rows) {
    CHECK(row.rho == doctest::Approx(cfg.rho0 * std::pow(cfg.gamma, row.k)).epsilon(1e-12));
  }

  // Delta_0 := 0, so the first adaptive comparison always raises rho.
  REQUIRE(result.trace.rows.size() >= 2);
  CHECK(result.trace.rows[1].rho == doctest::Approx(cfg.rho0 * cfg.gamma).epsilon(1e-14));
}

TEST_CASE("table-style deblurring improves on the blurred input") {
  // 32x32, Gaussian 9x9 std 1 blur, damped-NLM, adaptive rule,
  // rho0 = 1e-5, gamma = 1.2, lambda = 1e-4.
  const Image truth = oracle::make_scene(32, 32, 20);
  const Image y = pnp::circ_conv(truth, pnp::make_gaussian_kernel(9, 1.0));
  const pnp::ForwardProblem problem = pnp::make_deblur_problem(y, pnp::make_gaussian_kernel(9, 1.0));
  const PnPConfig cfg(1e-5, 1e-4, 1.2, 0.5, 1e-3, RhoRule::adaptive, 200);
  const auto result = pnp::pnp_admm(problem, pnp::make_damped_nlm_denoiser(1.0), cfg, pnp::clamp01(y), &truth);
  CHECK(result.final_delta <= 1e-3);
  CHECK(result.iterations < 200);
  CHECK(pnp::psnr(result.solution, truth) > pnp::psnr(pnp::clamp01(y), truth));
}

TEST_CASE("pnp_admm is deterministic") {
  const Image truth = oracle::make_scene(16, 16, 9);
  const Image y = pnp::add_gaussian_noise(pnp::circ_conv(truth, pnp::make_gaussian_kernel(5, 1.0)),
                                          5.0 / 255.0, 42);
  const pnp::ForwardProblem problem = pnp::make_deblur_problem(y, pnp::make_gaussian_kernel(5, 1.0));
  const PnPConfig cfg(1e-4, 1e-4, 1.4, 0.5, 1e-3, RhoRule::adaptive, 40);

  const auto a = pnp::pnp_admm(problem, pnp::make_damped_nlm_denoiser(1.0), cfg, y, &truth);
  const auto b = pnp::pnp_admm(problem, pnp::make_damped_nlm_denoiser(1.0), cfg, y, &truth);
  CHECK(a.solution.data() == b.solution.data());

  std::ostringstream csv_a, csv_b;
  a.trace.write_csv(csv_a);
  b.trace.write_csv(csv_b);
  CHECK(csv_a.str() == csv_b.str());
}

TEST_CASE("trace CSV round-trips at full precision") {
  const Image y = oracle::make_scene(12, 12, 10);
  const pnp::ForwardProblem problem = pnp::make_deblur_problem(y, pnp::make_gaussian_kernel(3, 0.8));
  const PnPConfig cfg(1e-4, 1e-4, 1.6, 0.5, 1e-4, RhoRule::adaptive, 25);
  const auto result = pnp::pnp_admm(problem, pnp::make_damped_nlm_denoiser(1.0), cfg, y, &y);

  std::ostringstream out;
  result.trace.write_csv(out);
  CHECK(out.str().rfind("k,rho,sigma,delta,eps1,eps2,eps3,psnr\n", 0) == 0);

  std::istringstream in(out.str());
  const pnp::SolverTrace back = pnp::SolverTrace::read_csv(in);
  REQUIRE(back.rows.size() == result.trace.rows.size());
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    CHECK(back.rows[i].k == result.trace.rows[i].k);
    CHECK(back.rows[i].rho == result.trace.rows[i].rho);
    CHECK(back.rows[i].sigma == result.trace.rows[i].sigma);
    CHECK(back.rows[i].delta == result.trace.rows[i].delta);
    CHECK(back.rows[i].psnr.value() == result.trace.rows[i].psnr.value());
  }

  // A run without ground truth leaves the psnr column blank.
  const auto blind = pnp::pnp_admm(problem, pnp::make_identity_denoiser(), cfg, y);
  std::ostringstream blind_csv;
  blind.trace.write_csv(blind_csv);
  std::istringstream blind_in(blind_csv.str());
  CHECK_FALSE(pnp::SolverTrace::read_csv(blind_in).rows.front().psnr.has_value());

  std::istringstream bad("not,a,trace\n");
  CHECK_THROWS_AS(pnp::SolverTrace::read_csv(bad), std::runtime_error);
}

TEST_CASE("rho ceiling short-circuits to exact identities") {
  const Image y = oracle::make_scene(8, 8, 11);
  const pnp::ForwardProblem problem = pnp::make_deblur_problem(y, pnp::make_gaussian_kernel(3, 1.0));
  PnPConfig cfg(1e10, 1e-4, 1000.0, 0.5, 1e-12, RhoRule::monotone, 10);
  cfg.rho_ceiling = 1e12;
  const auto result = pnp::pnp_admm(problem, pnp::make_damped_nlm_denoiser(1.0), cfg, y);
  // Once rho passes the ceiling both updates are identities and the iterates
  // freeze (up to roundoff in the u arithmetic).
  CHECK(result.final_delta <= cfg.tol);
  CHECK(result.iterations <= 5);
}

TEST_CASE("pnp_admm validates inputs and propagates failures with context") {
  const Image y = oracle::make_scene(8, 8, 12);
  const pnp::ForwardProblem problem = pnp::make_deblur_problem(y, pnp::make_delta_kernel());
  const PnPConfig cfg;
  CHECK_THROWS_AS(pnp::pnp_admm(problem, pnp::make_identity_denoiser(), cfg, Image(4, 4, 0.0)),
                  std::invalid_argument);

  pnp::ForwardProblem broken = problem;
  broken.prox = [](double, const Image&) -> Image { throw std::runtime_error("inner failure"); };
  try {
    pnp::pnp_admm(broken, pnp::make_identity_denoiser(), cfg, y);
    FAIL("expected throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("iteration 0") != std::string::npos);
    CHECK(std::string(e.what()).find("inner failure") != std::string::npos);
  }

  // Non-finite iterates abort with a diagnostic.
  pnp::ForwardProblem nan_problem = problem;
  nan_problem.prox = [](double, const Image& xt) {
    Image out = xt;
    out[0] = std::numeric_limits<double>::quiet_NaN();
    return out;
  };
  CHECK_THROWS_AS(pnp::pnp_admm(nan_problem, pnp::make_identity_denoiser(), cfg, y),
                  std::runtime_error);
}

TEST_CASE("final PSNR is insensitive to the initial guess") {
  // Noisy deblurring with a strong early smoother: the data term plus the
  // denoiser wash the initial guess out and the noise floor hides what little
  // residue survives.
  const Image truth = oracle::make_scene(24, 24, 13);
  const Image y = pnp::add_gaussian_noise(pnp::circ_conv(truth, pnp::make_gaussian_kernel(5, 1.0)),
                                          5.0 / 255.0, 42);
  const pnp::ForwardProblem problem = pnp::make_deblur_problem(y, pnp::make_gaussian_kernel(5, 1.0));
  const PnPConfig cfg(1e-2, 2e-3, 1.2, 0.5, 5e-4, RhoRule::monotone, 200);
  const pnp::Denoiser denoiser =
      pnp::make_damped_denoiser([](const Image& im) { return pnp::denoise_median(3, im); }, 4.0);

  std::vector<double> psnrs;
  for (int trial = 0; trial < 10; ++trial) {
    const Image init = oracle::random_image(24, 24, 500 + trial);
    const auto result = pnp::pnp_admm(problem, denoiser, cfg, init, &truth);
    psnrs.push_back(pnp::psnr(result.solution, truth));
  }
  double mean = 0.0;
  for (double p : psnrs) mean += p;
  mean /= static_cast<double>(psnrs.size());
  double var = 0.0;
  for (double p : psnrs) var += (p - mean) * (p - mean);
  var /= static_cast<double>(psnrs.size());
  CHECK(std::sqrt(var) < 0.1);
}
