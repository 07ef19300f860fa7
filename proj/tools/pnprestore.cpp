// Command-line harness for Plug-and-Play ADMM restoration: simulates a
// degradation on a clean input image, runs the solver, and writes the
// restored image plus a per-iteration trace CSV.
//
// Exit codes: 0 success, 2 config error, 3 I/O error, 4 numerical failure.

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pnp/denoisers.hpp"
#include "pnp/forward.hpp"
#include "pnp/image_io.hpp"
#include "pnp/metrics.hpp"
#include "pnp/probe.hpp"
#include "pnp/qis.hpp"
#include "pnp/random.hpp"
#include "pnp/solver.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

struct ExperimentSpec {
  std::string task;
  std::string input;
  std::string kernel_spec = "gauss:9:1";
  int factor = 2;
  double noise = 0.0;
  double sample_rate = 0.5;
  double alpha = 0.0;  // 0 = auto (jots per pixel)
  bool use_lookup = false;
  std::uint64_t seed = 1;
  std::uint64_t init_seed = 0;  // 0 = task-specific init; else uniform random init

  double rho0 = 1e-4;
  double lambda = 1e-4;
  double gamma = 2.0;
  double eta = 0.5;
  double tol = 1e-3;
  std::string rule = "adaptive";
  int max_iter = 100;
  std::string stop = "delta";
  bool return_x = false;
  std::string denoiser_spec = "damped-nlm:1.0";

  std::string out_path;
  std::string trace_path;
  std::string bits_path;  // qis only
};

pnp::PnPConfig build_config(const ExperimentSpec& spec) {
  pnp::PnPConfig cfg(spec.rho0, spec.lambda, spec.gamma, spec.eta, spec.tol,
                     pnp::parse_rho_rule(spec.rule), spec.max_iter);
  if (spec.stop == "delta") {
    cfg.stop = pnp::StopRule::delta;
  } else if (spec.stop == "eps") {
    cfg.stop = pnp::StopRule::eps_max;
  } else {
    throw std::invalid_argument("unknown stop rule '" + spec.stop + "' (delta|eps)");
  }
  cfg.return_x = spec.return_x;
  return cfg;
}

struct PreparedProblem {
  pnp::ForwardProblem problem;
  pnp::Image init;
  std::optional<pnp::QisBits> bits;
};

pnp::Image fill_unobserved_with_mean(const pnp::Image& y, const pnp::Image& mask) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (mask[i] == 1.0) {
      sum += y[i];
      ++count;
    }
  }
  const double mean = count > 0 ? sum / static_cast<double>(count) : 0.5;
  pnp::Image init = y;
  for (std::size_t i = 0; i < init.size(); ++i) {
    if (mask[i] == 0.0) init[i] = mean;
  }
  return init;
}

pnp::Image replicate_upsample(const pnp::Image& low, int factor) {
  pnp::Image high(low.width() * factor, low.height() * factor);
  for (int y = 0; y < high.height(); ++y) {
    for (int x = 0; x < high.width(); ++x) {
      high(x, y) = low(x / factor, y / factor);
    }
  }
  return high;
}

// Simulates the degradation named by spec.task and wires the matching
// forward problem plus a task-appropriate initial guess.
PreparedProblem prepare(const ExperimentSpec& spec, const pnp::Image& truth) {
  PreparedProblem prep;
  if (spec.task == "deblur") {
    const pnp::Kernel kernel = pnp::parse_kernel_spec(spec.kernel_spec);
    pnp::Image y = pnp::circ_conv(truth, kernel);
    if (spec.noise > 0.0) y = pnp::add_gaussian_noise(y, spec.noise, spec.seed);
    prep.problem = pnp::make_deblur_problem(y, kernel);
    prep.init = pnp::clamp01(y);
  } else if (spec.task == "interp") {
    pnp::Image mask(truth.width(), truth.height());
    for (std::size_t i = 0; i < mask.size(); ++i) {
      mask[i] = pnp::uniform01(spec.seed ^ 0x6d61736bULL, i) < spec.sample_rate ? 1.0 : 0.0;
    }
    pnp::Image y = truth;
    if (spec.noise > 0.0) y = pnp::add_gaussian_noise(y, spec.noise, spec.seed);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
    prep.problem = pnp::make_interp_problem(y, mask);
    prep.init = pnp::clamp01(fill_unobserved_with_mean(y, mask));
  } else if (spec.task == "superres") {
    const pnp::Kernel kernel = pnp::parse_kernel_spec(spec.kernel_spec);
    const auto model = pnp::SuperResModel::create(kernel, spec.factor, truth.width(), truth.height());
    pnp::Image y = pnp::sr_forward(model, truth);
    if (spec.noise > 0.0) y = pnp::add_gaussian_noise(y, spec.noise, spec.seed);
    prep.problem = pnp::make_superres_problem(model, y);
    prep.init = pnp::clamp01(replicate_upsample(y, spec.factor));
  } else if (spec.task == "qis") {
    // The factor is the per-axis jot count; jots per pixel is its square,
    // and the sensor gain defaults to that total.
    const int jots = spec.factor * spec.factor;
    const double alpha = spec.alpha > 0.0 ? spec.alpha : static_cast<double>(jots);
    const pnp::QisBits bits = pnp::qis_simulate(truth, jots, alpha, spec.seed);
    const pnp::QisObservation obs = pnp::qis_counts(bits, alpha);
    prep.problem = pnp::make_qis_problem(obs, spec.use_lookup);
    prep.init = pnp::qis_mle(obs);
    prep.bits = bits;
  } else {
    throw std::invalid_argument("unknown task '" + spec.task + "'");
  }
  if (spec.init_seed != 0) {
    // Uniform random initial guess in [0,1]^n; the degradation stays pinned
    // to spec.seed so only the starting point varies.
    pnp::Image init(truth.width(), truth.height());
    for (std::size_t i = 0; i < init.size(); ++i) init[i] = pnp::uniform01(spec.init_seed, i);
    prep.init = init;
  }
  return prep;
}

struct RunOutcome {
  double final_psnr = 0.0;
  int iterations = 0;
  double final_delta = 0.0;
  pnp::SolverTrace trace;
};

RunOutcome run_experiment(const ExperimentSpec& spec, bool write_artifacts = true) {
  pnp::Image truth;
  try {
    truth = pnp::read_image(spec.input);
  } catch (const std::exception& e) {
    throw std::ios_base::failure(e.what());
  }

  PreparedProblem prep = prepare(spec, truth);
  const pnp::PnPConfig cfg = build_config(spec);
  const pnp::Denoiser denoiser = pnp::parse_denoiser_spec(spec.denoiser_spec);
  const pnp::PnPResult result = pnp::pnp_admm(prep.problem, denoiser, cfg, prep.init, &truth);

  RunOutcome outcome;
  outcome.final_psnr = pnp::psnr(result.solution, truth);
  outcome.iterations = result.iterations;
  outcome.final_delta = result.final_delta;
  outcome.trace = result.trace;

  if (write_artifacts) {
    try {
      if (!spec.out_path.empty()) pnp::write_image(result.solution, spec.out_path);
      if (!spec.trace_path.empty()) {
        std::ofstream trace_file(spec.trace_path);
        if (!trace_file) throw std::runtime_error(spec.trace_path + ": cannot open for writing");
        result.trace.write_csv(trace_file);
      }
      if (!spec.bits_path.empty() && prep.bits) pnp::write_qis_bits(*prep.bits, spec.bits_path);
    } catch (const std::exception& e) {
      throw std::ios_base::failure(e.what());
    }
  }
  return outcome;
}

void add_pnp_options(CLI::App* cmd, ExperimentSpec& spec) {
  cmd->add_option("--rho0", spec.rho0, "initial penalty rho_0");
  cmd->add_option("--lambda", spec.lambda, "prior weight lambda");
  cmd->add_option("--gamma", spec.gamma, "continuation ratio gamma > 1");
  cmd->add_option("--eta", spec.eta, "adaptive-rule threshold eta in [0,1)");
  cmd->add_option("--tol", spec.tol, "stopping tolerance on the relative residue");
  cmd->add_option("--rule", spec.rule, "rho update rule: monotone|adaptive|constant");
  cmd->add_option("--max-iter", spec.max_iter, "iteration cap");
  cmd->add_option("--stop", spec.stop, "stopping criterion: delta|eps");
  cmd->add_option("--denoiser", spec.denoiser_spec,
                  "identity | nlm:<patch>:<window> | damped-nlm:<C0> | median:<w>");
  cmd->add_flag("--return-x", spec.return_x, "return the x iterate instead of v");
  cmd->add_option("--seed", spec.seed, "degradation seed");
  cmd->add_option("--init-seed", spec.init_seed,
                  "nonzero: start from a uniform random guess drawn with this seed");
  cmd->add_option("--out", spec.out_path, "restored image output (.pgm/.pfm)");
  cmd->add_option("--trace", spec.trace_path, "trace CSV output");
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Plug-and-Play ADMM image restoration"};
  app.require_subcommand(1);

  ExperimentSpec spec;

  CLI::App* deblur = app.add_subcommand("deblur", "non-blind deblurring");
  deblur->add_option("--input", spec.input, "clean input image (ground truth)")->required();
  deblur->add_option("--kernel", spec.kernel_spec, "blur kernel spec");
  deblur->add_option("--noise", spec.noise, "observation noise std");
  add_pnp_options(deblur, spec);

  CLI::App* interp = app.add_subcommand("interp", "interpolation from a random pixel mask");
  interp->add_option("--input", spec.input, "clean input image")->required();
  interp->add_option("--sample-rate", spec.sample_rate, "fraction of observed pixels");
  interp->add_option("--noise", spec.noise, "observation noise std");
  add_pnp_options(interp, spec);

  CLI::App* superres = app.add_subcommand("superres", "single image super-resolution");
  superres->add_option("--input", spec.input, "clean input image")->required();
  superres->add_option("--kernel", spec.kernel_spec, "anti-aliasing kernel spec");
  superres->add_option("--factor", spec.factor, "decimation factor K");
  superres->add_option("--noise", spec.noise, "observation noise std");
  add_pnp_options(superres, spec);

  CLI::App* qis = app.add_subcommand("qis", "single-photon (quanta sensor) reconstruction");
  qis->add_option("--input", spec.input, "clean input image")->required();
  qis->add_option("--factor", spec.factor, "jots per pixel per axis (total is the square)");
  qis->add_option("--alpha", spec.alpha, "sensor gain (default: jots per pixel)");
  qis->add_flag("--use-lookup", spec.use_lookup, "accelerate the prox with root tables");
  qis->add_option("--bits", spec.bits_path, "save the simulated bit field as PGM");
  add_pnp_options(qis, spec);

  // kappa: expansiveness probe for image-dependent balanced NLM.
  int kappa_size = 16;
  int kappa_pairs = 1000;
  int kappa_patch = 1;
  int kappa_window = 3;
  double kappa_bandwidth = 0.08;
  std::uint64_t kappa_seed = 7;
  CLI::App* kappa = app.add_subcommand("kappa", "search for an expansive NLM pair");
  kappa->add_option("--size", kappa_size, "probe image size (<= 64)");
  kappa->add_option("--pairs", kappa_pairs, "candidate pair budget");
  kappa->add_option("--patch", kappa_patch, "NLM patch radius");
  kappa->add_option("--window", kappa_window, "NLM window radius");
  kappa->add_option("--bandwidth", kappa_bandwidth, "NLM bandwidth");
  kappa->add_option("--seed", kappa_seed, "probe seed");

  // certify: empirical bounded-denoiser check.
  std::string certify_denoiser = "damped-nlm:1.0";
  double certify_c = 1.0;
  int certify_trials = 100;
  int certify_size = 16;
  std::uint64_t certify_seed = 11;
  CLI::App* certify = app.add_subcommand("certify", "certify a bounded denoiser empirically");
  certify->add_option("--denoiser", certify_denoiser, "denoiser spec");
  certify->add_option("--c", certify_c, "claimed bound constant C");
  certify->add_option("--trials", certify_trials, "number of (input, sigma) pairs");
  certify->add_option("--size", certify_size, "test image size");
  certify->add_option("--seed", certify_seed, "test seed");

  // sweep: repeat an experiment over one parameter.
  std::string sweep_task = "deblur";
  std::string sweep_param = "tol";
  std::string sweep_values = "1e-2,1e-3";
  int sweep_trials = 1;
  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep, one CSV row per (value, trial)");
  sweep->add_option("--task", sweep_task, "deblur|interp|superres|qis")->required();
  sweep->add_option("--input", spec.input, "clean input image")->required();
  sweep->add_option("--param", sweep_param, "tol|rho0|seed|rule");
  sweep->add_option("--values", sweep_values, "comma-separated values");
  sweep->add_option("--trials", sweep_trials, "trials per value (seed offsets)");
  sweep->add_option("--kernel", spec.kernel_spec, "kernel spec where the task needs one");
  sweep->add_option("--factor", spec.factor, "factor for superres/qis");
  sweep->add_option("--noise", spec.noise, "observation noise std");
  sweep->add_option("--sample-rate", spec.sample_rate, "observed fraction (interp)");
  add_pnp_options(sweep, spec);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (deblur->parsed() || interp->parsed() || superres->parsed() || qis->parsed()) {
      spec.task = deblur->parsed()     ? "deblur"
                  : interp->parsed()   ? "interp"
                  : superres->parsed() ? "superres"
                                       : "qis";
      const RunOutcome outcome = run_experiment(spec);
      std::cout.precision(17);
      std::cout << outcome.final_psnr << ',' << outcome.iterations << ',' << outcome.final_delta
                << '\n';
      return 0;
    }

    if (kappa->parsed()) {
      if (kappa_size > 64) throw std::invalid_argument("kappa: size capped at 64");
      const pnp::NlmParams params{kappa_patch, kappa_window, kappa_bandwidth};
      const auto result = pnp::kappa_probe(kappa_size, kappa_pairs, params, kappa_seed);
      std::cout << "pairs_tested=" << result.pairs_tested << " max_kappa=" << result.max_kappa
                << " max_fixed_kappa=" << result.max_fixed_kappa
                << " found_expansive=" << (result.found_expansive ? 1 : 0) << '\n';
      return 0;
    }

    if (certify->parsed()) {
      const pnp::Denoiser denoiser = pnp::parse_denoiser_spec(certify_denoiser);
      std::vector<pnp::Image> inputs;
      std::vector<double> sigmas;
      const int grid = std::max(1, static_cast<int>(std::sqrt(certify_trials)));
      for (int i = 0; i < grid; ++i) {
        pnp::Image img(certify_size, certify_size);
        for (std::size_t p = 0; p < img.size(); ++p) {
          img[p] = pnp::uniform01(certify_seed + i, p);
        }
        inputs.push_back(img);
      }
      const int n_sigmas = (certify_trials + grid - 1) / grid;
      for (int i = 0; i < n_sigmas; ++i) {
        sigmas.push_back(std::pow(10.0, -3.0 + 3.5 * i / std::max(1, n_sigmas - 1)));
      }
      const auto report = pnp::certify_bounded(denoiser, certify_c, inputs, sigmas);
      std::cout << "evaluated=" << report.evaluated << " max_ratio=" << report.max_ratio
                << " worst_sigma=" << report.worst_sigma << " pass=" << (report.pass ? 1 : 0)
                << '\n';
      return 0;
    }

    if (sweep->parsed()) {
      spec.task = sweep_task;
      if (spec.out_path.empty()) throw std::invalid_argument("sweep: --out CSV path required");
      std::vector<std::string> values;
      std::size_t start = 0;
      while (start <= sweep_values.size()) {
        const std::size_t pos = sweep_values.find(',', start);
        values.push_back(sweep_values.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
      if (values.empty()) throw std::invalid_argument("sweep: no values given");

      std::ofstream csv(spec.out_path);
      if (!csv) return kExitIo;
      csv << "param,value,trial,final_psnr,iters,delta_fit\n";
      for (const std::string& value : values) {
        for (int trial = 0; trial < sweep_trials; ++trial) {
          ExperimentSpec run = spec;
          run.out_path.clear();
          run.trace_path.clear();
          if (sweep_param == "tol") {
            run.tol = std::stod(value);
            run.seed += static_cast<std::uint64_t>(trial);
          } else if (sweep_param == "rho0") {
            run.rho0 = std::stod(value);
            run.seed += static_cast<std::uint64_t>(trial);
          } else if (sweep_param == "seed") {
            // Initial-guess sweep: the degradation stays fixed and only the
            // random starting point moves.
            run.init_seed = std::stoull(value) + static_cast<std::uint64_t>(trial);
          } else if (sweep_param == "rule") {
            run.rule = value;
            run.seed += static_cast<std::uint64_t>(trial);
          } else {
            throw std::invalid_argument("sweep: unknown parameter '" + sweep_param + "'");
          }
          const RunOutcome outcome = run_experiment(run, false);
          double delta_fit = std::numeric_limits<double>::quiet_NaN();
          if (outcome.trace.rows.size() >= 5) {
            delta_fit = pnp::analyze_trace(outcome.trace).delta_fit;
          }
          csv << sweep_param << ',' << value << ',' << trial << ',' << outcome.final_psnr << ','
              << outcome.iterations << ',' << delta_fit << '\n';
        }
      }
      return 0;
    }
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) { return dispatch(argc, argv); }
