// scale-bayes: rate studies for Bayesian inversion in the white-noise
// sequence model. Subcommands: run, galerkin, posterior, rates, prior-mass.
//
// Exit codes: 0 success, 2 config error, 3 numerical error,
// 4 slope outside tolerance in --check mode.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scalebayes/config.hpp"
#include "scalebayes/galerkin.hpp"
#include "scalebayes/harness.hpp"
#include "scalebayes/model.hpp"
#include "scalebayes/posterior.hpp"
#include "scalebayes/priors.hpp"
#include "scalebayes/rates.hpp"
#include "scalebayes/version.hpp"

namespace sb = scalebayes;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;
constexpr int exit_tolerance = 4;

struct RunArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  bool check = false;
};

int cmd_run(const RunArgs& args) {
  sb::ExperimentConfig cfg = sb::load_config(args.config_path);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed) cfg.seed = *args.seed;
  sb::ExperimentResult res = sb::run_experiment(cfg, args.threads);
  sb::emit_outputs(res, cfg.out_dir);
  std::cout << "wrote " << cfg.out_dir << "/results.csv, summary.json, rateplot.svg\n";
  if (res.slope_q50) {
    std::cout << "fitted slope (q=0.5): " << res.slope_q50->slope
              << "  reference exponent: " << -res.reference_exponent
              << "  (" << res.reference_source << ")\n";
  } else {
    std::cout << "n-grid too short for a slope fit\n";
  }
  if (args.check) {
    if (!res.slope_q50) throw sb::ConfigError("--check needs at least 3 n-grid points");
    if (!res.pass) {
      std::cout << "CHECK FAILED: |slope + exponent| = "
                << std::abs(res.slope_q50->slope + res.reference_exponent) << " > tolerance "
                << res.tolerance << "\n";
      return exit_tolerance;
    }
    std::cout << "CHECK PASSED within tolerance " << res.tolerance << "\n";
  }
  return exit_ok;
}

int cmd_galerkin(const std::string& config_path, const std::string& out_path) {
  sb::ExperimentConfig cfg = sb::load_config(config_path);
  const sb::SequenceScale scale = sb::build_scale(cfg.scale);
  std::size_t max_j = 2;
  for (std::size_t j : cfg.galerkin_j_list) max_j = std::max(max_j, j);
  const std::size_t truth_len = cfg.truth.length > 0 ? cfg.truth.length : 8 * max_j;
  const sb::ForwardOperator op = sb::build_operator(cfg.op, scale, std::max(truth_len, max_j));
  const sb::CoefficientVector f0 = sb::build_truth(cfg.truth, truth_len);
  const auto curve = sb::galerkin_error_curve(op, scale, f0, cfg.galerkin_j_list);

  std::vector<std::pair<double, double>> pts;
  for (const auto& [j, err] : curve)
    if (err > 0.0) pts.emplace_back(static_cast<double>(j), err);
  std::optional<sb::SlopeFit> fit;
  if (pts.size() >= 3) fit = sb::fit_slope(pts);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw sb::ConfigError("cannot write " + out_path);
  out << "j,error,slope_fit\n";
  for (const auto& [j, err] : curve)
    out << j << "," << sb::format_double(err) << ","
        << (fit ? sb::format_double(fit->slope) : "") << "\n";
  std::cout << "wrote " << out_path;
  if (fit) std::cout << "  (fitted slope " << fit->slope << ")";
  std::cout << "\n";
  return exit_ok;
}

int cmd_posterior(const std::string& config_path, const std::string& obs_path,
                  const std::string& out_path) {
  sb::ExperimentConfig cfg = sb::load_config(config_path);
  const sb::SequenceScale scale = sb::build_scale(cfg.scale);
  sb::validate_prior(cfg.prior, scale);
  const sb::ExperimentGeometry geo = sb::make_geometry(cfg, scale);

  sb::Observation obs;
  double n = 0.0;
  if (!obs_path.empty() && std::filesystem::exists(obs_path)) {
    obs = sb::read_observation_csv(obs_path);
    n = obs.n;
  } else if (cfg.observation) {
    n = cfg.observation->n;
    const std::size_t window =
        cfg.observation->j_obs > 0 ? cfg.observation->j_obs : geo.observed_window(n);
    const std::size_t truth_len = cfg.truth.length > 0 ? cfg.truth.length : 2 * window + 64;
    const sb::ForwardOperator sim_op =
        sb::build_operator(cfg.op, scale, std::max(truth_len, window));
    const sb::CoefficientVector f0 = sb::build_truth(cfg.truth, truth_len);
    obs = sb::simulate(sim_op, f0, n, window, cfg.observation->seed);
    if (!obs_path.empty()) sb::write_observation_csv(obs, obs_path);
  } else {
    throw sb::ConfigError("no observation: pass --obs with an existing file or add an "
                          "\"observation\" section to the config");
  }

  const std::size_t truncation = geo.prior_truncation(n);
  const std::size_t truth_len = cfg.truth.length > 0 ? cfg.truth.length : 2 * truncation + 64;
  const sb::ForwardOperator op =
      sb::build_operator(cfg.op, scale, std::max(truth_len, obs.j_obs()));
  const sb::CoefficientVector f0 = sb::build_truth(cfg.truth, truth_len);
  const sb::PosteriorResult post =
      sb::harness_detail::compute_posterior(cfg, scale, op, obs, truncation, obs.seed);

  const std::vector<double> qs = {0.5, 0.9, 0.95};
  const std::vector<double> radii =
      sb::contraction_radii(post, f0, qs, sb::rng::combine(obs.seed, sb::rng::tag::radius));
  json out = {{"means", post.mean},
              {"variances", post.variance},
              {"radii", {{"q50", radii[0]}, {"q90", radii[1]}, {"q95", radii[2]}}},
              {"rmse", sb::posterior_mean_error(post, f0)},
              {"n", n},
              {"diagnostics",
               {{"birth_acceptance", post.diagnostics.birth_acceptance},
                {"death_acceptance", post.diagnostics.death_acceptance},
                {"rw_acceptance", post.diagnostics.rw_acceptance},
                {"ess", post.diagnostics.ess},
                {"split_rhat", post.diagnostics.split_rhat}}}};
  if (!post.tau_grid.empty()) {
    out["tau_weights"] = json::array();
    for (std::size_t t = 0; t < post.tau_grid.size(); ++t)
      out["tau_weights"].push_back({{"tau", post.tau_grid[t]}, {"weight", post.tau_weights[t]}});
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw sb::ConfigError("cannot write " + out_path);
  file << out.dump(2) << "\n";
  std::cout << "wrote " << out_path << "\n";
  return exit_ok;
}

int cmd_rates(const std::string& prior, double alpha, double beta, double gamma, double d) {
  sb::RateQuery q;
  if (prior == "series")
    q.prior_kind = sb::PriorKind::series;
  else if (prior == "gaussian")
    q.prior_kind = sb::PriorKind::gaussian;
  else if (prior == "mixture")
    q.prior_kind = sb::PriorKind::mixture;
  else
    throw sb::ConfigError("unknown prior kind: " + prior);
  q.alpha = alpha;
  q.beta = beta;
  q.gamma = gamma;
  q.d = d;
  const double exponent = sb::theoretical_exponent(q);
  const sb::AuxiliaryExponents aux = sb::auxiliary_sequences(q);
  json out = {{"prior", prior},
              {"exponent", exponent},
              {"rate", "n^-" + sb::format_double(exponent)},
              {"epsilon_exponent", aux.epsilon_exponent},
              {"j_exponent", aux.j_exponent}};
  if (aux.tau_exponent) out["tau_exponent"] = *aux.tau_exponent;
  std::cout << out.dump(2) << "\n";
  return exit_ok;
}

int cmd_prior_mass(const std::string& config_path, const std::string& out_path) {
  sb::ExperimentConfig cfg = sb::load_config(config_path);
  const sb::SequenceScale scale = sb::build_scale(cfg.scale);
  sb::validate_prior(cfg.prior, scale);
  sb::ExperimentGeometry geo = sb::make_geometry(cfg, scale);
  const double n_ref = cfg.n_grid.empty() ? 1e6 : cfg.n_grid.back();
  std::size_t truncation = geo.prior_truncation(n_ref);
  sb::PriorSpec prior = cfg.prior;
  if (auto* g = std::get_if<sb::GaussianPrior>(&prior)) {
    if (g->truncation == 0) g->truncation = truncation;
    truncation = g->truncation;
  } else if (auto* m = std::get_if<sb::MixturePrior>(&prior)) {
    if (m->truncation == 0) m->truncation = truncation;
    truncation = m->truncation;
  } else {
    truncation = std::get<sb::SeriesPrior>(prior).m_max;
  }
  const std::size_t truth_len = cfg.truth.length > 0 ? cfg.truth.length : truncation;
  const sb::ForwardOperator op =
      sb::build_operator(cfg.op, scale, std::max(truncation, truth_len));
  const sb::CoefficientVector f0 =
      cfg.truth.coeffs.empty() && cfg.truth.length == 0
          ? sb::CoefficientVector()  // centred small ball by default
          : sb::build_truth(cfg.truth, truth_len);
  const auto curve = sb::prior_mass_curve(prior, scale, op, f0, cfg.prior_mass_epsilons,
                                          cfg.prior_mass_draws, cfg.seed);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw sb::ConfigError("cannot write " + out_path);
  out << "epsilon,neg_log_p,std_error,hits,reliable\n";
  for (const auto& pt : curve)
    out << sb::format_double(pt.epsilon) << "," << sb::format_double(pt.neg_log_p) << ","
        << sb::format_double(pt.std_error) << "," << pt.hits << ","
        << (pt.reliable ? 1 : 0) << "\n";
  std::cout << "wrote " << out_path << "\n";
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posterior contraction-rate laboratory for the Gaussian sequence model"};
  app.set_version_flag("--version", sb::version_string);
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run a rate experiment from a JSON config");
  run->add_option("--config", run_args.config_path, "experiment config JSON")->required();
  run->add_option("--out", run_args.out_dir, "output directory (overrides config)");
  std::uint64_t seed_opt = 0;
  auto* seed_flag = run->add_option("--seed", seed_opt, "master seed (overrides config)");
  run->add_option("--threads", run_args.threads, "worker threads (0 = auto)");
  run->add_flag("--check", run_args.check, "exit 4 if the fitted slope misses the tolerance");

  std::string g_config, g_out = "errors.csv";
  auto* galerkin = app.add_subcommand("galerkin", "Galerkin reconstruction error curve");
  galerkin->add_option("--config", g_config, "config JSON")->required();
  galerkin->add_option("--out", g_out, "output CSV path");

  std::string p_config, p_obs, p_out = "post.json";
  auto* posterior = app.add_subcommand("posterior", "posterior summaries for one observation");
  posterior->add_option("--config", p_config, "config JSON")->required();
  posterior->add_option("--obs", p_obs, "observation CSV (with .json sidecar)");
  posterior->add_option("--out", p_out, "output JSON path");

  std::string r_prior = "gaussian";
  double r_alpha = 0.0, r_beta = 1.0, r_gamma = 1.0, r_d = 1.0;
  auto* rates = app.add_subcommand("rates", "theoretical contraction exponents");
  rates->add_option("--prior", r_prior, "series | gaussian | mixture");
  rates->add_option("--alpha", r_alpha, "prior regularity");
  rates->add_option("--beta", r_beta, "truth regularity");
  rates->add_option("--gamma", r_gamma, "operator smoothing order");
  rates->add_option("--d", r_d, "effective dimension");

  std::string m_config, m_out = "prior_mass.csv";
  auto* prior_mass = app.add_subcommand("prior-mass", "Monte-Carlo small-ball mass curve");
  prior_mass->add_option("--config", m_config, "config JSON")->required();
  prior_mass->add_option("--out", m_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (seed_flag->count() > 0) run_args.seed = seed_opt;
      return cmd_run(run_args);
    }
    if (galerkin->parsed()) return cmd_galerkin(g_config, g_out);
    if (posterior->parsed()) return cmd_posterior(p_config, p_obs, p_out);
    if (rates->parsed()) return cmd_rates(r_prior, r_alpha, r_beta, r_gamma, r_d);
    if (prior_mass->parsed()) return cmd_prior_mass(m_config, m_out);
  } catch (const sb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const sb::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return exit_numeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_numeric;
  }
  return exit_ok;
}
