#ifndef SCALEBAYES_CONFIG_HPP
#define SCALEBAYES_CONFIG_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scalebayes/coefficients.hpp"
#include "scalebayes/errors.hpp"
#include "scalebayes/operators.hpp"
#include "scalebayes/posterior.hpp"
#include "scalebayes/priors.hpp"
#include "scalebayes/rates.hpp"
#include "scalebayes/scales.hpp"

namespace scalebayes {

using nlohmann::json;

struct ScaleSpec {
  std::string kind = "power";  // power | volterra2d
  double d = 1.0;
};

struct OperatorSpec {
  std::string kind = "diagonal";  // diagonal | poisson | volterra2d | matrix
  double gamma = 1.0;
  std::string variant = "A0";     // volterra2d only: A | A0
  std::string path;               // matrix only
};

// Truth rule f0_i = i^{-beta - 1/2 - offset}, or explicit coefficients.
struct TruthSpec {
  double beta = 1.0;
  double offset = 0.05;
  std::size_t length = 0;  // 0 = auto-sized by the harness
  std::vector<double> coeffs;
};

struct ObservationSpec {
  double n = 1e4;
  std::size_t j_obs = 0;  // 0 = auto
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  ScaleSpec scale;
  OperatorSpec op;
  PriorSpec prior = GaussianPrior{};
  TruthSpec truth;
  std::vector<double> n_grid = {1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9};
  std::size_t replicates = 1;
  std::vector<double> quantiles = {0.5, 0.9, 0.95};
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  double tolerance = 0.05;
  std::size_t truncation_multiplier = 4;
  McmcSettings mcmc;
  // subcommand-specific sections
  std::vector<std::size_t> galerkin_j_list = {8, 16, 32, 64, 128, 256, 512};
  std::vector<double> prior_mass_epsilons = {0.1, 0.15, 0.2, 0.3, 0.45, 0.6, 0.8};
  std::size_t prior_mass_draws = 100000;
  std::optional<ObservationSpec> observation;

  json raw;  // the parsed source, kept for provenance hashing
};

inline SequenceScale build_scale(const ScaleSpec& spec) {
  if (spec.kind == "power") return SequenceScale::power(spec.d);
  if (spec.kind == "volterra2d") return SequenceScale::volterra2d();
  throw ConfigError("unknown scale kind: " + spec.kind);
}

inline Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read matrix file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("rows,cols", 0) != 0)
    throw ConfigError("matrix file must start with a rows,cols header: " + path);
  if (!std::getline(in, line)) throw ConfigError("matrix file missing dimensions: " + path);
  std::size_t rows = 0, cols = 0;
  {
    std::istringstream dims(line);
    char comma;
    if (!(dims >> rows >> comma >> cols) || comma != ',' || rows == 0 || cols == 0)
      throw ConfigError("bad matrix dimensions line: " + line);
  }
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw ConfigError("matrix file truncated: " + path);
    std::istringstream row(line);
    std::string cell;
    for (std::size_t c = 0; c < cols; ++c) {
      if (!std::getline(row, cell, ',')) throw ConfigError("matrix row too short: " + line);
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::stod(cell);
    }
  }
  return m;
}

// dim: requested domain capacity for the operator kinds that are sized here
// rather than by their data.
inline ForwardOperator build_operator(const OperatorSpec& spec, const SequenceScale& scale,
                                      std::size_t dim) {
  if (spec.kind == "diagonal") return ForwardOperator::diagonal_smoothing(scale, spec.gamma, dim);
  if (spec.kind == "poisson") return ForwardOperator::poisson_sine(dim);
  if (spec.kind == "volterra2d") {
    if (scale.kind() != SequenceScale::Kind::volterra2d)
      throw ConfigError("volterra2d operator requires the volterra2d scale");
    if (spec.variant == "A") return ForwardOperator::volterra2d_a(dim);
    if (spec.variant == "A0") return ForwardOperator::volterra2d_a0(dim);
    throw ConfigError("unknown volterra2d variant: " + spec.variant);
  }
  if (spec.kind == "matrix") return ForwardOperator::dense_matrix(load_matrix_csv(spec.path), spec.gamma);
  throw ConfigError("unknown operator kind: " + spec.kind);
}

inline CoefficientVector build_truth(const TruthSpec& spec, std::size_t auto_length) {
  if (!spec.coeffs.empty()) return CoefficientVector(spec.coeffs);
  const std::size_t len = spec.length > 0 ? spec.length : auto_length;
  CoefficientVector f0(len);
  const double exponent = -spec.beta - 0.5 - spec.offset;
  for (std::size_t i = 1; i <= len; ++i)
    f0.coeffs[i - 1] = std::pow(static_cast<double>(i), exponent);
  return f0;
}

inline PriorKind prior_kind_of(const PriorSpec& prior) {
  if (std::holds_alternative<SeriesPrior>(prior)) return PriorKind::series;
  if (std::holds_alternative<GaussianPrior>(prior)) return PriorKind::gaussian;
  return PriorKind::mixture;
}

namespace cfg_detail {

inline ScaleSpec parse_scale(const json& j) {
  ScaleSpec s;
  s.kind = j.value("kind", "power");
  s.d = j.value("d", s.kind == "volterra2d" ? 2.0 : 1.0);
  return s;
}

inline OperatorSpec parse_operator(const json& j) {
  OperatorSpec s;
  s.kind = j.value("kind", "diagonal");
  if (s.kind == "poisson") s.gamma = 2.0;
  if (s.kind == "volterra2d") s.gamma = 1.0;
  s.gamma = j.value("gamma", s.gamma);
  s.variant = j.value("variant", "A0");
  s.path = j.value("path", "");
  if (s.kind == "matrix" && s.path.empty())
    throw ConfigError("matrix operator needs a path");
  return s;
}

inline PriorSpec parse_prior(const json& j) {
  const std::string kind = j.value("kind", "gaussian");
  if (kind == "series") {
    SeriesPrior p;
    p.mu = j.value("mu", 5.0);
    const std::string density = j.value("p", "gaussian");
    if (density == "gaussian")
      p.p = SeriesDensity::gaussian;
    else if (density == "laplace")
      p.p = SeriesDensity::laplace;
    else
      throw ConfigError("series prior: unknown coordinate density " + density);
    if (j.contains("kappa") && j["kappa"].is_array())
      p.kappa = j["kappa"].get<std::vector<double>>();
    else if (j.value("kappa", "unit") != "unit")
      throw ConfigError("series prior: kappa must be \"unit\" or an array");
    p.m_max = j.value("m_max", static_cast<std::size_t>(200));
    return p;
  }
  if (kind == "gaussian") {
    GaussianPrior p;
    p.alpha = j.at("alpha").get<double>();
    p.tau = j.value("tau", 1.0);
    p.truncation = j.value("truncation", static_cast<std::size_t>(0));
    return p;
  }
  if (kind == "mixture") {
    MixturePrior p;
    p.alpha = j.at("alpha").get<double>();
    p.truncation = j.value("truncation", static_cast<std::size_t>(0));
    if (j.contains("q")) {
      const json& q = j["q"];
      const std::string qkind = q.value("kind", "inv_gamma_sq");
      if (qkind == "inv_gamma_sq") {
        QInvGammaSq ig;
        ig.shape = q.value("shape", 1.0);
        ig.rate = q.value("rate", 1.0);
        p.q = ig;
      } else if (qkind == "grid") {
        QGrid grid;
        grid.taus = q.at("taus").get<std::vector<double>>();
        grid.weights = q.at("weights").get<std::vector<double>>();
        p.q = grid;
      } else {
        throw ConfigError("mixture prior: unknown mixing kind " + qkind);
      }
    }
    return p;
  }
  throw ConfigError("unknown prior kind: " + kind);
}

inline std::vector<double> parse_n_grid(const json& j) {
  if (j.is_array()) {
    auto grid = j.get<std::vector<double>>();
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (!(grid[i] > grid[i - 1])) throw ConfigError("n_grid must be strictly increasing");
    if (grid.empty()) throw ConfigError("n_grid must not be empty");
    return grid;
  }
  const double from = j.at("from").get<double>();
  const double to = j.at("to").get<double>();
  const std::size_t points = j.at("points").get<std::size_t>();
  if (!(from > 0.0 && to > from && points >= 1)) throw ConfigError("bad n_grid range");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
    grid[i] = std::exp(std::log(from) + t * (std::log(to) - std::log(from)));
  }
  return grid;
}

}  // namespace cfg_detail

inline ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  cfg.raw = j;
  if (j.contains("scale")) cfg.scale = cfg_detail::parse_scale(j["scale"]);
  if (j.contains("operator")) cfg.op = cfg_detail::parse_operator(j["operator"]);
  if (j.contains("prior")) cfg.prior = cfg_detail::parse_prior(j["prior"]);
  if (j.contains("truth")) {
    const json& t = j["truth"];
    cfg.truth.beta = t.value("beta", 1.0);
    cfg.truth.offset = t.value("offset", 0.05);
    cfg.truth.length = t.value("length", static_cast<std::size_t>(0));
    if (t.contains("coeffs")) cfg.truth.coeffs = t["coeffs"].get<std::vector<double>>();
  }
  if (j.contains("n_grid")) cfg.n_grid = cfg_detail::parse_n_grid(j["n_grid"]);
  cfg.replicates = j.value("replicates", static_cast<std::size_t>(1));
  if (cfg.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (j.contains("quantiles")) cfg.quantiles = j["quantiles"].get<std::vector<double>>();
  for (double q : cfg.quantiles)
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantiles must lie in (0,1)");
  cfg.seed = j.value("seed", static_cast<std::uint64_t>(1));
  cfg.out_dir = j.value("out_dir", "out");
  cfg.tolerance = j.value("tolerance", 0.05);
  cfg.truncation_multiplier = j.value("truncation_multiplier", static_cast<std::size_t>(4));
  if (cfg.truncation_multiplier < 1) throw ConfigError("truncation_multiplier must be >= 1");
  if (j.contains("mcmc")) {
    const json& m = j["mcmc"];
    cfg.mcmc.n_iter = m.value("n_iter", cfg.mcmc.n_iter);
    cfg.mcmc.burn_frac = m.value("burn_frac", cfg.mcmc.burn_frac);
    cfg.mcmc.chains = m.value("chains", cfg.mcmc.chains);
    cfg.mcmc.rw_step = m.value("rw_step", cfg.mcmc.rw_step);
    if (!(cfg.mcmc.burn_frac >= 0.0 && cfg.mcmc.burn_frac < 1.0))
      throw ConfigError("mcmc.burn_frac must lie in [0,1)");
    if (cfg.mcmc.chains < 1 || cfg.mcmc.n_iter < 10) throw ConfigError("bad mcmc settings");
  }
  if (j.contains("galerkin") && j["galerkin"].contains("j_list"))
    cfg.galerkin_j_list = j["galerkin"]["j_list"].get<std::vector<std::size_t>>();
  if (j.contains("prior_mass")) {
    const json& p = j["prior_mass"];
    if (p.contains("epsilons")) cfg.prior_mass_epsilons = p["epsilons"].get<std::vector<double>>();
    cfg.prior_mass_draws = p.value("draws", cfg.prior_mass_draws);
  }
  if (j.contains("observation")) {
    ObservationSpec o;
    o.n = j["observation"].value("n", 1e4);
    o.j_obs = j["observation"].value("j_obs", static_cast<std::size_t>(0));
    o.seed = j["observation"].value("seed", static_cast<std::uint64_t>(1));
    cfg.observation = o;
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  try {
    return parse_config(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
}

inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

inline std::string config_hash(const ExperimentConfig& cfg) {
  return fnv1a_hex(cfg.raw.dump());
}

}  // namespace scalebayes

#endif
