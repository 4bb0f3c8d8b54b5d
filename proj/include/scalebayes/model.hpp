#ifndef SCALEBAYES_MODEL_HPP
#define SCALEBAYES_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scalebayes/coefficients.hpp"
#include "scalebayes/errors.hpp"
#include "scalebayes/operators.hpp"
#include "scalebayes/rng.hpp"

namespace scalebayes {

// White-noise sequence observation: y_i = (A f0)_i + n^{-1/2} z_i for
// i = 1..j_obs, with z_i standard normal. Regenerating with the same seed
// reproduces y bit-exactly, and widening j_obs never changes existing
// coordinates because the noise is keyed per coordinate.
struct Observation {
  std::vector<double> y;
  double n = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  std::string op_label;

  std::size_t j_obs() const { return y.size(); }
};

inline Observation simulate(const ForwardOperator& op, const CoefficientVector& f0, double n,
                            std::size_t j_obs, std::uint64_t seed, std::uint64_t replicate = 0) {
  if (!(n > 0.0)) throw ConfigError("simulate: noise level n must be positive");
  if (j_obs < 1) throw ConfigError("simulate: need at least one observed coordinate");
  if (j_obs > op.range_dim())
    throw DimensionError("simulate: j_obs exceeds the operator range dimension");
  const CoefficientVector af0 = op.apply(f0);
  Observation obs;
  obs.n = n;
  obs.seed = seed;
  obs.replicate = replicate;
  obs.op_label = op.label();
  obs.y.resize(j_obs);
  const double noise_sd = 1.0 / std::sqrt(n);
  for (std::size_t i = 1; i <= j_obs; ++i)
    obs.y[i - 1] = af0.coef(i) + noise_sd * rng::keyed_normal(seed, rng::tag::noise, i, replicate);
  return obs;
}

// Log likelihood ratio against the zero signal:
// n sum_i (Af)_i y_i - (n/2) sum_i (Af)_i^2.
inline double loglik(const Observation& obs, const CoefficientVector& f,
                     const ForwardOperator& op) {
  const CoefficientVector af = op.apply(f);
  for (std::size_t i = obs.j_obs() + 1; i <= af.size(); ++i)
    if (af.coeffs[i - 1] != 0.0)
      throw DimensionError("loglik: Af has support beyond the observed window; increase j_obs");
  double cross = 0.0, sq = 0.0;
  const std::size_t upto = af.size() < obs.j_obs() ? af.size() : obs.j_obs();
  for (std::size_t i = 0; i < upto; ++i) {
    cross += af.coeffs[i] * obs.y[i];
    sq += af.coeffs[i] * af.coeffs[i];
  }
  return obs.n * cross - 0.5 * obs.n * sq;
}

// n ||Af - Af0||^2 / 2.
inline double kl_divergence(const CoefficientVector& f, const CoefficientVector& f0,
                            const ForwardOperator& op, double n) {
  const double dist = l2_norm(op.apply(f) - op.apply(f0));
  return 0.5 * n * dist * dist;
}

inline void write_observation_csv(const Observation& obs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write observation file: " + path);
  out << "index,y\n";
  for (std::size_t i = 0; i < obs.y.size(); ++i) {
    std::ostringstream row;
    row.imbue(std::locale::classic());
    row.precision(17);
    row << (i + 1) << "," << obs.y[i] << "\n";
    out << row.str();
  }
  nlohmann::json sidecar = {{"n", obs.n},
                            {"seed", obs.seed},
                            {"replicate", obs.replicate},
                            {"op_label", obs.op_label},
                            {"J_obs", obs.y.size()}};
  std::ofstream meta(path + ".json", std::ios::binary);
  if (!meta) throw ConfigError("cannot write observation sidecar: " + path + ".json");
  meta << sidecar.dump(2) << "\n";
}

inline Observation read_observation_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read observation file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("index,y", 0) != 0)
    throw ConfigError("observation file is missing the index,y header: " + path);
  Observation obs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("malformed observation row: " + line);
    obs.y.push_back(std::stod(line.substr(comma + 1)));
  }
  std::ifstream meta(path + ".json");
  if (!meta) throw ConfigError("missing observation sidecar: " + path + ".json");
  nlohmann::json sidecar = nlohmann::json::parse(meta);
  obs.n = sidecar.at("n").get<double>();
  obs.seed = sidecar.at("seed").get<std::uint64_t>();
  obs.replicate = sidecar.value("replicate", 0ULL);
  obs.op_label = sidecar.at("op_label").get<std::string>();
  if (sidecar.at("J_obs").get<std::size_t>() != obs.y.size())
    throw ConfigError("observation sidecar J_obs disagrees with the CSV row count");
  return obs;
}

}  // namespace scalebayes

#endif
