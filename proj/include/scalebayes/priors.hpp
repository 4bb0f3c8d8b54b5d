#ifndef SCALEBAYES_PRIORS_HPP
#define SCALEBAYES_PRIORS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "scalebayes/coefficients.hpp"
#include "scalebayes/errors.hpp"
#include "scalebayes/operators.hpp"
#include "scalebayes/rng.hpp"
#include "scalebayes/scales.hpp"
#include "scalebayes/special.hpp"

namespace scalebayes {

enum class SeriesDensity { gaussian, laplace };

// Random series prior: M drawn from a Poisson conditioned on {0,...,m_max},
// then f_i = kappa_i * Z_i for i <= M with Z_i ~ p. Empty kappa means unit
// scaling throughout.
struct SeriesPrior {
  double mu = 5.0;
  SeriesDensity p = SeriesDensity::gaussian;
  std::vector<double> kappa;
  std::size_t m_max = 200;

  double kappa_at(std::size_t i) const {
    if (kappa.empty()) return 1.0;
    if (i > kappa.size()) throw ConfigError("series prior: kappa sequence too short");
    return kappa[i - 1];
  }
};

// Centred Gaussian with coordinate standard deviations tau * b_i^{-alpha}.
// Proper on H_0 only when alpha > d/2. The truncation must be set by the
// caller (the experiment harness auto-sizes it from the rate exponents).
struct GaussianPrior {
  double alpha = 1.5;
  double tau = 1.0;
  std::size_t truncation = 0;
};

struct QInvGammaSq {
  double shape = 1.0;
  double rate = 1.0;
};

// Discrete mixing distribution; an atom list with weights.
struct QGrid {
  std::vector<double> taus;
  std::vector<double> weights;
};

using MixingDistribution = std::variant<QInvGammaSq, QGrid>;

struct MixturePrior {
  double alpha = 1.5;
  MixingDistribution q = QInvGammaSq{};
  std::size_t truncation = 0;
};

using PriorSpec = std::variant<SeriesPrior, GaussianPrior, MixturePrior>;

inline void validate_prior(const PriorSpec& prior, const SequenceScale& scale) {
  if (const auto* s = std::get_if<SeriesPrior>(&prior)) {
    if (!(s->mu > 0.0)) throw ConfigError("series prior: mu must be positive");
    for (double k : s->kappa)
      if (!(k > 0.0)) throw ConfigError("series prior: kappa entries must be positive");
    return;
  }
  const double alpha = std::holds_alternative<GaussianPrior>(prior)
                           ? std::get<GaussianPrior>(prior).alpha
                           : std::get<MixturePrior>(prior).alpha;
  if (!(alpha > scale.d() / 2.0))
    throw ConfigError("gaussian prior: alpha must exceed d/2 = " +
                      std::to_string(scale.d() / 2.0) + " for a trace-class covariance");
  if (const auto* g = std::get_if<GaussianPrior>(&prior)) {
    if (g->tau < 0.0) throw ConfigError("gaussian prior: tau must be >= 0");
  }
  if (const auto* m = std::get_if<MixturePrior>(&prior)) {
    if (const auto* grid = std::get_if<QGrid>(&m->q)) {
      if (grid->taus.size() != grid->weights.size() || grid->taus.empty())
        throw ConfigError("mixture prior: grid taus/weights mismatch");
    } else {
      const auto& ig = std::get<QInvGammaSq>(m->q);
      if (!(ig.shape > 0.0 && ig.rate > 0.0))
        throw ConfigError("mixture prior: gamma hyperparameters must be positive");
    }
  }
}

// Truncated Poisson log-mass, conditioned on {0,...,m_max}.
inline double truncated_poisson_log_pmf(std::size_t k, double mu, std::size_t m_max) {
  if (k > m_max) return -std::numeric_limits<double>::infinity();
  double total = 0.0;
  double p = std::exp(-mu);
  total = p;
  for (std::size_t i = 1; i <= m_max; ++i) {
    p *= mu / static_cast<double>(i);
    total += p;
  }
  return static_cast<double>(k) * std::log(mu) - mu - std::lgamma(static_cast<double>(k) + 1.0) -
         std::log(total);
}

inline std::size_t sample_truncated_poisson(double mu, std::size_t m_max, rng::Stream& stream) {
  double total = 0.0;
  double p = std::exp(-mu);
  std::vector<double> pmf(m_max + 1);
  pmf[0] = p;
  total = p;
  for (std::size_t i = 1; i <= m_max; ++i) {
    p *= mu / static_cast<double>(i);
    pmf[i] = p;
    total += p;
  }
  const double u = stream.next_uniform() * total;
  double cdf = 0.0;
  for (std::size_t k = 0; k <= m_max; ++k) {
    cdf += pmf[k];
    if (u <= cdf) return k;
  }
  return m_max;
}

inline double sample_tau(const MixingDistribution& q, rng::Stream& stream) {
  if (const auto* ig = std::get_if<QInvGammaSq>(&q)) {
    const double g = stream.next_gamma(ig->shape, ig->rate);
    return 1.0 / std::sqrt(g);
  }
  const auto& grid = std::get<QGrid>(q);
  double total = 0.0;
  for (double w : grid.weights) total += w;
  const double u = stream.next_uniform() * total;
  double cdf = 0.0;
  for (std::size_t i = 0; i < grid.taus.size(); ++i) {
    cdf += grid.weights[i];
    if (u <= cdf) return grid.taus[i];
  }
  return grid.taus.back();
}

struct PriorDraw {
  CoefficientVector f;
  double tau = 1.0;     // mixture: the drawn scale
  std::size_t m = 0;    // series: the drawn truncation
};

inline PriorDraw sample(const PriorSpec& prior, const SequenceScale& scale, rng::Stream& stream) {
  PriorDraw draw;
  if (const auto* s = std::get_if<SeriesPrior>(&prior)) {
    draw.m = sample_truncated_poisson(s->mu, s->m_max, stream);
    draw.f = CoefficientVector(draw.m);
    for (std::size_t i = 1; i <= draw.m; ++i) {
      const double z = s->p == SeriesDensity::gaussian ? stream.next_normal() : stream.next_laplace();
      draw.f.coeffs[i - 1] = s->kappa_at(i) * z;
    }
    return draw;
  }
  double alpha, tau;
  std::size_t truncation;
  if (const auto* g = std::get_if<GaussianPrior>(&prior)) {
    alpha = g->alpha;
    tau = g->tau;
    truncation = g->truncation;
  } else {
    const auto& m = std::get<MixturePrior>(prior);
    alpha = m.alpha;
    tau = sample_tau(m.q, stream);
    truncation = m.truncation;
  }
  draw.tau = tau;
  draw.f = CoefficientVector(truncation);
  for (std::size_t i = 1; i <= truncation; ++i)
    draw.f.coeffs[i - 1] = tau * std::pow(scale.b(i), -alpha) * stream.next_normal();
  return draw;
}

// Log density of (M, f_1..f_M) under the series prior. The support of f must
// lie within the first M coordinates.
inline double log_prior_density(const SeriesPrior& prior, const CoefficientVector& f,
                                std::size_t m) {
  if (m > prior.m_max) throw ConfigError("series prior: M exceeds m_max");
  for (std::size_t i = m + 1; i <= f.size(); ++i)
    if (f.coeffs[i - 1] != 0.0)
      throw ConfigError("series prior: coefficient support beyond M");
  double lp = truncated_poisson_log_pmf(m, prior.mu, prior.m_max);
  for (std::size_t i = 1; i <= m; ++i) {
    const double k = prior.kappa_at(i);
    const double x = f.coef(i) / k;
    if (prior.p == SeriesDensity::gaussian)
      lp += -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * x * x - std::log(k);
    else
      lp += -std::numbers::ln2 - std::abs(x) - std::log(k);
  }
  return lp;
}

struct MassPoint {
  double epsilon = 0.0;
  double neg_log_p = 0.0;
  double std_error = 0.0;   // delta-method standard error of -log p
  std::size_t hits = 0;
  bool reliable = false;    // at least 50 hits
};

// Monte-Carlo estimate of -log Pi(||Af - Af0|| < eps) on a grid of radii.
inline std::vector<MassPoint> prior_mass_curve(const PriorSpec& prior, const SequenceScale& scale,
                                               const ForwardOperator& op,
                                               const CoefficientVector& f0,
                                               std::vector<double> epsilons, std::size_t n_draws,
                                               std::uint64_t seed) {
  validate_prior(prior, scale);
  std::sort(epsilons.begin(), epsilons.end());
  const CoefficientVector af0 = op.apply(f0);
  std::vector<std::size_t> hits(epsilons.size(), 0);
  for (std::size_t dcol = 0; dcol < n_draws; ++dcol) {
    rng::Stream stream = rng::Stream::keyed({seed, rng::tag::prior, dcol});
    const PriorDraw draw = sample(prior, scale, stream);
    const double dist = l2_norm(op.apply(draw.f) - af0);
    // dist < eps for every eps above it in the sorted grid
    const auto it = std::upper_bound(epsilons.begin(), epsilons.end(), dist);
    for (std::size_t e = static_cast<std::size_t>(it - epsilons.begin()); e < epsilons.size(); ++e)
      ++hits[e];
  }
  std::vector<MassPoint> out(epsilons.size());
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    MassPoint& pt = out[e];
    pt.epsilon = epsilons[e];
    pt.hits = hits[e];
    pt.reliable = hits[e] >= 50;
    if (hits[e] == 0) {
      pt.neg_log_p = std::numeric_limits<double>::infinity();
      pt.std_error = std::numeric_limits<double>::infinity();
    } else {
      const double p = static_cast<double>(hits[e]) / static_cast<double>(n_draws);
      pt.neg_log_p = -std::log(p);
      pt.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n_draws)) / p;
    }
  }
  return out;
}

struct MixtureConditionReport {
  bool support_ok = false;
  double small_t_ratio_max = 0.0;  // max of -log Q((t,2t)) * t^2 over the small grid
  double large_t_ratio_max = 0.0;  // max of -log Q((t,2t)) * t^{-d/(alpha-d/2)}
  bool finite = false;
};

inline double mixing_interval_mass(const MixingDistribution& q, double t_lo, double t_hi) {
  if (const auto* ig = std::get_if<QInvGammaSq>(&q)) {
    // tau in (t_lo, t_hi) iff 1/tau^2 in (1/t_hi^2, 1/t_lo^2)
    return gamma_interval(1.0 / (t_hi * t_hi), 1.0 / (t_lo * t_lo), ig->shape, ig->rate);
  }
  const auto& grid = std::get<QGrid>(q);
  double total = 0.0, inside = 0.0;
  for (std::size_t i = 0; i < grid.taus.size(); ++i) {
    total += grid.weights[i];
    if (grid.taus[i] > t_lo && grid.taus[i] < t_hi) inside += grid.weights[i];
  }
  return total > 0.0 ? inside / total : 0.0;
}

// Empirical check of the mixing-tail condition: -log Q((t,2t)) should grow no
// faster than t^{-2} as t -> 0 and t^{d/(alpha-d/2)} as t -> infinity. The
// report surfaces the observed constants; it does not assert any particular
// bound.
inline MixtureConditionReport check_mixture_condition(const MixturePrior& prior, double d,
                                                      const std::vector<double>& t_small,
                                                      const std::vector<double>& t_large) {
  MixtureConditionReport rep;
  rep.support_ok = std::holds_alternative<QInvGammaSq>(prior.q);
  if (!rep.support_ok) return rep;  // discrete grids never have full support
  const double large_exp = d / (prior.alpha - d / 2.0);
  rep.finite = true;
  for (double t : t_small) {
    const double mass = mixing_interval_mass(prior.q, t, 2.0 * t);
    if (mass <= 0.0) {
      rep.finite = false;
      continue;
    }
    rep.small_t_ratio_max = std::max(rep.small_t_ratio_max, -std::log(mass) * t * t);
  }
  for (double t : t_large) {
    const double mass = mixing_interval_mass(prior.q, t, 2.0 * t);
    if (mass <= 0.0) {
      rep.finite = false;
      continue;
    }
    rep.large_t_ratio_max =
        std::max(rep.large_t_ratio_max, -std::log(mass) * std::pow(t, -large_exp));
  }
  return rep;
}

// Numeric check of the scaling-sequence envelope
// i^{-beta0/d} (log i)^{-1/w} <= C kappa_i <= C^2 i^{alpha_exp} for i <= i_max.
inline bool series_scaling_condition_ok(const SeriesPrior& prior, double d, double beta0,
                                        double w, double alpha_exp, std::size_t i_max = 10000,
                                        double constant = 10.0) {
  for (std::size_t i = 1; i <= i_max; ++i) {
    const double k = prior.kappa_at(i);
    const double lower =
        std::pow(static_cast<double>(i), -beta0 / d) *
        (i > 1 ? std::pow(std::log(static_cast<double>(i)), -1.0 / w) : 1.0);
    if (lower > constant * k) return false;
    if (k > constant * std::pow(static_cast<double>(i), alpha_exp)) return false;
  }
  return true;
}

}  // namespace scalebayes

#endif
