#ifndef SCALEBAYES_RATES_HPP
#define SCALEBAYES_RATES_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scalebayes/errors.hpp"

namespace scalebayes {

enum class PriorKind { series, gaussian, mixture };

inline std::string to_string(PriorKind k) {
  switch (k) {
    case PriorKind::series: return "series";
    case PriorKind::gaussian: return "gaussian";
    case PriorKind::mixture: return "mixture";
  }
  return "?";
}

struct RateQuery {
  PriorKind prior_kind = PriorKind::gaussian;
  double alpha = 0.0;   // prior regularity; required for gaussian and mixture
  double beta = 1.0;    // truth regularity
  double gamma = 1.0;   // smoothing order of the operator
  double d = 1.0;       // effective dimension
};

inline void validate(const RateQuery& q) {
  if (!(q.beta > 0.0 && q.gamma > 0.0 && q.d > 0.0))
    throw ConfigError("rate query: beta, gamma, d must be positive");
  if (q.prior_kind != PriorKind::series && !(q.alpha > q.d / 2.0))
    throw ConfigError("rate query: alpha must exceed d/2");
  if (q.prior_kind == PriorKind::mixture && q.beta > q.alpha)
    throw ConfigError("rate query: the mixture rate requires beta <= alpha");
}

// beta / (2 beta + 2 gamma + d), the optimal exponent for beta-regular
// truths under a gamma-smoothing operator in dimension d.
inline double minimax_exponent(double beta, double gamma, double d) {
  if (!(beta > 0.0 && gamma > 0.0 && d > 0.0))
    throw ConfigError("minimax exponent: beta, gamma, d must be positive");
  return beta / (2.0 * beta + 2.0 * gamma + d);
}

struct AuxiliaryExponents {
  double epsilon_exponent = 0.0;           // direct-problem rate: eps_n ~ n^{-e}
  double j_exponent = 0.0;                 // Galerkin level: j_n ~ n^{e}
  std::optional<double> tau_exponent;      // deterministic scaling: tau_n ~ n^{e}
};

namespace detail {

// Formula-only versions; the public entry points validate first. The harness
// also calls these directly when it knowingly runs an experiment outside a
// theorem hypothesis (e.g. probing mixture adaptation beyond beta <= alpha).
inline double exponent_unchecked(const RateQuery& q) {
  switch (q.prior_kind) {
    case PriorKind::series:
    case PriorKind::mixture:
      return minimax_exponent(q.beta, q.gamma, q.d);
    case PriorKind::gaussian:
      return std::min(q.alpha - q.d / 2.0, q.beta) / (2.0 * q.alpha + 2.0 * q.gamma);
  }
  throw ConfigError("rate query: unknown prior kind");
}

inline AuxiliaryExponents auxiliary_unchecked(const RateQuery& q) {
  AuxiliaryExponents out;
  const double series_denom = 2.0 * q.beta + 2.0 * q.gamma + q.d;
  switch (q.prior_kind) {
    case PriorKind::series:
      out.epsilon_exponent = (q.beta + q.gamma) / series_denom;
      out.j_exponent = q.d / series_denom;
      break;
    case PriorKind::gaussian:
      out.epsilon_exponent =
          (std::min(q.beta, q.alpha - q.d / 2.0) + q.gamma) / (2.0 * q.alpha + 2.0 * q.gamma);
      out.j_exponent = q.d / (2.0 * q.alpha + 2.0 * q.gamma);
      out.tau_exponent = (q.alpha - q.d / 2.0 - q.beta) / series_denom;
      break;
    case PriorKind::mixture:
      out.epsilon_exponent = (q.beta + q.gamma) / series_denom;
      out.j_exponent = q.d / series_denom;
      out.tau_exponent = (q.alpha - q.d / 2.0 - q.beta) / series_denom;
      break;
  }
  return out;
}

}  // namespace detail

// Exponent e of the contraction rate n^{-e} (log factors excluded):
//   series   beta / (2 beta + 2 gamma + d)
//   gaussian ((alpha - d/2) ^ beta) / (2 alpha + 2 gamma)
//   mixture  beta / (2 beta + 2 gamma + d)
inline double theoretical_exponent(const RateQuery& q) {
  validate(q);
  return detail::exponent_unchecked(q);
}

// Exponents of the sequences the proofs choose, used to configure
// experiments (Galerkin levels and prior truncations track j_n).
inline AuxiliaryExponents auxiliary_sequences(const RateQuery& q) {
  validate(q);
  return detail::auxiliary_unchecked(q);
}

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  double r2 = 0.0;
  std::size_t n_points = 0;
};

// Ordinary least squares of log(value) on log(n).
inline SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw ConfigError("fit_slope: need at least 3 points");
  const std::size_t n = points.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(points[i].first > 0.0) || !(points[i].second > 0.0))
      throw ConfigError("fit_slope: points must be positive");
    x[i] = std::log(points[i].first);
    y[i] = std::log(points[i].second);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("fit_slope: degenerate abscissae");
  SlopeFit fit;
  fit.n_points = n;
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double resid = y[i] - intercept - fit.slope * x[i];
    rss += resid * resid;
  }
  fit.r2 = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  fit.std_error = n > 2 ? std::sqrt(rss / (static_cast<double>(n - 2) * sxx)) : 0.0;
  return fit;
}

}  // namespace scalebayes

#endif
