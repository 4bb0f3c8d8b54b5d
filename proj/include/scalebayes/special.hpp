#ifndef SCALEBAYES_SPECIAL_HPP
#define SCALEBAYES_SPECIAL_HPP

#include <cmath>
#include <limits>

#include "scalebayes/errors.hpp"

namespace scalebayes {

namespace special_detail {

// lower-tail series, valid for x < a + 1
inline double gammp_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// upper-tail Lentz continued fraction, valid for x > a + 1
inline double gammq_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace special_detail

// Regularized lower incomplete gamma P(a, x).
inline double gammp(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw ConfigError("gammp: bad arguments");
  if (x == 0.0) return 0.0;
  return x < a + 1.0 ? special_detail::gammp_series(a, x)
                     : 1.0 - special_detail::gammq_cf(a, x);
}

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed without
// cancellation in the far right tail.
inline double gammq(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw ConfigError("gammq: bad arguments");
  if (x == 0.0) return 1.0;
  return x < a + 1.0 ? 1.0 - special_detail::gammp_series(a, x)
                     : special_detail::gammq_cf(a, x);
}

inline double gamma_cdf(double x, double shape, double rate) {
  if (x <= 0.0) return 0.0;
  return gammp(shape, rate * x);
}

// P(x_lo < G < x_hi) for G ~ Gamma(shape, rate), picking the tail whose
// difference does not cancel.
inline double gamma_interval(double x_lo, double x_hi, double shape, double rate) {
  if (x_hi <= x_lo) return 0.0;
  x_lo = x_lo < 0.0 ? 0.0 : x_lo;
  if (rate * x_lo > shape + 1.0)
    return gammq(shape, rate * x_lo) - gammq(shape, rate * x_hi);
  return gamma_cdf(x_hi, shape, rate) - gamma_cdf(x_lo, shape, rate);
}

inline double gamma_pdf(double x, double shape, double rate) {
  if (x <= 0.0) return 0.0;
  return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
                  std::lgamma(shape));
}

inline double gamma_quantile(double p, double shape, double rate) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("gamma_quantile: p must be in (0,1)");
  double lo = 0.0;
  double hi = shape / rate + 1.0;
  while (gamma_cdf(hi, shape, rate) < p) {
    hi *= 2.0;
    if (hi > 1e300) throw NumericalError("gamma_quantile: failed to bracket");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gamma_cdf(mid, shape, rate) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace scalebayes

#endif
