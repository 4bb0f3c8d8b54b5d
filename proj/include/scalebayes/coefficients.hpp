#ifndef SCALEBAYES_COEFFICIENTS_HPP
#define SCALEBAYES_COEFFICIENTS_HPP

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "scalebayes/errors.hpp"

namespace scalebayes {

// A finitely truncated element of the coefficient space. Index i in formulas
// is 1-based; storage is 0-based, so coefficient i lives at coeffs[i-1].
// Length 0 is the zero element.
struct CoefficientVector {
  std::vector<double> coeffs;

  CoefficientVector() = default;
  explicit CoefficientVector(std::vector<double> c) : coeffs(std::move(c)) {}
  explicit CoefficientVector(std::size_t len, double value = 0.0) : coeffs(len, value) {}

  static CoefficientVector unit(std::size_t i, std::size_t len = 0) {
    CoefficientVector e(len > i ? len : i);
    e.coeffs[i - 1] = 1.0;
    return e;
  }

  std::size_t size() const { return coeffs.size(); }

  // 1-based coefficient access; zero beyond the truncation.
  double coef(std::size_t i) const {
    return (i >= 1 && i <= coeffs.size()) ? coeffs[i - 1] : 0.0;
  }

  bool all_finite() const {
    for (double v : coeffs)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline CoefficientVector operator+(const CoefficientVector& a, const CoefficientVector& b) {
  CoefficientVector out(a.size() > b.size() ? a.size() : b.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.coeffs[i] = (i < a.size() ? a.coeffs[i] : 0.0) + (i < b.size() ? b.coeffs[i] : 0.0);
  return out;
}

inline CoefficientVector operator-(const CoefficientVector& a, const CoefficientVector& b) {
  CoefficientVector out(a.size() > b.size() ? a.size() : b.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.coeffs[i] = (i < a.size() ? a.coeffs[i] : 0.0) - (i < b.size() ? b.coeffs[i] : 0.0);
  return out;
}

inline CoefficientVector operator*(double s, const CoefficientVector& a) {
  CoefficientVector out = a;
  for (double& v : out.coeffs) v *= s;
  return out;
}

inline double inner_product(const CoefficientVector& a, const CoefficientVector& b) {
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a.coeffs[i] * b.coeffs[i];
  return acc;
}

// Plain l2 norm (the H_0 norm for unit generator weights).
inline double l2_norm(const CoefficientVector& a) {
  double acc = 0.0;
  for (double v : a.coeffs) acc += v * v;
  return std::sqrt(acc);
}

}  // namespace scalebayes

#endif
