#ifndef SCALEBAYES_SCALES_HPP
#define SCALEBAYES_SCALES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "scalebayes/coefficients.hpp"
#include "scalebayes/errors.hpp"

namespace scalebayes {

// Smoothness scale in coefficient space, defined by its generator sequence
// b_1 <= b_2 <= ... -> infinity. The s-norm is (sum b_i^{2s} f_i^2)^{1/2} and
// the approximation numbers are delta(j,s) = b_j^{-s}.
//
// Two concrete scales are provided:
//   power(d):    b_i = i^{1/d}, so delta(j,s) = j^{-s/d};
//   volterra2d:  b at rank r is k*l*pi^2 for the r-th pair (k,l), pairs
//                ordered by increasing k*l with ties broken by smaller k.
class SequenceScale {
 public:
  enum class Kind { power, volterra2d };

  static SequenceScale power(double d) {
    if (!(d > 0.0)) throw ConfigError("scale: effective dimension d must be positive");
    SequenceScale s;
    s.kind_ = Kind::power;
    s.d_ = d;
    return s;
  }

  static SequenceScale volterra2d() {
    SequenceScale s;
    s.kind_ = Kind::volterra2d;
    s.d_ = 2.0;
    s.pairs_ = std::make_shared<PairTable>();
    return s;
  }

  Kind kind() const { return kind_; }
  double d() const { return d_; }

  // Generator value b_i, i >= 1.
  double b(std::size_t i) const {
    if (i < 1) throw ConfigError("scale: index must be >= 1");
    if (kind_ == Kind::power) return std::pow(static_cast<double>(i), 1.0 / d_);
    const auto& p = pair_at(i);
    return static_cast<double>(p.first) * static_cast<double>(p.second) *
           std::numbers::pi * std::numbers::pi;
  }

  // Multi-index (k,l) behind rank i of the 2D scale.
  std::pair<int, int> pair_at(std::size_t i) const {
    require_volterra();
    return pairs_->at(i);
  }

  // Inverse of pair_at. Grows the table as needed.
  std::size_t rank_of(int k, int l) const {
    require_volterra();
    return pairs_->rank(k, l);
  }

  std::string label() const { return kind_ == Kind::power ? "power" : "volterra2d"; }

 private:
  // Memoized enumeration of (k,l) pairs. All access goes through the mutex so
  // that scale copies sharing the table stay safe under concurrent use.
  struct PairTable {
    std::mutex mutex;
    std::vector<std::pair<int, int>> list;  // sorted by (k*l, k)

    std::pair<int, int> at(std::size_t i) {
      std::lock_guard<std::mutex> lock(mutex);
      ensure_locked(i);
      return list[i - 1];
    }

    std::size_t rank(int k, int l) {
      // The rank of (k,l) is bounded by the count of pairs with product
      // <= k*l, so ensuring that many entries suffices.
      const long long p = 1LL * k * l;
      long long bound = 0;
      for (long long kk = 1; kk <= p; ++kk) bound += p / kk;
      std::lock_guard<std::mutex> lock(mutex);
      ensure_locked(static_cast<std::size_t>(bound));
      for (std::size_t r = 0; r < list.size(); ++r)
        if (list[r].first == k && list[r].second == l) return r + 1;
      throw NumericalError("scale: pair lookup failed");
    }

   private:
    void ensure_locked(std::size_t count) {
      if (list.size() >= count) return;
      // Enumerate all pairs with product <= P; the number of such pairs is
      // sum_k floor(P/k), which we grow until it covers the request.
      long long product_cap = 4;
      auto pairs_below = [](long long cap) {
        long long n = 0;
        for (long long k = 1; k <= cap; ++k) n += cap / k;
        return n;
      };
      while (pairs_below(product_cap) < static_cast<long long>(count)) product_cap *= 2;
      std::vector<std::pair<int, int>> all;
      all.reserve(static_cast<std::size_t>(pairs_below(product_cap)));
      for (long long k = 1; k <= product_cap; ++k)
        for (long long l = 1; k * l <= product_cap; ++l)
          all.emplace_back(static_cast<int>(k), static_cast<int>(l));
      std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        const long long pa = 1LL * a.first * a.second;
        const long long pb = 1LL * b.first * b.second;
        if (pa != pb) return pa < pb;
        return a.first < b.first;
      });
      list = std::move(all);
    }
  };

  void require_volterra() const {
    if (kind_ != Kind::volterra2d) throw ConfigError("scale: multi-index map only exists for the 2D scale");
  }

  Kind kind_ = Kind::power;
  double d_ = 1.0;
  std::shared_ptr<PairTable> pairs_;  // shared so copies stay cheap
};

// ||f||_s = (sum_i b_i^{2s} f_i^2)^{1/2}, exact on the truncation. Negative s
// gives the closed-form dual norm.
inline double norm(const CoefficientVector& f, double s, const SequenceScale& scale) {
  if (!f.all_finite() || !std::isfinite(s)) throw ConfigError("norm: non-finite input");
  double acc = 0.0;
  for (std::size_t i = 1; i <= f.size(); ++i) {
    const double w = std::pow(scale.b(i), 2.0 * s);
    acc += w * f.coeffs[i - 1] * f.coeffs[i - 1];
  }
  return std::sqrt(acc);
}

// Orthogonal projection onto V_j = span of the first j-1 coordinates.
inline CoefficientVector project(const CoefficientVector& f, std::size_t j) {
  if (j < 1) throw ConfigError("project: level j must be >= 1");
  CoefficientVector out = f;
  if (out.size() >= j) out.coeffs.resize(j - 1);
  return out;
}

// delta(j,s) = b_j^{-s}.
inline double approx_number(std::size_t j, double s, const SequenceScale& scale) {
  if (j < 1) throw ConfigError("approx_number: level j must be >= 1");
  if (s < 0.0) throw ConfigError("approx_number: order s must be >= 0");
  return std::pow(scale.b(j), -s);
}

// ||f||_{-s} for s >= 0, via the closed form.
inline double dual_norm(const CoefficientVector& f, double s, const SequenceScale& scale) {
  if (s < 0.0) throw ConfigError("dual_norm: order s must be >= 0");
  return norm(f, -s, scale);
}

// The g with ||g||_s = 1 attaining sup <f,g>_0; the attained value is
// dual_norm(f, s). Exposed so tests can verify the duality identity.
inline CoefficientVector dual_maximizer(const CoefficientVector& f, double s,
                                        const SequenceScale& scale) {
  const double dn = dual_norm(f, s, scale);
  CoefficientVector g(f.size());
  if (dn == 0.0) return g;
  for (std::size_t i = 1; i <= f.size(); ++i)
    g.coeffs[i - 1] = std::pow(scale.b(i), -2.0 * s) * f.coeffs[i - 1] / dn;
  return g;
}

}  // namespace scalebayes

#endif
