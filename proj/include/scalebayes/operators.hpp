#ifndef SCALEBAYES_OPERATORS_HPP
#define SCALEBAYES_OPERATORS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "scalebayes/coefficients.hpp"
#include "scalebayes/errors.hpp"
#include "scalebayes/scales.hpp"

namespace scalebayes {

// Forward operator acting on coefficient vectors, with a declared smoothing
// order gamma. Domain coefficients are w.r.t. the scale basis; range
// coefficients are w.r.t. a fixed orthonormal basis of the image space.
//
// The 2D integration operators use the range layout
//   [0, P)         cos(k pi x) cos(l pi y) pairs, ordered like the 2D scale,
//   [P, P+K)       sqrt(2) cos(k pi x), k = 1..K,
//   [P+K, P+K+L)   sqrt(2) cos(l pi y), l = 1..L,
//   [P+K+L]        the constant function 1,
// so the A0 variant touches only the first block and the boundary terms of
// the A variant live in a block of their own.
class ForwardOperator {
 public:
  enum class Kind { diagonal, poisson_sine, volterra2d_a, volterra2d_a0, dense_matrix };

  static ForwardOperator diagonal(std::vector<double> singular_values, double gamma) {
    ForwardOperator op;
    op.kind_ = Kind::diagonal;
    op.gamma_ = gamma;
    op.diag_ = std::move(singular_values);
    for (double a : op.diag_)
      if (a == 0.0 || !std::isfinite(a))
        throw ConfigError("operator: diagonal entries must be finite and nonzero");
    op.domain_dim_ = op.range_dim_ = op.diag_.size();
    op.label_ = "diagonal";
    return op;
  }

  // a_i = b_i^{-gamma}: smoothing ratio is exactly 1 against the given scale.
  static ForwardOperator diagonal_smoothing(const SequenceScale& scale, double gamma,
                                            std::size_t dim) {
    std::vector<double> a(dim);
    for (std::size_t i = 1; i <= dim; ++i) a[i - 1] = std::pow(scale.b(i), -gamma);
    ForwardOperator op = diagonal(std::move(a), gamma);
    op.label_ = "diagonal_smoothing";
    return op;
  }

  // (Af)'' = f on (0,1) with Af(0) = Af(1) = 0, in the sine basis:
  // A sin_k = -sin_k / (k pi)^2. Smoothing of order 2.
  static ForwardOperator poisson_sine(std::size_t dim) {
    std::vector<double> a(dim);
    for (std::size_t k = 1; k <= dim; ++k)
      a[k - 1] = -1.0 / (static_cast<double>(k * k) * std::numbers::pi * std::numbers::pi);
    ForwardOperator op = diagonal(std::move(a), 2.0);
    op.kind_ = Kind::poisson_sine;
    op.label_ = "poisson";
    return op;
  }

  static ForwardOperator volterra2d_a0(std::size_t max_pairs) {
    ForwardOperator op = volterra_base(max_pairs);
    op.kind_ = Kind::volterra2d_a0;
    op.range_dim_ = max_pairs;
    op.label_ = "volterra2d_A0";
    return op;
  }

  static ForwardOperator volterra2d_a(std::size_t max_pairs) {
    ForwardOperator op = volterra_base(max_pairs);
    op.kind_ = Kind::volterra2d_a;
    op.range_dim_ = max_pairs + op.max_k_ + op.max_l_ + 1;
    op.label_ = "volterra2d_A";
    return op;
  }

  // Matrix given in declared domain/range bases, row-major rows x cols.
  static ForwardOperator dense_matrix(Eigen::MatrixXd m, double gamma) {
    ForwardOperator op;
    op.kind_ = Kind::dense_matrix;
    op.gamma_ = gamma;
    op.domain_dim_ = static_cast<std::size_t>(m.cols());
    op.range_dim_ = static_cast<std::size_t>(m.rows());
    op.matrix_ = std::move(m);
    op.label_ = "matrix";
    return op;
  }

  Kind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  std::size_t domain_dim() const { return domain_dim_; }
  std::size_t range_dim() const { return range_dim_; }
  const std::string& label() const { return label_; }

  // True when basis vector i maps to a multiple of range vector i; these
  // operators admit the coordinatewise conjugate posterior.
  bool is_rank_diagonal() const {
    return kind_ == Kind::diagonal || kind_ == Kind::poisson_sine ||
           kind_ == Kind::volterra2d_a0;
  }

  double diagonal_coefficient(std::size_t i) const {
    if (!is_rank_diagonal()) throw ConfigError("operator: not diagonal in rank space");
    if (kind_ == Kind::volterra2d_a0) {
      const auto [k, l] = pair_scale_.pair_at(i);
      return 1.0 / (static_cast<double>(k) * static_cast<double>(l) *
                    std::numbers::pi * std::numbers::pi);
    }
    return diag_.at(i - 1);
  }

  // First range index (0-based) of the boundary block of the 2D operator A.
  std::size_t boundary_block_begin() const {
    if (kind_ != Kind::volterra2d_a && kind_ != Kind::volterra2d_a0)
      throw ConfigError("operator: no boundary block");
    return domain_dim_;
  }

  CoefficientVector apply(const CoefficientVector& f) const {
    if (f.size() > domain_dim_)
      throw DimensionError("operator: input has " + std::to_string(f.size()) +
                           " coefficients, domain holds " + std::to_string(domain_dim_));
    switch (kind_) {
      case Kind::diagonal:
      case Kind::poisson_sine: {
        CoefficientVector out(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) out.coeffs[i] = diag_[i] * f.coeffs[i];
        return out;
      }
      case Kind::volterra2d_a0: {
        CoefficientVector out(f.size());
        for (std::size_t r = 1; r <= f.size(); ++r)
          out.coeffs[r - 1] = diagonal_coefficient(r) * f.coeffs[r - 1];
        return out;
      }
      case Kind::volterra2d_a: {
        CoefficientVector out(range_dim_);
        const double sqrt2 = std::numbers::sqrt2;
        for (std::size_t r = 1; r <= f.size(); ++r) {
          const double fr = f.coeffs[r - 1];
          if (fr == 0.0) continue;
          const auto [k, l] = pair_scale_.pair_at(r);
          const double c = fr / (static_cast<double>(k) * static_cast<double>(l) *
                                 std::numbers::pi * std::numbers::pi);
          out.coeffs[r - 1] += c;
          out.coeffs[domain_dim_ + (k - 1)] -= sqrt2 * c;
          out.coeffs[domain_dim_ + max_k_ + (l - 1)] -= sqrt2 * c;
          out.coeffs[domain_dim_ + max_k_ + max_l_] += 2.0 * c;
        }
        return out;
      }
      case Kind::dense_matrix: {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(matrix_.cols());
        for (std::size_t i = 0; i < f.size(); ++i) x[static_cast<Eigen::Index>(i)] = f.coeffs[i];
        Eigen::VectorXd y = matrix_ * x;
        CoefficientVector out(range_dim_);
        for (std::size_t i = 0; i < range_dim_; ++i) out.coeffs[i] = y[static_cast<Eigen::Index>(i)];
        return out;
      }
    }
    throw NumericalError("operator: unknown kind");
  }

  // Columns are the range coefficients of A phi_k, k = 1..j-1.
  Eigen::MatrixXd range_matrix(std::size_t j) const {
    if (j < 2) throw ConfigError("operator: range matrix needs j >= 2");
    if (j - 1 > domain_dim_) throw DimensionError("operator: level j exceeds domain dimension");
    Eigen::MatrixXd b(range_dim_, j - 1);
    b.setZero();
    for (std::size_t k = 1; k < j; ++k) {
      CoefficientVector col = apply(CoefficientVector::unit(k, domain_dim_));
      for (std::size_t i = 0; i < col.size(); ++i)
        b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k - 1)) = col.coeffs[i];
    }
    return b;
  }

  // Gram matrix G_kl = <A phi_k, A phi_l>, strictly positive definite when
  // the operator is injective on V_j.
  Eigen::MatrixXd gram_matrix(std::size_t j) const {
    Eigen::MatrixXd b = range_matrix(j);
    Eigen::MatrixXd g = b.transpose() * b;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
      throw NumericalError("operator: Gram matrix is singular at level " + std::to_string(j) +
                           "; operator is not injective on V_j");
    return g;
  }

 private:
  static ForwardOperator volterra_base(std::size_t max_pairs) {
    if (max_pairs < 1) throw ConfigError("operator: need at least one pair");
    ForwardOperator op;
    op.gamma_ = 1.0;
    op.pair_scale_ = SequenceScale::volterra2d();
    op.domain_dim_ = max_pairs;
    int mk = 0, ml = 0;
    for (std::size_t r = 1; r <= max_pairs; ++r) {
      const auto [k, l] = op.pair_scale_.pair_at(r);
      mk = k > mk ? k : mk;
      ml = l > ml ? l : ml;
    }
    op.max_k_ = static_cast<std::size_t>(mk);
    op.max_l_ = static_cast<std::size_t>(ml);
    return op;
  }

  Kind kind_ = Kind::diagonal;
  double gamma_ = 1.0;
  std::size_t domain_dim_ = 0;
  std::size_t range_dim_ = 0;
  std::vector<double> diag_;
  Eigen::MatrixXd matrix_;
  SequenceScale pair_scale_ = SequenceScale::power(1.0);
  std::size_t max_k_ = 0, max_l_ = 0;
  std::string label_;
};

// Extremes of ||Af|| / ||f||_{-gamma} over a probe set; both ends close to a
// common constant certify the smoothing property for the concrete operator.
inline std::pair<double, double> smoothing_ratio(const ForwardOperator& op,
                                                 const SequenceScale& scale,
                                                 const std::vector<CoefficientVector>& probes) {
  if (probes.empty()) throw ConfigError("smoothing_ratio: need at least one probe");
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& f : probes) {
    const double denom = dual_norm(f, op.gamma(), scale);
    if (denom == 0.0) throw ConfigError("smoothing_ratio: zero probe");
    const double r = l2_norm(op.apply(f)) / denom;
    if (first) {
      lo = hi = r;
      first = false;
    } else {
      lo = r < lo ? r : lo;
      hi = r > hi ? r : hi;
    }
  }
  return {lo, hi};
}

}  // namespace scalebayes

#endif
