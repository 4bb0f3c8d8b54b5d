#ifndef SCALEBAYES_GALERKIN_HPP
#define SCALEBAYES_GALERKIN_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "scalebayes/coefficients.hpp"
#include "scalebayes/errors.hpp"
#include "scalebayes/operators.hpp"
#include "scalebayes/priors.hpp"
#include "scalebayes/rng.hpp"
#include "scalebayes/scales.hpp"

namespace scalebayes {

// Least-squares Galerkin solver at level j: the solution f in V_j satisfies
// <A f, A phi_k> = <g, A phi_k> for all k < j. Solves go through the normal
// equations with a Cholesky factorization plus iterative refinement, and
// every solve is checked against the orthogonality residual bound.
class GalerkinSystem {
 public:
  GalerkinSystem(ForwardOperator op, std::size_t j)
      : op_(std::move(op)), j_(j) {
    if (j < 2) throw ConfigError("galerkin: level j must be >= 2");
    range_cols_ = op_.range_matrix(j);
    gram_ = range_cols_.transpose() * range_cols_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_, Eigen::EigenvaluesOnly);
    const double lambda_min = eig.eigenvalues()(0);
    const double lambda_max = eig.eigenvalues()(eig.eigenvalues().size() - 1);
    if (!(lambda_min > 0.0))
      throw NumericalError("galerkin: singular Gram matrix at level " + std::to_string(j));
    const double cond = lambda_max / lambda_min;
    if (cond > 1e12)
      throw NumericalError("galerkin: Gram condition number " + std::to_string(cond) +
                           " exceeds 1e12 at level " + std::to_string(j) +
                           "; operator/scale pairing looks mis-specified");
    llt_.compute(gram_);
    if (llt_.info() != Eigen::Success)
      throw NumericalError("galerkin: Cholesky factorization failed at level " + std::to_string(j));
  }

  const ForwardOperator& op() const { return op_; }
  std::size_t level() const { return j_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& range_columns() const { return range_cols_; }
  const Eigen::LLT<Eigen::MatrixXd>& factorization() const { return llt_; }

  // ||R_j|| for R_j = A^{-1} Q_j, the inverse of the smallest singular value
  // of the column matrix of A phi_k.
  double operator_norm_rj() const {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(range_cols_);
    const double sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(sigma_min > 0.0))
      throw NumericalError("galerkin: zero singular value at level " + std::to_string(j_));
    return 1.0 / sigma_min;
  }

  CoefficientVector solve(const CoefficientVector& g) const {
    Eigen::VectorXd gv = to_range_vector(g);
    Eigen::VectorXd rhs = range_cols_.transpose() * gv;
    Eigen::VectorXd c = refine(rhs);
    const double gnorm = gv.norm();
    const double residual = (gram_ * c - rhs).cwiseAbs().maxCoeff();
    if (residual > 1e-8 * (gnorm > 0.0 ? gnorm : 1.0))
      throw NumericalError("galerkin: orthogonality residual " + std::to_string(residual) +
                           " exceeds tolerance at level " + std::to_string(j_));
    CoefficientVector out(j_ - 1);
    for (std::size_t k = 0; k < j_ - 1; ++k) out.coeffs[k] = c(static_cast<Eigen::Index>(k));
    return out;
  }

  // Batched solve, one column per right-hand side vector of range data.
  Eigen::MatrixXd solve_columns(const Eigen::MatrixXd& g_cols) const {
    Eigen::MatrixXd rhs = range_cols_.transpose() * g_cols;
    Eigen::MatrixXd c = llt_.solve(rhs);
    c += llt_.solve(rhs - gram_ * c);
    Eigen::MatrixXd res = gram_ * c - rhs;
    for (Eigen::Index col = 0; col < res.cols(); ++col) {
      const double gnorm = g_cols.col(col).norm();
      if (res.col(col).cwiseAbs().maxCoeff() > 1e-8 * (gnorm > 0.0 ? gnorm : 1.0))
        throw NumericalError("galerkin: orthogonality residual exceeds tolerance in batch solve");
    }
    return c;
  }

  Eigen::VectorXd to_range_vector(const CoefficientVector& g) const {
    if (g.size() > op_.range_dim())
      throw DimensionError("galerkin: data has more coordinates than the operator range");
    Eigen::VectorXd gv = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(op_.range_dim()));
    for (std::size_t i = 0; i < g.size(); ++i) gv(static_cast<Eigen::Index>(i)) = g.coeffs[i];
    return gv;
  }

 private:
  Eigen::VectorXd refine(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd c = llt_.solve(rhs);
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXd res = rhs - gram_ * c;
      if (res.cwiseAbs().maxCoeff() < 1e-14 * (rhs.norm() + 1.0)) break;
      c += llt_.solve(res);
    }
    return c;
  }

  ForwardOperator op_;
  std::size_t j_;
  Eigen::MatrixXd range_cols_;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

inline CoefficientVector galerkin_solve(const GalerkinSystem& sys, const CoefficientVector& g) {
  return sys.solve(g);
}

inline double operator_norm_rj(const GalerkinSystem& sys) { return sys.operator_norm_rj(); }

// Reconstruction error ||f^{(j)} - f0||_0 along a grid of levels.
inline std::vector<std::pair<std::size_t, double>> galerkin_error_curve(
    const ForwardOperator& op, const SequenceScale& scale, const CoefficientVector& f0,
    const std::vector<std::size_t>& j_list) {
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(j_list.size());
  const CoefficientVector g = op.apply(f0);
  for (std::size_t j : j_list) {
    GalerkinSystem sys(op, j);
    const CoefficientVector fj = sys.solve(g);
    out.emplace_back(j, norm(fj - f0, 0.0, scale));
  }
  return out;
}

// Galerkin inversion for an operator pair (A, A0) with a common inverse,
// where Phi = A - A0 occupies a dedicated block of range coordinates: the
// block is zeroed out of the data and the A0 system is solved on the rest.
inline CoefficientVector modified_galerkin_solve(const ForwardOperator& op_a,
                                                 const ForwardOperator& op_a0,
                                                 std::size_t j, const CoefficientVector& g) {
  if (op_a.kind() != ForwardOperator::Kind::volterra2d_a ||
      op_a0.kind() != ForwardOperator::Kind::volterra2d_a0)
    throw ConfigError("modified galerkin: supported for the 2D integration pair (A, A0)");
  if (op_a.domain_dim() != op_a0.domain_dim())
    throw DimensionError("modified galerkin: operator pair has mismatched domains");
  const std::size_t cut = op_a.boundary_block_begin();
  CoefficientVector cleaned = g;
  if (cleaned.size() > cut) cleaned.coeffs.resize(cut);
  GalerkinSystem sys(op_a0, j);
  return sys.solve(cleaned);
}

// Monte-Carlo mean of the Galerkin residual ||f^{(j)} - f||_0 under Gaussian
// prior draws f_i = tau * b_i^{-alpha} Z_i, i <= truncation.
inline std::vector<std::pair<std::size_t, double>> prior_galerkin_residual_curve(
    double alpha, double tau, std::size_t truncation, const SequenceScale& scale,
    const ForwardOperator& op, const std::vector<std::size_t>& j_list, std::size_t n_draws,
    std::uint64_t seed) {
  if (!(alpha > scale.d() / 2.0))
    throw ConfigError("prior residual curve: alpha must exceed d/2");
  if (truncation > op.domain_dim())
    throw DimensionError("prior residual curve: prior truncation exceeds operator domain");

  // Draw once, reuse the same draws for every level.
  Eigen::MatrixXd draws(truncation, n_draws);
  std::vector<double> sd(truncation);
  for (std::size_t i = 1; i <= truncation; ++i) sd[i - 1] = tau * std::pow(scale.b(i), -alpha);
  for (std::size_t dcol = 0; dcol < n_draws; ++dcol) {
    rng::Stream s = rng::Stream::keyed({seed, rng::tag::prior, dcol});
    for (std::size_t i = 0; i < truncation; ++i)
      draws(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(dcol)) = sd[i] * s.next_normal();
  }

  Eigen::MatrixXd images(op.range_dim(), n_draws);
  images.setZero();
  for (std::size_t dcol = 0; dcol < n_draws; ++dcol) {
    CoefficientVector f(truncation);
    for (std::size_t i = 0; i < truncation; ++i)
      f.coeffs[i] = draws(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(dcol));
    const CoefficientVector af = op.apply(f);
    for (std::size_t i = 0; i < af.size(); ++i)
      images(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(dcol)) = af.coeffs[i];
  }

  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(j_list.size());
  for (std::size_t j : j_list) {
    GalerkinSystem sys(op, j);
    Eigen::MatrixXd c = sys.solve_columns(images);
    double mean = 0.0;
    for (std::size_t dcol = 0; dcol < n_draws; ++dcol) {
      double acc = 0.0;
      for (std::size_t i = 0; i < truncation; ++i) {
        const double sol = i < j - 1 ? c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(dcol)) : 0.0;
        const double diff = sol - draws(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(dcol));
        acc += diff * diff;
      }
      mean += std::sqrt(acc);
    }
    out.emplace_back(j, mean / static_cast<double>(n_draws));
  }
  return out;
}

inline std::vector<std::pair<std::size_t, double>> prior_galerkin_residual_curve(
    const GaussianPrior& prior, const SequenceScale& scale, const ForwardOperator& op,
    const std::vector<std::size_t>& j_list, std::size_t n_draws, std::uint64_t seed) {
  return prior_galerkin_residual_curve(prior.alpha, prior.tau, prior.truncation, scale, op,
                                       j_list, n_draws, seed);
}

}  // namespace scalebayes

#endif
