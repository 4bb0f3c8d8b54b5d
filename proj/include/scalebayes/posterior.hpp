#ifndef SCALEBAYES_POSTERIOR_HPP
#define SCALEBAYES_POSTERIOR_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "scalebayes/coefficients.hpp"
#include "scalebayes/errors.hpp"
#include "scalebayes/model.hpp"
#include "scalebayes/operators.hpp"
#include "scalebayes/parallel.hpp"
#include "scalebayes/priors.hpp"
#include "scalebayes/rng.hpp"
#include "scalebayes/scales.hpp"
#include "scalebayes/special.hpp"

namespace scalebayes {

struct McmcSettings {
  std::size_t n_iter = 4000;   // per chain, including burn-in
  double burn_frac = 0.2;
  std::size_t chains = 4;
  std::uint64_t seed = 1;
  double rw_step = 0.5;        // random-walk step, in units of kappa_i
  std::size_t max_kept = 20000;
};

struct McmcDiagnostics {
  double birth_acceptance = 0.0;
  double death_acceptance = 0.0;
  double rw_acceptance = 1.0;    // Gibbs path accepts by construction
  double ess = 0.0;              // effective sample size of ||f|| across kept draws
  double split_rhat = 1.0;       // reported, not enforced
};

struct PosteriorResult {
  enum class Kind { exact, grid_mixture, samples };
  Kind kind = Kind::exact;

  // Per-coordinate marginals. For the samples kind these are empirical.
  std::vector<double> mean;
  std::vector<double> variance;

  // grid_mixture only: posterior over the scale grid plus the conjugate
  // moments per grid point (row t, column i).
  std::vector<double> tau_grid;
  std::vector<double> tau_weights;
  Eigen::MatrixXd tau_means;
  Eigen::MatrixXd tau_vars;

  // samples only.
  Eigen::MatrixXd samples;       // kept draws x coordinate
  std::vector<std::size_t> m_trace;
  McmcDiagnostics diagnostics;
};

// Exact conjugate posterior for a rank-diagonal operator and a Gaussian
// prior: coordinatewise variance (n a_i^2 + sd_i^{-2})^{-1} and mean
// v_i n a_i y_i; coordinates beyond the prior truncation are a point mass
// at zero.
inline PosteriorResult conjugate_posterior(const Observation& obs, const ForwardOperator& op,
                                           const GaussianPrior& prior,
                                           const SequenceScale& scale) {
  if (!op.is_rank_diagonal())
    throw ConfigError("conjugate posterior: operator is not rank-diagonal; use the MCMC engine");
  validate_prior(PriorSpec(prior), scale);
  if (prior.truncation < 1)
    throw ConfigError("conjugate posterior: prior truncation is not set");
  if (prior.truncation > obs.j_obs())
    throw ConfigError("conjugate posterior: prior truncation exceeds the observed window");
  PosteriorResult post;
  post.kind = PosteriorResult::Kind::exact;
  post.mean.resize(prior.truncation);
  post.variance.resize(prior.truncation);
  for (std::size_t i = 1; i <= prior.truncation; ++i) {
    const double a = op.diagonal_coefficient(i);
    const double sd = prior.tau * std::pow(scale.b(i), -prior.alpha);
    if (sd == 0.0) {
      post.mean[i - 1] = 0.0;
      post.variance[i - 1] = 0.0;
      continue;
    }
    const double v = 1.0 / (obs.n * a * a + 1.0 / (sd * sd));
    post.variance[i - 1] = v;
    post.mean[i - 1] = v * obs.n * a * obs.y[i - 1];
  }
  return post;
}

// Default scale grid: 80 log-spaced points two decades either side of the
// mixing median.
inline std::vector<double> default_tau_grid(const MixturePrior& prior) {
  if (const auto* grid = std::get_if<QGrid>(&prior.q)) return grid->taus;
  const auto& ig = std::get<QInvGammaSq>(prior.q);
  const double tau_median = 1.0 / std::sqrt(gamma_quantile(0.5, ig.shape, ig.rate));
  const std::size_t points = 80;
  std::vector<double> taus(points);
  const double lo = std::log(tau_median / 100.0);
  const double hi = std::log(tau_median * 100.0);
  for (std::size_t t = 0; t < points; ++t)
    taus[t] = std::exp(lo + (hi - lo) * static_cast<double>(t) / static_cast<double>(points - 1));
  return taus;
}

// Posterior under the Gaussian scale mixture, marginalized over a finite tau
// grid. Per grid point the model is conjugate; the grid weights combine the
// mixing density, the cell width and the marginal likelihood
//   log m(y|tau) = sum_i [ -log(2 pi V_i)/2 - y_i^2/(2 V_i) ],
//   V_i = a_i^2 tau^2 b_i^{-2 alpha} + 1/n,
// restricted to the prior truncation (later coordinates contribute the same
// factor to every tau).
inline PosteriorResult mixture_posterior(const Observation& obs, const ForwardOperator& op,
                                         const MixturePrior& prior, const SequenceScale& scale,
                                         std::vector<double> tau_grid = {}) {
  if (!op.is_rank_diagonal())
    throw ConfigError("mixture posterior: operator is not rank-diagonal; use the MCMC engine");
  validate_prior(PriorSpec(prior), scale);
  if (prior.truncation < 1)
    throw ConfigError("mixture posterior: prior truncation is not set");
  if (prior.truncation > obs.j_obs())
    throw ConfigError("mixture posterior: prior truncation exceeds the observed window");
  const bool discrete_q = std::holds_alternative<QGrid>(prior.q);
  bool auto_grid = false;
  if (discrete_q) {
    tau_grid = std::get<QGrid>(prior.q).taus;  // atoms are the only valid grid
  } else if (tau_grid.empty()) {
    tau_grid = default_tau_grid(prior);
    auto_grid = true;
  }
  const std::size_t n_tau = tau_grid.size();
  const std::size_t jp = prior.truncation;

  std::vector<double> a(jp), prior_sd0(jp);
  for (std::size_t i = 1; i <= jp; ++i) {
    a[i - 1] = op.diagonal_coefficient(i);
    prior_sd0[i - 1] = std::pow(scale.b(i), -prior.alpha);
  }

  PosteriorResult post;
  post.kind = PosteriorResult::Kind::grid_mixture;
  post.tau_grid = tau_grid;
  post.tau_means.resize(static_cast<Eigen::Index>(n_tau), static_cast<Eigen::Index>(jp));
  post.tau_vars.resize(static_cast<Eigen::Index>(n_tau), static_cast<Eigen::Index>(jp));

  std::vector<double> log_w(n_tau);
  for (std::size_t t = 0; t < n_tau; ++t) {
    const double tau = tau_grid[t];
    double log_marginal = 0.0;
    for (std::size_t i = 0; i < jp; ++i) {
      const double prior_var = tau * tau * prior_sd0[i] * prior_sd0[i];
      const double v_obs = a[i] * a[i] * prior_var + 1.0 / obs.n;
      log_marginal += -0.5 * std::log(2.0 * std::numbers::pi * v_obs) -
                      obs.y[i] * obs.y[i] / (2.0 * v_obs);
      const double v_post = prior_var == 0.0
                                ? 0.0
                                : 1.0 / (obs.n * a[i] * a[i] + 1.0 / prior_var);
      post.tau_vars(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = v_post;
      post.tau_means(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) =
          v_post * obs.n * a[i] * obs.y[i];
    }
    double log_prior_weight;
    if (discrete_q) {
      const auto& grid = std::get<QGrid>(prior.q);
      log_prior_weight = std::log(grid.weights[t]);
    } else {
      const auto& ig = std::get<QInvGammaSq>(prior.q);
      // density of tau when 1/tau^2 ~ Gamma(shape, rate)
      const double density = gamma_pdf(1.0 / (tau * tau), ig.shape, ig.rate) * 2.0 / (tau * tau * tau);
      double cell = 1.0;
      if (n_tau > 1) {
        const double log_lo = t == 0 ? std::log(tau_grid[0]) : 0.5 * (std::log(tau_grid[t]) + std::log(tau_grid[t - 1]));
        const double log_hi = t + 1 == n_tau ? std::log(tau_grid[n_tau - 1])
                                             : 0.5 * (std::log(tau_grid[t]) + std::log(tau_grid[t + 1]));
        cell = tau * (log_hi - log_lo);
      }
      log_prior_weight = std::log(density > 0.0 ? density : 1e-300) +
                         (n_tau > 1 ? std::log(cell) : 0.0);
    }
    log_w[t] = log_prior_weight + log_marginal;
  }

  const double max_log_w = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  post.tau_weights.resize(n_tau);
  for (std::size_t t = 0; t < n_tau; ++t) {
    post.tau_weights[t] = std::exp(log_w[t] - max_log_w);
    total += post.tau_weights[t];
  }
  for (double& w : post.tau_weights) w /= total;
  // Mass piling up at an end of the generated grid means the grid missed the
  // posterior's preferred scales. Explicit caller grids are taken as given.
  if (auto_grid && (post.tau_weights.front() > 0.01 || post.tau_weights.back() > 0.01))
    throw NumericalError("mixture posterior: tau grid too narrow, posterior mass at an endpoint");

  // Laws of total mean and variance across the grid.
  post.mean.assign(jp, 0.0);
  post.variance.assign(jp, 0.0);
  for (std::size_t i = 0; i < jp; ++i) {
    double m1 = 0.0, second = 0.0;
    for (std::size_t t = 0; t < n_tau; ++t) {
      const double mt = post.tau_means(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i));
      const double vt = post.tau_vars(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i));
      m1 += post.tau_weights[t] * mt;
      second += post.tau_weights[t] * (vt + mt * mt);
    }
    post.mean[i] = m1;
    post.variance[i] = std::max(0.0, second - m1 * m1);
  }
  return post;
}

namespace detail {

// Effective sample size from the initial-positive-sequence estimator.
inline double effective_sample_size(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  if (var == 0.0) return static_cast<double>(n);
  double acf_sum = 0.0;
  for (std::size_t lag = 1; lag < n / 2; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += (x[i] - mean) * (x[i + lag] - mean);
    const double rho = acc / (static_cast<double>(n) * var);
    if (rho <= 0.0) break;
    acf_sum += rho;
  }
  return static_cast<double>(n) / (1.0 + 2.0 * acf_sum);
}

inline double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    if (c.size() < 4) continue;
    const std::size_t h = c.size() / 2;
    halves.emplace_back(c.begin(), c.begin() + h);
    halves.emplace_back(c.begin() + h, c.begin() + 2 * h);
  }
  if (halves.size() < 2) return 1.0;
  const std::size_t n = halves.front().size();
  std::vector<double> means;
  double w = 0.0;
  for (const auto& h : halves) {
    double m = 0.0;
    for (double v : h) m += v;
    m /= static_cast<double>(h.size());
    means.push_back(m);
    double var = 0.0;
    for (double v : h) var += (v - m) * (v - m);
    w += var / static_cast<double>(h.size() - 1);
  }
  w /= static_cast<double>(halves.size());
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(means.size());
  double b = 0.0;
  for (double m : means) b += (m - grand) * (m - grand);
  b *= static_cast<double>(n) / static_cast<double>(means.size() - 1);
  if (w <= 0.0) return 1.0;
  const double var_plus = (static_cast<double>(n - 1) / static_cast<double>(n)) * w + b / static_cast<double>(n);
  return std::sqrt(var_plus / w);
}

}  // namespace detail

// Trans-dimensional sampler for the series prior. Within-model moves are
// exact Gibbs draws of f | M, y when the coordinate density is Gaussian and
// coordinatewise random-walk Metropolis when it is Laplace. Model moves are
// birth/death proposals M -> M +/- 1 with the new coordinate drawn from its
// conditional prior, so the acceptance ratio reduces to the likelihood ratio
// times the p_M ratio.
inline PosteriorResult series_posterior_mcmc(const Observation& obs, const ForwardOperator& op,
                                             const SeriesPrior& prior, const SequenceScale& scale,
                                             const McmcSettings& settings) {
  validate_prior(PriorSpec(prior), scale);
  if (prior.m_max > obs.j_obs())
    throw ConfigError("series MCMC: m_max exceeds the observed window");
  if (prior.m_max > op.domain_dim())
    throw ConfigError("series MCMC: m_max exceeds the operator domain");
  const std::size_t m_max = prior.m_max;
  const double n = obs.n;

  // Cached range geometry: by = B' y over the observed window, gram = B'B.
  Eigen::MatrixXd gram;
  Eigen::VectorXd by;
  if (m_max >= 1) {
    Eigen::MatrixXd b = op.range_matrix(m_max + 1);
    Eigen::VectorXd yv = Eigen::VectorXd::Zero(b.rows());
    for (std::size_t i = 0; i < obs.j_obs() && i < static_cast<std::size_t>(b.rows()); ++i)
      yv(static_cast<Eigen::Index>(i)) = obs.y[i];
    gram = b.transpose() * b;
    by = b.transpose() * yv;
  }

  auto loglik_of = [&](const Eigen::VectorXd& f, std::size_t m) {
    if (m == 0) return 0.0;
    const auto head = f.head(static_cast<Eigen::Index>(m));
    const double cross = head.dot(by.head(static_cast<Eigen::Index>(m)));
    const double quad = head.dot(gram.topLeftCorner(static_cast<Eigen::Index>(m),
                                                    static_cast<Eigen::Index>(m)) *
                                 head);
    return n * cross - 0.5 * n * quad;
  };

  const std::size_t burn = static_cast<std::size_t>(std::floor(
      settings.burn_frac * static_cast<double>(settings.n_iter)));
  const std::size_t kept_per_chain = settings.n_iter - burn;
  std::size_t thin = 1;
  while ((kept_per_chain / thin) * settings.chains > settings.max_kept) ++thin;

  struct ChainOutput {
    std::vector<Eigen::VectorXd> draws;
    std::vector<std::size_t> m_values;
    std::vector<double> norm_stat;
    std::size_t birth_attempts = 0, birth_accepts = 0;
    std::size_t death_attempts = 0, death_accepts = 0;
    std::size_t rw_attempts = 0, rw_accepts = 0;
  };
  std::vector<ChainOutput> outputs(settings.chains);

  parallel_for(settings.chains, 0, [&](std::size_t chain) {
    rng::Stream stream = rng::Stream::keyed({settings.seed, rng::tag::mcmc, chain});
    ChainOutput& out = outputs[chain];
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_max));
    std::size_t m = 0;
    {
      // start from a prior draw
      rng::Stream init = rng::Stream::keyed({settings.seed, rng::tag::mcmc, chain, 0x1717ULL});
      m = sample_truncated_poisson(prior.mu, m_max, init);
      for (std::size_t i = 1; i <= m; ++i) {
        const double z =
            prior.p == SeriesDensity::gaussian ? init.next_normal() : init.next_laplace();
        f(static_cast<Eigen::Index>(i - 1)) = prior.kappa_at(i) * z;
      }
    }
    double cur_loglik = loglik_of(f, m);

    for (std::size_t iter = 0; iter < settings.n_iter; ++iter) {
      // Within-model move.
      if (m >= 1) {
        if (prior.p == SeriesDensity::gaussian) {
          const auto mi = static_cast<Eigen::Index>(m);
          Eigen::MatrixXd precision = n * gram.topLeftCorner(mi, mi);
          for (std::size_t i = 1; i <= m; ++i) {
            const double k = prior.kappa_at(i);
            precision(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(i - 1)) +=
                1.0 / (k * k);
          }
          Eigen::LLT<Eigen::MatrixXd> llt(precision);
          if (llt.info() != Eigen::Success)
            throw NumericalError("series MCMC: Gibbs precision matrix not positive definite");
          const Eigen::VectorXd mean = llt.solve(n * by.head(mi));
          Eigen::VectorXd z(mi);
          for (Eigen::Index i = 0; i < mi; ++i) z(i) = stream.next_normal();
          f.head(mi) = mean + llt.matrixU().solve(z);
          cur_loglik = loglik_of(f, m);
        } else {
          for (std::size_t i = 1; i <= m; ++i) {
            const double k = prior.kappa_at(i);
            const double old = f(static_cast<Eigen::Index>(i - 1));
            const double proposal = old + settings.rw_step * k * stream.next_normal();
            f(static_cast<Eigen::Index>(i - 1)) = proposal;
            const double new_loglik = loglik_of(f, m);
            const double log_ratio =
                new_loglik - cur_loglik - std::abs(proposal / k) + std::abs(old / k);
            ++out.rw_attempts;
            if (std::log(stream.next_uniform()) < log_ratio) {
              cur_loglik = new_loglik;
              ++out.rw_accepts;
            } else {
              f(static_cast<Eigen::Index>(i - 1)) = old;
            }
          }
          if (out.rw_attempts >= 500 &&
              static_cast<double>(out.rw_accepts) < 0.01 * static_cast<double>(out.rw_attempts))
            throw NumericalError("series MCMC: random-walk acceptance below 1%; adjust rw_step");
        }
      }

      // Birth/death move; infeasible proposals at the boundaries are plain
      // rejections, keeping the proposal kernel symmetric.
      const bool try_birth = stream.next_uniform() < 0.5;
      if (try_birth && m < m_max) {
        ++out.birth_attempts;
        const std::size_t inew = m + 1;
        const double k = prior.kappa_at(inew);
        const double z =
            prior.p == SeriesDensity::gaussian ? stream.next_normal() : stream.next_laplace();
        const double value = k * z;
        f(static_cast<Eigen::Index>(inew - 1)) = value;
        const double new_loglik = loglik_of(f, inew);
        const double log_ratio = new_loglik - cur_loglik + std::log(prior.mu) -
                                 std::log(static_cast<double>(inew));
        if (std::log(stream.next_uniform()) < log_ratio) {
          m = inew;
          cur_loglik = new_loglik;
          ++out.birth_accepts;
        } else {
          f(static_cast<Eigen::Index>(inew - 1)) = 0.0;
        }
      } else if (!try_birth && m >= 1) {
        ++out.death_attempts;
        const double removed = f(static_cast<Eigen::Index>(m - 1));
        f(static_cast<Eigen::Index>(m - 1)) = 0.0;
        const double new_loglik = loglik_of(f, m - 1);
        const double log_ratio = new_loglik - cur_loglik - std::log(prior.mu) +
                                 std::log(static_cast<double>(m));
        if (std::log(stream.next_uniform()) < log_ratio) {
          --m;
          cur_loglik = new_loglik;
          ++out.death_accepts;
        } else {
          f(static_cast<Eigen::Index>(m - 1)) = removed;
        }
      }

      if (iter >= burn && (iter - burn) % thin == 0) {
        out.draws.push_back(f);
        out.m_values.push_back(m);
        out.norm_stat.push_back(f.norm());
      }
    }
  });

  PosteriorResult post;
  post.kind = PosteriorResult::Kind::samples;
  std::size_t total = 0;
  for (const auto& out : outputs) total += out.draws.size();
  post.samples.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(m_max));
  post.m_trace.reserve(total);
  std::vector<double> norm_stat;
  norm_stat.reserve(total);
  Eigen::Index row = 0;
  for (const auto& out : outputs)
    for (std::size_t s = 0; s < out.draws.size(); ++s) {
      post.samples.row(row++) = out.draws[s].transpose();
      post.m_trace.push_back(out.m_values[s]);
      norm_stat.push_back(out.norm_stat[s]);
    }

  post.mean.assign(m_max, 0.0);
  post.variance.assign(m_max, 0.0);
  for (std::size_t i = 0; i < m_max; ++i) {
    const auto col = post.samples.col(static_cast<Eigen::Index>(i));
    const double mean = col.mean();
    post.mean[i] = mean;
    post.variance[i] = (col.array() - mean).square().sum() / std::max<double>(1.0, static_cast<double>(total - 1));
  }

  std::size_t ba = 0, bacc = 0, da = 0, dacc = 0, ra = 0, racc = 0;
  std::vector<std::vector<double>> chain_stats;
  for (const auto& out : outputs) {
    ba += out.birth_attempts;
    bacc += out.birth_accepts;
    da += out.death_attempts;
    dacc += out.death_accepts;
    ra += out.rw_attempts;
    racc += out.rw_accepts;
    chain_stats.push_back(out.norm_stat);
  }
  post.diagnostics.birth_acceptance = ba > 0 ? static_cast<double>(bacc) / static_cast<double>(ba) : 0.0;
  post.diagnostics.death_acceptance = da > 0 ? static_cast<double>(dacc) / static_cast<double>(da) : 0.0;
  post.diagnostics.rw_acceptance = ra > 0 ? static_cast<double>(racc) / static_cast<double>(ra) : 1.0;
  post.diagnostics.ess = detail::effective_sample_size(norm_stat);
  post.diagnostics.split_rhat = detail::split_rhat(chain_stats);
  return post;
}

namespace detail {

// Sorted posterior draws of ||f - f0||_0. Coordinates of f0 beyond the
// posterior truncation contribute a fixed tail term.
inline std::vector<double> posterior_distances(const PosteriorResult& post,
                                               const CoefficientVector& f0, std::uint64_t seed,
                                               std::size_t n_draws) {
  std::vector<double> dists;
  const std::size_t jp = post.mean.size();
  double f0_tail_sq = 0.0;
  for (std::size_t i = jp + 1; i <= f0.size(); ++i) f0_tail_sq += f0.coef(i) * f0.coef(i);

  if (post.kind == PosteriorResult::Kind::samples) {
    const std::size_t rows = static_cast<std::size_t>(post.samples.rows());
    dists.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = f0_tail_sq;
      for (std::size_t i = 0; i < jp; ++i) {
        const double diff = post.samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) - f0.coef(i + 1);
        acc += diff * diff;
      }
      dists.push_back(std::sqrt(acc));
    }
  } else {
    rng::Stream stream = rng::Stream::keyed({seed, rng::tag::radius});
    dists.reserve(n_draws);
    std::vector<double> cum;
    if (post.kind == PosteriorResult::Kind::grid_mixture) {
      cum.resize(post.tau_weights.size());
      double acc = 0.0;
      for (std::size_t t = 0; t < post.tau_weights.size(); ++t) {
        acc += post.tau_weights[t];
        cum[t] = acc;
      }
    }
    for (std::size_t d = 0; d < n_draws; ++d) {
      double acc = f0_tail_sq;
      if (post.kind == PosteriorResult::Kind::exact) {
        for (std::size_t i = 0; i < jp; ++i) {
          const double x = post.mean[i] + std::sqrt(post.variance[i]) * stream.next_normal();
          const double diff = x - f0.coef(i + 1);
          acc += diff * diff;
        }
      } else {
        const double u = stream.next_uniform();
        const std::size_t t = static_cast<std::size_t>(
            std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
        const std::size_t tc = t < cum.size() ? t : cum.size() - 1;
        for (std::size_t i = 0; i < jp; ++i) {
          const double mt = post.tau_means(static_cast<Eigen::Index>(tc), static_cast<Eigen::Index>(i));
          const double vt = post.tau_vars(static_cast<Eigen::Index>(tc), static_cast<Eigen::Index>(i));
          const double x = mt + std::sqrt(vt) * stream.next_normal();
          const double diff = x - f0.coef(i + 1);
          acc += diff * diff;
        }
      }
      dists.push_back(std::sqrt(acc));
    }
  }
  std::sort(dists.begin(), dists.end());
  if (dists.empty()) throw NumericalError("contraction radius: no posterior draws");
  return dists;
}

inline double quantile_of_sorted(const std::vector<double>& sorted, double q) {
  std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  if (idx > 0) --idx;
  if (idx >= sorted.size()) idx = sorted.size() - 1;
  return sorted[idx];
}

}  // namespace detail

// Smallest radius whose posterior ball around f0 holds mass q, estimated by
// sampling the stored posterior. One code path for every posterior kind.
inline double contraction_radius(const PosteriorResult& post, const CoefficientVector& f0,
                                 double q, std::uint64_t seed, std::size_t n_draws = 10000) {
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("contraction radius: q must be in (0,1)");
  return detail::quantile_of_sorted(detail::posterior_distances(post, f0, seed, n_draws), q);
}

// Several quantiles from one set of posterior draws.
inline std::vector<double> contraction_radii(const PosteriorResult& post,
                                             const CoefficientVector& f0,
                                             const std::vector<double>& qs, std::uint64_t seed,
                                             std::size_t n_draws = 10000) {
  for (double q : qs)
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("contraction radius: q must be in (0,1)");
  const std::vector<double> dists = detail::posterior_distances(post, f0, seed, n_draws);
  std::vector<double> out;
  out.reserve(qs.size());
  for (double q : qs) out.push_back(detail::quantile_of_sorted(dists, q));
  return out;
}

// l2 distance of the posterior mean to f0, the point-estimate error.
inline double posterior_mean_error(const PosteriorResult& post, const CoefficientVector& f0) {
  double acc = 0.0;
  const std::size_t jp = post.mean.size();
  for (std::size_t i = 0; i < jp; ++i) {
    const double diff = post.mean[i] - f0.coef(i + 1);
    acc += diff * diff;
  }
  for (std::size_t i = jp + 1; i <= f0.size(); ++i) acc += f0.coef(i) * f0.coef(i);
  return std::sqrt(acc);
}

}  // namespace scalebayes

#endif
