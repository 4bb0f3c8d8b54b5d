#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "scalebayes/model.hpp"
#include "scalebayes/posterior.hpp"

using namespace scalebayes;

namespace {

// batch-means Monte-Carlo standard error, robust to autocorrelation
double batch_se(const std::vector<double>& x, std::size_t batches = 20) {
  const std::size_t len = x.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    double m = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) m += x[i];
    means.push_back(m / static_cast<double>(len));
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(batches);
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= static_cast<double>(batches - 1);
  return std::sqrt(var / static_cast<double>(batches));
}

}  // namespace

TEST_CASE("conjugate posterior: symmetric unit case and noiseless limit") {
  const auto scale = SequenceScale::power(1.0);
  const auto op = ForwardOperator::diagonal({1.0}, 1.0);
  Observation obs;
  obs.n = 1.0;
  obs.y = {1.0};
  GaussianPrior prior{1.0, 1.0, 1};  // sd_1 = 1
  const auto post = conjugate_posterior(obs, op, prior, scale);
  REQUIRE(post.mean[0] == Approx(0.5));
  REQUIRE(post.variance[0] == Approx(0.5));

  Observation sharp;
  sharp.n = 1e12;
  sharp.y = {0.7, -0.3};
  const auto op2 = ForwardOperator::diagonal({0.5, 0.25}, 1.0);
  GaussianPrior prior2{1.0, 1.0, 2};
  const auto post2 = conjugate_posterior(sharp, op2, prior2, scale);
  REQUIRE(post2.mean[0] == Approx(0.7 / 0.5).epsilon(1e-6));
  REQUIRE(post2.mean[1] == Approx(-0.3 / 0.25).epsilon(1e-6));
  REQUIRE(post2.variance[0] <= 1e-11);
}

TEST_CASE("conjugate posterior matches a grid-integration oracle") {
  const auto scale = SequenceScale::power(1.0);
  const auto op = ForwardOperator::diagonal({0.5}, 1.0);
  Observation obs;
  obs.n = 3.0;
  obs.y = {1.2};
  const double sd = 2.0;
  GaussianPrior prior{1.0, 2.0, 1};  // tau * b_1^{-1} = 2
  const auto post = conjugate_posterior(obs, op, prior, scale);
  // oracle: numeric integration of exp(loglik) * prior density over f_1
  auto weight = [&](double f) {
    const double af = 0.5 * f;
    const double ll = obs.n * af * obs.y[0] - 0.5 * obs.n * af * af;
    const double pr = std::exp(-0.5 * f * f / (sd * sd)) / (sd * std::sqrt(2.0 * std::numbers::pi));
    return std::exp(ll) * pr;
  };
  const double z = oracles::simpson(weight, -20.0, 20.0, 20000);
  const double m1 = oracles::simpson([&](double f) { return f * weight(f); }, -20.0, 20.0, 20000) / z;
  const double m2 = oracles::simpson([&](double f) { return f * f * weight(f); }, -20.0, 20.0, 20000) / z;
  REQUIRE(post.mean[0] == Approx(m1).margin(1e-6));
  REQUIRE(post.variance[0] == Approx(m2 - m1 * m1).margin(1e-6));
}

TEST_CASE("conjugate posterior refuses non-diagonal operators") {
  const auto scale = SequenceScale::volterra2d();
  const auto op = ForwardOperator::volterra2d_a(8);
  Observation obs;
  obs.n = 1.0;
  obs.y.assign(op.range_dim(), 0.0);
  GaussianPrior prior{2.0, 1.0, 4};
  REQUIRE_THROWS_AS(conjugate_posterior(obs, op, prior, scale), ConfigError);
}

TEST_CASE("log-posterior gradient vanishes at the conjugate mean") {
  const auto scale = SequenceScale::power(1.0);
  const auto op = ForwardOperator::diagonal_smoothing(scale, 1.0, 6);
  CoefficientVector f0(6);
  for (std::size_t i = 1; i <= 6; ++i) f0.coeffs[i - 1] = std::pow(static_cast<double>(i), -1.5);
  const auto obs = simulate(op, f0, 50.0, 6, 21);
  GaussianPrior prior{1.5, 1.0, 6};
  const auto post = conjugate_posterior(obs, op, prior, scale);
  auto log_post = [&](const CoefficientVector& f) {
    double lp = loglik(obs, f, op);
    for (std::size_t i = 1; i <= 6; ++i) {
      const double sd = std::pow(scale.b(i), -prior.alpha);
      lp += -0.5 * f.coef(i) * f.coef(i) / (sd * sd);
    }
    return lp;
  };
  CoefficientVector at_mean(6);
  at_mean.coeffs = post.mean;
  const double h = 1e-5;
  for (std::size_t i = 0; i < 6; ++i) {
    auto up = at_mean, dn = at_mean;
    up.coeffs[i] += h;
    dn.coeffs[i] -= h;
    const double grad = (log_post(up) - log_post(dn)) / (2.0 * h);
    REQUIRE(std::abs(grad) <= 1e-8 * std::max(1.0, std::abs(log_post(at_mean))));
  }
}

TEST_CASE("mixture posterior: single grid point equals the conjugate posterior") {
  const auto scale = SequenceScale::power(1.0);
  const auto op = ForwardOperator::diagonal_smoothing(scale, 1.0, 12);
  CoefficientVector f0(12);
  for (std::size_t i = 1; i <= 12; ++i) f0.coeffs[i - 1] = std::pow(static_cast<double>(i), -2.0);
  const auto obs = simulate(op, f0, 200.0, 12, 5);
  MixturePrior mix;
  mix.alpha = 1.5;
  mix.truncation = 12;
  const auto post_mix = mixture_posterior(obs, op, mix, scale, {1.0});
  GaussianPrior gauss{1.5, 1.0, 12};
  const auto post_conj = conjugate_posterior(obs, op, gauss, scale);
  for (std::size_t i = 0; i < 12; ++i) {
    REQUIRE(post_mix.mean[i] == Approx(post_conj.mean[i]).margin(1e-12));
    REQUIRE(post_mix.variance[i] == Approx(post_conj.variance[i]).margin(1e-12));
  }
}

TEST_CASE("mixture posterior: point-mass mixing equals the conjugate posterior exactly") {
  const auto scale = SequenceScale::power(1.0);
  const auto op = ForwardOperator::diagonal_smoothing(scale, 1.0, 8);
  CoefficientVector f0(8);
  f0.coeffs.assign(8, 0.2);
  const auto obs = simulate(op, f0, 64.0, 8, 6);
  const double tau = 0.37;
  MixturePrior mix;
  mix.alpha = 1.2;
  mix.q = QGrid{{tau}, {1.0}};
  mix.truncation = 8;
  const auto post_mix = mixture_posterior(obs, op, mix, scale);
  GaussianPrior gauss{1.2, tau, 8};
  const auto post_conj = conjugate_posterior(obs, op, gauss, scale);
  REQUIRE(post_mix.tau_weights.size() == 1);
  REQUIRE(post_mix.tau_weights[0] == Approx(1.0).margin(1e-12));
  for (std::size_t i = 0; i < 8; ++i) {
    REQUIRE(post_mix.mean[i] == Approx(post_conj.mean[i]).margin(1e-13));
    REQUIRE(post_mix.variance[i] == Approx(post_conj.variance[i]).margin(1e-13));
  }
}

TEST_CASE("mixture posterior: zero data with a symmetric grid has zero mean") {
  const auto scale = SequenceScale::power(1.0);
  const auto op = ForwardOperator::diagonal_smoothing(scale, 1.0, 4);
  Observation obs;
  obs.n = 10.0;
  obs.y.assign(4, 0.0);
  MixturePrior mix;
  mix.alpha = 1.5;
  mix.truncation = 4;
  const auto post = mixture_posterior(obs, op, mix, scale, {0.5, 1.0, 2.0});
  for (double m : post.mean) REQUIRE(m == Approx(0.0).margin(1e-15));
  double total = 0.0;
  for (double w : post.tau_weights) total += w;
  REQUIRE(total == Approx(1.0).margin(1e-12));
}

TEST_CASE("mixture posterior: two-point grid against a direct Bayes oracle") {
  const auto scale = SequenceScale::power(1.0);
  const auto op = ForwardOperator::diagonal({0.8}, 1.0);
  Observation obs;
  obs.n = 5.0;
  obs.y = {0.9};
  MixturePrior mix;
  mix.alpha = 1.0;
  mix.q = QGrid{{0.5, 2.0}, {0.3, 0.7}};
  mix.truncation = 1;
  const auto post = mixture_posterior(obs, op, mix, scale);
  // oracle: observation density y ~ N(0, a^2 tau^2 + 1/n) per component
  auto density = [&](double tau) {
    const double v = 0.8 * 0.8 * tau * tau + 1.0 / obs.n;
    return std::exp(-obs.y[0] * obs.y[0] / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
  };
  const double w0 = 0.3 * density(0.5), w1 = 0.7 * density(2.0);
  REQUIRE(post.tau_weights[0] == Approx(w0 / (w0 + w1)).margin(1e-12));
  REQUIRE(post.tau_weights[1] == Approx(w1 / (w0 + w1)).margin(1e-12));
}

TEST_CASE("mixture posterior: endpoint mass raises the narrow-grid error") {
  const auto scale = SequenceScale::power(1.0);
  const auto op = ForwardOperator::diagonal_smoothing(scale, 1.0, 4);
  Observation obs;
  obs.n = 1000.0;
  obs.y = {3e4, 2e4, 1e4, 5e3};  // wants tau far above the generated grid
  MixturePrior mix;
  mix.alpha = 1.5;
  mix.truncation = 4;
  REQUIRE_THROWS_AS(mixture_posterior(obs, op, mix, scale), NumericalError);
}

TEST_CASE("series MCMC: near-noiseless identification of a sparse truth") {
  const auto scale = SequenceScale::power(1.0);
  const auto op = ForwardOperator::diagonal_smoothing(scale, 1.0, 16);
  CoefficientVector f0(4);
  f0.coeffs = {0.8, -0.5, 0.3, 0.2};
  const auto obs = simulate(op, f0, 1e10, 16, 9);
  SeriesPrior prior;
  prior.mu = 5.0;
  prior.m_max = 10;
  McmcSettings settings;
  settings.n_iter = 3000;
  settings.chains = 2;
  settings.seed = 17;
  const auto post = series_posterior_mcmc(obs, op, prior, scale, settings);
  for (std::size_t i = 0; i < 4; ++i)
    REQUIRE(post.mean[i] == Approx(f0.coeffs[i]).margin(1e-3));
}

TEST_CASE("series MCMC: m_max = 0 gives the point mass at zero") {
  const auto scale = SequenceScale::power(1.0);
  const auto op = ForwardOperator::diagonal_smoothing(scale, 1.0, 8);
  const auto obs = simulate(op, CoefficientVector(), 100.0, 8, 3);
  SeriesPrior prior;
  prior.m_max = 0;
  McmcSettings settings;
  settings.n_iter = 200;
  settings.chains = 1;
  const auto post = series_posterior_mcmc(obs, op, prior, scale, settings);
  REQUIRE(post.mean.empty());
  for (std::size_t r = 0; r < post.m_trace.size(); ++r) REQUIRE(post.m_trace[r] == 0);
}

TEST_CASE("series MCMC matches the evidence-enumeration oracle") {
  const auto scale = SequenceScale::power(1.0);
  std::vector<double> a(6);
  for (std::size_t i = 1; i <= 6; ++i) a[i - 1] = 1.0 / static_cast<double>(i);
  const auto op = ForwardOperator::diagonal(a, 1.0);
  CoefficientVector f0(6);
  f0.coeffs = {0.9, -0.6, 0.4, 0.0, 0.2, -0.1};
  const double n = 50.0;
  const auto obs = simulate(op, f0, n, 6, 404);
  SeriesPrior prior;
  prior.mu = 5.0;
  prior.m_max = 6;
  McmcSettings settings;
  settings.n_iter = 20000;
  settings.chains = 4;
  settings.seed = 31;
  const auto post = series_posterior_mcmc(obs, op, prior, scale, settings);
  const auto oracle = oracles::enumerate_series_posterior(obs.y, n, a, prior);
  const std::size_t rows = static_cast<std::size_t>(post.samples.rows());
  for (std::size_t i = 0; i < 6; ++i) {
    std::vector<double> coord(rows);
    for (std::size_t r = 0; r < rows; ++r)
      coord[r] = post.samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i));
    const double se = batch_se(coord);
    REQUIRE(std::abs(post.mean[i] - oracle.mean[i]) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("series MCMC: stationary moments conditional on M match the conjugate posterior") {
  const auto scale = SequenceScale::power(1.0);
  const auto op = ForwardOperator::diagonal_smoothing(scale, 1.0, 4);
  CoefficientVector f0(2);
  f0.coeffs = {0.6, -0.4};
  const auto obs = simulate(op, f0, 30.0, 4, 8);
  SeriesPrior prior;
  prior.mu = 2.0;
  prior.m_max = 2;
  McmcSettings settings;
  settings.n_iter = 30000;
  settings.chains = 2;
  settings.seed = 77;
  const auto post = series_posterior_mcmc(obs, op, prior, scale, settings);
  // kappa = 1 coordinates with a diagonal operator: f | M=2, y is Gaussian
  // with v_i = 1/(n a_i^2 + 1) and mean v_i n a_i y_i
  std::vector<double> cond_mean(2);
  for (std::size_t i = 1; i <= 2; ++i) {
    const double a = op.diagonal_coefficient(i);
    const double v = 1.0 / (obs.n * a * a + 1.0);
    cond_mean[i - 1] = v * obs.n * a * obs.y[i - 1];
  }
  std::vector<double> c1, c2;
  for (std::size_t r = 0; r < static_cast<std::size_t>(post.samples.rows()); ++r)
    if (post.m_trace[r] == 2) {
      c1.push_back(post.samples(static_cast<Eigen::Index>(r), 0));
      c2.push_back(post.samples(static_cast<Eigen::Index>(r), 1));
    }
  REQUIRE(c1.size() > 2000);
  auto mean_of = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return m / static_cast<double>(v.size());
  };
  REQUIRE(std::abs(mean_of(c1) - cond_mean[0]) <= 3.0 * batch_se(c1));
  REQUIRE(std::abs(mean_of(c2) - cond_mean[1]) <= 3.0 * batch_se(c2));
}

TEST_CASE("series MCMC: laplace coordinates accept and mix") {
  const auto scale = SequenceScale::power(1.0);
  const auto op = ForwardOperator::diagonal_smoothing(scale, 1.0, 8);
  CoefficientVector f0(3);
  f0.coeffs = {0.5, -0.3, 0.2};
  const auto obs = simulate(op, f0, 40.0, 8, 15);
  SeriesPrior prior;
  prior.p = SeriesDensity::laplace;
  prior.mu = 3.0;
  prior.m_max = 8;
  McmcSettings settings;
  settings.n_iter = 4000;
  settings.chains = 2;
  settings.seed = 5;
  const auto post = series_posterior_mcmc(obs, op, prior, scale, settings);
  REQUIRE(post.diagnostics.rw_acceptance > 0.05);
  REQUIRE(post.diagnostics.ess > 50.0);
  REQUIRE(post.mean[0] > 0.0);
}

TEST_CASE("series MCMC: collapsed random-walk acceptance raises the step-size error") {
  const auto scale = SequenceScale::power(1.0);
  const auto op = ForwardOperator::diagonal_smoothing(scale, 1.0, 8);
  CoefficientVector f0(4);
  f0.coeffs = {0.5, -0.3, 0.2, 0.1};
  const auto obs = simulate(op, f0, 1e8, 8, 2);
  SeriesPrior prior;
  prior.p = SeriesDensity::laplace;
  prior.mu = 4.0;
  prior.m_max = 8;
  McmcSettings settings;
  settings.n_iter = 2000;
  settings.chains = 1;
  settings.rw_step = 1e5;  // absurd step against a sharp likelihood
  REQUIRE_THROWS_AS(series_posterior_mcmc(obs, op, prior, scale, settings), NumericalError);
}

TEST_CASE("contraction radius: point mass, normal quantile oracle, monotonicity") {
  PosteriorResult point;
  point.kind = PosteriorResult::Kind::exact;
  CoefficientVector f0(3);
  f0.coeffs = {0.1, 0.2, 0.3};
  point.mean = f0.coeffs;
  point.variance = {0.0, 0.0, 0.0};
  for (double q : {0.1, 0.5, 0.9})
    REQUIRE(contraction_radius(point, f0, q, 1) == Approx(0.0).margin(1e-12));

  PosteriorResult single;
  single.kind = PosteriorResult::Kind::exact;
  const double sigma = 0.7;
  single.mean = {0.25};
  single.variance = {sigma * sigma};
  CoefficientVector center(1);
  center.coeffs = {0.25};
  const double r50 = contraction_radius(single, center, 0.5, 99, 200000);
  // |X| quantile: sigma * z with P(|Z| <= z) = 0.5
  const double z = oracles::normal_quantile(0.75);
  REQUIRE(r50 == Approx(sigma * z).epsilon(0.01));
  REQUIRE(sigma * z == Approx(sigma * 0.6745).epsilon(1e-3));

  const double r90 = contraction_radius(single, center, 0.9, 99, 200000);
  REQUIRE(r90 >= r50);
}

TEST_CASE("contraction radius counts the f0 tail beyond the posterior truncation") {
  PosteriorResult point;
  point.kind = PosteriorResult::Kind::exact;
  point.mean = {1.0};
  point.variance = {0.0};
  CoefficientVector f0(3);
  f0.coeffs = {1.0, 0.3, -0.4};
  const double expected = std::sqrt(0.3 * 0.3 + 0.4 * 0.4);
  REQUIRE(contraction_radius(point, f0, 0.5, 1) == Approx(expected).margin(1e-12));
}

TEST_CASE("posterior shrinks with n under shared noise seeds") {
  const auto scale = SequenceScale::power(1.0);
  const auto op = ForwardOperator::diagonal_smoothing(scale, 1.0, 64);
  CoefficientVector f0(64);
  for (std::size_t i = 1; i <= 64; ++i) f0.coeffs[i - 1] = std::pow(static_cast<double>(i), -1.55);
  GaussianPrior prior{1.5, 1.0, 64};
  double previous = 1e300;
  for (double n : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    const auto obs = simulate(op, f0, n, 64, 1234);  // same seed: shared noise
    const auto post = conjugate_posterior(obs, op, prior, scale);
    const double r = contraction_radius(post, f0, 0.5, 5);
    REQUIRE(r <= previous * 1.10);
    previous = r;
  }
}
