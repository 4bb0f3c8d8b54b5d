#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "scalebayes/rates.hpp"
#include "scalebayes/rng.hpp"

using namespace scalebayes;

TEST_CASE("theoretical exponents: closed-form arithmetic") {
  REQUIRE(theoretical_exponent({PriorKind::series, 0.0, 1.0, 1.0, 1.0}) == Approx(0.2));
  REQUIRE(theoretical_exponent({PriorKind::gaussian, 1.5, 2.0, 1.0, 1.0}) == Approx(0.2));
  REQUIRE(theoretical_exponent({PriorKind::gaussian, 1.5, 1.0, 1.0, 1.0}) == Approx(0.2));
  REQUIRE(theoretical_exponent({PriorKind::mixture, 2.0, 2.0, 1.0, 1.0}) ==
          Approx(2.0 / 7.0));
}

TEST_CASE("rate query validation") {
  REQUIRE_THROWS_AS(theoretical_exponent({PriorKind::mixture, 1.5, 2.0, 1.0, 1.0}), ConfigError);
  REQUIRE_THROWS_AS(theoretical_exponent({PriorKind::gaussian, 0.4, 1.0, 1.0, 1.0}), ConfigError);
  REQUIRE_THROWS_AS(theoretical_exponent({PriorKind::series, 0.0, -1.0, 1.0, 1.0}), ConfigError);
}

TEST_CASE("auxiliary exponents") {
  const auto aux_series = auxiliary_sequences({PriorKind::series, 0.0, 1.0, 1.0, 1.0});
  REQUIRE(aux_series.epsilon_exponent == Approx(0.4));
  REQUIRE(aux_series.j_exponent == Approx(0.2));
  REQUIRE_FALSE(aux_series.tau_exponent.has_value());

  const auto aux_gauss = auxiliary_sequences({PriorKind::gaussian, 1.5, 1.0, 1.0, 1.0});
  REQUIRE(aux_gauss.tau_exponent.has_value());
  REQUIRE(*aux_gauss.tau_exponent == Approx(0.0).margin(1e-15));
  REQUIRE(aux_gauss.j_exponent == Approx(1.0 / 5.0));

  const auto aux_mix = auxiliary_sequences({PriorKind::mixture, 2.0, 2.0, 1.0, 1.0});
  REQUIRE(aux_mix.j_exponent == Approx(1.0 / 7.0));
}

TEST_CASE("minimax exponent helper") {
  REQUIRE(minimax_exponent(2.0, 1.0, 1.0) == Approx(2.0 / 7.0));
  REQUIRE_THROWS_AS(minimax_exponent(0.0, 1.0, 1.0), ConfigError);
}

TEST_CASE("adaptation never hurts: mixture exponent dominates gaussian on a grid") {
  rng::Stream s(2);
  for (int rep = 0; rep < 1000; ++rep) {
    const double d = 0.5 + 2.5 * s.next_uniform();
    const double alpha = d / 2.0 + 3.0 * s.next_uniform() + 0.01;
    const double beta = (alpha - 0.005) * s.next_uniform() + 0.005;  // beta <= alpha
    const double gamma = 0.1 + 3.0 * s.next_uniform();
    const double mix = theoretical_exponent({PriorKind::mixture, alpha, beta, gamma, d});
    const double gauss = theoretical_exponent({PriorKind::gaussian, alpha, beta, gamma, d});
    REQUIRE(mix >= gauss - 1e-12);
  }
}

TEST_CASE("exponent monotone in beta, gamma, d") {
  rng::Stream s(3);
  for (int rep = 0; rep < 1000; ++rep) {
    const double beta = 0.2 + 3.0 * s.next_uniform();
    const double gamma = 0.2 + 3.0 * s.next_uniform();
    const double d = 0.2 + 3.0 * s.next_uniform();
    const double h = 0.1;
    const double base = theoretical_exponent({PriorKind::series, 0.0, beta, gamma, d});
    REQUIRE(theoretical_exponent({PriorKind::series, 0.0, beta + h, gamma, d}) >= base);
    REQUIRE(theoretical_exponent({PriorKind::series, 0.0, beta, gamma + h, d}) <= base);
    REQUIRE(theoretical_exponent({PriorKind::series, 0.0, beta, gamma, d + h}) <= base);
  }
}

TEST_CASE("fit_slope: exact power law") {
  std::vector<std::pair<double, double>> pts;
  for (double n : {1e2, 1e3, 1e4, 1e5, 1e6}) pts.emplace_back(n, std::pow(n, -0.2));
  const auto fit = fit_slope(pts);
  REQUIRE(fit.slope == Approx(-0.2).margin(1e-12));
  REQUIRE(fit.std_error == Approx(0.0).margin(1e-12));
  REQUIRE(fit.r2 == Approx(1.0).margin(1e-12));
}

TEST_CASE("fit_slope: constants and noisy power law") {
  std::vector<std::pair<double, double>> flat = {{10.0, 3.0}, {100.0, 3.0}, {1000.0, 3.0}};
  REQUIRE(fit_slope(flat).slope == Approx(0.0).margin(1e-12));

  rng::Stream s(8);
  std::vector<std::pair<double, double>> noisy;
  for (double n = 1e2; n <= 1e8; n *= 10.0)
    noisy.emplace_back(n, 3.0 * std::pow(n, -0.3) * (1.0 + 0.01 * s.next_normal()));
  const double slope = fit_slope(noisy).slope;
  REQUIRE(slope >= -0.33);
  REQUIRE(slope <= -0.27);
}

TEST_CASE("fit_slope rejects bad inputs") {
  REQUIRE_THROWS_AS(fit_slope({{1.0, 1.0}, {2.0, 0.5}}), ConfigError);
  REQUIRE_THROWS_AS(fit_slope({{1.0, 1.0}, {2.0, -0.5}, {3.0, 0.1}}), ConfigError);
  REQUIRE_THROWS_AS(fit_slope({{0.0, 1.0}, {2.0, 0.5}, {3.0, 0.1}}), ConfigError);
}
