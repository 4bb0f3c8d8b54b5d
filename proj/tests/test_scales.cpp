#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "scalebayes/rng.hpp"
#include "scalebayes/scales.hpp"

using namespace scalebayes;

namespace {

CoefficientVector random_vector(rng::Stream& s, std::size_t len) {
  CoefficientVector f(len);
  for (auto& v : f.coeffs) v = s.next_normal();
  return f;
}

}  // namespace

TEST_CASE("norm: unit coordinate against b_j^s") {
  const auto scale = SequenceScale::power(1.0);  // b_i = i
  REQUIRE(norm(CoefficientVector::unit(3), 2.0, scale) == Approx(9.0).margin(1e-14));
}

TEST_CASE("norm: zero element") {
  const auto scale = SequenceScale::power(1.0);
  REQUIRE(norm(CoefficientVector(), 3.0, scale) == 0.0);
  REQUIRE(norm(CoefficientVector(17), -1.0, scale) == 0.0);
}

TEST_CASE("norm: partial-sum oracle at s = 0") {
  const auto scale = SequenceScale::power(1.0);
  CoefficientVector f(100);
  for (std::size_t i = 1; i <= 100; ++i) f.coeffs[i - 1] = 1.0 / static_cast<double>(i);
  double oracle = 0.0;
  for (std::size_t i = 1; i <= 100; ++i) oracle += 1.0 / (static_cast<double>(i) * i);
  REQUIRE(norm(f, 0.0, scale) == Approx(std::sqrt(oracle)).epsilon(1e-14));
}

TEST_CASE("norm rejects non-finite input") {
  const auto scale = SequenceScale::power(1.0);
  CoefficientVector f(2);
  f.coeffs[1] = std::numeric_limits<double>::infinity();
  REQUIRE_THROWS_AS(norm(f, 1.0, scale), ConfigError);
}

TEST_CASE("project: identity on V_j, zero at j = 1, idempotent") {
  const auto scale = SequenceScale::power(1.0);
  CoefficientVector f(4);
  f.coeffs = {1.0, -2.0, 0.5, 0.0};
  const auto pf = project(f, 5);  // support within first 4 coords
  REQUIRE(pf.coeffs == f.coeffs);
  REQUIRE(project(f, 1).size() == 0);
  const auto p3 = project(f, 3);
  REQUIRE(p3.size() == 2);
  REQUIRE(project(p3, 3).coeffs == p3.coeffs);
}

TEST_CASE("project: two-sided estimate ||f - P_j f||_{-t} <= delta(j,t) delta(j,s) ||f||_s") {
  const auto scale = SequenceScale::power(1.0);
  rng::Stream s(2024);
  for (int rep = 0; rep < 200; ++rep) {
    const auto f = random_vector(s, 40);
    const std::size_t j = 2 + static_cast<std::size_t>(s.next_uniform() * 30);
    for (double ss : {0.0, 1.0, 2.0})
      for (double tt : {0.0, 1.0, 2.0}) {
        const double lhs = norm(f - project(f, j), -tt, scale);
        const double rhs =
            approx_number(j, tt, scale) * approx_number(j, ss, scale) * norm(f, ss, scale);
        REQUIRE(lhs <= rhs + 1e-12);
      }
  }
}

TEST_CASE("approx_number: closed form") {
  REQUIRE(approx_number(16, 2.0, SequenceScale::power(1.0)) == Approx(0.00390625));
  REQUIRE(approx_number(7, 0.0, SequenceScale::power(2.0)) == 1.0);
  REQUIRE(approx_number(10, 1.0, SequenceScale::power(1.0)) == Approx(0.1));
  // nonincreasing in j and s
  const auto scale = SequenceScale::power(1.5);
  for (std::size_t j = 1; j < 50; ++j) {
    REQUIRE(approx_number(j + 1, 1.0, scale) <= approx_number(j, 1.0, scale));
    REQUIRE(approx_number(j, 2.0, scale) <= approx_number(j, 1.0, scale));
  }
}

TEST_CASE("dual_norm: single coordinate and s = 0") {
  const auto scale = SequenceScale::power(1.0);
  for (std::size_t j : {1, 2, 5, 11})
    REQUIRE(dual_norm(CoefficientVector::unit(j), 1.0, scale) ==
            Approx(1.0 / static_cast<double>(j)));
  rng::Stream s(7);
  const auto f = random_vector(s, 20);
  REQUIRE(dual_norm(f, 0.0, scale) == Approx(norm(f, 0.0, scale)));
}

TEST_CASE("dual_norm: random-search never beats the closed form, maximizer attains it") {
  const auto scale = SequenceScale::power(1.0);
  rng::Stream s(99);
  const auto f = random_vector(s, 12);
  const double sval = 1.0;
  const double dn = dual_norm(f, sval, scale);
  for (int probe = 0; probe < 10000; ++probe) {
    auto g = random_vector(s, 12);
    const double gs = norm(g, sval, scale);
    const double pairing = inner_product(f, g) / gs;  // <f, g/||g||_s>_0
    REQUIRE(pairing <= dn + 1e-12);
  }
  const auto gstar = dual_maximizer(f, sval, scale);
  REQUIRE(norm(gstar, sval, scale) == Approx(1.0).epsilon(1e-12));
  REQUIRE(inner_product(f, gstar) == Approx(dn).margin(1e-10));
}

TEST_CASE("scale invariants: generator monotone, b(1) >= 1") {
  for (const auto& scale : {SequenceScale::power(1.0), SequenceScale::power(2.0),
                            SequenceScale::volterra2d()}) {
    REQUIRE(scale.b(1) >= 1.0);
    for (std::size_t i = 1; i < 200; ++i) REQUIRE(scale.b(i + 1) >= scale.b(i));
  }
}

TEST_CASE("norm monotone in s with constant 1") {
  const auto scale = SequenceScale::power(1.0);
  rng::Stream s(5);
  for (int rep = 0; rep < 100; ++rep) {
    const auto f = random_vector(s, 25);
    REQUIRE(norm(f, 0.5, scale) <= norm(f, 1.5, scale) + 1e-12);
    REQUIRE(norm(f, -2.0, scale) <= norm(f, -1.0, scale) + 1e-12);
  }
}

TEST_CASE("interpolation inequality") {
  rng::Stream s(31);
  for (const auto& scale : {SequenceScale::power(1.0), SequenceScale::power(0.5)}) {
    for (int rep = 0; rep < 300; ++rep) {
      const auto f = random_vector(s, 30);
      const double r = -1.0, sv = 0.7, t = 2.0;
      const double lambda = (t - sv) / (t - r);
      REQUIRE(norm(f, sv, scale) <=
              std::pow(norm(f, r, scale), lambda) * std::pow(norm(f, t, scale), 1.0 - lambda) +
                  1e-12);
    }
  }
}

TEST_CASE("Jackson and Bernstein with constant 1, equality at unit coordinates") {
  const auto scale = SequenceScale::power(1.0);
  rng::Stream s(77);
  for (int rep = 0; rep < 200; ++rep) {
    const auto f = random_vector(s, 30);
    const std::size_t j = 2 + static_cast<std::size_t>(s.next_uniform() * 25);
    const double sv = 0.5 + 2.0 * s.next_uniform();
    REQUIRE(norm(f - project(f, j), 0.0, scale) <=
            approx_number(j, sv, scale) * norm(f, sv, scale) + 1e-12);
    const auto g = project(f, j);
    REQUIRE(norm(g, sv, scale) <= norm(g, 0.0, scale) / approx_number(j, sv, scale) + 1e-12);
  }
  // Jackson is tight at f = e_j
  for (std::size_t j : {2, 5, 9}) {
    const auto e = CoefficientVector::unit(j);
    const double sv = 1.3;
    REQUIRE(norm(e - project(e, j), 0.0, scale) ==
            Approx(approx_number(j, sv, scale) * norm(e, sv, scale)).epsilon(1e-12));
  }
}

TEST_CASE("extended Jackson/Bernstein across shifted orders") {
  const auto scale = SequenceScale::power(1.0);
  rng::Stream s(123);
  for (int rep = 0; rep < 200; ++rep) {
    const auto f = random_vector(s, 24);
    const std::size_t j = 2 + static_cast<std::size_t>(s.next_uniform() * 20);
    const double sv = 2.0 * s.next_uniform();
    for (double t : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      REQUIRE(norm(f - project(f, j), t, scale) <=
              approx_number(j, sv, scale) * norm(f, sv + t, scale) + 1e-12);
      const auto g = project(f, j);
      REQUIRE(norm(g, sv + t, scale) <=
              norm(g, t, scale) / approx_number(j, sv, scale) + 1e-12);
    }
  }
}

TEST_CASE("volterra2d scale: pair enumeration ordered by product with k ties first") {
  const auto scale = SequenceScale::volterra2d();
  REQUIRE(scale.pair_at(1) == std::pair<int, int>(1, 1));
  REQUIRE(scale.pair_at(2) == std::pair<int, int>(1, 2));
  REQUIRE(scale.pair_at(3) == std::pair<int, int>(2, 1));
  REQUIRE(scale.pair_at(4) == std::pair<int, int>(1, 3));
  REQUIRE(scale.pair_at(6) == std::pair<int, int>(1, 4));
  REQUIRE(scale.pair_at(7) == std::pair<int, int>(2, 2));
  const auto [k, l] = scale.pair_at(500);
  REQUIRE(scale.rank_of(k, l) == 500);
  REQUIRE(scale.b(1) == Approx(std::numbers::pi * std::numbers::pi));
  REQUIRE(scale.b(7) == Approx(4.0 * std::numbers::pi * std::numbers::pi));
}
