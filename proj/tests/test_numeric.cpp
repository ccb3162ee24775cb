#include <cmath>
#include <random>
#include <vector>

#include "amenwalk/error.hpp"
#include "amenwalk/numeric.hpp"
#include "amenwalk/parallel.hpp"
#include "amenwalk/rate_fit.hpp"
#include "doctest.h"

using namespace amenwalk;

TEST_CASE("parse_rational reads decimals, fractions and exponents exactly") {
  CHECK(parse_rational("3") == 3);
  CHECK(parse_rational("-0.125") == Rational(-1, 8));
  CHECK(parse_rational("2.5e-3") == Rational(1, 400));
  CHECK(parse_rational("1/3") == Rational(1, 3));
  CHECK(parse_rational(" 0.1 ") == Rational(1, 10));
  CHECK(parse_rational(".5") == Rational(1, 2));
  CHECK(parse_rational("12e2") == 1200);
}

TEST_CASE("leading zeros are decimal, not octal") {
  CHECK(parse_rational("0.25") == Rational(1, 4));
  CHECK(parse_rational("0.0625") == Rational(1, 16));
  CHECK(parse_rational("010") == 10);
  CHECK(parse_rational("08/010") == Rational(4, 5));
}

TEST_CASE("parse_rational rejects garbage") {
  CHECK_THROWS_AS(parse_rational(""), InvalidInput);
  CHECK_THROWS_AS(parse_rational("abc"), InvalidInput);
  CHECK_THROWS_AS(parse_rational("1/0"), InvalidInput);
  CHECK_THROWS_AS(parse_rational("1.2.3"), InvalidInput);
  CHECK_THROWS_AS(parse_rational("1e"), InvalidInput);
}

TEST_CASE("rational formatting") {
  CHECK(to_string(Rational(7, 64)) == "7/64");
  CHECK(to_string(Rational(Rational(4) / 2)) == "2");
  CHECK(to_decimal_string(Rational(11, 10)) == "1.1");
  CHECK(to_decimal_string(Rational(-3, 8)) == "-0.375");
  CHECK(to_decimal_string(Rational(1, 3)) == "1/3");
  CHECK(to_decimal_string(Rational(1, 50)) == "0.02");
}

TEST_CASE("format_real keeps 12 significant digits") {
  CHECK(format_real(std::sqrt(3.0) / 2) == "0.866025403784");
  CHECK(format_real(0.0) == "0");
  CHECK(format_real(1e-20) == "1e-20");
  CHECK(format_real(INFINITY) == "inf");
}

TEST_CASE("compensated sum beats naive summation") {
  Accumulator<double> acc;
  double naive = 0.0;
  acc.add(1.0);
  naive += 1.0;
  for (int i = 0; i < 1000000; ++i) {
    acc.add(1e-16);
    naive += 1e-16;
  }
  CHECK(naive == 1.0);
  CHECK(acc.value() == doctest::Approx(1.0 + 1e-10).epsilon(1e-14));
}

TEST_CASE("splitmix64 sub-seeds are distinct and reproducible") {
  static_assert(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64(1) != splitmix64(2));
  std::mt19937_64 e1(7), e2(7);
  for (int i = 0; i < 10; ++i) {
    const double u = uniform01(e1);
    CHECK(u == uniform01(e2));
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("parallel_for covers every index once for any thread count") {
  for (unsigned threads : {1u, 2u, 3u, 8u}) {
    std::vector<int> hits(1001, 0);
    parallel_for(hits.size(), threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    for (int h : hits) REQUIRE(h == 1);
  }
}

TEST_CASE("parallel_for propagates exceptions") {
  CHECK_THROWS_AS(parallel_for(100, 4,
                               [](std::size_t b, std::size_t) {
                                 if (b > 0) throw InvalidInput("boom");
                               }),
                  InvalidInput);
}

TEST_CASE("least squares recovers an exact line") {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i);
    y.push_back(2.0 - 0.5 * i);
  }
  const LinearFit fit = least_squares({x}, y);
  CHECK(fit.intercept == doctest::Approx(2.0));
  CHECK(fit.coefficients[0] == doctest::Approx(-0.5));
  CHECK(fit.residual < 1e-12);
  CHECK(fit_slope(x, y) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(least_squares({{1.0}}, {1.0}), InvalidInput);
}

TEST_CASE("fit_decay separates rate and polynomial exponent") {
  std::vector<double> n, lp;
  for (int k = 20; k <= 200; k += 2) {
    n.push_back(k);
    lp.push_back(std::log(3.0) + k * std::log(0.8) - 1.5 * std::log(k));
  }
  const DecayFit fit = fit_decay(n, lp);
  CHECK(fit.rate == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(fit.exponent == doctest::Approx(1.5).epsilon(1e-8));
}
