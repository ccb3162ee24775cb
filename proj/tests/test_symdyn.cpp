#include <numeric>

#include "amenwalk/error.hpp"
#include "amenwalk/symdyn.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace amenwalk;

namespace {

MarkovBase coin() { return fixtures::uniform({"0", "1"}); }

MarkovBase markov_half() {
  return MarkovBase::markov({"0", "1"}, {Rational(1, 2), Rational(1, 2)},
                            {{Rational(1, 2), Rational(1, 2)}, {Rational(1, 2), Rational(1, 2)}});
}

// pi = (2/3, 1/3), P = [[1/2, 1/2], [1, 0]]; "11" is forbidden.
MarkovBase golden_mean() {
  return MarkovBase::markov({"0", "1"}, {Rational(2, 3), Rational(1, 3)},
                            {{Rational(1, 2), Rational(1, 2)}, {Rational(1), Rational(0)}});
}

MarkovBase three_state() {
  return MarkovBase::markov({"x", "y", "z"}, {Rational(1, 4), Rational(1, 2), Rational(1, 4)},
                            {{Rational(0), Rational(1), Rational(0)},
                             {Rational(1, 2), Rational(0), Rational(1, 2)},
                             {Rational(0), Rational(1), Rational(0)}});
}

}  // namespace

TEST_CASE("admissibility of words") {
  CHECK(is_admissible(coin(), "010"));
  CHECK(is_admissible(coin(), ""));
  CHECK_FALSE(is_admissible(golden_mean(), "011"));
  CHECK(is_admissible(golden_mean(), "0101"));
  CHECK_THROWS_WITH_AS(is_admissible(coin(), "012"), doctest::Contains("\"2\""), InvalidInput);
  CHECK_THROWS_AS(Word(golden_mean(), {1, 1}), InvalidInput);
  CHECK(Word(golden_mean(), {0, 1, 0}).size() == 3);
}

TEST_CASE("cylinder measures") {
  CHECK(cylinder_measure(coin(), coin().parse("01")) == Rational(1, 4));
  CHECK(cylinder_measure(markov_half(), markov_half().parse("010")) == Rational(1, 8));
  CHECK(cylinder_measure(coin(), {}) == 1);
  CHECK(cylinder_measure(golden_mean(), golden_mean().parse("010")) == Rational(1, 3));
  CHECK_THROWS_AS(cylinder_measure(golden_mean(), {1, 1}), InvalidInput);
  CHECK(cylinder_measure(golden_mean(), {1, 1}, Strictness::lenient) == 0);
}

TEST_CASE("inverse branch weights") {
  CHECK(inverse_branch_weight(coin(), coin().parse("01"), 0) == Rational(1, 4));
  CHECK(inverse_branch_weight(golden_mean(), {1}, 0) == Rational(1, 2));
  CHECK(inverse_branch_weight(coin(), {}, 1) == 1);
  CHECK_THROWS_AS(inverse_branch_weight(golden_mean(), {1}, 1), InvalidInput);
}

TEST_CASE("d_r metric") {
  CHECK(d_r_distance({0, 1, 1}, {0, 0, 1}, 0.5) == 0.5);
  CHECK(d_r_distance({0, 1, 1, 0}, {0, 1, 1, 0}, 0.5) == 1.0 / 16);
  CHECK(d_r_distance({1}, {0}, 0.9) == 1.0);
  CHECK_THROWS_AS(d_r_distance({0}, {1}, 1.0), InvalidInput);
}

TEST_CASE("measure validation") {
  CHECK_THROWS_WITH(MarkovBase::bernoulli({"0", "1"}, {parse_rational("0.5"), parse_rational("0.6")}),
                    "weights sum 1.1 ≠ 1");
  CHECK_THROWS_AS(MarkovBase::markov({"0", "1"}, {Rational(1, 2), Rational(1, 2)},
                                     {{parse_rational("0.3"), parse_rational("0.3")}, {Rational(1, 2), Rational(1, 2)}}),
                  InvalidInput);
  CHECK_THROWS_WITH_AS(MarkovBase::markov({"0", "1"}, {Rational(1, 2), Rational(1, 2)},
                                          {{Rational(1, 2), Rational(1, 2)}, {Rational(1), Rational(0)}}),
                       doctest::Contains("stationary"), InvalidInput);
  CHECK_THROWS_AS(MarkovBase::bernoulli({"0"}, {Rational(1)}), InvalidInput);
  CHECK_THROWS_AS(MarkovBase::bernoulli({"0", "0"}, {Rational(1, 2), Rational(1, 2)}), InvalidInput);
}

TEST_CASE("full-branch flag follows the admissibility matrix") {
  CHECK(coin().full_branch());
  CHECK(markov_half().full_branch());
  CHECK_FALSE(golden_mean().full_branch());
}

TEST_CASE("cylinder measures of W^n sum to one") {
  for (const MarkovBase& base : {coin(), markov_half(), golden_mean(), three_state(), fixtures::free_steps()}) {
    for (std::size_t n = 0; n <= 6; ++n) {
      Rational total = 0;
      for_each_word(base, n, [&](const SymbolString& w) { total += cylinder_measure(base, w); });
      REQUIRE(total == 1);
    }
  }
}

TEST_CASE("cylinder consistency and the inverse-branch weight identity") {
  for (const MarkovBase& base : {coin(), golden_mean(), three_state()}) {
    for (std::size_t n = 1; n <= 4; ++n) {
      for_each_word(base, n, [&](const SymbolString& w) {
        Rational children = 0, weighted = 0;
        for (Symbol a = 0; a < base.size(); ++a) {
          if (!base.admissible(w.back(), a)) continue;
          SymbolString wa = w;
          wa.push_back(a);
          children += cylinder_measure(base, wa);
          weighted += inverse_branch_weight(base, w, a) * base.weight(a);
        }
        REQUIRE(children == cylinder_measure(base, w));
        REQUIRE(weighted == cylinder_measure(base, w));
      });
    }
  }
}

TEST_CASE("transitivity examples") {
  const auto full = check_transitive_mixing(coin());
  CHECK(full.transitive);
  CHECK(full.mixing);
  CHECK(full.period == 1);
  const auto flip = check_transitive_mixing(AdmissibilityMatrix({{false, true}, {true, false}}));
  CHECK(flip.transitive);
  CHECK_FALSE(flip.mixing);
  CHECK(flip.period == 2);
  CHECK_FALSE(check_transitive_mixing(AdmissibilityMatrix({{true, true}, {false, true}})).transitive);
  CHECK(check_transitive_mixing(three_state()).period == 2);
}

TEST_CASE("transitivity agrees with brute force on every 2- and 3-symbol matrix") {
  for (std::size_t n : {2u, 3u}) {
    for (unsigned mask = 0; mask < (1u << (n * n)); ++mask) {
      std::vector<std::vector<bool>> rows(n, std::vector<bool>(n));
      for (std::size_t i = 0; i < n * n; ++i) rows[i / n][i % n] = (mask >> i) & 1;
      // Boolean powers A^1..A^L; closed walks of length k exist iff A^k has
      // a true diagonal entry.
      const std::size_t limit = 4 * n * n;
      std::vector<std::vector<bool>> power = rows, reach = rows;
      unsigned gcd = 0;
      bool primitive = false;
      for (std::size_t k = 1; k <= limit; ++k) {
        bool all = true, diagonal = false;
        for (std::size_t i = 0; i < n; ++i) {
          diagonal = diagonal || power[i][i];
          for (std::size_t j = 0; j < n; ++j) all = all && power[i][j];
        }
        if (diagonal) gcd = std::gcd(gcd, static_cast<unsigned>(k));
        primitive = primitive || all;
        std::vector<std::vector<bool>> next(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t m = 0; m < n; ++m) next[i][j] = next[i][j] || (power[i][m] && rows[m][j]);
            reach[i][j] = reach[i][j] || next[i][j];
          }
        }
        power = std::move(next);
      }
      bool irreducible = true;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) irreducible = irreducible && reach[i][j];
      }
      const auto info = check_transitive_mixing(AdmissibilityMatrix(rows));
      REQUIRE(info.transitive == irreducible);
      if (irreducible) {
        REQUIRE(info.mixing == primitive);
        REQUIRE(info.period == gcd);
      }
    }
  }
}

TEST_CASE("word parsing and formatting") {
  const MarkovBase base = fixtures::free_steps();
  CHECK(base.parse("aAbB") == SymbolString{0, 1, 2, 3});
  CHECK(base.format({3, 2}) == "Bb");
  const MarkovBase long_names = fixtures::uniform({"up", "down"});
  CHECK(long_names.parse("up down,up") == SymbolString{0, 1, 0});
  CHECK_THROWS_AS(base.symbol("c"), InvalidInput);
}

TEST_CASE("for_each_word respects admissibility and order") {
  std::vector<std::string> words;
  const MarkovBase base = golden_mean();
  for_each_word(base, 3, [&](const SymbolString& w) { words.push_back(base.format(w)); });
  CHECK(words == std::vector<std::string>{"000", "001", "010", "100", "101"});
}
