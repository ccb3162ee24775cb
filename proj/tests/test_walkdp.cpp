#include <cmath>
#include <map>

#include "amenwalk/error.hpp"
#include "amenwalk/walkdp.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace amenwalk;

namespace {

std::map<std::string, Rational> by_key(const GraphExtension& ext, const DPState<Rational>& s) {
  std::map<std::string, Rational> out;
  for (const auto& [v, m] : s.marginal()) out[ext.graph().key(v)] = m;
  return out;
}

// mu{x : kappa^n_x(o) = o} by enumerating every admissible word.
Rational brute_return(const GraphExtension& ext, std::size_t n) {
  Rational total = 0;
  for_each_word(ext.base(), n, [&](const SymbolString& w) {
    if (kappa_word(ext, w, ext.root()) == ext.root()) total += cylinder_measure(ext.base(), w);
  });
  return total;
}

// Uniform stationary start; never steps back along the inverse letter.
MarkovBase non_backtracking() {
  std::vector<std::vector<Rational>> p(4, std::vector<Rational>(4, Rational(1, 3)));
  for (Symbol a = 0; a < 4; ++a) p[a][a ^ 1] = 0;
  return MarkovBase::markov({"a", "A", "b", "B"}, std::vector<Rational>(4, Rational(1, 4)), p);
}

// Full-branch Markov steps that favour not backtracking.
MarkovBase lazy_backtracking() {
  std::vector<std::vector<Rational>> p(4, std::vector<Rational>(4, Rational(5, 18)));
  for (Symbol a = 0; a < 4; ++a) p[a][a ^ 1] = Rational(1, 6);
  return MarkovBase::markov({"a", "A", "b", "B"}, std::vector<Rational>(4, Rational(1, 4)), p);
}

GraphExtension golden_mean_line() {
  auto base = MarkovBase::markov({"+", "-"}, {Rational(2, 3), Rational(1, 3)},
                                 {{Rational(1, 2), Rational(1, 2)}, {Rational(1), Rational(0)}});
  return GraphExtension(base, std::make_shared<LatticeCocycle>(std::vector<std::vector<long>>{{1}, {-1}}));
}

TableOptions exact() {
  TableOptions t;
  t.mode = Arithmetic::exact;
  return t;
}

}  // namespace

TEST_CASE("step distributions on Z and the tree") {
  auto z = fixtures::z1();
  const auto two = by_key(z, step_distribution<Rational>(z, 2));
  CHECK(two == std::map<std::string, Rational>{{"-2", Rational(1, 4)}, {"0", Rational(1, 2)}, {"2", Rational(1, 4)}});
  const auto zero = step_distribution<Rational>(z, 0);
  CHECK(zero.marginal() == std::map<VertexId, Rational>{{z.root(), Rational(1)}});
  auto f = fixtures::f2();
  CHECK(step_distribution<Rational>(f, 2).marginal().at(f.root()) == Rational(1, 4));
}

TEST_CASE("return probabilities of the standard fixtures") {
  auto z = fixtures::z1();
  CHECK(return_prob<Rational>(z, 2) == Rational(1, 2));
  CHECK(return_prob<Rational>(z, 3) == 0);
  auto f = fixtures::f2();
  CHECK(return_prob<Rational>(f, 4) == Rational(7, 64));
  CHECK(brute_return(f, 4) == Rational(7, 64));
  CHECK(return_prob<Rational>(fixtures::index2(), 2) == Rational(1, 2));
}

TEST_CASE("exact DP matches word enumeration") {
  std::vector<GraphExtension> cases = {fixtures::z1(), fixtures::f2(), fixtures::cyclic_a(), fixtures::s3stab(),
                                       golden_mean_line(), fixtures::schreier(fixtures::fold({"a"}), non_backtracking()),
                                       fixtures::schreier(fixtures::s3_stabilizer(), lazy_backtracking())};
  for (auto& ext : cases) {
    for (std::size_t n = 1; n <= 7; ++n) REQUIRE(return_prob<Rational>(ext, n) == brute_return(ext, n));
  }
}

TEST_CASE("mass is conserved and supported on the n-ball") {
  for (auto ext : {fixtures::cyclic_a(), golden_mean_line(), fixtures::z2()}) {
    for (std::size_t n = 0; n <= 8; ++n) {
      const auto s = step_distribution<Rational>(ext, n);
      REQUIRE(s.total() == 1);
      for (VertexId v : s.vertices) {
        auto d = ext.graph().depth(v);
        if (!d) {
          ext.graph().ball(n);
          d = ext.graph().depth(v);
        }
        REQUIRE(d);
        REQUIRE(*d <= n);
      }
    }
  }
}

TEST_CASE("float DP agrees with exact DP") {
  auto ext = fixtures::cyclic_a();
  for (std::size_t n = 2; n <= 12; n += 2) {
    CHECK(return_prob<double>(ext, n) == doctest::Approx(return_prob<Rational>(ext, n).get_d()).epsilon(1e-12));
  }
}

TEST_CASE("thread count does not change the DP") {
  auto a = fixtures::f2();
  auto b = fixtures::f2();
  WalkOptions one, four;
  four.threads = 4;
  const auto s1 = step_distribution<double>(a, 10, one);
  const auto s4 = step_distribution<double>(b, 10, four);
  REQUIRE(s1.vertices == s4.vertices);
  REQUIRE(s1.mass == s4.mass);
  const auto r1 = step_distribution<Rational>(a, 8, one);
  const auto r4 = step_distribution<Rational>(b, 8, four);
  REQUIRE(r1.mass == r4.mass);
}

TEST_CASE("horizon pruning keeps return probabilities exact") {
  auto ext = fixtures::cyclic_a();
  WalkOptions pruned;
  pruned.horizon = 10;
  const auto full = step_distribution<Rational>(ext, 10);
  CHECK(return_prob<Rational>(ext, 10, pruned) == full.marginal().at(ext.root()));
}

TEST_CASE("radial oracle") {
  const auto p = radial_oracle<Rational>(2, 9);
  CHECK(p[2] == Rational(1, 4));
  CHECK(p[4] == Rational(7, 64));
  for (std::size_t n = 1; n <= 9; n += 2) CHECK(p[n] == 0);
  const auto table = oracle_table(2, 6);
  CHECK(table.size() == 6);
  CHECK(table[3].value == doctest::Approx(7.0 / 64));
  CHECK(table[3].method == ReturnMethod::oracle);
}

TEST_CASE("return probabilities are supermultiplicative") {
  for (auto ext : {fixtures::cyclic_a(), fixtures::z2(), fixtures::s3stab()}) {
    const ReturnTable t = return_table(ext, 24, exact());
    auto p = [&](std::size_t n) { return *t[n - 1].exact; };
    for (std::size_t n = 1; n <= 11; ++n) {
      for (std::size_t m = 1; n + m <= 12; ++m) REQUIRE(p(2 * (n + m)) >= p(2 * n) * p(2 * m));
    }
  }
}

TEST_CASE("rate estimators on a synthetic table") {
  ReturnTable table;
  const double rho = 0.8;
  for (std::size_t n = 1; n <= 200; ++n) {
    ReturnEntry e;
    e.n = n;
    e.value = n % 2 ? 0.0 : 2.0 * std::pow(rho, n) * std::pow(n, -1.5);
    table.push_back(e);
  }
  const RateReport r = rate_report(table);
  CHECK(r.fit == doctest::Approx(rho).epsilon(1e-9));
  CHECK(r.fit_exponent == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(r.ratio == doctest::Approx(std::sqrt(table[199].value / table[197].value)));
  CHECK(r.root == doctest::Approx(std::pow(table[199].value, 1.0 / 200)));
  CHECK(r.value() == r.fit);
  CHECK(rate_report(table, Estimator::ratio).value() == r.ratio);
  CHECK_THROWS_AS(rate_report(ReturnTable(4)), InvalidInput);
}

TEST_CASE("decay rate on a single vertex is one") {
  auto ext = fixtures::one_vertex(fixtures::uniform({"x", "y"}));
  const RateReport r = decay_rate(ext, 12, Estimator::fit, exact());
  for (const auto& e : r.table) CHECK(*e.exact == 1);
  CHECK(r.root == doctest::Approx(1.0));
  CHECK(r.ratio == doctest::Approx(1.0));
  CHECK(r.fit == doctest::Approx(1.0));
  CHECK_THROWS_AS(decay_rate(ext, 3), InvalidInput);
}

TEST_CASE("ratio estimator on Z is the binomial ratio") {
  auto ext = fixtures::z1();
  const RateReport r = decay_rate(ext, 40, Estimator::ratio, exact());
  // p_40 / p_38 = (39 / 40).
  CHECK(r.ratio == doctest::Approx(std::sqrt(39.0 / 40)).epsilon(1e-12));
  CHECK(r.ratio_n == 40);
}

TEST_CASE("Markov operator") {
  auto z = fixtures::z1();
  const FiberFunction delta({{z.root(), 1.0}});
  CHECK(markov_operator_apply(z, delta, 0).values() == delta.values());
  const auto moved = markov_operator_apply(z, delta, 1);
  std::map<std::string, double> keyed;
  for (const auto& [v, x] : moved.values()) keyed[z.graph().key(v)] = x;
  CHECK(keyed == std::map<std::string, double>{{"-1", 0.5}, {"1", 0.5}});

  auto finite = fixtures::s3stab();
  finite.graph().close();
  std::map<VertexId, double> ones;
  for (VertexId v = 0; v < finite.graph().vertex_count(); ++v) ones[v] = 1.0;
  for (std::size_t n = 1; n <= 6; ++n) {
    const FiberFunction image = markov_operator_apply(finite, FiberFunction(ones), n);
    for (const auto& [v, x] : image.values()) REQUIRE(x == 1.0);
  }
}

TEST_CASE("Markov operator preserves total mass") {
  auto ext = fixtures::f2();
  std::map<VertexId, double> f;
  const auto ball = ext.graph().ball(3);
  for (std::size_t i = 0; i < ball.size(); ++i) f[ball[i]] = 1.0 + static_cast<double>(i % 7);
  double before = 0.0;
  for (const auto& [v, x] : f) before += x;
  for (std::size_t n : {1u, 3u, 5u}) {
    double after = 0.0;
    const FiberFunction image = markov_operator_apply(ext, FiberFunction(f), n);
    for (const auto& [v, x] : image.values()) after += x;
    CHECK(after == doctest::Approx(before).epsilon(1e-12));
  }
}

TEST_CASE("spectral radius on finite graphs is one") {
  const SpectralReport r = spectral_radius(fixtures::index2(), 8, 4);
  CHECK(r.rho == 1.0);
  CHECK(r.method == "exact-finite");
}

TEST_CASE("spectral radius lower bounds grow with the radius") {
  const SpectralReport r = spectral_radius(fixtures::f2(), 8, 8);
  CHECK(r.method == "power-iteration");
  for (std::size_t i = 1; i < r.stages.size(); ++i) CHECK(r.stages[i].rho >= r.stages[i - 1].rho - 1e-9);
  CHECK(r.rho < std::sqrt(3.0) / 2);
  CHECK(r.rho > 0.8);
}

TEST_CASE("spectral radius of the truncated line") {
  // Top eigenvalue of the half-step walk on a path of 2r + 1 vertices:
  // cos(pi / (2r + 2)).
  const std::size_t r = 40;
  const SpectralReport s = spectral_radius(fixtures::z1(), 8, r);
  CHECK(s.rho == doctest::Approx(std::cos(M_PI / (2 * r + 2))).epsilon(1e-6));
}

TEST_CASE("gurevich pressure") {
  {
    auto one = fixtures::one_vertex(fixtures::uniform({"x", "y", "z"}));
    const PressureReport p = gurevich_pressure(one, 20, exact());
    CHECK(p.pressure == doctest::Approx(0.0).epsilon(1e-12));
  }
  {
    auto ext = fixtures::schreier(fixtures::fold({"aa", "b", "abA"}), lazy_backtracking());
    const std::size_t n_max = 6;
    const PressureReport p = gurevich_pressure(ext, n_max);
    REQUIRE(p.partition.size() == n_max);
    for (const auto& [n, z] : p.partition) {
      double expected = 0.0;
      for_each_word(ext.base(), n, [&](const SymbolString& w) {
        if (kappa_word(ext, w, ext.root()) != ext.root()) return;
        double weight = 1.0;
        for (std::size_t i = 0; i < n; ++i) weight *= ext.base().transition_d(w[i], w[(i + 1) % n]);
        expected += weight;
      });
      REQUIRE(z == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  {
    auto ext = fixtures::schreier(fixtures::fold({"a"}), non_backtracking());
    CHECK_THROWS_AS(gurevich_pressure(ext, 8), InvalidInput);
  }
}

TEST_CASE("almost invariance defect") {
  auto z = fixtures::z1();
  std::vector<VertexId> interval;
  for (long k = 0; k < 10; ++k) interval.push_back(z.graph().intern(std::to_string(k)));
  CHECK(almost_invariance_defect(z, interval) == Rational(1, 5));
  auto finite = fixtures::index2();
  finite.graph().close();
  CHECK(almost_invariance_defect(finite, finite.graph().ball(5)) == 0);
  auto f = fixtures::f2();
  CHECK(almost_invariance_defect(f, {f.root()}) == 2);
  CHECK_THROWS_AS(almost_invariance_defect(f, {}), InvalidInput);
}

TEST_CASE("lemma inequalities") {
  auto z = fixtures::z1();
  const LemmaReport single = lemma_inequality_checks(z, {z.base().parse("+-")}, 50, 7, 12);
  CHECK(single.passed);
  CHECK(single.min_slack_normdrop == doctest::Approx(0.0));
  auto ext = fixtures::cyclic_a();
  const LemmaReport pair = lemma_inequality_checks(ext, {ext.base().parse("aA"), ext.base().parse("bB")}, 100, 9, 6);
  CHECK(pair.passed);
  CHECK(pair.min_slack_normdrop >= -1e-10);
  CHECK(pair.min_slack_rotundity >= -1e-10);
}

TEST_CASE("Monte Carlo return probabilities") {
  auto z = fixtures::z1();
  const auto two = mc_return_prob(z, 2, 1000000, 42);
  CHECK(std::abs(two.estimate - 0.5) <= 3 * two.std_error);
  CHECK(mc_return_prob(z, 3, 10000, 42).estimate == 0.0);
  const auto again = mc_return_prob(z, 2, 1000000, 42);
  CHECK(again.returns == two.returns);
  const auto threaded = mc_return_prob(z, 2, 1000000, 42, 4);
  CHECK(threaded.returns == two.returns);
  auto markov = golden_mean_line();
  const auto m = mc_return_prob(markov, 6, 400000, 5);
  CHECK(std::abs(m.estimate - return_prob<Rational>(markov, 6).get_d()) <= 4 * m.std_error);
}

TEST_CASE("return tables fall back to Monte Carlo past the state budget") {
  auto ext = GraphExtension(fixtures::free_steps(), fixtures::f2().cocycle_ptr(), 4000);
  TableOptions t;
  t.mc_samples = 20000;
  const ReturnTable table = return_table(ext, 16, t);
  CHECK(table.size() == 16);
  CHECK(table.back().method == ReturnMethod::monte_carlo);
  CHECK(table.back().std_error > 0.0);
  auto omega = std::vector<bool>{true, false, false, false};
  CHECK_THROWS_AS(omega_return_table(ext, omega, 16, t), BudgetExceeded);
}
