// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "amenwalk/cli.hpp"
#include "amenwalk/error.hpp"
#include "amenwalk/inducing.hpp"
#include "amenwalk/schreier.hpp"
#include "amenwalk/walkdp.hpp"
#include "amenwalk/wgraph.hpp"
#include "fixtures.hpp"

using namespace amenwalk;

namespace {

const double kesten = std::sqrt(3.0) / 2.0;

// Frozen from the first verified run: power iteration on the radius-12 ball.
constexpr double cyclic_rho_golden = 0.850557889623;
constexpr double golden_tolerance = 1e-6;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome ac1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  auto ext = fixtures::f2();
  TableOptions opts;
  opts.mode = Arithmetic::exact;
  const ReturnTable table = return_table(ext, 20, opts);
  const auto oracle = radial_oracle<Rational>(2, 20);
  bool equal = table.size() == 20;
  for (const auto& e : table) equal = equal && e.exact && *e.exact == oracle[e.n];
  const double t = seconds_since(t0);
  o.require(equal, "exact p_n == oracle for n <= 20");
  o.require(t < 60.0, "runtime " + num(t) + " s < 60");
  return o;
}

Outcome ac2() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const double fit = rate_report(oracle_table(2, 1000)).fit;
  o.require(std::abs(fit - kesten) < 0.001, "oracle fit " + num(fit) + " within 0.001");
  auto ext = fixtures::f2();
  const double dp = decay_rate(ext, 24).fit;
  o.require(std::abs(dp - kesten) < 0.03, "ball-DP fit (n <= 24) " + num(dp) + " within 0.03");
  const double t = seconds_since(t0);
  o.require(t < 30.0, "runtime " + num(t) + " s < 30");
  return o;
}

Outcome ac3() {
  Outcome o;
  {
    const auto t0 = std::chrono::steady_clock::now();
    auto z = fixtures::z1();
    // The ratio uses p_n / p_{n-2}; the walk is periodic, so n = 500 pairs of steps need 1002.
    const double r = decay_rate(z, 1002, Estimator::ratio).ratio;
    const double t = seconds_since(t0);
    o.require(r >= 0.99, "Z ratio " + num(r) + " >= 0.99");
    o.require(t < 60.0, "runtime " + num(t) + " s");
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    auto z = fixtures::z2();
    const double r = decay_rate(z, 200, Estimator::ratio).ratio;
    const double t = seconds_since(t0);
    o.require(r >= 0.99, "Z^2 ratio " + num(r) + " >= 0.99");
    o.require(t < 60.0, "runtime " + num(t) + " s");
  }
  return o;
}

Outcome ac4() {
  Outcome o;
  {
    auto z = fixtures::z1();
    WeightedDigraph g = canonical_weight(z);
    const FolnerResult f = folner_search(g, 0.4, 0.01, 100000);
    o.require(f.certificate && f.ratio <= Rational(1, 100), "Z certificate, ratio " + to_string(f.ratio));
    o.require(f.set.size() == 201, "interval of " + std::to_string(f.set.size()));
    std::vector<VertexId> ids;
    for (VertexId v : f.set) ids.push_back(z.graph().intern(g.key(v)));
    const Rational d = almost_invariance_defect(z, ids);
    o.require(d <= Rational(1, 100), "defect " + to_string(d) + " <= 0.01");
  }
  {
    auto ext = fixtures::index2();
    ext.graph().close();
    std::vector<VertexId> all;
    for (VertexId v = 0; v < ext.graph().vertex_count(); ++v) all.push_back(v);
    const Rational d = almost_invariance_defect(ext, all);
    o.require(d == 0, "index-2 K = V defect " + to_string(d));
    const SpectralReport s = spectral_radius(ext, 8, 4);
    o.require(s.rho == 1.0, "index-2 rho " + num(s.rho) + " (" + s.method + ")");
  }
  return o;
}

Outcome ac5() {
  Outcome o;
  auto ext = fixtures::cyclic_a();
  const SpectralReport s = spectral_radius(ext, 24, 12);
  o.require(s.rho <= 0.95, "rho " + std::to_string(s.rho) + " <= 0.95");
  o.require(std::abs(s.rho - cyclic_rho_golden) <= golden_tolerance,
            "golden " + std::to_string(cyclic_rho_golden) + " +- 1e-6");
  WeightedDigraph g = canonical_weight(ext);
  const FolnerResult f = folner_search(g, 0.2, 0.1, 100000);
  o.require(!f.certificate, "no certificate (best ratio " + num(f.ratio.get_d()) + ")");
  return o;
}

struct Scenario {
  std::string name;
  std::function<GraphExtension()> make;
  std::string omega;
  std::size_t n_max;
  std::size_t max_eta;
  std::size_t induced_steps;
  std::size_t max_ball;
  std::size_t support_radius;
};

Outcome ac6() {
  Outcome o;
  const std::vector<Scenario> scenarios = {
      {"Z", fixtures::z1, "[+]", 200, 20, 100, 2001, 40},
      {"Z^2", fixtures::z2, "[e]", 100, 6, 30, 5000, 24},
      {"F2", fixtures::f2, "[a]", 24, 6, 12, 20000, 12},
      {"<a>", fixtures::cyclic_a, "[a]", 24, 6, 12, 20000, 12},
      {"index-2", fixtures::index2, "[a]", 24, 6, 24, 20000, 4},
      {"S3-stabilizer", fixtures::s3stab, "[a]", 24, 6, 24, 20000, 4},
  };
  for (const auto& sc : scenarios) try {
    GraphExtension ext = sc.make();
    const InducedSystem s = first_return_words(ext.base(), parse_omega(ext.base(), sc.omega), sc.max_eta);
    InducedRatesOptions opts;
    opts.n_max = sc.n_max;
    opts.induced_steps = sc.induced_steps;
    opts.max_ball_vertices = sc.max_ball;
    const InducedRates r = induced_rates(ext, s, opts);
    GraphExtension fresh = sc.make();
    const double rho = spectral_radius(fresh, 24, sc.support_radius).rho;
    const double rs = r.r_s.value(), ro = r.r_omega.value(), rt = r.r_t.value();
    const bool ok = rs <= ro + 1e-9 && ro <= rt + 0.01 && rt <= rho + 0.01 && rho <= 1.0 + 1e-9;
    o.require(ok, sc.name + " R(S)=" + num(rs) + " R_O(T)=" + num(ro) + " R(T)=" + num(rt) + " rho=" + num(rho));
  } catch (const Error& e) {
    o.require(false, sc.name + " threw: " + e.what());
  }
  return o;
}

Outcome ac7() {
  Outcome o;
  {
    // p_2m = binom(2m, m) / 4^m on the line.
    ReturnTable t;
    double p_even = 1.0;
    for (std::size_t n = 1; n <= 500; ++n) {
      ReturnEntry e;
      e.n = n;
      e.method = ReturnMethod::oracle;
      if (n % 2 == 0) {
        p_even *= static_cast<double>(n - 1) / static_cast<double>(n);
        e.value = p_even;
      }
      t.push_back(e);
    }
    const PressureReport p = pressure_from_table(t);
    const double log_fit = std::log(rate_report(t).fit);
    o.require(std::abs(p.pressure - log_fit) <= 0.02 && std::abs(p.pressure) <= 0.02,
              "Z pressure " + num(p.pressure) + " log R " + num(log_fit));
  }
  {
    const ReturnTable t = oracle_table(2, 500);
    const PressureReport p = pressure_from_table(t);
    const double log_fit = std::log(rate_report(t).fit);
    o.require(std::abs(p.pressure - log_fit) <= 0.02 && std::abs(p.pressure - std::log(kesten)) <= 0.02,
              "F2 pressure " + num(p.pressure) + " log R " + num(log_fit));
  }
  return o;
}

Outcome ac8() {
  Outcome o;
  const MarkovBase coin = fixtures::uniform({"0", "1"});
  const InducedSystem s = first_return_words(coin, parse_omega(coin, "[0]"), 60);
  bool exact = true;
  std::size_t k = 1;
  for (const auto& [eta, nu] : eta_distribution(s)) {
    Rational expected(1);
    expected /= Rational(mpz_class(1) << static_cast<mp_bitcnt_t>(eta));
    exact = exact && eta == k && nu == expected;
    ++k;
  }
  o.require(exact && k == 61, "nu(eta = k) = 2^-k for k <= 60");
  const KacReport kac = kac_check(s);
  o.require(kac.defect < 1e-6, "Kac defect " + num(kac.defect));
  const TailReport tail = tail_rate(s);
  o.require(std::abs(tail.rate - 0.5) <= 0.01 && tail.exponential, "tail rate " + num(tail.rate));
  return o;
}

Outcome ac9() {
  Outcome o;
  const std::vector<std::pair<std::string, std::function<GraphExtension()>>> scenarios = {
      {"Z", fixtures::z1},          {"Z^2", fixtures::z2},          {"F2", fixtures::f2},
      {"<a>", fixtures::cyclic_a}, {"index-2", fixtures::index2}, {"S3-stabilizer", fixtures::s3stab},
  };
  for (const auto& [name, make] : scenarios) {
    GraphExtension ext = make();
    const UniformLoopsReport loops = check_uniform_loops(ext, 2, 8);
    if (!loops.verified) {
      o.require(false, name + " has no loop witness");
      continue;
    }
    const LemmaReport r = lemma_inequality_checks(ext, loops.witness, 1000, 7, 8);
    o.require(r.trials == 1000 && r.min_slack_normdrop >= -1e-10 && r.min_slack_rotundity >= -1e-10,
              name + " slack " + num(std::min(r.min_slack_normdrop, r.min_slack_rotundity)));
  }
  return o;
}

std::vector<FreeWord> words(const std::vector<std::string>& text) {
  std::vector<FreeWord> out;
  for (const auto& t : text) out.push_back(parse_word(t, 2));
  return out;
}

Outcome ac10() {
  Outcome o;
  const std::vector<std::pair<std::vector<std::string>, std::function<bool(const FreeWord&)>>> cases = {
      {{"a"},
       [](const FreeWord& w) {
         for (Letter x : w.letters()) {
           if (std::abs(x) != 1) return false;
         }
         return true;
       }},
      {{"aa", "b"},
       [](const FreeWord& w) {
         std::size_t run = 0;
         for (Letter x : w.letters()) {
           if (std::abs(x) == 1) {
             ++run;
           } else if (run % 2) {
             return false;
           } else {
             run = 0;
           }
         }
         return run % 2 == 0;
       }},
      {{"aa", "bb", "ab"}, [](const FreeWord& w) { return w.size() % 2 == 0; }},
  };
  for (const auto& [gens, oracle] : cases) {
    const SubgroupAutomaton m = fixtures::fold(gens);
    std::vector<FreeWord> letters;
    for (const auto& g : words(gens)) {
      letters.push_back(g);
      letters.push_back(g.inverse());
    }
    // Every product of at most 8 factors is a member, and membership of each
    // reduced product matches the characterization of the subgroup.
    std::size_t products = 0;
    bool members = true;
    std::vector<FreeWord> layer{FreeWord{}};
    for (std::size_t len = 0; len <= 8 && members; ++len) {
      std::vector<FreeWord> next;
      for (const auto& w : layer) {
        ++products;
        members = members && m.contains(w) && oracle(w);
        if (len < 8) {
          for (const auto& x : letters) next.push_back(w * x);
        }
      }
      layer = std::move(next);
    }
    // Non-members: every reduced word of length <= 8 is classified correctly.
    bool agree = true;
    std::vector<std::vector<Letter>> reduced{{}};
    for (std::size_t len = 0; len <= 8; ++len) {
      std::vector<std::vector<Letter>> next;
      for (const auto& w : reduced) {
        const FreeWord fw(w);
        agree = agree && m.contains(fw) == oracle(fw);
        if (len == 8) continue;
        for (Letter x : {1, -1, 2, -2}) {
          if (!w.empty() && w.back() == -x) continue;
          auto v = w;
          v.push_back(x);
          next.push_back(std::move(v));
        }
      }
      reduced = std::move(next);
    }
    std::string name = "<";
    for (const auto& g : gens) name += (name.size() > 1 ? "," : "") + g;
    name += ">";
    o.require(members && agree, name + " over " + std::to_string(products) + " products");
    bool confluent = true;
    const auto reference = stallings_fold(words(gens), 2);
    for (std::uint64_t seed = 1; seed <= 100; ++seed) confluent = confluent && stallings_fold(words(gens), 2, seed) == reference;
    o.require(confluent, name + " confluent over 100 shuffles");
  }
  const auto core = normal_core(fixtures::s3_stabilizer());
  o.require(core.state_count() == 6, "S3 normal core has " + std::to_string(core.state_count()) + " states");
  return o;
}

Outcome ac11() {
  Outcome o;
  auto ext = fixtures::f2();
  for (std::size_t n : {8, 12, 16}) {
    const Rational p = return_prob<Rational>(ext, n);
    const MonteCarloEstimate mc = mc_return_prob(ext, n, 1'000'000, 42);
    const double pd = p.get_d();
    const double se = std::sqrt(pd * (1 - pd) / 1e6);
    o.require(std::abs(mc.estimate - pd) <= 3 * se,
              "n=" + std::to_string(n) + " mc " + num(mc.estimate) + " exact " + num(pd) + " se " + num(se));
  }
  return o;
}

std::string cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = amenwalk::run(args, out, err);
  return std::to_string(code) + "\n" + out.str() + err.str();
}

Outcome ac12() {
  Outcome o;
  const std::string dir = AMENWALK_CONFIG_DIR;
  const std::vector<std::vector<std::string>> scenarios = {
      {"return-rate", "--config", dir + "/f2.json", "--n-max", "16"},
      {"return-rate", "--config", dir + "/z1.json", "--n-max", "60", "--output", "json"},
      {"return-rate", "--config", dir + "/z2.json", "--n-max", "30"},
      {"return-rate", "--config", dir + "/index2.json", "--n-max", "20"},
      {"return-rate", "--config", dir + "/s3stab.json", "--n-max", "20"},
      {"spectral-radius", "--config", dir + "/cyclic_a.json", "--radius", "8"},
      {"gurevich", "--config", dir + "/f2.json", "--n-max", "14"},
      {"folner", "--config", dir + "/z1.json"},
      {"folner", "--config", dir + "/cyclic_a.json", "--budget", "20000"},
      {"defect", "--config", dir + "/index2.json"},
      {"graph", "--config", dir + "/s3stab.json", "--radius", "3"},
      {"check", "--config", dir + "/index2.json"},
      {"induce", "--config", dir + "/full2shift.json", "--output", "json"},
      {"mc-walk", "--config", dir + "/f2.json", "--n-max", "8", "--samples", "20000"},
      {"fold", "--rank", "2", "--gens", "aa,bb,ab"},
  };
  std::size_t identical = 0;
  for (auto args : scenarios) {
    args.push_back("--exact");
    auto one = args, four = args;
    one.insert(one.end(), {"--threads", "1"});
    four.insert(four.end(), {"--threads", "4"});
    const std::string a = cli(one), b = cli(four);
    if (a == b && a.rfind("0\n", 0) == 0) {
      ++identical;
    } else {
      o.require(false, args[0] + " " + args[2] + " differs or failed");
    }
  }
  o.require(identical == scenarios.size(),
            std::to_string(identical) + "/" + std::to_string(scenarios.size()) + " scenarios byte-identical");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1 oracle equivalence", ac1},  {"AC2 Kesten value", ac2},        {"AC3 lattice rates", ac3},
      {"AC4 Folner certificates", ac4}, {"AC5 non-amenability", ac5},     {"AC6 ordering chain", ac6},
      {"AC7 pressure identity", ac7},   {"AC8 inducing", ac8},            {"AC9 lemma suite", ac9},
      {"AC10 Stallings", ac10},         {"AC11 Monte Carlo", ac11},       {"AC12 determinism", ac12},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("threw: ") + e.what();
    }
    std::printf("%s %s [%.1fs] %s\n", outcome.pass ? "PASS" : "FAIL", name.c_str(), seconds_since(t0),
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
