#include "amenwalk/walkdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_set>

#include "amenwalk/error.hpp"
#include "amenwalk/parallel.hpp"
#include "amenwalk/rate_fit.hpp"
#include "walker.hpp"

namespace amenwalk {

template <Scalar T>
T DPState<T>::total() const {
  Accumulator<T> acc;
  for (const auto& x : mass) acc.add(x);
  return acc.value();
}

template <Scalar T>
std::map<VertexId, T> DPState<T>::marginal() const {
  std::map<VertexId, T> out;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    Accumulator<T> acc;
    for (std::size_t s = 0; s < slots; ++s) acc.add(mass[i * slots + s]);
    out[vertices[i]] += acc.value();
  }
  return out;
}

template struct DPState<double>;
template struct DPState<Rational>;

template <Scalar T>
DPState<T> step_distribution(const GraphExtension& ext, std::size_t n, const WalkOptions& options) {
  auto walker = detail::make_walker<T>(ext, options, options.start);
  for (std::size_t j = 0; j < n; ++j) walker.step();
  return walker.state();
}

template <Scalar T>
T return_prob(const GraphExtension& ext, std::size_t n, const WalkOptions& options) {
  if (n == 0) throw InvalidInput("return probabilities start at n = 1");
  WalkOptions opts = options;
  if (!opts.horizon) opts.horizon = n;
  auto walker = detail::make_walker<T>(ext, opts, opts.start);
  for (std::size_t j = 0; j < n; ++j) walker.step();
  return walker.mass_at_target();
}

template DPState<double> step_distribution<double>(const GraphExtension&, std::size_t, const WalkOptions&);
template DPState<Rational> step_distribution<Rational>(const GraphExtension&, std::size_t, const WalkOptions&);
template double return_prob<double>(const GraphExtension&, std::size_t, const WalkOptions&);
template Rational return_prob<Rational>(const GraphExtension&, std::size_t, const WalkOptions&);

std::string to_string(ReturnMethod method) {
  switch (method) {
    case ReturnMethod::exact_dp: return "exact-dp";
    case ReturnMethod::float_dp: return "float-dp";
    case ReturnMethod::monte_carlo: return "monte-carlo";
    case ReturnMethod::oracle: return "oracle";
  }
  return "?";
}

namespace {

// Fills table entries 1..n_max from a walker until it runs out of budget;
// returns the number of entries filled.
template <Scalar T>
std::size_t fill_table(detail::Walker<T>& walker, std::size_t n_max, const std::vector<bool>* filter,
                       ReturnTable& table) {
  try {
    for (std::size_t n = 1; n <= n_max; ++n) {
      walker.step();
      const T p = walker.mass_at_target(filter);
      ReturnEntry e;
      e.n = n;
      e.value = to_double(p);
      if constexpr (std::same_as<T, Rational>) {
        e.exact = p;
        e.method = ReturnMethod::exact_dp;
      } else {
        e.method = ReturnMethod::float_dp;
      }
      table.push_back(std::move(e));
    }
  } catch (const BudgetExceeded&) {
  }
  return table.size();
}

template <Scalar T>
detail::Walker<T> table_walker(const GraphExtension& ext, const std::vector<bool>* omega, std::size_t n_max,
                               unsigned threads) {
  const MarkovBase& base = ext.base();
  std::vector<T> w;
  const bool collapse = omega == nullptr && base.is_bernoulli();
  if (collapse) {
    w.push_back(T(1));
  } else {
    for (Symbol a = 0; a < base.size(); ++a) {
      w.push_back(omega && !(*omega)[a] ? T(0) : from_rational<T>(base.weight(a)));
    }
  }
  std::vector<std::pair<VertexId, std::vector<T>>> initial;
  initial.emplace_back(ext.root(), std::move(w));
  return detail::Walker<T>(ext, collapse, std::move(initial), threads, n_max, ext.root());
}

ReturnTable build_table(const GraphExtension& ext, const std::vector<bool>* omega, std::size_t n_max,
                        const TableOptions& options) {
  if (n_max == 0) throw InvalidInput("n_max must be at least 1");
  if (omega && omega->size() != ext.base().size()) throw InvalidInput("Omega mask does not match the alphabet");
  ReturnTable table;
  table.reserve(n_max);
  std::size_t done = 0;
  try {
    if (options.mode == Arithmetic::exact) {
      auto walker = table_walker<Rational>(ext, omega, n_max, options.threads);
      done = fill_table(walker, n_max, omega, table);
    } else {
      auto walker = table_walker<double>(ext, omega, n_max, options.threads);
      done = fill_table(walker, n_max, omega, table);
    }
  } catch (const BudgetExceeded&) {
  }
  if (done < n_max) {
    if (omega) throw BudgetExceeded("Omega-restricted table exceeds the state budget at n = " + std::to_string(done + 1));
    const ReturnTable mc = mc_return_table(ext, n_max, options.mc_samples, options.seed, options.threads);
    for (std::size_t n = done + 1; n <= n_max; ++n) table.push_back(mc[n - 1]);
  }
  return table;
}

}  // namespace

ReturnTable return_table(const GraphExtension& ext, std::size_t n_max, const TableOptions& options) {
  return build_table(ext, nullptr, n_max, options);
}

ReturnTable omega_return_table(const GraphExtension& ext, const std::vector<bool>& omega, std::size_t n_max,
                               const TableOptions& options) {
  return build_table(ext, &omega, n_max, options);
}

template <Scalar T>
std::vector<T> radial_oracle(std::size_t k, std::size_t n_max) {
  if (k < 2) throw InvalidInput("radial oracle needs rank at least 2");
  const Rational down_q(1, static_cast<unsigned long>(2 * k));
  const T down = from_rational<T>(down_q);
  const T up = from_rational<T>(1 - down_q);
  std::vector<T> p(n_max + 1, T(0));
  p[0] = T(1);
  std::vector<T> mass(n_max / 2 + 2, T(0));
  mass[0] = T(1);
  for (std::size_t n = 1; n <= n_max; ++n) {
    // Distances beyond what the remaining steps can undo are dropped.
    const std::size_t reach = std::min(n, n_max - n);
    std::vector<T> next(mass.size(), T(0));
    for (std::size_t d = 0; d < mass.size(); ++d) {
      if (is_zero(mass[d])) continue;
      if (d == 0) {
        if (1 <= reach) next[1] += mass[0];
        continue;
      }
      if (d + 1 <= reach) next[d + 1] += mass[d] * up;
      if (d - 1 <= reach) next[d - 1] += mass[d] * down;
    }
    mass = std::move(next);
    p[n] = mass[0];
  }
  return p;
}

template std::vector<double> radial_oracle<double>(std::size_t, std::size_t);
template std::vector<Rational> radial_oracle<Rational>(std::size_t, std::size_t);

ReturnTable oracle_table(std::size_t k, std::size_t n_max) {
  const auto p = radial_oracle<double>(k, n_max);
  ReturnTable table;
  for (std::size_t n = 1; n <= n_max; ++n) {
    ReturnEntry e;
    e.n = n;
    e.value = p[n];
    e.method = ReturnMethod::oracle;
    table.push_back(e);
  }
  return table;
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::root: return "root";
    case Estimator::ratio: return "ratio";
    case Estimator::fit: return "fit";
  }
  return "?";
}

Estimator parse_estimator(const std::string& name) {
  if (name == "root") return Estimator::root;
  if (name == "ratio") return Estimator::ratio;
  if (name == "fit") return Estimator::fit;
  throw InvalidInput("unknown estimator '" + name + "' (expected root, ratio or fit)");
}

double RateReport::value() const {
  switch (selected) {
    case Estimator::root: return root;
    case Estimator::ratio: return ratio;
    case Estimator::fit: return fit;
  }
  return fit;
}

RateReport rate_report(ReturnTable table, Estimator selected) {
  RateReport r;
  r.selected = selected;
  r.table = std::move(table);
  const auto& t = r.table;
  std::vector<double> p(t.size() + 1, 0.0);
  std::size_t n_max = 0;
  for (const auto& e : t) {
    if (e.n >= p.size()) p.resize(e.n + 1, 0.0);
    p[e.n] = e.value;
    n_max = std::max(n_max, e.n);
  }
  for (std::size_t n = n_max; n >= 1; --n) {
    if (p[n] > 0) {
      r.root_n = n;
      r.root = std::min(1.0, std::pow(p[n], 1.0 / static_cast<double>(n)));
      break;
    }
  }
  if (r.root_n == 0) {
    throw InvalidInput("no returns observed up to n = " + std::to_string(n_max) + "; try a larger n_max");
  }
  for (std::size_t n = n_max; n >= 3; --n) {
    if (p[n] > 0 && p[n - 2] > 0) {
      r.ratio_n = n;
      r.ratio_raw = std::sqrt(p[n] / p[n - 2]);
      break;
    }
  }
  if (r.ratio_n == 0) r.ratio_raw = r.root;
  r.ratio = std::min(1.0, r.ratio_raw);

  r.window_begin = std::max<std::size_t>(1, n_max / 2);
  r.window_end = n_max;
  auto collect = [&](auto keep) {
    std::vector<double> xs, ys;
    for (std::size_t n = r.window_begin; n <= r.window_end; ++n) {
      if (p[n] > 0 && keep(n)) {
        xs.push_back(static_cast<double>(n));
        ys.push_back(std::log(p[n]));
      }
    }
    return std::pair{xs, ys};
  };
  auto [xs, ys] = collect([](std::size_t n) { return n % 2 == 0; });
  if (xs.size() < 3) std::tie(xs, ys) = collect([](std::size_t) { return true; });
  if (xs.size() < 3) {
    r.window_begin = 1;
    std::tie(xs, ys) = collect([](std::size_t) { return true; });
  }
  if (xs.size() < 3) {
    r.fit_raw = r.root;
  } else {
    try {
      const DecayFit fit = fit_decay(xs, ys);
      r.fit_raw = fit.rate;
      r.fit_exponent = fit.exponent;
      r.fit_residual = fit.residual;
    } catch (const InvalidInput&) {
      r.fit_raw = r.root;
    }
  }
  r.fit = std::min(1.0, r.fit_raw);
  return r;
}

RateReport decay_rate(const GraphExtension& ext, std::size_t n_max, Estimator selected, const TableOptions& options) {
  if (n_max < 4) throw InvalidInput("decay_rate needs n_max >= 4");
  return rate_report(return_table(ext, n_max, options), selected);
}

FiberFunction::FiberFunction(std::map<VertexId, double> values) : values_(std::move(values)) {
  Accumulator<double> acc;
  for (const auto& [v, x] : values_) acc.add(x * x);
  norm_ = std::sqrt(acc.value());
}

double FiberFunction::operator()(VertexId v) const {
  auto it = values_.find(v);
  return it == values_.end() ? 0.0 : it->second;
}

FiberFunction markov_operator_apply(const GraphExtension& ext, const FiberFunction& f, std::size_t n,
                                    unsigned threads) {
  if (n == 0 || f.support_size() == 0) return f;
  const MarkovBase& base = ext.base();
  const bool collapse = base.is_bernoulli();
  std::vector<std::pair<VertexId, std::vector<double>>> initial;
  for (const auto& [v, x] : f.values()) {
    std::vector<double> w;
    if (collapse) {
      w.push_back(x);
    } else {
      for (Symbol a = 0; a < base.size(); ++a) w.push_back(x * base.weight_d(a));
    }
    initial.emplace_back(v, std::move(w));
  }
  detail::Walker<double> walker(ext, collapse, std::move(initial), threads, std::nullopt, ext.root());
  for (std::size_t j = 0; j < n; ++j) walker.step();
  return FiberFunction(walker.state().marginal());
}

namespace {

PressureReport pressure_from_partition(std::vector<std::pair<std::size_t, double>> partition) {
  PressureReport r;
  r.partition = std::move(partition);
  std::size_t last = 0;
  double last_z = 0.0;
  for (const auto& [n, z] : r.partition) {
    if (z > 0 && n > last) {
      last = n;
      last_z = z;
    }
  }
  if (last == 0) throw InvalidInput("no periodic returns in the window; try a larger n_max");
  r.root = std::log(last_z) / static_cast<double>(last);
  r.window_begin = std::max<std::size_t>(1, last / 2);
  r.window_end = last;
  std::vector<double> xs, ys;
  for (const auto& [n, z] : r.partition) {
    if (n >= r.window_begin && n <= last && z > 0 && (n - last) % 2 == 0) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(z));
    }
  }
  r.pressure = xs.size() >= 2 ? fit_slope(xs, ys) : r.root;
  ReturnTable table;
  for (const auto& [n, z] : r.partition) {
    ReturnEntry e;
    e.n = n;
    e.value = z;
    table.push_back(e);
  }
  r.log_rate = std::log(rate_report(std::move(table)).fit);
  return r;
}

}  // namespace

PressureReport pressure_from_table(const ReturnTable& table) {
  std::vector<std::pair<std::size_t, double>> partition;
  for (const auto& e : table) partition.emplace_back(e.n, e.value);
  return pressure_from_partition(std::move(partition));
}

PressureReport gurevich_pressure(const GraphExtension& ext, std::size_t n_max, const TableOptions& options) {
  const MarkovBase& base = ext.base();
  if (!base.full_branch()) throw InvalidInput("the Gurevich pressure estimator needs a full-branch base");
  if (n_max < 2) throw InvalidInput("gurevich_pressure needs n_max >= 2");
  if (base.is_bernoulli()) return pressure_from_table(return_table(ext, n_max, options));

  // Periodic words weighted by the cycle product P(w_1, w_2) ... P(w_n, w_1),
  // without the stationary factor: one walk per first symbol, closed by
  // requiring the next symbol after step n to be that first symbol again.
  std::vector<Accumulator<double>> z(n_max + 1);
  for (Symbol f = 0; f < base.size(); ++f) {
    std::vector<double> w(base.size(), 0.0);
    w[f] = 1.0;
    std::vector<std::pair<VertexId, std::vector<double>>> initial;
    initial.emplace_back(ext.root(), std::move(w));
    detail::Walker<double> walker(ext, false, std::move(initial), options.threads, n_max, ext.root());
    std::vector<bool> only(base.size(), false);
    only[f] = true;
    for (std::size_t n = 1; n <= n_max; ++n) {
      walker.step();
      z[n].add(walker.mass_at_target(&only));
    }
  }
  std::vector<std::pair<std::size_t, double>> partition;
  for (std::size_t n = 1; n <= n_max; ++n) partition.emplace_back(n, z[n].value());
  return pressure_from_partition(std::move(partition));
}

Rational almost_invariance_defect(const GraphExtension& ext, const std::vector<VertexId>& a) {
  if (a.empty()) throw InvalidInput("almost_invariance_defect needs a nonempty set");
  const std::unordered_set<VertexId> set(a.begin(), a.end());
  ExtensionGraph& graph = ext.graph();
  Rational total = 0;
  for (Symbol s = 0; s < ext.base().size(); ++s) {
    std::size_t moved_out = 0;
    for (VertexId v : set) {
      if (!set.count(graph.forward(v, s))) ++moved_out;
    }
    // kappa_s is a bijection, so |kappa_s(A) \ A| = |A \ kappa_s(A)|.
    total += ext.base().weight(s) * Rational(static_cast<unsigned long>(2 * moved_out));
  }
  total /= Rational(static_cast<unsigned long>(set.size()));
  total.canonicalize();
  return total;
}

namespace {

using Sparse = std::map<VertexId, double>;

Sparse translate(const GraphExtension& ext, const Sparse& f, const SymbolString& u) {
  Sparse out;
  for (const auto& [v, x] : f) out[kappa_word(ext, u, v)] += x;
  return out;
}

void add_into(Sparse& acc, const Sparse& g, double sign) {
  for (const auto& [v, x] : g) acc[v] += sign * x;
}

double l2(const Sparse& f) {
  Accumulator<double> acc;
  for (const auto& [v, x] : f) acc.add(x * x);
  return std::sqrt(acc.value());
}

SymbolString random_word(const MarkovBase& base, std::mt19937_64& rng, std::size_t length) {
  SymbolString w;
  while (w.size() < length) {
    std::vector<Symbol> options;
    for (Symbol a = 0; a < base.size(); ++a) {
      if (w.empty() || base.admissible(w.back(), a)) options.push_back(a);
    }
    if (options.empty()) break;
    w.push_back(options[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(options.size()))]);
  }
  return w;
}

}  // namespace

LemmaReport lemma_inequality_checks(const GraphExtension& ext, const std::vector<SymbolString>& loops,
                                    std::size_t trials, std::uint64_t seed, std::size_t verified_radius) {
  if (loops.empty()) throw InvalidInput("lemma checks need a nonempty loop witness");
  std::size_t longest = 0;
  for (const auto& u : loops) longest = std::max(longest, u.size());
  LemmaReport r;
  r.trials = trials;
  r.support_radius = verified_radius >= longest ? verified_radius - longest : 0;
  const std::vector<VertexId> ball = ext.graph().ball(r.support_radius);
  const double loops_count = static_cast<double>(loops.size());
  r.min_slack_normdrop = std::numeric_limits<double>::infinity();
  r.min_slack_rotundity = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(splitmix64(seed));
  std::string worst;
  for (std::size_t t = 0; t < trials; ++t) {
    Sparse f;
    if (t % 10 == 0) {
      f[ball[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(ball.size()))]] = 1.0;
    } else {
      for (VertexId v : ball) {
        if (uniform01(rng) < 0.5) f[v] = 2.0 * uniform01(rng) - 1.0;
      }
      if (f.empty()) f[ball.front()] = 1.0;
    }
    const double norm = l2(f);
    if (norm == 0.0) {
      f.clear();
      f[ball.front()] = 1.0;
    } else {
      for (auto& [v, x] : f) x /= norm;
    }

    Sparse loop_sum;
    for (const auto& u : loops) add_into(loop_sum, translate(ext, f, u), 1.0);
    Sparse drop = loop_sum;
    add_into(drop, f, -1.0);
    const double slack1 = (loops_count - 1.0) - l2(drop);

    const SymbolString w = random_word(ext.base(), rng, 1 + static_cast<std::size_t>(uniform01(rng) * 3.0));
    const Sparse fw = translate(ext, f, w);
    Sparse diff = f;
    add_into(diff, fw, -1.0);
    const double eps = l2(diff);
    const double delta = 2.0 - std::sqrt(std::max(0.0, 4.0 - eps * eps));
    Sparse sum = loop_sum;
    add_into(sum, fw, 1.0);
    const double slack2 = 1.0 + loops_count - delta - l2(sum);

    if (slack1 < r.min_slack_normdrop || slack2 < r.min_slack_rotundity) {
      worst = "trial " + std::to_string(t) + ", support " + std::to_string(f.size()) + ", |w| = " +
              std::to_string(w.size());
    }
    r.min_slack_normdrop = std::min(r.min_slack_normdrop, slack1);
    r.min_slack_rotundity = std::min(r.min_slack_rotundity, slack2);
  }
  r.passed = trials == 0 || (r.min_slack_normdrop >= -1e-10 && r.min_slack_rotundity >= -1e-10);
  r.details = trials == 0 ? "no trials" : "tightest: " + worst;
  return r;
}

namespace {

constexpr std::size_t mc_shards = 64;
constexpr std::size_t mc_prewarm_cap = 2'000'000;

struct SymbolSampler {
  std::vector<double> first;
  std::vector<std::vector<double>> rows;

  explicit SymbolSampler(const MarkovBase& base) {
    double c = 0.0;
    for (Symbol a = 0; a < base.size(); ++a) first.push_back(c += base.weight_d(a));
    for (Symbol a = 0; a < base.size(); ++a) {
      std::vector<double> row;
      c = 0.0;
      for (Symbol b = 0; b < base.size(); ++b) row.push_back(c += base.transition_d(a, b));
      rows.push_back(std::move(row));
    }
  }

  static Symbol pick(const std::vector<double>& cumulative, double u) {
    u *= cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cumulative.begin());
    if (i >= cumulative.size()) i = cumulative.size() - 1;
    // Skip zero-width bins at the top end.
    while (i > 0 && cumulative[i] == cumulative[i - 1]) --i;
    return static_cast<Symbol>(i);
  }
};

}  // namespace

ReturnTable mc_return_table(const GraphExtension& ext, std::size_t n_max, std::uint64_t samples, std::uint64_t seed,
                            unsigned threads) {
  if (samples == 0) throw InvalidInput("Monte Carlo needs at least one sample");
  ExtensionGraph& graph = ext.graph();
  const std::size_t symbols = ext.base().size();

  // Pre-discover a ball with all its actions cached, so shards only read.
  std::size_t radius = 0;
  try {
    while (radius < n_max / 2 && !graph.exhausted()) {
      const auto b = graph.ball(radius + 1);
      if (b.size() * (symbols + 1) > mc_prewarm_cap) break;
      ++radius;
    }
    for (VertexId v : graph.ball(radius)) {
      for (Symbol a = 0; a < symbols; ++a) graph.forward(v, a);
    }
  } catch (const BudgetExceeded&) {
  }
  while (radius > 0) {
    bool cached = true;
    for (VertexId v : graph.ball(radius)) {
      for (Symbol a = 0; a < symbols && cached; ++a) cached = graph.forward_cached(v, a) != ExtensionGraph::none;
      if (!cached) break;
    }
    if (cached) break;
    --radius;
  }
  const bool finite = graph.exhausted();
  const SymbolSampler sampler(ext.base());
  const Cocycle& cocycle = ext.cocycle();
  const VertexId root = ext.root();

  std::vector<std::vector<std::uint64_t>> counts(mc_shards, std::vector<std::uint64_t>(n_max + 1, 0));
  parallel_for(mc_shards, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      std::mt19937_64 rng(splitmix64(seed ^ splitmix64(s + 1)));
      const std::uint64_t quota = samples / mc_shards + (s < samples % mc_shards ? 1 : 0);
      auto& count = counts[s];
      for (std::uint64_t k = 0; k < quota; ++k) {
        VertexId v = root;
        std::string key;
        bool by_id = true;
        Symbol a = SymbolSampler::pick(sampler.first, uniform01(rng));
        for (std::size_t t = 1; t <= n_max; ++t) {
          if (by_id) {
            const VertexId next = graph.forward_cached(v, a);
            if (next != ExtensionGraph::none) {
              v = next;
            } else {
              key = cocycle.act(a, graph.key(v));
              by_id = false;
            }
          } else {
            key = cocycle.act(a, key);
          }
          if (!by_id) {
            if (auto id = graph.find(key); id && graph.depth(*id)) {
              v = *id;
              by_id = true;
            }
          }
          const std::size_t left = n_max - t;
          if (by_id) {
            if (v == root) ++count[t];
            const auto d = graph.depth(v);
            if (!finite && d && *d > left) break;
          } else if (!finite && left <= radius) {
            break;
          }
          if (t < n_max) a = SymbolSampler::pick(sampler.rows[a], uniform01(rng));
        }
      }
    }
  });

  ReturnTable table;
  const double total = static_cast<double>(samples);
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::uint64_t hits = 0;
    for (const auto& c : counts) hits += c[n];
    ReturnEntry e;
    e.n = n;
    e.value = static_cast<double>(hits) / total;
    e.std_error = std::sqrt(e.value * (1.0 - e.value) / total);
    e.method = ReturnMethod::monte_carlo;
    table.push_back(e);
  }
  return table;
}

MonteCarloEstimate mc_return_prob(const GraphExtension& ext, std::size_t n, std::uint64_t samples, std::uint64_t seed,
                                  unsigned threads) {
  if (n == 0) throw InvalidInput("return probabilities start at n = 1");
  const ReturnTable table = mc_return_table(ext, n, samples, seed, threads);
  MonteCarloEstimate m;
  m.estimate = table.back().value;
  m.std_error = table.back().std_error;
  m.samples = samples;
  m.returns = static_cast<std::uint64_t>(std::llround(m.estimate * static_cast<double>(samples)));
  return m;
}

}  // namespace amenwalk
