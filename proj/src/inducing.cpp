#include "amenwalk/inducing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "amenwalk/error.hpp"
#include "amenwalk/rate_fit.hpp"

namespace amenwalk {

std::vector<bool> parse_omega(const MarkovBase& base, const std::string& text) {
  std::string body = text;
  if (!body.empty() && body.front() == '[') body.erase(body.begin());
  if (!body.empty() && body.back() == ']') body.pop_back();
  std::vector<bool> omega(base.size(), false);
  std::string token;
  bool any = false;
  auto flush = [&] {
    if (token.empty()) return;
    omega[base.symbol(token)] = true;
    any = true;
    token.clear();
  };
  for (char c : body) {
    if (c == ',' || c == ' ' || c == '\t') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  if (!any) throw InvalidInput("Omega must name at least one symbol");
  return omega;
}

namespace {

Rational omega_measure(const MarkovBase& base, const std::vector<bool>& omega) {
  Rational m = 0;
  for (Symbol a = 0; a < base.size(); ++a) {
    if (omega[a]) m += base.weight(a);
  }
  if (m == 0) throw InvalidInput("Omega has measure zero");
  return m;
}

struct Enumerator {
  const MarkovBase& base;
  const std::vector<bool>& omega;
  std::size_t max_eta;
  std::size_t budget;
  InducedSystem& out;
  SymbolString prefix;

  void descend(const Rational& measure) {
    const Symbol last = prefix.back();
    for (Symbol c = 0; c < base.size() && !out.budget_hit; ++c) {
      if (!base.admissible(last, c)) continue;
      const Rational m = measure * base.transition(last, c);
      if (m == 0) continue;
      if (omega[c]) {
        if (out.words.size() >= budget) {
          out.budget_hit = true;
          return;
        }
        ReturnWord w;
        w.word = prefix;
        w.word.push_back(c);
        w.eta = prefix.size();
        w.nu = m / out.omega_measure;
        out.words.push_back(std::move(w));
      } else if (prefix.size() < max_eta) {
        prefix.push_back(c);
        descend(m);
        prefix.pop_back();
      }
    }
  }
};

}  // namespace

InducedSystem first_return_words(const MarkovBase& base, const std::vector<bool>& omega, std::size_t max_eta,
                                 std::size_t word_budget) {
  if (omega.size() != base.size()) throw InvalidInput("Omega mask does not match the alphabet");
  if (max_eta == 0) throw InvalidInput("max_eta must be at least 1");
  InducedSystem s;
  s.omega = omega;
  s.omega_measure = omega_measure(base, omega);
  s.max_eta = max_eta;
  Enumerator e{base, omega, max_eta, word_budget, s, {}};
  for (Symbol a = 0; a < base.size() && !s.budget_hit; ++a) {
    if (!omega[a] || base.weight(a) == 0) continue;
    e.prefix = {a};
    e.descend(base.weight(a));
  }
  Rational covered = 0;
  for (const auto& w : s.words) covered += w.nu;
  s.tail = 1 - covered;
  s.low_mass = s.tail > Rational(1, 100);
  return s;
}

std::vector<std::pair<std::size_t, Rational>> eta_distribution(const InducedSystem& s) {
  std::map<std::size_t, Rational> d;
  for (const auto& w : s.words) d[w.eta] += w.nu;
  std::vector<std::pair<std::size_t, Rational>> out;
  for (auto& [k, m] : d) {
    if (m > 0) out.emplace_back(k, m);
  }
  return out;
}

TailReport tail_rate(const InducedSystem& s) {
  const auto dist = eta_distribution(s);
  TailReport r;
  if (dist.empty()) throw InvalidInput("no return words enumerated");
  if (s.tail == 0 && !s.budget_hit && dist.size() < 8) {
    // Bounded return time: the tail vanishes beyond the last eta.
    r.rate = 0.0;
    r.exponential = true;
    r.window_begin = dist.front().first;
    r.window_end = dist.back().first;
    return r;
  }
  if (dist.size() < 8) {
    throw InvalidInput("tail_rate needs at least 8 distinct return times, got " + std::to_string(dist.size()) +
                       "; raise max_eta");
  }
  r.window_end = dist.back().first;
  r.window_begin = r.window_end / 2;
  std::vector<double> xs, ys;
  for (const auto& [k, m] : dist) {
    if (k >= r.window_begin) {
      xs.push_back(static_cast<double>(k));
      ys.push_back(std::log(m.get_d()));
    }
  }
  if (xs.size() < 3) {
    xs.clear();
    ys.clear();
    r.window_begin = dist.front().first;
    for (const auto& [k, m] : dist) {
      xs.push_back(static_cast<double>(k));
      ys.push_back(std::log(m.get_d()));
    }
  }
  const DecayFit fit = fit_decay(xs, ys);
  r.rate = std::min(1.0, fit.rate);
  r.exponent = fit.exponent;
  r.exponential = r.rate < 0.98;
  return r;
}

KacReport kac_check(const InducedSystem& s) {
  if (!s.first_return) throw InvalidInput("the Kac identity applies to first returns only");
  KacReport r;
  r.enumerated = 0;
  for (const auto& w : s.words) r.enumerated += w.nu * Rational(static_cast<unsigned long>(w.eta));
  r.target = 1 / s.omega_measure;
  r.expectation = r.enumerated.get_d() + static_cast<double>(s.max_eta + 1) * s.tail.get_d();
  r.defect = std::abs(r.expectation - r.target.get_d());
  return r;
}

VertexId induced_action(const GraphExtension& ext, const ReturnWord& u, VertexId v) {
  ExtensionGraph& graph = ext.graph();
  for (std::size_t i = 0; i + 1 < u.word.size(); ++i) v = graph.forward(v, u.word[i]);
  return v;
}

InducedRates induced_rates(const GraphExtension& ext, const InducedSystem& s, const InducedRatesOptions& options) {
  const MarkovBase& base = ext.base();
  if (s.omega.size() != base.size()) throw InvalidInput("Omega mask does not match the alphabet");
  if (s.words.empty()) throw InvalidInput("induced system has no return words");
  InducedRates out;
  out.r_t = decay_rate(ext, options.n_max, Estimator::fit, options.table);
  out.r_omega = rate_report(omega_return_table(ext, s.omega, options.n_max, options.table));

  ExtensionGraph& graph = ext.graph();
  const std::size_t steps = options.induced_steps ? options.induced_steps : options.n_max;
  std::size_t radius = options.induced_radius;
  if (radius == 0) {
    std::size_t max_len = 0;
    for (const auto& w : s.words) max_len = std::max(max_len, w.eta);
    // Stop once the ball is closed under the walk or would grow too large.
    std::size_t size = graph.ball(0).size();
    while (radius < steps * max_len) {
      const std::size_t next = graph.ball(radius + 1).size();
      if (next == size || next > options.max_ball_vertices) break;
      size = next;
      ++radius;
    }
  }
  out.induced_radius = radius;
  const auto ball = graph.ball(radius);
  if (ball.size() * s.words.size() > ext.state_budget()) {
    throw BudgetExceeded("induced walk needs " + std::to_string(ball.size() * s.words.size()) +
                         " transitions; lower the induced radius or max_eta");
  }
  std::unordered_map<VertexId, std::uint32_t> local;
  for (std::size_t i = 0; i < ball.size(); ++i) local.emplace(ball[i], static_cast<std::uint32_t>(i));

  std::vector<Symbol> slots;
  std::vector<int> slot_of(base.size(), -1);
  for (Symbol a = 0; a < base.size(); ++a) {
    if (s.omega[a]) {
      slot_of[a] = static_cast<int>(slots.size());
      slots.push_back(a);
    }
  }
  const std::size_t k = slots.size();
  constexpr std::uint32_t lost = static_cast<std::uint32_t>(-1);

  // Targets of every word from every ball vertex; walks leaving the ball are
  // dropped and counted as lost mass.
  std::vector<std::uint32_t> target(ball.size() * s.words.size(), lost);
  std::vector<double> weight(s.words.size());
  for (std::size_t j = 0; j < s.words.size(); ++j) {
    const auto& w = s.words[j];
    weight[j] = Rational(w.nu * s.omega_measure / base.weight(w.word.front())).get_d();
  }
  for (std::size_t i = 0; i < ball.size(); ++i) {
    for (std::size_t j = 0; j < s.words.size(); ++j) {
      const auto& w = s.words[j].word;
      VertexId v = ball[i];
      for (std::size_t q = 0; q + 1 < w.size() && v != ExtensionGraph::none; ++q) v = graph.forward_known(v, w[q]);
      if (v == ExtensionGraph::none) continue;
      auto it = local.find(v);
      if (it != local.end()) target[i * s.words.size() + j] = it->second;
    }
  }

  std::vector<double> mass(ball.size() * k, 0.0);
  for (std::size_t q = 0; q < k; ++q) mass[q] = Rational(base.weight(slots[q]) / s.omega_measure).get_d();
  ReturnTable table;
  for (std::size_t n = 1; n <= steps; ++n) {
    std::vector<Accumulator<double>> next(ball.size() * k);
    for (std::size_t i = 0; i < ball.size(); ++i) {
      for (std::size_t q = 0; q < k; ++q) {
        const double m = mass[i * k + q];
        if (m == 0.0) continue;
        for (std::size_t j = 0; j < s.words.size(); ++j) {
          const auto& w = s.words[j].word;
          if (w.front() != slots[q]) continue;
          const std::uint32_t t = target[i * s.words.size() + j];
          if (t == lost) continue;
          next[t * k + static_cast<std::size_t>(slot_of[w.back()])].add(m * weight[j]);
        }
      }
    }
    Accumulator<double> total;
    for (std::size_t x = 0; x < mass.size(); ++x) {
      mass[x] = next[x].value();
      total.add(mass[x]);
    }
    ReturnEntry e;
    e.n = n;
    for (std::size_t q = 0; q < k; ++q) e.value += mass[q];
    e.method = ReturnMethod::float_dp;
    table.push_back(e);
    out.lost.push_back(std::max(0.0, 1.0 - total.value()));
  }
  out.r_s = rate_report(std::move(table));
  return out;
}

CoverReport finitely_covers_check(const GraphExtension& ext, const InducedSystem& s, std::size_t depth) {
  if (depth == 0) throw InvalidInput("finite-cover depth must be at least 1");
  ExtensionGraph& graph = ext.graph();
  const auto ball = graph.ball(depth);
  const std::size_t symbols = ext.base().size();
  const std::size_t universe = symbols * ball.size();
  std::vector<std::vector<std::uint32_t>> covers(s.words.size());
  for (std::size_t j = 0; j < s.words.size(); ++j) {
    for (std::size_t i = 0; i < ball.size(); ++i) {
      const VertexId t = induced_action(ext, s.words[j], ball[i]);
      for (Symbol a = 0; a < symbols; ++a) {
        if (graph.forward(ball[i], a) == t) covers[j].push_back(static_cast<std::uint32_t>(a * ball.size() + i));
      }
    }
  }
  std::vector<bool> covered(universe, false);
  std::size_t remaining = universe;
  CoverReport r;
  r.radius = depth;
  while (remaining > 0) {
    std::size_t best = s.words.size(), best_gain = 0;
    for (std::size_t j = 0; j < s.words.size(); ++j) {
      std::size_t gain = 0;
      for (auto x : covers[j]) gain += covered[x] ? 0 : 1;
      if (gain > best_gain) {
        best_gain = gain;
        best = j;
      }
    }
    if (best_gain == 0) break;
    for (auto x : covers[best]) {
      if (!covered[x]) {
        covered[x] = true;
        --remaining;
      }
    }
    r.witness.push_back(s.words[best].word);
  }
  r.witnessed = remaining == 0;
  r.details = "covered " + std::to_string(universe - remaining) + " of " + std::to_string(universe) +
              " (symbol, vertex) pairs on the radius-" + std::to_string(depth) + " ball";
  if (!r.witnessed) r.witness.clear();
  return r;
}

bool full_branch_check(const MarkovBase& base, const InducedSystem& s) {
  std::map<SymbolString, std::set<Symbol>> landings;
  for (const auto& w : s.words) {
    landings[SymbolString(w.word.begin(), w.word.end() - 1)].insert(w.word.back());
  }
  std::set<Symbol> omega;
  for (Symbol a = 0; a < base.size(); ++a) {
    if (s.omega[a]) omega.insert(a);
  }
  return std::all_of(landings.begin(), landings.end(), [&](const auto& entry) { return entry.second == omega; });
}

namespace {

using Sequence = std::vector<std::size_t>;

bool prefix_related(const Sequence& x, const Sequence& y) {
  const std::size_t n = std::min(x.size(), y.size());
  return std::equal(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), y.begin());
}

}  // namespace

InducedSystem modified_inducing(const GraphExtension& ext, const InducedSystem& s, const std::vector<FreeWord>& targets,
                                const SubgroupAutomaton& core, std::size_t budget) {
  const auto* schreier = dynamic_cast<const SchreierCocycle*>(&ext.cocycle());
  if (!schreier) throw InvalidInput("modified inducing needs a Schreier-graph extension");
  if (!core.complete()) throw InvalidInput("infinite index; the normal core automaton must be complete");
  if (s.words.empty()) throw InvalidInput("induced system has no return words");
  const auto& gamma = schreier->gamma();
  const MarkovBase& base = ext.base();
  auto chains = [&](std::size_t i, std::size_t j) { return s.words[i].word.back() == s.words[j].word.front(); };
  auto label = [&](const Sequence& seq) {
    FreeWord g;
    for (std::size_t i : seq) {
      const auto& w = s.words[i].word;
      g = g * gamma_of(gamma, SymbolString(w.begin(), w.end() - 1));
    }
    return g;
  };
  auto coset = [&](const FreeWord& g) { return *core.read(core.base(), g); };
  // Symbols before the final landing: the cylinder the sequence stops on.
  auto body = [&](const Sequence& seq) {
    SymbolString out;
    for (std::size_t i : seq) {
      const auto& w = s.words[i].word;
      out.insert(out.end(), w.begin(), w.end() - 1);
    }
    return out;
  };
  auto nested = [](const SymbolString& x, const SymbolString& y) {
    const std::size_t n = std::min(x.size(), y.size());
    return std::equal(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), y.begin());
  };

  const std::size_t u = 0;
  std::vector<Sequence> w_h(targets.size()), v_h(targets.size());
  std::vector<bool> found(targets.size(), false);
  std::size_t missing = targets.size();
  std::vector<Sequence> queue;
  for (std::size_t j = 0; j < s.words.size(); ++j) queue.push_back({j});
  std::size_t expanded = 0;
  for (std::size_t head = 0; head < queue.size() && missing > 0; ++head) {
    if (++expanded > budget) break;
    const Sequence w = queue[head];
    if (chains(w.back(), u)) {
      Sequence v = w;
      v.push_back(u);
      const auto c = coset(label(v));
      for (std::size_t h = 0; h < targets.size(); ++h) {
        if (found[h] || coset(targets[h]) != c) continue;
        bool clash = false;
        for (std::size_t other = 0; other < targets.size() && !clash; ++other) {
          if (found[other]) clash = prefix_related(w, w_h[other]) || nested(body(v), body(v_h[other]));
        }
        if (clash) continue;
        w_h[h] = w;
        v_h[h] = v;
        found[h] = true;
        --missing;
        break;
      }
    }
    if (queue.size() < budget) {
      for (std::size_t j = 0; j < s.words.size(); ++j) {
        if (!chains(w.back(), j)) continue;
        Sequence next = w;
        next.push_back(j);
        queue.push_back(std::move(next));
      }
    }
  }
  if (missing > 0) {
    std::string names;
    for (std::size_t h = 0; h < targets.size(); ++h) {
      if (!found[h]) names += (names.empty() ? "" : ", ") + (targets[h].empty() ? std::string("id") : to_string(targets[h]));
    }
    throw BudgetExceeded("no designated words found within the budget for: " + names);
  }

  InducedSystem out;
  out.omega = s.omega;
  out.omega_measure = s.omega_measure;
  out.first_return = false;
  out.adequacy = "modified";
  std::set<Sequence> designated(v_h.begin(), v_h.end());
  auto is_proper_prefix = [&](const Sequence& seq) {
    return std::any_of(v_h.begin(), v_h.end(),
                       [&](const Sequence& v) { return v.size() > seq.size() && prefix_related(seq, v); });
  };
  auto emit = [&](const Sequence& seq) {
    ReturnWord r;
    for (std::size_t i : seq) {
      const auto& w = s.words[i].word;
      r.word.insert(r.word.end(), r.word.empty() ? w.begin() : w.begin() + 1, w.end());
      r.eta += s.words[i].eta;
    }
    r.nu = cylinder_measure(base, r.word) / s.omega_measure;
    out.max_eta = std::max(out.max_eta, r.eta);
    out.words.push_back(std::move(r));
    if (out.words.size() > budget) throw BudgetExceeded("modified partition exceeds the word budget");
  };
  // Children sharing a body differ only in the landing symbol; they stop or
  // continue together so that every stopped cylinder maps onto Omega.
  std::vector<Sequence> stack{{}};
  while (!stack.empty()) {
    const Sequence node = std::move(stack.back());
    stack.pop_back();
    std::map<SymbolString, std::vector<Sequence>> groups;
    std::vector<SymbolString> order;
    for (std::size_t j = 0; j < s.words.size(); ++j) {
      if (!node.empty() && !chains(node.back(), j)) continue;
      Sequence child = node;
      child.push_back(j);
      const SymbolString b(s.words[j].word.begin(), s.words[j].word.end() - 1);
      auto [it, fresh] = groups.try_emplace(b);
      if (fresh) order.push_back(b);
      it->second.push_back(std::move(child));
    }
    std::vector<Sequence> children;
    for (const auto& b : order) {
      auto& group = groups[b];
      const bool stop = std::any_of(group.begin(), group.end(), [&](const Sequence& c) { return designated.count(c); }) ||
                        std::none_of(group.begin(), group.end(), is_proper_prefix);
      for (auto& child : group) {
        if (stop) {
          emit(child);
        } else {
          children.push_back(std::move(child));
        }
      }
    }
    for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(std::move(*it));
  }
  Rational covered = 0;
  for (const auto& w : out.words) covered += w.nu;
  out.tail = 1 - covered;
  out.low_mass = out.tail > Rational(1, 100);
  return out;
}

}  // namespace amenwalk
