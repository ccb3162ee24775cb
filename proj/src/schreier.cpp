#include "amenwalk/schreier.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <tuple>

#include "amenwalk/error.hpp"

namespace amenwalk {

namespace {

std::size_t slot_of(Letter x) {
  const auto g = static_cast<std::size_t>(std::abs(x) - 1);
  return 2 * g + (x < 0 ? 1 : 0);
}

Letter letter_of(std::size_t slot) {
  const auto g = static_cast<Letter>(slot / 2 + 1);
  return slot % 2 == 0 ? g : -g;
}

Letter parse_letter(char c) {
  if (c >= 'a' && c <= 'z') return c - 'a' + 1;
  if (c >= 'A' && c <= 'Z') return -(c - 'A' + 1);
  return 0;
}

}  // namespace

FreeWord::FreeWord(std::vector<Letter> letters) {
  for (Letter x : letters) {
    if (x == 0) throw InvalidInput("letter 0 is not a generator");
    if (!letters_.empty() && letters_.back() == -x) {
      letters_.pop_back();
    } else {
      letters_.push_back(x);
    }
  }
}

FreeWord FreeWord::inverse() const {
  std::vector<Letter> out(letters_.rbegin(), letters_.rend());
  for (Letter& x : out) x = -x;
  FreeWord w;
  w.letters_ = std::move(out);
  return w;
}

FreeWord FreeWord::operator*(const FreeWord& other) const {
  std::vector<Letter> joined = letters_;
  joined.insert(joined.end(), other.letters_.begin(), other.letters_.end());
  return FreeWord(std::move(joined));
}

char letter_char(Letter x) {
  return x > 0 ? static_cast<char>('a' + x - 1) : static_cast<char>('A' - x - 1);
}

std::string to_string(const FreeWord& w) {
  std::string out;
  for (Letter x : w.letters()) out.push_back(letter_char(x));
  return out;
}

FreeWord parse_word(std::string_view text, std::size_t rank) {
  if (rank < 1 || rank > 26) throw InvalidInput("free group rank must lie in 1..26");
  std::vector<Letter> letters;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const Letter x = parse_letter(text[i]);
    if (x == 0 || static_cast<std::size_t>(std::abs(x)) > rank) {
      throw InvalidInput("letter '" + std::string(1, text[i]) + "' at position " + std::to_string(i) +
                         " is not a generator of the rank-" + std::to_string(rank) + " free group");
    }
    letters.push_back(x);
  }
  return FreeWord(std::move(letters));
}

SubgroupAutomaton::SubgroupAutomaton(std::size_t rank, std::size_t states, std::vector<std::uint32_t> slots)
    : rank_(rank), states_(states), slots_(std::move(slots)) {
  if (slots_.size() != 2 * rank_ * states_) throw InvalidInput("automaton slot table has the wrong size");
  if (states_ == 0) throw InvalidInput("automaton needs a base state");
  for (std::uint32_t s = 0; s < states_; ++s) {
    for (std::size_t slot = 0; slot < 2 * rank_; ++slot) {
      const std::uint32_t t = slots_[s * 2 * rank_ + slot];
      if (t == missing) continue;
      if (t >= states_ || slots_[t * 2 * rank_ + (slot ^ 1)] != s) {
        throw InvalidInput("automaton is not co-deterministic");
      }
    }
  }
}

std::uint32_t SubgroupAutomaton::target(std::uint32_t state, Letter x) const {
  return slots_[state * 2 * rank_ + slot_of(x)];
}

bool SubgroupAutomaton::complete() const {
  return std::find(slots_.begin(), slots_.end(), missing) == slots_.end();
}

std::optional<std::size_t> SubgroupAutomaton::index() const {
  if (!complete()) return std::nullopt;
  return states_;
}

std::optional<std::uint32_t> SubgroupAutomaton::read(std::uint32_t from, const FreeWord& w) const {
  std::uint32_t s = from;
  for (Letter x : w.letters()) {
    if (static_cast<std::size_t>(std::abs(x)) > rank_) return std::nullopt;
    s = target(s, x);
    if (s == missing) return std::nullopt;
  }
  return s;
}

bool SubgroupAutomaton::contains(const FreeWord& w) const {
  auto end = read(base(), w);
  return end && *end == base();
}

std::vector<std::tuple<std::uint32_t, Letter, std::uint32_t>> SubgroupAutomaton::edges() const {
  std::vector<std::tuple<std::uint32_t, Letter, std::uint32_t>> out;
  for (std::uint32_t s = 0; s < states_; ++s) {
    for (std::size_t g = 0; g < rank_; ++g) {
      const std::uint32_t t = slots_[s * 2 * rank_ + 2 * g];
      if (t != missing) out.emplace_back(s, static_cast<Letter>(g + 1), t);
    }
  }
  return out;
}

namespace {

// Renumbers the states reachable from `base` in breadth-first order.
SubgroupAutomaton canonical(std::size_t rank, std::size_t base, std::size_t states,
                            const std::vector<std::uint32_t>& slots) {
  const std::size_t width = 2 * rank;
  std::vector<std::uint32_t> number(states, SubgroupAutomaton::missing);
  std::vector<std::size_t> order{base};
  number[base] = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t slot = 0; slot < width; ++slot) {
      const std::uint32_t t = slots[order[i] * width + slot];
      if (t != SubgroupAutomaton::missing && number[t] == SubgroupAutomaton::missing) {
        number[t] = static_cast<std::uint32_t>(order.size());
        order.push_back(t);
      }
    }
  }
  std::vector<std::uint32_t> out(order.size() * width, SubgroupAutomaton::missing);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t slot = 0; slot < width; ++slot) {
      const std::uint32_t t = slots[order[i] * width + slot];
      if (t != SubgroupAutomaton::missing) out[i * width + slot] = number[t];
    }
  }
  return SubgroupAutomaton(rank, order.size(), std::move(out));
}

struct UnionFind {
  std::vector<std::size_t> parent;
  std::size_t add() {
    parent.push_back(parent.size());
    return parent.size() - 1;
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent[b] = a;
    return true;
  }
};

}  // namespace

SubgroupAutomaton stallings_fold(const std::vector<FreeWord>& generators, std::size_t rank, std::uint64_t shuffle_seed) {
  if (rank < 1 || rank > 26) throw InvalidInput("free group rank must lie in 1..26");
  std::vector<FreeWord> gens;
  for (const auto& w : generators) {
    for (Letter x : w.letters()) {
      if (static_cast<std::size_t>(std::abs(x)) > rank) throw InvalidInput("generator uses a letter beyond the rank");
    }
    if (!w.empty()) gens.push_back(w);
  }
  std::mt19937_64 rng(shuffle_seed);
  if (shuffle_seed != 0) {
    std::shuffle(gens.begin(), gens.end(), rng);
    for (auto& w : gens) {
      if (rng() & 1) w = w.inverse();
    }
  }

  UnionFind uf;
  const std::size_t base = uf.add();
  struct RawEdge {
    std::size_t from;
    Letter label;
    std::size_t to;
  };
  std::vector<RawEdge> edges;
  for (const auto& w : gens) {
    std::size_t at = base;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const std::size_t next = i + 1 == w.size() ? base : uf.add();
      edges.push_back({at, w.letters()[i], next});
      at = next;
    }
  }
  if (shuffle_seed != 0) std::shuffle(edges.begin(), edges.end(), rng);

  // Fold until every (vertex, label) has one target.
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::pair<std::size_t, Letter>, std::size_t> seen;
    for (const auto& e : edges) {
      const std::size_t u = uf.find(e.from), v = uf.find(e.to);
      for (auto [key, target] : {std::pair{std::pair{u, e.label}, v}, std::pair{std::pair{v, -e.label}, u}}) {
        auto [it, fresh] = seen.emplace(key, target);
        if (!fresh && uf.find(it->second) != uf.find(target)) {
          uf.unite(it->second, target);
          changed = true;
        }
      }
    }
  }

  const std::size_t width = 2 * rank;
  const std::size_t raw_states = uf.parent.size();
  std::vector<std::uint32_t> slots(raw_states * width, SubgroupAutomaton::missing);
  for (const auto& e : edges) {
    const std::size_t u = uf.find(e.from), v = uf.find(e.to);
    slots[u * width + slot_of(e.label)] = static_cast<std::uint32_t>(v);
    slots[v * width + slot_of(-e.label)] = static_cast<std::uint32_t>(u);
  }

  // Trim hanging trees: non-base vertices of degree one.
  const std::size_t root = uf.find(base);
  std::vector<std::size_t> degree(raw_states, 0);
  for (std::size_t s = 0; s < raw_states; ++s) {
    for (std::size_t slot = 0; slot < width; ++slot) {
      if (slots[s * width + slot] != SubgroupAutomaton::missing) ++degree[s];
    }
  }
  std::queue<std::size_t> leaves;
  for (std::size_t s = 0; s < raw_states; ++s) {
    if (s != root && degree[s] == 1) leaves.push(s);
  }
  while (!leaves.empty()) {
    const std::size_t s = leaves.front();
    leaves.pop();
    if (degree[s] != 1) continue;
    for (std::size_t slot = 0; slot < width; ++slot) {
      std::uint32_t& t = slots[s * width + slot];
      if (t == SubgroupAutomaton::missing) continue;
      slots[t * width + (slot ^ 1)] = SubgroupAutomaton::missing;
      if (--degree[t] == 1 && t != root) leaves.push(t);
      t = SubgroupAutomaton::missing;
      degree[s] = 0;
    }
  }
  return canonical(rank, root, raw_states, slots);
}

SubgroupAutomaton automaton_from_permutations(const std::vector<std::vector<std::size_t>>& permutations,
                                              std::size_t base) {
  if (permutations.empty()) throw InvalidInput("need at least one permutation");
  const std::size_t n = permutations.front().size();
  const std::size_t rank = permutations.size();
  if (base >= n) throw InvalidInput("base point out of range");
  std::vector<std::uint32_t> slots(n * 2 * rank, SubgroupAutomaton::missing);
  for (std::size_t g = 0; g < rank; ++g) {
    const auto& perm = permutations[g];
    if (perm.size() != n) throw InvalidInput("permutations act on different sets");
    std::vector<bool> hit(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      if (perm[i] >= n || hit[perm[i]]) throw InvalidInput("not a permutation");
      hit[perm[i]] = true;
      slots[i * 2 * rank + 2 * g] = static_cast<std::uint32_t>(perm[i]);
      slots[perm[i] * 2 * rank + 2 * g + 1] = static_cast<std::uint32_t>(i);
    }
  }
  return canonical(rank, base, n, slots);
}

SubgroupAutomaton normal_core(const SubgroupAutomaton& automaton) {
  if (!automaton.complete()) throw InvalidInput("infinite index; normal core not computable by this tool");
  const std::size_t n = automaton.state_count();
  const std::size_t rank = automaton.rank();
  constexpr std::size_t cap = 1'000'000;

  using Tuple = std::vector<std::uint32_t>;
  std::map<Tuple, std::uint32_t> index;
  std::vector<Tuple> tuples;
  Tuple start(n);
  std::iota(start.begin(), start.end(), 0u);
  index.emplace(start, 0);
  tuples.push_back(start);
  std::vector<std::vector<std::size_t>> perms(rank);
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    for (std::size_t g = 0; g < rank; ++g) {
      Tuple next(n);
      for (std::size_t j = 0; j < n; ++j) next[j] = automaton.target(tuples[i][j], static_cast<Letter>(g + 1));
      auto [it, fresh] = index.emplace(next, static_cast<std::uint32_t>(tuples.size()));
      if (fresh) {
        if (tuples.size() >= cap) throw BudgetExceeded("normal core exceeds " + std::to_string(cap) + " cosets");
        tuples.push_back(std::move(next));
      }
      perms[g].resize(std::max(perms[g].size(), i + 1));
      perms[g][i] = it->second;
    }
  }
  for (auto& p : perms) p.resize(tuples.size());
  return automaton_from_permutations(perms, 0);
}

SchreierCocycle::SchreierCocycle(SubgroupAutomaton automaton, std::vector<FreeWord> gamma)
    : automaton_(std::move(automaton)), gamma_(std::move(gamma)) {
  if (gamma_.empty()) throw InvalidInput("schreier cocycle needs at least one symbol");
  for (const auto& w : gamma_) {
    for (Letter x : w.letters()) {
      if (static_cast<std::size_t>(std::abs(x)) > automaton_.rank()) {
        throw InvalidInput("symbol increment " + to_string(w) + " exceeds the rank");
      }
    }
    gamma_inverse_.push_back(w.inverse());
  }
}

std::string SchreierCocycle::apply(const std::string& v, const FreeWord& w) const {
  const auto dot = v.find('.');
  if (dot == std::string::npos || dot == 0) throw InvalidInput("bad coset key " + v);
  std::uint32_t state = static_cast<std::uint32_t>(std::stoul(v.substr(0, dot)));
  if (state >= automaton_.state_count()) throw InvalidInput("bad coset key " + v);
  std::string suffix = v.substr(dot + 1);
  for (Letter x : w.letters()) {
    if (suffix.empty()) {
      const std::uint32_t t = automaton_.target(state, x);
      if (t != SubgroupAutomaton::missing) {
        state = t;
      } else {
        suffix.push_back(letter_char(x));
      }
    } else if (suffix.back() == letter_char(-x)) {
      suffix.pop_back();
    } else {
      suffix.push_back(letter_char(x));
    }
  }
  return std::to_string(state) + "." + suffix;
}

std::string SchreierCocycle::act(Symbol a, const std::string& v) const { return apply(v, gamma_.at(a)); }

std::string SchreierCocycle::act_inverse(Symbol a, const std::string& v) const {
  return apply(v, gamma_inverse_.at(a));
}

std::optional<std::vector<std::string>> SchreierCocycle::finite_vertices() const {
  if (!automaton_.complete()) return std::nullopt;
  std::vector<std::string> out;
  for (std::size_t s = 0; s < automaton_.state_count(); ++s) out.push_back(std::to_string(s) + ".");
  return out;
}

std::string SchreierCocycle::coset(const FreeWord& g) const { return apply(root(), g); }

std::vector<FreeWord> gamma_from_alphabet(const MarkovBase& base, std::size_t rank) {
  std::vector<FreeWord> gamma;
  for (const auto& name : base.alphabet()) gamma.push_back(parse_word(name, rank));
  return gamma;
}

FreeWord gamma_of(const std::vector<FreeWord>& gamma, const SymbolString& w) {
  std::vector<Letter> letters;
  for (Symbol a : w) {
    const auto& g = gamma.at(a).letters();
    letters.insert(letters.end(), g.begin(), g.end());
  }
  return FreeWord(std::move(letters));
}

namespace {

std::vector<FreeWord> group_ball(std::size_t rank, std::size_t radius) {
  std::vector<FreeWord> out{FreeWord()};
  std::size_t begin = 0;
  for (std::size_t r = 0; r < radius; ++r) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t slot = 0; slot < 2 * rank; ++slot) {
        const Letter x = letter_of(slot);
        if (!out[i].empty() && out[i].letters().back() == -x) continue;
        std::vector<Letter> letters = out[i].letters();
        letters.push_back(x);
        out.emplace_back(std::move(letters));
      }
    }
    begin = end;
  }
  return out;
}

// Greedy set cover; sets[i] lists the covered targets.  Returns the chosen
// indices in order, or nothing if the union misses a target.
std::optional<std::vector<std::size_t>> greedy_cover(const std::vector<std::vector<bool>>& sets, std::size_t targets) {
  std::vector<bool> covered(targets, false);
  for (std::size_t t = 0; t < targets; ++t) {
    bool any = false;
    for (const auto& s : sets) any = any || s[t];
    if (!any) return std::nullopt;
  }
  std::vector<std::size_t> chosen;
  std::size_t remaining = targets;
  while (remaining > 0) {
    std::size_t best = 0, gain_best = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      std::size_t gain = 0;
      for (std::size_t t = 0; t < targets; ++t) gain += (sets[i][t] && !covered[t]) ? 1 : 0;
      if (gain > gain_best) {
        gain_best = gain;
        best = i;
      }
    }
    chosen.push_back(best);
    for (std::size_t t = 0; t < targets; ++t) {
      if (sets[best][t] && !covered[t]) {
        covered[t] = true;
        --remaining;
      }
    }
  }
  return chosen;
}

}  // namespace

ConditionReport check_tt_ul_fc(const SubgroupAutomaton& automaton, const MarkovBase& base,
                               const std::vector<FreeWord>& gamma, std::size_t depth, std::size_t sample_radius,
                               const std::vector<SymbolString>& induced_words) {
  if (gamma.size() != base.size()) throw InvalidInput("gamma must assign a group element to every symbol");
  if (depth < 1) throw InvalidInput("depth must be at least 1");
  const std::size_t rank = automaton.rank();
  const SchreierCocycle cocycle(automaton, gamma);
  const std::vector<FreeWord> sample = group_ball(rank, sample_radius);
  const bool induced = !induced_words.empty();

  // Candidate words: induced words, or admissible base words up to `depth`.
  std::vector<SymbolString> words;
  if (induced) {
    words = induced_words;
  } else {
    for (std::size_t n = 1; n <= depth && words.size() < 20000; ++n) {
      for_each_word(base, n, [&](const SymbolString& w) { words.push_back(w); });
    }
  }
  std::vector<FreeWord> word_gamma;
  for (const auto& w : words) word_gamma.push_back(gamma_of(gamma, w));

  ConditionReport report;
  report.sample_radius = sample_radius;
  report.samples = sample.size();

  // (tt): from H g^-1, reach every H h by right multiplication along
  // admissible (or induced) words of length <= depth.
  {
    ConditionVerdict& v = report.tt;
    v.depth = depth;
    std::set<std::string> targets;
    for (const auto& h : sample) targets.insert(cocycle.coset(h));
    bool all = true;
    std::string failure;
    for (const auto& g : sample) {
      // state: (last symbol + 1 or 0 at start, coset)
      std::map<std::pair<std::size_t, std::string>, SymbolString> seen;
      std::set<std::string> reached;
      std::queue<std::pair<std::size_t, std::string>> queue;
      const std::string start = cocycle.coset(g.inverse());
      seen[{0, start}] = {};
      queue.push({0, start});
      while (!queue.empty()) {
        auto [last, coset] = queue.front();
        queue.pop();
        const SymbolString path = seen[{last, coset}];
        if (!path.empty()) reached.insert(coset);
        if (path.size() >= depth) continue;
        if (induced) {
          for (std::size_t i = 0; i < words.size(); ++i) {
            std::string next = coset;
            for (Symbol a : words[i]) next = cocycle.act(a, next);
            SymbolString p = path;
            p.push_back(static_cast<Symbol>(i));
            if (seen.emplace(std::pair{std::size_t{0}, next}, p).second) queue.push({0, next});
          }
        } else {
          for (Symbol a = 0; a < base.size(); ++a) {
            if (last > 0 && !base.admissible(static_cast<Symbol>(last - 1), a)) continue;
            const std::string next = cocycle.act(a, coset);
            SymbolString p = path;
            p.push_back(a);
            if (seen.emplace(std::pair{std::size_t{a} + 1, next}, p).second) queue.push({a + 1, next});
          }
        }
      }
      for (const auto& t : targets) {
        if (!reached.count(t)) {
          all = false;
          failure = "coset " + t + " not reached from H" + to_string(g.inverse());
          break;
        }
      }
      if (!all) break;
    }
    v.witnessed = all;
    v.details = all ? "every sampled coset pair joined by a word of length <= " + std::to_string(depth) : failure;
  }

  // (ul): finite J with gamma_u in g H g^-1 for every sampled g.
  {
    ConditionVerdict& v = report.ul;
    v.depth = depth;
    std::optional<std::vector<std::size_t>> best;
    std::size_t best_len = 0;
    // Prefer the shortest word length that admits a cover.
    for (std::size_t len = 1; len <= depth && !best; ++len) {
      std::vector<std::size_t> pool;
      std::vector<std::vector<bool>> sets;
      for (std::size_t i = 0; i < words.size(); ++i) {
        if (!induced && words[i].size() != len) continue;
        std::vector<bool> s(sample.size());
        for (std::size_t j = 0; j < sample.size(); ++j) {
          s[j] = automaton.contains(sample[j].inverse() * word_gamma[i] * sample[j]);
        }
        pool.push_back(i);
        sets.push_back(std::move(s));
      }
      if (auto cover = greedy_cover(sets, sample.size())) {
        best = std::vector<std::size_t>();
        for (std::size_t c : *cover) best->push_back(pool[c]);
        best_len = len;
      }
      if (induced) break;
    }
    v.witnessed = best.has_value();
    if (best) {
      for (std::size_t i : *best) v.witness.push_back(words[i]);
      v.details = induced ? "induced loop words" : "loop words of length " + std::to_string(best_len);
    } else {
      v.details = "no loop cover of the sampled conjugates within depth " + std::to_string(depth);
    }
  }

  // (fc): finite K with gamma_v * gamma_u^-1 in g H g^-1 for all sampled g
  // and symbols v.
  {
    ConditionVerdict& v = report.fc;
    v.depth = depth;
    const std::size_t targets = sample.size() * base.size();
    std::vector<std::vector<bool>> sets;
    for (std::size_t i = 0; i < words.size(); ++i) {
      std::vector<bool> s(targets);
      for (std::size_t j = 0; j < sample.size(); ++j) {
        for (Symbol a = 0; a < base.size(); ++a) {
          s[j * base.size() + a] =
              automaton.contains(sample[j].inverse() * gamma[a] * word_gamma[i].inverse() * sample[j]);
        }
      }
      sets.push_back(std::move(s));
    }
    auto cover = greedy_cover(sets, targets);
    v.witnessed = cover.has_value();
    if (cover) {
      for (std::size_t i : *cover) v.witness.push_back(words[i]);
      v.details = "cover of all sampled (g, symbol) pairs";
    } else {
      v.details = "no finite cover among words of length <= " + std::to_string(depth);
    }
  }
  return report;
}

}  // namespace amenwalk
