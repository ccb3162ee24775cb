#include "amenwalk/symdyn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <queue>

#include "amenwalk/error.hpp"

namespace amenwalk {

AdmissibilityMatrix::AdmissibilityMatrix(const std::vector<std::vector<bool>>& rows)
    : size_(rows.size()), entries_(rows.size() * rows.size()) {
  for (std::size_t a = 0; a < size_; ++a) {
    if (rows[a].size() != size_) throw InvalidInput("admissibility matrix is not square");
    for (std::size_t b = 0; b < size_; ++b) entries_[a * size_ + b] = rows[a][b];
  }
}

bool AdmissibilityMatrix::all_true() const {
  return std::all_of(entries_.begin(), entries_.end(), [](bool x) { return x; });
}

namespace {

void check_alphabet(const std::vector<std::string>& alphabet) {
  if (alphabet.size() < 2) throw InvalidInput("alphabet needs at least two symbols");
  std::vector<std::string> sorted = alphabet;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidInput("duplicate alphabet symbol");
  }
  for (const auto& s : alphabet) {
    if (s.empty()) throw InvalidInput("empty alphabet symbol");
  }
}

}  // namespace

MarkovBase MarkovBase::bernoulli(std::vector<std::string> alphabet, std::vector<Rational> weights) {
  check_alphabet(alphabet);
  if (weights.size() != alphabet.size()) {
    throw InvalidInput("bernoulli weights: expected " + std::to_string(alphabet.size()) + " entries");
  }
  Rational total = 0;
  for (auto& p : weights) {
    p.canonicalize();
    if (sgn(p) <= 0) throw InvalidInput("bernoulli weights must be positive");
    total += p;
  }
  if (total != 1) throw InvalidInput("weights sum " + to_decimal_string(total) + " ≠ 1");

  MarkovBase base;
  base.alphabet_ = std::move(alphabet);
  base.kind_ = MeasureKind::bernoulli;
  const std::size_t n = base.alphabet_.size();
  base.admissibility_ = AdmissibilityMatrix(n, true);
  base.weight_ = std::move(weights);
  base.transition_.resize(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) base.transition_[a * n + b] = base.weight_[b];
  }
  base.finish();
  return base;
}

MarkovBase MarkovBase::markov(std::vector<std::string> alphabet, std::vector<Rational> pi,
                              std::vector<std::vector<Rational>> transition,
                              std::optional<AdmissibilityMatrix> admissibility) {
  check_alphabet(alphabet);
  const std::size_t n = alphabet.size();
  if (pi.size() != n) throw InvalidInput("markov pi: expected " + std::to_string(n) + " entries");
  if (transition.size() != n) throw InvalidInput("markov P: expected " + std::to_string(n) + " rows");
  for (auto& x : pi) x.canonicalize();
  for (auto& row : transition) {
    for (auto& x : row) x.canonicalize();
  }

  AdmissibilityMatrix adm = admissibility.value_or(AdmissibilityMatrix(n, false));
  if (adm.size() != n) throw InvalidInput("admissibility matrix has the wrong size");

  Rational pi_total = 0;
  for (std::size_t a = 0; a < n; ++a) {
    if (sgn(pi[a]) <= 0) throw InvalidInput("markov pi entries must be positive");
    pi_total += pi[a];
    if (transition[a].size() != n) {
      throw InvalidInput("markov P row " + std::to_string(a) + " has the wrong length");
    }
    Rational row = 0;
    for (std::size_t b = 0; b < n; ++b) {
      const Rational& p = transition[a][b];
      if (sgn(p) < 0) throw InvalidInput("markov P has a negative entry");
      row += p;
      if (!admissibility) {
        adm.set(a, b, sgn(p) > 0);
      } else if ((sgn(p) > 0) != adm(a, b)) {
        throw InvalidInput("markov P(" + alphabet[a] + "," + alphabet[b] +
                           ") must be positive exactly where the word is admissible");
      }
    }
    if (row != 1) {
      throw InvalidInput("markov P row " + std::to_string(a) + " sums to " + to_decimal_string(row) + " ≠ 1");
    }
  }
  if (pi_total != 1) throw InvalidInput("markov pi sums to " + to_decimal_string(pi_total) + " ≠ 1");
  for (std::size_t b = 0; b < n; ++b) {
    Rational flow = 0;
    for (std::size_t a = 0; a < n; ++a) flow += pi[a] * transition[a][b];
    if (flow != pi[b]) throw InvalidInput("markov pi is not stationary for P (component " + alphabet[b] + ")");
  }

  MarkovBase base;
  base.alphabet_ = std::move(alphabet);
  base.kind_ = MeasureKind::markov;
  base.admissibility_ = std::move(adm);
  base.weight_ = std::move(pi);
  base.transition_.resize(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) base.transition_[a * n + b] = transition[a][b];
  }
  base.finish();
  return base;
}

void MarkovBase::finish() {
  full_branch_ = admissibility_.all_true();
  weight_d_.clear();
  transition_d_.clear();
  for (const auto& w : weight_) weight_d_.push_back(w.get_d());
  for (const auto& t : transition_) transition_d_.push_back(t.get_d());
}

std::optional<Symbol> MarkovBase::find(std::string_view name) const {
  for (std::size_t a = 0; a < alphabet_.size(); ++a) {
    if (alphabet_[a] == name) return static_cast<Symbol>(a);
  }
  return std::nullopt;
}

Symbol MarkovBase::symbol(std::string_view name) const {
  if (auto a = find(name)) return *a;
  throw InvalidInput("unknown symbol \"" + std::string(name) + "\"");
}

SymbolString MarkovBase::parse(std::string_view text) const {
  const bool single_chars =
      std::all_of(alphabet_.begin(), alphabet_.end(), [](const std::string& s) { return s.size() == 1; });
  SymbolString out;
  if (single_chars) {
    for (char c : text) {
      if (std::isspace(static_cast<unsigned char>(c)) || c == ',') continue;
      out.push_back(symbol(std::string_view(&c, 1)));
    }
    return out;
  }
  std::string token;
  auto flush = [&] {
    if (!token.empty()) out.push_back(symbol(token));
    token.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return out;
}

std::string MarkovBase::format(const SymbolString& word) const {
  const bool single_chars =
      std::all_of(alphabet_.begin(), alphabet_.end(), [](const std::string& s) { return s.size() == 1; });
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (!single_chars && i > 0) out.push_back(' ');
    out += name(word[i]);
  }
  return out;
}

Word::Word(const MarkovBase& base, SymbolString symbols) : symbols_(std::move(symbols)) {
  if (!is_admissible(base, symbols_)) {
    throw InvalidInput("inadmissible word \"" + base.format(symbols_) + "\"");
  }
}

bool is_admissible(const MarkovBase& base, const SymbolString& word) {
  for (Symbol a : word) {
    if (a >= base.size()) throw InvalidInput("unknown symbol index " + std::to_string(a));
  }
  for (std::size_t i = 1; i < word.size(); ++i) {
    if (!base.admissible(word[i - 1], word[i])) return false;
  }
  return true;
}

bool is_admissible(const MarkovBase& base, std::string_view word) {
  return is_admissible(base, base.parse(word));
}

Rational cylinder_measure(const MarkovBase& base, const SymbolString& word, Strictness strictness) {
  if (!is_admissible(base, word)) {
    if (strictness == Strictness::lenient) return 0;
    throw InvalidInput("inadmissible word \"" + base.format(word) + "\"");
  }
  if (word.empty()) return 1;
  Rational m = base.weight(word[0]);
  for (std::size_t i = 1; i < word.size(); ++i) m *= base.transition(word[i - 1], word[i]);
  return m;
}

Rational inverse_branch_weight(const MarkovBase& base, const SymbolString& word, Symbol next) {
  if (next >= base.size()) throw InvalidInput("unknown symbol index " + std::to_string(next));
  if (word.empty()) return 1;
  SymbolString extended = word;
  extended.push_back(next);
  if (!is_admissible(base, extended)) {
    throw InvalidInput("inadmissible word \"" + base.format(extended) + "\"");
  }
  if (base.is_bernoulli()) return cylinder_measure(base, word);
  return cylinder_measure(base, word) * base.transition(word.back(), next) / base.weight(next);
}

double d_r_distance(const SymbolString& x, const SymbolString& y, double r) {
  if (!(r > 0.0 && r < 1.0)) throw InvalidInput("metric parameter r must lie in (0, 1)");
  if (x.empty() || y.empty()) throw InvalidInput("d_r distance needs nonempty sequences");
  const std::size_t common = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (x[i] != y[i]) return std::pow(r, static_cast<double>(i));
  }
  return std::pow(r, static_cast<double>(common));
}

TransitivityInfo check_transitive_mixing(const AdmissibilityMatrix& adm) {
  const std::size_t n = adm.size();
  TransitivityInfo info;
  if (n == 0) return info;

  auto reach_from = [&](Symbol s, bool reversed) {
    std::vector<bool> seen(n, false);
    std::queue<Symbol> queue;
    seen[s] = true;
    queue.push(s);
    while (!queue.empty()) {
      Symbol a = queue.front();
      queue.pop();
      for (Symbol b = 0; b < n; ++b) {
        const bool edge = reversed ? adm(b, a) : adm(a, b);
        if (edge && !seen[b]) {
          seen[b] = true;
          queue.push(b);
        }
      }
    }
    return seen;
  };
  const auto forward = reach_from(0, false);
  const auto backward = reach_from(0, true);
  info.transitive = std::all_of(forward.begin(), forward.end(), [](bool x) { return x; }) &&
                    std::all_of(backward.begin(), backward.end(), [](bool x) { return x; });
  if (!info.transitive) return info;

  // Period: gcd over edges (a, b) of level(a) + 1 - level(b), BFS levels from 0.
  std::vector<long> level(n, -1);
  std::queue<Symbol> queue;
  level[0] = 0;
  queue.push(0);
  while (!queue.empty()) {
    Symbol a = queue.front();
    queue.pop();
    for (Symbol b = 0; b < n; ++b) {
      if (adm(a, b) && level[b] < 0) {
        level[b] = level[a] + 1;
        queue.push(b);
      }
    }
  }
  long g = 0;
  for (Symbol a = 0; a < n; ++a) {
    for (Symbol b = 0; b < n; ++b) {
      if (adm(a, b)) g = std::gcd(g, std::labs(level[a] + 1 - level[b]));
    }
  }
  info.period = static_cast<unsigned>(g);
  info.mixing = info.period == 1;
  return info;
}

TransitivityInfo check_transitive_mixing(const MarkovBase& base) {
  return check_transitive_mixing(base.admissibility());
}

void for_each_word(const MarkovBase& base, std::size_t n,
                   const std::function<void(const SymbolString&)>& visit) {
  SymbolString word;
  word.reserve(n);
  std::function<void()> extend = [&] {
    if (word.size() == n) {
      visit(word);
      return;
    }
    for (Symbol a = 0; a < base.size(); ++a) {
      if (!word.empty() && !base.admissible(word.back(), a)) continue;
      word.push_back(a);
      extend();
      word.pop_back();
    }
  };
  extend();
}

}  // namespace amenwalk
