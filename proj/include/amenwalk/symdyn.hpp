#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amenwalk/numeric.hpp"

namespace amenwalk {

using Symbol = std::uint32_t;
using SymbolString = std::vector<Symbol>;

// Row-major A x A boolean matrix; entry (a, b) true iff "ab" is admissible.
class AdmissibilityMatrix {
 public:
  AdmissibilityMatrix() = default;
  explicit AdmissibilityMatrix(std::size_t size, bool value = true)
      : size_(size), entries_(size * size, value) {}
  explicit AdmissibilityMatrix(const std::vector<std::vector<bool>>& rows);

  std::size_t size() const { return size_; }
  bool operator()(Symbol a, Symbol b) const { return entries_[a * size_ + b]; }
  void set(Symbol a, Symbol b, bool value) { entries_[a * size_ + b] = value; }
  bool all_true() const;

 private:
  std::size_t size_ = 0;
  std::vector<bool> entries_;
};

// The finite-alphabet base (X, theta, mu, alpha): a one-sided subshift of
// finite type carrying a Bernoulli or a stationary one-step Markov measure.
// Probabilities are held exactly; double copies are cached for the
// floating-point paths.
class MarkovBase {
 public:
  enum class MeasureKind { bernoulli, markov };

  // Bernoulli measures live on the full shift.
  static MarkovBase bernoulli(std::vector<std::string> alphabet, std::vector<Rational> weights);

  // Without an explicit matrix the admissibility is the support of P.
  static MarkovBase markov(std::vector<std::string> alphabet, std::vector<Rational> pi,
                           std::vector<std::vector<Rational>> transition,
                           std::optional<AdmissibilityMatrix> admissibility = std::nullopt);

  std::size_t size() const { return alphabet_.size(); }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  const std::string& name(Symbol a) const { return alphabet_.at(a); }
  std::optional<Symbol> find(std::string_view name) const;
  // Throws InvalidInput naming the symbol.
  Symbol symbol(std::string_view name) const;

  MeasureKind measure_kind() const { return kind_; }
  bool is_bernoulli() const { return kind_ == MeasureKind::bernoulli; }
  const AdmissibilityMatrix& admissibility() const { return admissibility_; }
  bool admissible(Symbol a, Symbol b) const { return admissibility_(a, b); }
  bool full_branch() const { return full_branch_; }

  // mu([a]): p_a or pi_a.
  const Rational& weight(Symbol a) const { return weight_[a]; }
  double weight_d(Symbol a) const { return weight_d_[a]; }
  // Conditional probability of b following a: P(a, b), or p_b for Bernoulli.
  const Rational& transition(Symbol a, Symbol b) const { return transition_[a * size() + b]; }
  double transition_d(Symbol a, Symbol b) const { return transition_d_[a * size() + b]; }

  // Splits "abA" into symbols when every name is one character, otherwise
  // on whitespace or commas.
  SymbolString parse(std::string_view text) const;
  std::string format(const SymbolString& word) const;

 private:
  MarkovBase() = default;
  void finish();

  std::vector<std::string> alphabet_;
  MeasureKind kind_ = MeasureKind::bernoulli;
  AdmissibilityMatrix admissibility_;
  bool full_branch_ = true;
  std::vector<Rational> weight_;
  std::vector<Rational> transition_;
  std::vector<double> weight_d_;
  std::vector<double> transition_d_;
};

// An admissible finite word over a base.
class Word {
 public:
  Word() = default;
  // Throws InvalidInput if some adjacent pair is forbidden.
  Word(const MarkovBase& base, SymbolString symbols);

  const SymbolString& symbols() const { return symbols_; }
  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }
  auto begin() const { return symbols_.begin(); }
  auto end() const { return symbols_.end(); }

 private:
  SymbolString symbols_;
};

enum class Strictness { strict, lenient };

// Unknown symbol indices raise InvalidInput.
bool is_admissible(const MarkovBase& base, const SymbolString& word);
bool is_admissible(const MarkovBase& base, std::string_view word);

// mu([w]); 1 for the empty word.  Inadmissible words are an error in strict
// mode and have measure 0 in lenient mode.
Rational cylinder_measure(const MarkovBase& base, const SymbolString& word,
                          Strictness strictness = Strictness::strict);

// phi_w on the cylinder [next]: d(mu o tau_w)/d mu.
Rational inverse_branch_weight(const MarkovBase& base, const SymbolString& word, Symbol next);

// r^(first disagreement); r^L if the common prefix of length L agrees.
double d_r_distance(const SymbolString& x, const SymbolString& y, double r);

struct TransitivityInfo {
  bool transitive = false;
  bool mixing = false;
  // gcd of cycle lengths; 0 when the matrix is not irreducible.
  unsigned period = 0;
};

TransitivityInfo check_transitive_mixing(const AdmissibilityMatrix& admissibility);
TransitivityInfo check_transitive_mixing(const MarkovBase& base);

// Visits every admissible word of length n in lexicographic order.
void for_each_word(const MarkovBase& base, std::size_t n,
                   const std::function<void(const SymbolString&)>& visit);

}  // namespace amenwalk
