#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "amenwalk/extension.hpp"
#include "amenwalk/symdyn.hpp"

namespace amenwalk {

// Generator g (0-based) is +(g + 1), its inverse -(g + 1).
using Letter = int;

// Freely reduced word in the free group of a given rank.
class FreeWord {
 public:
  FreeWord() = default;
  // Reduces the input.
  explicit FreeWord(std::vector<Letter> letters);

  const std::vector<Letter>& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  FreeWord inverse() const;
  FreeWord operator*(const FreeWord& other) const;
  bool operator==(const FreeWord&) const = default;
  auto operator<=>(const FreeWord&) const = default;

 private:
  std::vector<Letter> letters_;
};

// 'a'..'z' for generators, 'A'..'Z' for inverses.
char letter_char(Letter x);
std::string to_string(const FreeWord& w);

// Parses a word over a..z / A..Z; throws InvalidInput naming the position of
// any letter beyond the rank.
FreeWord parse_word(std::string_view text, std::size_t rank);

// Folded labelled graph with a base vertex (state 0).  Slot 2g holds the
// target along generator g, slot 2g + 1 along its inverse.
class SubgroupAutomaton {
 public:
  static constexpr std::uint32_t missing = static_cast<std::uint32_t>(-1);

  SubgroupAutomaton(std::size_t rank, std::size_t states, std::vector<std::uint32_t> slots);

  std::size_t rank() const { return rank_; }
  std::size_t state_count() const { return states_; }
  std::uint32_t base() const { return 0; }
  std::uint32_t target(std::uint32_t state, Letter x) const;
  bool complete() const;
  // Index of the subgroup when the automaton is complete.
  std::optional<std::size_t> index() const;
  // Reads w from the base along existing edges; the state reached, if any.
  std::optional<std::uint32_t> read(std::uint32_t from, const FreeWord& w) const;
  bool contains(const FreeWord& w) const;
  // (from, letter, to) for positive letters, in state and generator order.
  std::vector<std::tuple<std::uint32_t, Letter, std::uint32_t>> edges() const;
  bool operator==(const SubgroupAutomaton&) const = default;

 private:
  std::size_t rank_;
  std::size_t states_;
  std::vector<std::uint32_t> slots_;
};

// Stallings folding of the wedge of generator loops, trimmed to the core
// and renumbered by breadth-first search from the base (letters in the
// order a, A, b, B, ...).  A nonzero shuffle seed permutes the generator
// list and the fold order; the result does not depend on it.
SubgroupAutomaton stallings_fold(const std::vector<FreeWord>& generators, std::size_t rank,
                                 std::uint64_t shuffle_seed = 0);

// Coset automaton of the orbit of `base` under the given permutations
// (one per generator, acting on the right).
SubgroupAutomaton automaton_from_permutations(const std::vector<std::vector<std::size_t>>& permutations,
                                              std::size_t base = 0);

// The largest normal subgroup contained in a finite-index subgroup.
SubgroupAutomaton normal_core(const SubgroupAutomaton& automaton);

// Right multiplication by gamma(symbol) on the cosets of H.  Keys are
// "<state>." followed by the reduced tree address hanging off that core
// state, e.g. "0.bA".
class SchreierCocycle : public Cocycle {
 public:
  SchreierCocycle(SubgroupAutomaton automaton, std::vector<FreeWord> gamma);

  Kind kind() const override { return Kind::schreier; }
  std::size_t symbol_count() const override { return gamma_.size(); }
  std::string root() const override { return "0."; }
  std::string act(Symbol a, const std::string& v) const override;
  std::string act_inverse(Symbol a, const std::string& v) const override;
  std::optional<std::vector<std::string>> finite_vertices() const override;

  const SubgroupAutomaton& automaton() const { return automaton_; }
  const std::vector<FreeWord>& gamma() const { return gamma_; }
  // Key of the coset H g.
  std::string coset(const FreeWord& g) const;

 private:
  std::string apply(const std::string& v, const FreeWord& w) const;

  SubgroupAutomaton automaton_;
  std::vector<FreeWord> gamma_;
  std::vector<FreeWord> gamma_inverse_;
};

// Symbols named by single generator letters act by those letters.
std::vector<FreeWord> gamma_from_alphabet(const MarkovBase& base, std::size_t rank);

FreeWord gamma_of(const std::vector<FreeWord>& gamma, const SymbolString& w);

struct ConditionVerdict {
  bool witnessed = false;
  std::size_t depth = 0;
  std::vector<SymbolString> witness;
  std::string details;
};

struct ConditionReport {
  ConditionVerdict tt;
  ConditionVerdict ul;
  ConditionVerdict fc;
  std::size_t sample_radius = 0;
  std::size_t samples = 0;
};

// Bounded searches for witnesses of the transitivity, uniform-loop and
// finite-cover conditions, over group elements g, h of length at most
// sample_radius.  Without induced words the induced alphabet is the base
// alphabet itself and loop words of length up to `depth` are allowed.
ConditionReport check_tt_ul_fc(const SubgroupAutomaton& automaton, const MarkovBase& base,
                               const std::vector<FreeWord>& gamma, std::size_t depth,
                               std::size_t sample_radius = 2,
                               const std::vector<SymbolString>& induced_words = {});

}  // namespace amenwalk
