#pragma once

#include <memory>
#include <string>
#include <vector>

#include "amenwalk/extension.hpp"
#include "amenwalk/schreier.hpp"
#include "amenwalk/symdyn.hpp"

namespace fixtures {

using namespace amenwalk;

inline MarkovBase uniform(std::vector<std::string> names) {
  const std::size_t n = names.size();
  return MarkovBase::bernoulli(std::move(names), std::vector<Rational>(n, Rational(1, n)));
}

inline MarkovBase free_steps() { return uniform({"a", "A", "b", "B"}); }

inline GraphExtension z1() {
  return GraphExtension(uniform({"+", "-"}), std::make_shared<LatticeCocycle>(std::vector<std::vector<long>>{{1}, {-1}}));
}

inline GraphExtension z2() {
  return GraphExtension(uniform({"e", "w", "n", "s"}), std::make_shared<LatticeCocycle>(std::vector<std::vector<long>>{
                                                             {1, 0}, {-1, 0}, {0, 1}, {0, -1}}));
}

inline SubgroupAutomaton fold(const std::vector<std::string>& gens, std::size_t rank = 2) {
  std::vector<FreeWord> words;
  for (const auto& g : gens) words.push_back(parse_word(g, rank));
  return stallings_fold(words, rank);
}

inline GraphExtension schreier(const SubgroupAutomaton& m, MarkovBase base = free_steps()) {
  auto gamma = gamma_from_alphabet(base, m.rank());
  return GraphExtension(base, std::make_shared<SchreierCocycle>(m, gamma));
}

inline GraphExtension schreier(const std::vector<std::string>& gens) { return schreier(fold(gens)); }

// Free group of rank 2, the Cayley tree.
inline GraphExtension f2() { return schreier(std::vector<std::string>{}); }

inline GraphExtension cyclic_a() { return schreier(std::vector<std::string>{"a"}); }

// Kernel of F2 -> Z/2 counting a-letters.
inline GraphExtension index2() { return schreier(std::vector<std::string>{"aa", "b", "abA"}); }

// Stabilizer of a point under a -> (1 2), b -> (1 2 3).
inline SubgroupAutomaton s3_stabilizer() { return automaton_from_permutations({{1, 0, 2}, {1, 2, 0}}); }

inline GraphExtension s3stab() { return schreier(s3_stabilizer()); }

inline GraphExtension one_vertex(MarkovBase base) {
  std::vector<std::vector<std::size_t>> identity(base.size(), std::vector<std::size_t>{0});
  return GraphExtension(std::move(base), std::make_shared<TableCocycle>(std::vector<std::string>{"o"}, identity));
}

}  // namespace fixtures
