#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amenwalk/extension.hpp"
#include "amenwalk/schreier.hpp"
#include "amenwalk/symdyn.hpp"
#include "amenwalk/walkdp.hpp"

namespace amenwalk {

// A return word runs from its departure symbol to its landing symbol, both
// in Omega; eta = |word| - 1 and nu = mu([word]) / mu(Omega).
struct ReturnWord {
  SymbolString word;
  std::size_t eta = 0;
  Rational nu;
};

struct InducedSystem {
  std::vector<bool> omega;
  Rational omega_measure;
  std::vector<ReturnWord> words;
  // nu-mass not covered by the enumerated words.
  Rational tail;
  std::size_t max_eta = 0;
  bool first_return = true;
  // Enumeration stopped on the word budget before reaching max_eta.
  bool budget_hit = false;
  // Less than 99% of nu captured.
  bool low_mass = false;
  // "first-return", "modified" or "adequacy unverified".
  std::string adequacy = "first-return";
};

// Parses "[0]", "[0,1]" or "[a b]" into a membership mask over the alphabet.
std::vector<bool> parse_omega(const MarkovBase& base, const std::string& text);

// Depth-first, lexicographic enumeration of the first-return words with
// eta <= max_eta.
InducedSystem first_return_words(const MarkovBase& base, const std::vector<bool>& omega, std::size_t max_eta,
                                 std::size_t word_budget = 1'000'000);

// nu(eta = k) for every k with positive mass, ascending.
std::vector<std::pair<std::size_t, Rational>> eta_distribution(const InducedSystem& s);

struct TailReport {
  double rate = 0.0;
  double exponent = 0.0;
  bool exponential = false;
  std::size_t window_begin = 0;
  std::size_t window_end = 0;
};

// Fits log nu(eta = n) = c + n log r - alpha log n over the top half of the
// enumerated eta values; exponential tails iff r < 0.98.
TailReport tail_rate(const InducedSystem& s);

struct KacReport {
  // Sum of eta nu over enumerated words, plus (max_eta + 1) times the tail.
  double expectation = 0.0;
  Rational enumerated;
  Rational target;  // 1 / mu(Omega)
  double defect = 0.0;
};

KacReport kac_check(const InducedSystem& s);

struct InducedRatesOptions {
  std::size_t n_max = 24;
  // Induced steps for R(S); defaults to n_max.
  std::size_t induced_steps = 0;
  // Ball radius for the induced walk; 0 picks the largest ball with at most
  // max_ball_vertices vertices.
  std::size_t induced_radius = 0;
  std::size_t max_ball_vertices = 100'000;
  TableOptions table;
};

struct InducedRates {
  RateReport r_t;
  RateReport r_omega;
  RateReport r_s;
  // Induced mass lost per step to the ball truncation and the word tail; the
  // true induced return probability lies in [p_n, p_n + lost_n].
  std::vector<double> lost;
  std::size_t induced_radius = 0;
};

InducedRates induced_rates(const GraphExtension& ext, const InducedSystem& s, const InducedRatesOptions& options = {});

// kappa-hat of a return word: the action of everything but the landing
// symbol.
VertexId induced_action(const GraphExtension& ext, const ReturnWord& u, VertexId v);

struct CoverReport {
  bool witnessed = false;
  std::size_t radius = 0;
  std::vector<SymbolString> witness;
  std::string details;
};

// Greedy cover: for every symbol a and vertex g of the ball, some chosen
// induced word w has kappa-hat_w(g) = kappa_a(g).
CoverReport finitely_covers_check(const GraphExtension& ext, const InducedSystem& s, std::size_t depth);

// Every prefix (word without landing symbol) lands on all of Omega.
bool full_branch_check(const MarkovBase& base, const InducedSystem& s);

// Stopping-time refinement built from designated words v_h = w_h u whose
// group label lies in h H0 for each target h; other points stop at the
// shortest concatenation of induced words that leaves every v_h.
InducedSystem modified_inducing(const GraphExtension& ext, const InducedSystem& s, const std::vector<FreeWord>& targets,
                                const SubgroupAutomaton& core, std::size_t budget = 1'000'000);

}  // namespace amenwalk
