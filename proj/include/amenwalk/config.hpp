#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "amenwalk/error.hpp"
#include "amenwalk/extension.hpp"
#include "amenwalk/numeric.hpp"
#include "amenwalk/schreier.hpp"
#include "amenwalk/symdyn.hpp"
#include "amenwalk/walkdp.hpp"

namespace amenwalk {

// Schema violations, as (dotted path, message) pairs.
class ConfigError : public InvalidInput {
 public:
  explicit ConfigError(std::vector<std::pair<std::string, std::string>> problems);
  const std::vector<std::pair<std::string, std::string>>& problems() const { return problems_; }

 private:
  std::vector<std::pair<std::string, std::string>> problems_;
};

struct AnalysisConfig {
  std::size_t n_max = 24;
  std::size_t radius = 8;
  std::vector<double> epsilon{0.2};
  double target = 0.1;
  std::size_t budget = 100000;
  Estimator estimator = Estimator::fit;
  Arithmetic mode = Arithmetic::floating;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::optional<std::size_t> memory_budget;
  std::optional<std::string> omega;
  std::size_t max_eta = 20;
  std::size_t samples = 100000;
  std::size_t depth = 4;
};

struct OutputConfig {
  // "csv" or "json"; empty picks the subcommand default.
  std::string format;
  std::string path;
};

struct RunConfig {
  std::optional<MarkovBase> base;
  std::shared_ptr<const Cocycle> cocycle;
  // Set for Schreier cocycles.
  std::optional<SubgroupAutomaton> automaton;
  AnalysisConfig analysis;
  OutputConfig output;

  // Throws ConfigError when the base or cocycle block is missing.
  GraphExtension extension() const;
};

// Parses and validates a configuration document; every problem found is
// reported at once.
RunConfig validate(const std::string& text);

RunConfig load_config(const std::string& path);

}  // namespace amenwalk
