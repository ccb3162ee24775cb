#include "amenwalk/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace amenwalk {

using nlohmann::json;

namespace {

std::string describe(const std::vector<std::pair<std::string, std::string>>& problems) {
  std::string out;
  for (const auto& [path, message] : problems) {
    if (!out.empty()) out += "; ";
    out += (path.empty() ? std::string("<root>") : path) + ": " + message;
  }
  return out;
}

class Checker {
 public:
  std::vector<std::pair<std::string, std::string>> problems;

  void fail(const std::string& path, const std::string& message) { problems.emplace_back(path, message); }

  bool object(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    for (const auto& [key, value] : j.items()) {
      if (!allowed.count(key)) fail(join(path, key), "unknown key");
    }
    return true;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  std::optional<std::size_t> count(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::size_t>();
    if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::size_t>(j.get<long long>());
    fail(path, "expected a non-negative integer");
    return std::nullopt;
  }

  std::optional<double> real(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
      try {
        const std::string text = j.get<std::string>();
        parse_rational(text);
        return std::stod(text);
      } catch (const Error& e) {
        fail(path, e.what());
        return std::nullopt;
      }
    }
    fail(path, "expected a number");
    return std::nullopt;
  }

  std::optional<std::string> string(const json& j, const std::string& path) {
    if (j.is_string()) return j.get<std::string>();
    fail(path, "expected a string");
    return std::nullopt;
  }

  // Decimal strings are parsed exactly; bare numbers through their JSON text.
  std::optional<Rational> probability(const json& j, const std::string& path) {
    try {
      if (j.is_string()) return parse_rational(j.get<std::string>());
      if (j.is_number()) return parse_rational(j.dump());
    } catch (const Error& e) {
      fail(path, e.what());
      return std::nullopt;
    }
    fail(path, "expected a probability (decimal string)");
    return std::nullopt;
  }

  std::optional<std::vector<Rational>> probabilities(const json& j, const std::string& path) {
    if (!j.is_array()) {
      fail(path, "expected an array of probabilities");
      return std::nullopt;
    }
    std::vector<Rational> out;
    bool ok = true;
    for (std::size_t i = 0; i < j.size(); ++i) {
      auto p = probability(j[i], path + "[" + std::to_string(i) + "]");
      if (p) {
        out.push_back(*p);
      } else {
        ok = false;
      }
    }
    if (!ok) return std::nullopt;
    return out;
  }
};

std::optional<MarkovBase> parse_base(Checker& c, const json& j) {
  if (!c.object(j, "base", {"alphabet", "admissibility", "measure"})) return std::nullopt;
  std::vector<std::string> alphabet;
  if (!j.contains("alphabet") || !j["alphabet"].is_array()) {
    c.fail("base.alphabet", "expected an array of symbol names");
    return std::nullopt;
  }
  for (std::size_t i = 0; i < j["alphabet"].size(); ++i) {
    auto s = c.string(j["alphabet"][i], "base.alphabet[" + std::to_string(i) + "]");
    if (!s) return std::nullopt;
    alphabet.push_back(*s);
  }
  std::optional<AdmissibilityMatrix> admissibility;
  if (j.contains("admissibility")) {
    const auto& a = j["admissibility"];
    std::vector<std::vector<bool>> rows;
    bool ok = a.is_array();
    for (std::size_t r = 0; ok && r < a.size(); ++r) {
      ok = a[r].is_array();
      std::vector<bool> row;
      for (std::size_t k = 0; ok && k < a[r].size(); ++k) {
        const auto& x = a[r][k];
        if (x.is_boolean()) {
          row.push_back(x.get<bool>());
        } else if (x.is_number_integer() && (x.get<int>() == 0 || x.get<int>() == 1)) {
          row.push_back(x.get<int>() == 1);
        } else {
          ok = false;
        }
      }
      rows.push_back(std::move(row));
    }
    if (!ok) {
      c.fail("base.admissibility", "expected a square 0/1 matrix");
      return std::nullopt;
    }
    try {
      admissibility = AdmissibilityMatrix(rows);
    } catch (const Error& e) {
      c.fail("base.admissibility", e.what());
      return std::nullopt;
    }
  }
  if (!j.contains("measure")) {
    c.fail("base.measure", "missing");
    return std::nullopt;
  }
  const auto& m = j["measure"];
  if (!m.is_object() || !m.contains("type") || !m["type"].is_string()) {
    c.fail("base.measure.type", "expected \"bernoulli\" or \"markov\"");
    return std::nullopt;
  }
  const std::string type = m["type"].get<std::string>();
  try {
    if (type == "bernoulli") {
      if (!c.object(m, "base.measure", {"type", "weights"})) return std::nullopt;
      if (!m.contains("weights")) {
        c.fail("base.measure.weights", "missing");
        return std::nullopt;
      }
      auto w = c.probabilities(m["weights"], "base.measure.weights");
      if (!w) return std::nullopt;
      if (admissibility && !admissibility->all_true()) {
        c.fail("base.admissibility", "Bernoulli measures live on the full shift");
        return std::nullopt;
      }
      return MarkovBase::bernoulli(alphabet, *w);
    }
    if (type == "markov") {
      if (!c.object(m, "base.measure", {"type", "pi", "P"})) return std::nullopt;
      if (!m.contains("pi") || !m.contains("P") || !m["P"].is_array()) {
        c.fail("base.measure", "markov measures need \"pi\" and a matrix \"P\"");
        return std::nullopt;
      }
      auto pi = c.probabilities(m["pi"], "base.measure.pi");
      std::vector<std::vector<Rational>> p;
      bool ok = pi.has_value();
      for (std::size_t r = 0; r < m["P"].size(); ++r) {
        auto row = c.probabilities(m["P"][r], "base.measure.P[" + std::to_string(r) + "]");
        if (row) {
          p.push_back(*row);
        } else {
          ok = false;
        }
      }
      if (!ok) return std::nullopt;
      return MarkovBase::markov(alphabet, *pi, p, admissibility);
    }
  } catch (const Error& e) {
    c.fail("base.measure", e.what());
    return std::nullopt;
  }
  c.fail("base.measure.type", "expected \"bernoulli\" or \"markov\", got \"" + type + "\"");
  return std::nullopt;
}

std::shared_ptr<const Cocycle> parse_cocycle(Checker& c, const json& j, const std::optional<MarkovBase>& base,
                                             std::optional<SubgroupAutomaton>& automaton) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    c.fail("cocycle.type", "expected \"lattice\", \"schreier\" or \"table\"");
    return nullptr;
  }
  const std::string type = j["type"].get<std::string>();
  try {
    if (type == "lattice") {
      if (!c.object(j, "cocycle", {"type", "dim", "steps"})) return nullptr;
      std::vector<std::vector<long>> steps;
      if (!j.contains("steps") || !j["steps"].is_array()) {
        c.fail("cocycle.steps", "expected an array of integer vectors");
        return nullptr;
      }
      for (const auto& s : j["steps"]) {
        if (!s.is_array()) {
          c.fail("cocycle.steps", "expected an array of integer vectors");
          return nullptr;
        }
        std::vector<long> v;
        for (const auto& x : s) {
          if (!x.is_number_integer()) {
            c.fail("cocycle.steps", "expected integers");
            return nullptr;
          }
          v.push_back(x.get<long>());
        }
        steps.push_back(std::move(v));
      }
      if (j.contains("dim")) {
        auto dim = c.count(j["dim"], "cocycle.dim");
        for (const auto& s : steps) {
          if (dim && s.size() != *dim) {
            c.fail("cocycle.steps", "step length differs from dim");
            return nullptr;
          }
        }
      }
      return std::make_shared<LatticeCocycle>(steps);
    }
    if (type == "schreier") {
      if (!c.object(j, "cocycle", {"type", "rank", "subgroup", "permutations", "gamma"})) return nullptr;
      auto rank = j.contains("rank") ? c.count(j["rank"], "cocycle.rank") : std::nullopt;
      if (!rank || *rank == 0 || *rank > 26) {
        c.fail("cocycle.rank", "expected a rank between 1 and 26");
        return nullptr;
      }
      if (j.contains("subgroup") == j.contains("permutations")) {
        c.fail("cocycle", "give exactly one of \"subgroup\" (generator words) or \"permutations\"");
        return nullptr;
      }
      if (j.contains("subgroup")) {
        if (!j["subgroup"].is_array()) {
          c.fail("cocycle.subgroup", "expected an array of words");
          return nullptr;
        }
        std::vector<FreeWord> gens;
        for (std::size_t i = 0; i < j["subgroup"].size(); ++i) {
          const std::string path = "cocycle.subgroup[" + std::to_string(i) + "]";
          auto s = c.string(j["subgroup"][i], path);
          if (!s) return nullptr;
          try {
            gens.push_back(parse_word(*s, *rank));
          } catch (const InvalidInput& e) {
            c.fail(path, e.what());
          }
        }
        if (gens.size() != j["subgroup"].size()) return nullptr;
        automaton = stallings_fold(gens, *rank);
      } else {
        const auto& p = j["permutations"];
        std::vector<std::vector<std::size_t>> perms;
        for (std::size_t g = 0; g < *rank; ++g) {
          const std::string name(1, static_cast<char>('a' + g));
          if (!p.is_object() || !p.contains(name) || !p[name].is_array()) {
            c.fail("cocycle.permutations." + name, "missing permutation");
            return nullptr;
          }
          std::vector<std::size_t> perm;
          for (const auto& x : p[name]) {
            auto v = c.count(x, "cocycle.permutations." + name);
            if (!v) return nullptr;
            perm.push_back(*v);
          }
          perms.push_back(std::move(perm));
        }
        automaton = automaton_from_permutations(perms);
      }
      if (!base) return nullptr;
      std::vector<FreeWord> gamma;
      if (j.contains("gamma")) {
        const auto& g = j["gamma"];
        if (!g.is_object()) {
          c.fail("cocycle.gamma", "expected an object mapping symbols to words");
          return nullptr;
        }
        for (const auto& [key, value] : g.items()) {
          if (!base->find(key)) c.fail("cocycle.gamma." + key, "unknown symbol");
        }
        for (Symbol a = 0; a < base->size(); ++a) {
          const auto& name = base->name(a);
          if (!g.contains(name) || !g[name].is_string()) {
            c.fail("cocycle.gamma." + name, "missing word");
            return nullptr;
          }
          gamma.push_back(parse_word(g[name].get<std::string>(), *rank));
        }
      } else {
        gamma = gamma_from_alphabet(*base, *rank);
      }
      return std::make_shared<SchreierCocycle>(*automaton, gamma);
    }
    if (type == "table") {
      if (!c.object(j, "cocycle", {"type", "vertices", "actions"})) return nullptr;
      if (!j.contains("vertices") || !j["vertices"].is_array() || !j.contains("actions") ||
          !j["actions"].is_object()) {
        c.fail("cocycle", "table cocycles need \"vertices\" and an \"actions\" object");
        return nullptr;
      }
      std::vector<std::string> vertices;
      for (const auto& v : j["vertices"]) {
        if (!v.is_string()) {
          c.fail("cocycle.vertices", "expected strings");
          return nullptr;
        }
        vertices.push_back(v.get<std::string>());
      }
      if (!base) return nullptr;
      for (const auto& [key, value] : j["actions"].items()) {
        if (!base->find(key)) c.fail("cocycle.actions." + key, "unknown symbol");
      }
      std::vector<std::vector<std::size_t>> perms;
      for (Symbol a = 0; a < base->size(); ++a) {
        const auto& name = base->name(a);
        const auto& actions = j["actions"];
        if (!actions.contains(name) || !actions[name].is_array()) {
          c.fail("cocycle.actions." + name, "missing permutation");
          return nullptr;
        }
        std::vector<std::size_t> perm;
        for (const auto& x : actions[name]) {
          auto v = c.count(x, "cocycle.actions." + name);
          if (!v) return nullptr;
          perm.push_back(*v);
        }
        perms.push_back(std::move(perm));
      }
      return std::make_shared<TableCocycle>(vertices, perms);
    }
  } catch (const Error& e) {
    c.fail("cocycle", e.what());
    return nullptr;
  }
  c.fail("cocycle.type", "expected \"lattice\", \"schreier\" or \"table\", got \"" + type + "\"");
  return nullptr;
}

void parse_analysis(Checker& c, const json& j, AnalysisConfig& a) {
  if (!c.object(j, "analysis",
                {"n_max", "radius", "epsilon", "target", "budget", "estimator", "arithmetic", "seed", "threads",
                 "memory_budget", "omega", "max_eta", "samples", "depth"})) {
    return;
  }
  auto set_count = [&](const char* key, std::size_t& field) {
    if (!j.contains(key)) return;
    if (auto v = c.count(j[key], std::string("analysis.") + key)) field = *v;
  };
  set_count("n_max", a.n_max);
  set_count("radius", a.radius);
  set_count("budget", a.budget);
  set_count("max_eta", a.max_eta);
  set_count("samples", a.samples);
  set_count("depth", a.depth);
  if (j.contains("seed")) {
    if (auto v = c.count(j["seed"], "analysis.seed")) a.seed = *v;
  }
  if (j.contains("threads")) {
    auto v = c.count(j["threads"], "analysis.threads");
    if (v && *v == 0) c.fail("analysis.threads", "must be at least 1");
    if (v && *v > 0) a.threads = static_cast<unsigned>(*v);
  }
  if (j.contains("memory_budget")) {
    if (auto v = c.count(j["memory_budget"], "analysis.memory_budget")) a.memory_budget = *v;
  }
  if (j.contains("target")) {
    if (auto v = c.real(j["target"], "analysis.target")) a.target = *v;
  }
  if (j.contains("epsilon")) {
    const auto& e = j["epsilon"];
    a.epsilon.clear();
    if (e.is_array()) {
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (auto v = c.real(e[i], "analysis.epsilon[" + std::to_string(i) + "]")) a.epsilon.push_back(*v);
      }
    } else if (auto v = c.real(e, "analysis.epsilon")) {
      a.epsilon.push_back(*v);
    }
    if (a.epsilon.empty()) c.fail("analysis.epsilon", "needs at least one value");
  }
  if (j.contains("estimator")) {
    if (auto s = c.string(j["estimator"], "analysis.estimator")) {
      try {
        a.estimator = parse_estimator(*s);
      } catch (const Error& e) {
        c.fail("analysis.estimator", e.what());
      }
    }
  }
  if (j.contains("arithmetic")) {
    if (auto s = c.string(j["arithmetic"], "analysis.arithmetic")) {
      if (*s == "exact") {
        a.mode = Arithmetic::exact;
      } else if (*s == "double") {
        a.mode = Arithmetic::floating;
      } else {
        c.fail("analysis.arithmetic", "expected \"exact\" or \"double\"");
      }
    }
  }
  if (j.contains("omega")) a.omega = c.string(j["omega"], "analysis.omega");
}

void parse_output(Checker& c, const json& j, OutputConfig& o) {
  if (!c.object(j, "output", {"format", "path"})) return;
  if (j.contains("format")) {
    if (auto s = c.string(j["format"], "output.format")) {
      if (*s != "csv" && *s != "json") {
        c.fail("output.format", "expected \"csv\" or \"json\"");
      } else {
        o.format = *s;
      }
    }
  }
  if (j.contains("path")) {
    if (auto s = c.string(j["path"], "output.path")) o.path = *s;
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::pair<std::string, std::string>> problems)
    : InvalidInput(describe(problems)), problems_(std::move(problems)) {}

GraphExtension RunConfig::extension() const {
  std::vector<std::pair<std::string, std::string>> problems;
  if (!base) problems.emplace_back("base", "missing");
  if (!cocycle) problems.emplace_back("cocycle", "missing");
  if (!problems.empty()) throw ConfigError(problems);
  return GraphExtension(*base, cocycle, analysis.memory_budget.value_or(default_state_budget()));
}

RunConfig validate(const std::string& text) {
  Checker c;
  std::vector<std::set<std::string>> keys;
  std::vector<std::string> names;
  const json::parser_callback_t track = [&](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        keys.emplace_back();
        break;
      case json::parse_event_t::object_end:
        if (!keys.empty()) keys.pop_back();
        break;
      case json::parse_event_t::key: {
        const std::string key = parsed.get<std::string>();
        if (!keys.empty() && !keys.back().insert(key).second) c.fail(key, "duplicate key");
        break;
      }
      default:
        break;
    }
    return true;
  };
  json doc;
  try {
    doc = json::parse(text, track);
  } catch (const json::parse_error& e) {
    throw ConfigError({{"", std::string("malformed JSON: ") + e.what()}});
  }
  RunConfig config;
  if (c.object(doc, "", {"base", "cocycle", "analysis", "output"})) {
    if (doc.contains("base")) config.base = parse_base(c, doc["base"]);
    if (doc.contains("cocycle")) config.cocycle = parse_cocycle(c, doc["cocycle"], config.base, config.automaton);
    if (doc.contains("analysis")) parse_analysis(c, doc["analysis"], config.analysis);
    if (doc.contains("output")) parse_output(c, doc["output"], config.output);
  }
  if (config.base && config.cocycle && config.cocycle->symbol_count() != config.base->size()) {
    c.fail("cocycle", "acts by " + std::to_string(config.cocycle->symbol_count()) + " symbols but the alphabet has " +
                          std::to_string(config.base->size()));
  }
  if (!c.problems.empty()) throw ConfigError(c.problems);
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({{"", "cannot read config file " + path}});
  std::stringstream buffer;
  buffer << in.rdbuf();
  return validate(buffer.str());
}

}  // namespace amenwalk
