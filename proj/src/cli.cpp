#include "amenwalk/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "amenwalk/config.hpp"
#include "amenwalk/error.hpp"
#include "amenwalk/extension.hpp"
#include "amenwalk/inducing.hpp"
#include "amenwalk/schreier.hpp"
#include "amenwalk/walkdp.hpp"
#include "amenwalk/wgraph.hpp"
#include "json.hpp"

namespace amenwalk {
namespace {

using nlohmann::json;

class OutputError : public Error {
 public:
  using Error::Error;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  json data = json::object();
  std::vector<Table> tables;
  std::string default_format = "csv";
};

json number(double value) {
  if (!std::isfinite(value)) return format_real(value);
  return std::stod(format_real(value));
}

json rational(const Rational& value) { return to_string(value); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_csv(const Report& report) {
  std::ostringstream out;
  for (std::size_t t = 0; t < report.tables.size(); ++t) {
    if (t > 0) out << '\n';
    auto line = [&](const std::vector<std::string>& fields) {
      for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_field(fields[i]);
      out << '\n';
    };
    line(report.tables[t].header);
    for (const auto& row : report.tables[t].rows) line(row);
  }
  return out.str();
}

std::string render_json(const Report& report, const RunConfig& config) {
  json doc;
  doc["meta"] = {{"version", version},
                 {"seed", config.analysis.seed},
                 {"mode", std::string(to_string(config.analysis.mode))}};
  doc["data"] = report.data;
  return doc.dump(2) + "\n";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw OutputError("cannot write " + path.string());
}

// Command-line values; each one overrides the config key of the same name.
struct Flags {
  std::string config;
  std::optional<std::size_t> n_max, radius, budget, samples, depth, max_eta, memory_budget, rank;
  std::optional<std::string> epsilon, omega, estimator, output, gens;
  std::optional<double> target;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool exact = false;
  std::string out_dir;
};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_rational(item.substr(item.find_first_not_of(" \t"))).get_d());
  }
  if (out.empty()) throw InvalidInput("--epsilon needs at least one value");
  return out;
}

void apply(const Flags& f, RunConfig& c) {
  AnalysisConfig& a = c.analysis;
  if (f.n_max) a.n_max = *f.n_max;
  if (f.radius) a.radius = *f.radius;
  if (f.budget) a.budget = *f.budget;
  if (f.samples) a.samples = *f.samples;
  if (f.depth) a.depth = *f.depth;
  if (f.max_eta) a.max_eta = *f.max_eta;
  if (f.memory_budget) a.memory_budget = *f.memory_budget;
  if (f.epsilon) a.epsilon = parse_grid(*f.epsilon);
  if (f.omega) a.omega = *f.omega;
  if (f.estimator) a.estimator = parse_estimator(*f.estimator);
  if (f.target) a.target = *f.target;
  if (f.seed) a.seed = *f.seed;
  if (f.threads) {
    if (*f.threads == 0) throw InvalidInput("--threads must be at least 1");
    a.threads = *f.threads;
  }
  if (f.exact) a.mode = Arithmetic::exact;
  if (f.output) {
    if (*f.output != "csv" && *f.output != "json") throw InvalidInput("--output must be csv or json");
    c.output.format = *f.output;
  }
}

TableOptions table_options(const AnalysisConfig& a) {
  TableOptions t;
  t.mode = a.mode;
  t.threads = a.threads;
  t.mc_samples = a.samples;
  t.seed = a.seed;
  return t;
}

void add_return_table(Report& r, const ReturnTable& table) {
  Table t{{"n", "p_n", "method", "stderr"}, {}};
  bool exact = std::any_of(table.begin(), table.end(), [](const ReturnEntry& e) { return e.exact.has_value(); });
  if (exact) t.header.push_back("exact");
  json rows = json::array();
  for (const auto& e : table) {
    std::vector<std::string> row{std::to_string(e.n), format_real(e.value), to_string(e.method),
                                 format_real(e.std_error)};
    json j = {{"n", e.n}, {"p_n", number(e.value)}, {"method", to_string(e.method)}, {"stderr", number(e.std_error)}};
    if (exact) row.push_back(e.exact ? to_string(*e.exact) : "");
    if (e.exact) j["exact"] = rational(*e.exact);
    t.rows.push_back(std::move(row));
    rows.push_back(std::move(j));
  }
  r.tables.push_back(std::move(t));
  r.data["table"] = std::move(rows);
}

Report return_rate(const RunConfig& c) {
  const auto ext = c.extension();
  const AnalysisConfig& a = c.analysis;
  Report r;
  const RateReport rates = rate_report(return_table(ext, a.n_max, table_options(a)), a.estimator);
  add_return_table(r, rates.table);
  const std::string fit_window = std::to_string(rates.window_begin) + "-" + std::to_string(rates.window_end);
  r.tables.push_back({{"estimator", "value", "window", "residual"},
                      {{"root", format_real(rates.root), std::to_string(rates.root_n), ""},
                       {"ratio", format_real(rates.ratio), std::to_string(rates.ratio_n), ""},
                       {"fit", format_real(rates.fit), fit_window, format_real(rates.fit_residual)}}});
  r.data["rates"] = {{"root", {{"value", number(rates.root)}, {"n", rates.root_n}}},
                     {"ratio", {{"value", number(rates.ratio)}, {"raw", number(rates.ratio_raw)}, {"n", rates.ratio_n}}},
                     {"fit",
                      {{"value", number(rates.fit)},
                       {"raw", number(rates.fit_raw)},
                       {"exponent", number(rates.fit_exponent)},
                       {"residual", number(rates.fit_residual)},
                       {"window", {rates.window_begin, rates.window_end}}}}};
  r.data["selected"] = {{"estimator", to_string(rates.selected)}, {"value", number(rates.value())}};
  return r;
}

Report mc_walk(const RunConfig& c) {
  const auto ext = c.extension();
  const AnalysisConfig& a = c.analysis;
  Report r;
  add_return_table(r, mc_return_table(ext, a.n_max, a.samples, a.seed, a.threads));
  r.data["samples"] = a.samples;
  return r;
}

Report spectral(const RunConfig& c) {
  const auto ext = c.extension();
  const AnalysisConfig& a = c.analysis;
  SpectralOptions options;
  options.threads = a.threads;
  const SpectralReport s = spectral_radius(ext, a.n_max, a.radius, options);
  Report r;
  Table t{{"radius", "support_radius", "iterations", "residual"}, {}};
  json stages = json::array();
  for (const auto& st : s.stages) {
    t.rows.push_back({format_real(st.rho), std::to_string(st.support_radius), std::to_string(st.iterations),
                      format_real(st.residual)});
    stages.push_back({{"rho", number(st.rho)},
                      {"support_radius", st.support_radius},
                      {"support_size", st.support_size},
                      {"iterations", st.iterations},
                      {"residual", number(st.residual)}});
  }
  r.tables.push_back(std::move(t));
  r.tables.push_back({{"rho", "method", "symmetric"}, {{format_real(s.rho), s.method, s.symmetric ? "true" : "false"}}});
  r.data = {{"rho", number(s.rho)}, {"method", s.method}, {"symmetric", s.symmetric}, {"notes", s.notes},
            {"stages", std::move(stages)}};
  return r;
}

Report gurevich(const RunConfig& c) {
  const auto ext = c.extension();
  const AnalysisConfig& a = c.analysis;
  const PressureReport p = gurevich_pressure(ext, a.n_max, table_options(a));
  Report r;
  Table z{{"n", "Z_n"}, {}};
  json partition = json::array();
  for (const auto& [n, value] : p.partition) {
    z.rows.push_back({std::to_string(n), format_real(value)});
    partition.push_back({{"n", n}, {"Z_n", number(value)}});
  }
  r.tables.push_back(std::move(z));
  const std::string window = std::to_string(p.window_begin) + "-" + std::to_string(p.window_end);
  r.tables.push_back({{"estimator", "value", "window"},
                      {{"pressure", format_real(p.pressure), window},
                       {"root", format_real(p.root), std::to_string(p.window_end)},
                       {"log_rate", format_real(p.log_rate), ""}}});
  r.data = {{"pressure", number(p.pressure)}, {"root", number(p.root)}, {"log_rate", number(p.log_rate)},
            {"window", {p.window_begin, p.window_end}}, {"partition", std::move(partition)}};
  return r;
}

Report graph_report(const RunConfig& c) {
  const auto ext = c.extension();
  WeightedDigraph g = canonical_weight(ext);
  const VertexSet ball = out_ball(g, c.analysis.radius);
  Report r;
  Table t{{"source", "target", "weight"}, {}};
  json edges = json::array();
  for (VertexId v : ball) {
    for (const auto& e : g.out_edges(v)) {
      t.rows.push_back({g.key(v), g.key(e.target), to_string(e.weight)});
      edges.push_back({g.key(v), g.key(e.target), rational(e.weight)});
    }
  }
  r.tables.push_back(std::move(t));
  r.data = {{"radius", c.analysis.radius}, {"vertices", ball.size()}, {"edges", std::move(edges)}};
  return r;
}

Report folner(const RunConfig& c) {
  const auto ext = c.extension();
  const AnalysisConfig& a = c.analysis;
  WeightedDigraph g = canonical_weight(ext);
  Report r;
  Table t{{"epsilon", "vertex"}, {}};
  Table summary{{"epsilon", "ratio", "set_size", "certificate", "phase"}, {}};
  json results = json::array();
  for (double eps : a.epsilon) {
    const FolnerResult f = folner_search(g, eps, a.target, a.budget);
    const auto keys = f.keys(g);
    for (const auto& k : keys) t.rows.push_back({format_real(eps), k});
    summary.rows.push_back(
        {format_real(eps), to_string(f.ratio), std::to_string(f.set.size()), f.certificate ? "true" : "false", f.phase});
    results.push_back({{"epsilon", number(eps)},
                       {"ratio", rational(f.ratio)},
                       {"ratio_value", number(f.ratio.get_d())},
                       {"set_size", f.set.size()},
                       {"certificate", f.certificate},
                       {"phase", f.phase},
                       {"vertices", keys}});
  }
  r.tables.push_back(std::move(t));
  r.tables.push_back(std::move(summary));
  r.data = {{"target", number(a.target)}, {"budget", a.budget}, {"results", std::move(results)}};
  return r;
}

Report defect(const RunConfig& c) {
  const auto ext = c.extension();
  const auto set = ext.graph().ball(c.analysis.radius);
  const Rational d = almost_invariance_defect(ext, set);
  const bool whole = ext.graph().exhausted() && set.size() == ext.graph().vertex_count();
  Report r;
  r.tables.push_back({{"radius", "set_size", "whole_graph", "defect", "defect_value"},
                      {{std::to_string(c.analysis.radius), std::to_string(set.size()), whole ? "true" : "false",
                        to_string(d), format_real(d.get_d())}}});
  r.data = {{"radius", c.analysis.radius}, {"set_size", set.size()}, {"whole_graph", whole},
            {"defect", rational(d)}, {"defect_value", number(d.get_d())}};
  return r;
}

MarkovBase fair_coin() {
  return MarkovBase::bernoulli({"0", "1"}, {Rational(1, 2), Rational(1, 2)});
}

Report induce(const RunConfig& c) {
  const AnalysisConfig& a = c.analysis;
  const MarkovBase base = c.base ? *c.base : fair_coin();
  const auto omega = parse_omega(base, a.omega.value_or("[0]"));
  const InducedSystem s = first_return_words(base, omega, a.max_eta);
  const KacReport kac = kac_check(s);
  Report r;
  Table t{{"u", "eta", "nu", "cumulative"}, {}};
  Rational cumulative = 0;
  for (const auto& w : s.words) {
    cumulative += w.nu;
    t.rows.push_back({base.format(w.word), std::to_string(w.eta), to_string(w.nu), to_string(cumulative)});
  }
  r.tables.push_back(std::move(t));
  r.data = {{"words", s.words.size()},
            {"max_eta", s.max_eta},
            {"omega_measure", rational(s.omega_measure)},
            {"tail", rational(s.tail)},
            {"tail_value", number(s.tail.get_d())},
            {"kac_expectation", number(kac.expectation)},
            {"kac_defect", number(kac.defect)},
            {"budget_hit", s.budget_hit},
            {"low_mass", s.low_mass},
            {"adequacy", s.adequacy}};
  try {
    const TailReport tail = tail_rate(s);
    r.data["tail_rate"] = number(tail.rate);
    r.data["exponential_tails"] = tail.exponential;
  } catch (const InvalidInput&) {
    r.data["tail_rate"] = nullptr;
    r.data["exponential_tails"] = nullptr;
  }
  return r;
}

Report check(const RunConfig& c) {
  const auto ext = c.extension();
  const AnalysisConfig& a = c.analysis;
  Report r;
  Table t{{"check", "status", "details"}, {}};
  auto add = [&](const std::string& name, const std::string& status, const std::string& details) {
    t.rows.push_back({name, status, details});
    r.data[name] = {{"status", status}, {"details", details}};
  };
  const TransitivityInfo base = check_transitive_mixing(*c.base);
  add("base", base.mixing ? "mixing" : (base.transitive ? "transitive" : "not-transitive"),
      "period " + std::to_string(base.period));
  const UniformLoopsReport ul = check_uniform_loops(ext, a.depth, a.radius);
  std::string loops;
  for (const auto& w : ul.witness) loops += (loops.empty() ? "" : " ") + c.base->format(w);
  add("uniform-loops", ul.verified ? "verified" : "inconclusive",
      ul.verified ? "power " + std::to_string(ul.power) + ": " + loops : ul.details);
  const TransitivityReport tr = check_transitivity(ext, a.radius);
  add("transitivity", to_string(tr.status), tr.details);
  const SymmetryReport sym = check_symmetry(ext, std::max<std::size_t>(2, a.depth));
  add("symmetry", sym.verdict, "log C_n slope " + format_real(sym.slope));
  if (const auto* schreier = dynamic_cast<const SchreierCocycle*>(c.cocycle.get())) {
    const ConditionReport cond = check_tt_ul_fc(schreier->automaton(), *c.base, schreier->gamma(), a.depth);
    auto verdict = [](const ConditionVerdict& v) { return v.witnessed ? "witnessed" : "inconclusive"; };
    add("tt", verdict(cond.tt), cond.tt.details);
    add("ul", verdict(cond.ul), cond.ul.details);
    add("fc", verdict(cond.fc), cond.fc.details);
  }
  r.tables.push_back(std::move(t));
  return r;
}

std::vector<std::string> split_generators(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](char ch) { return ch == ' ' || ch == '\t'; }), item.end());
    out.push_back(item);
  }
  return out;
}

Report fold(const Flags& f) {
  if (!f.rank || *f.rank == 0) throw InvalidInput("fold needs --rank >= 1");
  std::vector<FreeWord> gens;
  for (const auto& g : split_generators(f.gens.value_or(""))) gens.push_back(parse_word(g, *f.rank));
  const SubgroupAutomaton m = stallings_fold(gens, *f.rank);
  Report r;
  r.default_format = "json";
  Table t{{"from", "label", "to"}, {}};
  json edges = json::array();
  for (const auto& [from, letter, to] : m.edges()) {
    const std::string label(1, letter_char(letter));
    t.rows.push_back({std::to_string(from), label, std::to_string(to)});
    edges.push_back({from, label, to});
  }
  r.tables.push_back(std::move(t));
  const auto index = m.index();
  r.data = {{"states", m.state_count()},
            {"base", m.base()},
            {"edges", std::move(edges)},
            {"complete", m.complete()},
            {"index", index ? json(*index) : json(nullptr)}};
  return r;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "run configuration (JSON)");
  sub->add_option("--n-max", f.n_max, "largest walk length");
  sub->add_option("--radius", f.radius, "ball or support radius");
  sub->add_option("--epsilon", f.epsilon, "epsilon grid, comma separated");
  sub->add_option("--target", f.target, "target isoperimetric ratio");
  sub->add_option("--budget", f.budget, "vertex budget for searches");
  sub->add_option("--seed", f.seed, "random seed");
  sub->add_option("--threads", f.threads, "worker threads");
  sub->add_flag("--exact", f.exact, "exact rational arithmetic");
  sub->add_option("--output", f.output, "csv or json");
  sub->add_option("--out-dir", f.out_dir, "write <subcommand>.csv and .json here");
  sub->add_option("--estimator", f.estimator, "root, ratio or fit");
  sub->add_option("--samples", f.samples, "Monte Carlo samples");
  sub->add_option("--depth", f.depth, "word length for condition searches");
  sub->add_option("--memory-budget", f.memory_budget, "state budget for walk tables");
  sub->add_option("--omega", f.omega, "inducing set, e.g. \"[0]\"");
  sub->add_option("--max-eta", f.max_eta, "longest return time enumerated");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random walks on graph extensions of Gibbs-Markov maps", "amenwalk"};
  app.set_version_flag("--version", version);
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"fold", "fold subgroup generators into a coset automaton"},
      {"graph", "list the canonical weighted graph on a ball"},
      {"return-rate", "return probabilities and decay-rate estimators"},
      {"spectral-radius", "spectral radius of the fiber transfer operator"},
      {"gurevich", "Gurevich pressure from periodic orbits"},
      {"folner", "search for epsilon-Folner sets"},
      {"defect", "almost-invariance defect of a ball"},
      {"induce", "first-return inducing scheme"},
      {"check", "transitivity, uniform-loop and symmetry checks"},
      {"mc-walk", "Monte Carlo return probabilities"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, flags);
    if (std::string(name) == "fold") {
      sub->add_option("--rank", flags.rank, "rank of the free group")->required();
      sub->add_option("--gens", flags.gens, "subgroup generators, comma separated");
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig config = flags.config.empty() ? RunConfig{} : load_config(flags.config);
    apply(flags, config);
    const std::map<std::string, std::function<Report(const RunConfig&)>> handlers = {
        {"graph", graph_report}, {"return-rate", return_rate}, {"spectral-radius", spectral},
        {"gurevich", gurevich},  {"folner", folner},           {"defect", defect},
        {"induce", induce},      {"check", check},             {"mc-walk", mc_walk},
    };
    if (command != "fold" && command != "induce" && flags.config.empty()) {
      throw ConfigError({{"", command + " needs --config"}});
    }
    const Report report = command == "fold" ? fold(flags) : handlers.at(command)(config);
    const std::string format = config.output.format.empty() ? report.default_format : config.output.format;
    if (!flags.out_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(flags.out_dir, ec);
      if (ec) throw OutputError("cannot create " + flags.out_dir + ": " + ec.message());
      const std::filesystem::path dir(flags.out_dir);
      write_file(dir / (command + ".csv"), render_csv(report));
      write_file(dir / (command + ".json"), render_json(report, config));
    } else {
      const std::string text = format == "json" ? render_json(report, config) : render_csv(report);
      if (!config.output.path.empty()) {
        write_file(config.output.path, text);
      } else {
        out << text;
      }
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "amenwalk: configuration error\n";
    for (const auto& [path, message] : e.problems()) {
      err << "  " << (path.empty() ? "<root>" : path) << ": " << message << '\n';
    }
    return 2;
  } catch (const InvalidInput& e) {
    err << "amenwalk: " << e.what() << '\n';
    return 2;
  } catch (const ConvergenceFailure& e) {
    err << "amenwalk: " << e.what() << " (residual " << format_real(e.residual()) << ")\n";
    return 3;
  } catch (const Error& e) {
    err << "amenwalk: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace amenwalk
