#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "amenwalk/error.hpp"
#include "amenwalk/parallel.hpp"
#include "amenwalk/walkdp.hpp"
#include "walker.hpp"

namespace amenwalk {
namespace {

// For Bernoulli bases: true when every symbol has a partner of equal weight
// acting as its inverse on the ball.
bool paired_inverse_steps(const GraphExtension& ext, const std::vector<VertexId>& ball) {
  const MarkovBase& base = ext.base();
  ExtensionGraph& graph = ext.graph();
  for (Symbol a = 0; a < base.size(); ++a) {
    bool found = false;
    for (Symbol b = 0; b < base.size() && !found; ++b) {
      if (base.weight(a) != base.weight(b)) continue;
      found = std::all_of(ball.begin(), ball.end(), [&](VertexId v) { return graph.forward(graph.forward(v, a), b) == v; });
    }
    if (!found) return false;
  }
  return true;
}

struct Truncation {
  std::vector<double> weight;
  // next[i * symbols + a] = local index of kappa_a(ball[i]), or -1.
  std::vector<std::int64_t> next;
  std::size_t size = 0;
  std::size_t symbols = 0;
};

Truncation truncate(const GraphExtension& ext, const std::vector<VertexId>& ball) {
  Truncation t;
  t.size = ball.size();
  t.symbols = ext.base().size();
  for (Symbol a = 0; a < t.symbols; ++a) t.weight.push_back(ext.base().weight_d(a));
  std::unordered_map<VertexId, std::int64_t> local;
  local.reserve(ball.size() * 2);
  for (std::size_t i = 0; i < ball.size(); ++i) local.emplace(ball[i], static_cast<std::int64_t>(i));
  t.next.assign(t.size * t.symbols, -1);
  ExtensionGraph& graph = ext.graph();
  for (std::size_t i = 0; i < ball.size(); ++i) {
    for (Symbol a = 0; a < t.symbols; ++a) {
      auto it = local.find(graph.forward(ball[i], a));
      if (it != local.end()) t.next[i * t.symbols + a] = it->second;
    }
  }
  return t;
}

// g -> P_B T* P_B T P_B g, with (T f)(kappa_a v) += p_a f(v) and
// (T* h)(u) = sum_a p_a h(kappa_a u).
void apply_gram(const Truncation& t, const std::vector<double>& g, std::vector<double>& tf, std::vector<double>& out,
                unsigned threads) {
  std::fill(tf.begin(), tf.end(), 0.0);
  for (std::size_t i = 0; i < t.size; ++i) {
    if (g[i] == 0.0) continue;
    for (std::size_t a = 0; a < t.symbols; ++a) {
      const auto j = t.next[i * t.symbols + a];
      if (j >= 0) tf[static_cast<std::size_t>(j)] += t.weight[a] * g[i];
    }
  }
  parallel_for(t.size, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double s = 0.0;
      for (std::size_t a = 0; a < t.symbols; ++a) {
        const auto j = t.next[i * t.symbols + a];
        if (j >= 0) s += t.weight[a] * tf[static_cast<std::size_t>(j)];
      }
      out[i] = s;
    }
  });
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  Accumulator<double> acc;
  for (std::size_t i = 0; i < x.size(); ++i) acc.add(x[i] * y[i]);
  return acc.value();
}

SpectralStage power_iteration(const GraphExtension& ext, std::size_t radius, std::vector<double>& g,
                              const SpectralOptions& options) {
  const auto ball = ext.graph().ball(radius);
  const Truncation t = truncate(ext, ball);
  g.resize(t.size, 0.0);
  double norm = std::sqrt(dot(g, g));
  if (norm == 0.0) {
    std::fill(g.begin(), g.end(), 1.0);
    norm = std::sqrt(static_cast<double>(t.size));
  }
  for (auto& x : g) x /= norm;
  std::vector<double> tf(t.size), mg(t.size);
  SpectralStage stage;
  stage.support_radius = radius;
  stage.support_size = t.size;
  double lambda = 0.0;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    apply_gram(t, g, tf, mg, options.threads);
    const double next = dot(g, mg);
    const double mnorm = std::sqrt(dot(mg, mg));
    stage.iterations = it;
    if (mnorm == 0.0) {
      lambda = 0.0;
      stage.residual = 0.0;
      break;
    }
    double r2 = 0.0;
    for (std::size_t i = 0; i < t.size; ++i) r2 += (mg[i] - next * g[i]) * (mg[i] - next * g[i]);
    stage.residual = std::sqrt(r2);
    for (std::size_t i = 0; i < t.size; ++i) g[i] = mg[i] / mnorm;
    const bool settled = it > 1 && std::abs(next - lambda) <= options.tolerance * next;
    lambda = next;
    if (settled || stage.residual <= options.tolerance * next) break;
    if (it == options.max_iterations) {
      throw ConvergenceFailure("power iteration did not converge at support radius " + std::to_string(radius),
                               stage.residual);
    }
  }
  stage.rho = std::sqrt(std::max(0.0, lambda));
  return stage;
}

}  // namespace

SpectralReport spectral_radius(const GraphExtension& ext, std::size_t n_max, std::size_t support_radius,
                               const SpectralOptions& options) {
  if (n_max < 4) throw InvalidInput("spectral_radius needs n_max >= 4");
  ExtensionGraph& graph = ext.graph();
  SpectralReport report;

  if (graph.close()) {
    // T_1 1 = 1: the weights entering each vertex are those of all symbols.
    const MarkovBase& base = ext.base();
    for (VertexId v : graph.ball(graph.explored_radius())) {
      Rational in = 0;
      for (Symbol a = 0; a < base.size(); ++a) {
        graph.inverse(v, a);
        in += base.weight(a);
      }
      if (in != 1) throw InvalidInput("symbol weights do not sum to one");
    }
    SpectralStage stage;
    stage.support_radius = graph.explored_radius();
    stage.support_size = graph.vertex_count();
    stage.rho = 1.0;
    report.rho = 1.0;
    report.method = "exact-finite";
    report.stages.push_back(stage);
    report.notes = "finite graph: constants are fixed by T_n";
    return report;
  }

  const auto ball = graph.ball(support_radius);
  bool symmetric = false;
  if (ext.base().is_bernoulli()) {
    if (paired_inverse_steps(ext, ball)) {
      symmetric = true;
      report.notes = "steps pair with equal-weight inverses";
    } else {
      const SymmetryReport sym = check_symmetry(ext, std::min<std::size_t>(n_max, 8));
      symmetric = sym.symmetric;
      report.notes = "symmetry check: " + sym.verdict;
    }
  } else {
    report.notes = "Markov base: T_n is not a power of T_1";
  }
  report.symmetric = symmetric;

  if (symmetric) {
    report.method = "power-iteration";
    std::set<std::size_t> radii;
    for (std::size_t q = 1; q <= 4; ++q) radii.insert(std::max<std::size_t>(1, support_radius * q / 4));
    std::vector<double> g;
    for (std::size_t r : radii) report.stages.push_back(power_iteration(ext, r, g, options));
    report.rho = report.stages.back().rho;
    report.notes += "; truncation to a ball biases the estimate downward";
    return report;
  }

  // ||T_n 1_K|| / ||1_K|| growth with K the support ball.
  report.method = "norm-growth";
  const MarkovBase& base = ext.base();
  const bool collapse = base.is_bernoulli();
  std::vector<std::pair<VertexId, std::vector<double>>> initial;
  for (VertexId v : ball) {
    std::vector<double> w;
    if (collapse) {
      w.push_back(1.0);
    } else {
      for (Symbol a = 0; a < base.size(); ++a) w.push_back(base.weight_d(a));
    }
    initial.emplace_back(v, std::move(w));
  }
  const double norm0 = std::sqrt(static_cast<double>(ball.size()));
  detail::Walker<double> walker(ext, collapse, std::move(initial), options.threads, std::nullopt, ext.root());
  for (std::size_t n = 1; n <= n_max; ++n) {
    walker.step();
    if (n % std::max<std::size_t>(1, n_max / 4) != 0 && n != n_max) continue;
    Accumulator<double> acc;
    for (const auto& [v, x] : walker.state().marginal()) acc.add(x * x);
    SpectralStage stage;
    stage.support_radius = support_radius;
    stage.support_size = ball.size();
    stage.iterations = n;
    stage.rho = std::pow(std::sqrt(acc.value()) / norm0, 1.0 / static_cast<double>(n));
    report.stages.push_back(stage);
  }
  report.rho = report.stages.back().rho;
  report.notes += "; finite n and a finite start set bias the estimate downward";
  return report;
}

}  // namespace amenwalk
