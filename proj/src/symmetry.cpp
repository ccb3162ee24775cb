#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "amenwalk/error.hpp"
#include "amenwalk/extension.hpp"
#include "amenwalk/rate_fit.hpp"
#include "amenwalk/walkdp.hpp"
#include "walker.hpp"

namespace amenwalk {
namespace {

constexpr double infinity = std::numeric_limits<double>::infinity();

// back[k][w] = mu{x : kappa^k_x(w) = target} for k = 0..k_max and w in the
// ball of radius `radius` (zero outside, which is exact while radius covers
// every vertex within distance k_max of the target).
std::vector<std::unordered_map<VertexId, double>> backward_masses(const GraphExtension& ext, VertexId target,
                                                                  std::size_t radius, std::size_t k_max) {
  const MarkovBase& base = ext.base();
  const std::size_t symbols = base.size();
  ExtensionGraph& graph = ext.graph();
  const auto ball = graph.ball(radius);
  std::unordered_map<VertexId, std::size_t> local;
  for (std::size_t i = 0; i < ball.size(); ++i) local.emplace(ball[i], i);
  std::vector<std::int64_t> next(ball.size() * symbols, -1);
  for (std::size_t i = 0; i < ball.size(); ++i) {
    for (Symbol a = 0; a < symbols; ++a) {
      auto it = local.find(graph.forward(ball[i], a));
      if (it != local.end()) next[i * symbols + a] = static_cast<std::int64_t>(it->second);
    }
  }
  // h[a][i] = mu{kappa^k(w_i) = target | x_1 = a}.
  std::vector<std::vector<double>> h(symbols, std::vector<double>(ball.size(), 0.0));
  if (auto it = local.find(target); it != local.end()) {
    for (auto& row : h) row[it->second] = 1.0;
  }
  std::vector<std::unordered_map<VertexId, double>> out(k_max + 1);
  auto record = [&](std::size_t k) {
    for (std::size_t i = 0; i < ball.size(); ++i) {
      Accumulator<double> acc;
      for (Symbol a = 0; a < symbols; ++a) acc.add(base.weight_d(a) * h[a][i]);
      if (acc.value() != 0.0) out[k][ball[i]] = acc.value();
    }
  };
  record(0);
  for (std::size_t k = 1; k <= k_max; ++k) {
    std::vector<std::vector<double>> g(symbols, std::vector<double>(ball.size(), 0.0));
    for (std::size_t i = 0; i < ball.size(); ++i) {
      for (Symbol a = 0; a < symbols; ++a) {
        const auto j = next[i * symbols + a];
        if (j < 0) continue;
        Accumulator<double> acc;
        for (Symbol b = 0; b < symbols; ++b) {
          const double p = base.transition_d(a, b);
          if (p != 0.0) acc.add(p * h[b][static_cast<std::size_t>(j)]);
        }
        g[a][i] = acc.value();
      }
    }
    h = std::move(g);
    record(k);
  }
  return out;
}

double lookup(const std::unordered_map<VertexId, double>& m, VertexId v) {
  auto it = m.find(v);
  return it == m.end() ? 0.0 : it->second;
}

}  // namespace

SymmetryReport check_symmetry(const GraphExtension& ext, std::size_t n_max,
                              const std::vector<std::pair<VertexId, VertexId>>& pairs, unsigned max_window) {
  if (n_max < 2) throw InvalidInput("check_symmetry needs n_max >= 2");
  ExtensionGraph& graph = ext.graph();
  std::map<VertexId, std::vector<VertexId>> by_source;
  if (pairs.empty()) {
    by_source[ext.root()];
  } else {
    for (const auto& [v, w] : pairs) by_source[v].push_back(w);
  }

  SymmetryReport report;
  report.c.assign(n_max, 1.0);
  report.c_strict.assign(n_max, 1.0);
  report.big_n.assign(n_max, 0);
  std::vector<bool> seen(n_max, false);

  for (const auto& [v, targets] : by_source) {
    graph.ball(n_max);
    const std::size_t depth_v = graph.depth(v).value_or(graph.explored_radius());
    const auto back = backward_masses(ext, v, depth_v + n_max + max_window, n_max + max_window);
    WalkOptions options;
    options.start = v;
    auto walker = detail::make_walker<double>(ext, options, v);
    for (std::size_t n = 1; n <= n_max; ++n) {
      walker.step();
      const auto forward = walker.state().marginal();
      std::vector<double> worst(max_window + 1, 0.0);
      auto consider = [&](VertexId w, double f) {
        if (f == 0.0) return;
        for (unsigned window = 0; window <= max_window; ++window) {
          Accumulator<double> acc;
          for (std::size_t k = n >= window ? n - window : 0; k <= n + window; ++k) acc.add(lookup(back[k], w));
          const double ratio = acc.value() > 0.0 ? f / acc.value() : infinity;
          worst[window] = std::max(worst[window], ratio);
        }
      };
      if (targets.empty()) {
        for (const auto& [w, f] : forward) consider(w, f);
      } else {
        for (VertexId w : targets) {
          auto it = forward.find(w);
          if (it != forward.end()) consider(w, it->second);
        }
      }
      double& c = report.c[n - 1];
      double& strict = report.c_strict[n - 1];
      unsigned& big_n = report.big_n[n - 1];
      // Smallest window with a finite ratio; the widest one otherwise.
      unsigned chosen = max_window;
      for (unsigned window = 0; window <= max_window; ++window) {
        if (std::isfinite(worst[window])) {
          chosen = window;
          break;
        }
      }
      const double value = worst[chosen];
      c = seen[n - 1] ? std::max(c, value) : value;
      big_n = seen[n - 1] ? std::max(big_n, chosen) : chosen;
      strict = seen[n - 1] ? std::max(strict, worst[0]) : worst[0];
      seen[n - 1] = true;
    }
  }

  std::vector<double> xs, ys;
  bool finite = true;
  for (std::size_t n = std::max<std::size_t>(1, (2 * n_max) / 3); n <= n_max; ++n) {
    const double c = report.c[n - 1];
    if (!std::isfinite(c)) finite = false;
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::log(std::max(c, 1e-300)));
  }
  if (!finite) {
    report.slope = infinity;
  } else if (xs.size() >= 2) {
    report.slope = fit_slope(xs, ys);
  } else {
    report.slope = ys.back() / xs.back();
  }
  report.symmetric = finite && std::abs(report.slope) < 1e-2;
  report.verdict = report.symmetric ? "symmetric-evidence" : "asymmetric-evidence";
  return report;
}

}  // namespace amenwalk
