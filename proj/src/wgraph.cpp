#include "amenwalk/wgraph.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <unordered_set>

#include "amenwalk/error.hpp"

namespace amenwalk {

ExplicitEdgeSource::ExplicitEdgeSource(std::vector<std::string> names,
                                       const std::vector<std::vector<std::pair<std::size_t, Rational>>>& edges,
                                       std::size_t root)
    : names_(std::move(names)), root_(root) {
  if (names_.empty()) throw InvalidInput("graph needs at least one vertex");
  if (edges.size() != names_.size()) throw InvalidInput("edge list count differs from vertex count");
  if (root_ >= names_.size()) throw InvalidInput("root index out of range");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) throw InvalidInput("duplicate vertex name " + names_[i]);
  }
  edges_.resize(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    std::map<std::size_t, Rational> merged;
    for (const auto& [t, w] : edges[i]) {
      if (t >= names_.size()) throw InvalidInput("edge target out of range");
      Rational x = w;
      x.canonicalize();
      merged[t] += x;
    }
    for (const auto& [t, w] : merged) edges_[i].emplace_back(names_[t], w);
  }
}

std::vector<std::pair<std::string, Rational>> ExplicitEdgeSource::out_edges(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) throw InvalidInput("unknown vertex " + key);
  return edges_[it->second];
}

WeightedDigraph::WeightedDigraph(std::shared_ptr<const EdgeSource> source, std::size_t budget)
    : source_(std::move(source)), budget_(budget) {
  intern(source_->root());
}

std::optional<VertexId> WeightedDigraph::find(const std::string& key) const {
  auto it = ids_.find(key);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

VertexId WeightedDigraph::intern(const std::string& key) {
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  if (keys_.size() >= budget_) {
    throw BudgetExceeded("vertex budget of " + std::to_string(budget_) + " exhausted");
  }
  const auto id = static_cast<VertexId>(keys_.size());
  keys_.push_back(key);
  ids_.emplace(key, id);
  out_.emplace_back();
  return id;
}

const std::vector<Edge>& WeightedDigraph::out_edges(VertexId v) {
  if (v >= keys_.size()) throw InvalidInput("undiscovered vertex id " + std::to_string(v));
  if (!out_[v]) {
    auto raw = source_->out_edges(keys_[v]);
    std::vector<Edge> edges;
    edges.reserve(raw.size());
    Rational total = 0;
    for (auto& [key, w] : raw) {
      if (sgn(w) < 0 || w > 1) throw InvalidInput("edge weight outside [0,1] at " + keys_[v]);
      total += w;
      const VertexId t = intern(key);
      edges.push_back({t, w, w.get_d()});
    }
    if (total != 1) {
      throw InvalidInput("out-weights of " + keys_[v] + " sum to " + to_decimal_string(total) + " ≠ 1");
    }
    out_[v] = std::move(edges);
  }
  return *out_[v];
}

std::optional<std::vector<VertexId>> WeightedDigraph::all_vertices() {
  auto names = source_->finite_vertices();
  if (!names) return std::nullopt;
  for (VertexId v = 0; v < keys_.size(); ++v) out_edges(v);
  for (const auto& name : *names) intern(name);
  for (VertexId v = 0; v < keys_.size(); ++v) out_edges(v);
  std::vector<VertexId> ids(keys_.size());
  for (VertexId v = 0; v < ids.size(); ++v) ids[v] = v;
  return ids;
}

VertexSet::VertexSet(std::vector<VertexId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

bool VertexSet::contains(VertexId v) const {
  return std::binary_search(ids_.begin(), ids_.end(), v);
}

VertexSet epsilon_boundary(WeightedDigraph& graph, const VertexSet& k, const Rational& eps) {
  std::vector<VertexId> boundary;
  for (VertexId v : k) {
    for (const Edge& e : graph.out_edges(v)) {
      if (e.weight > eps && !k.contains(e.target)) {
        boundary.push_back(v);
        break;
      }
    }
  }
  return VertexSet(std::move(boundary));
}

VertexSet epsilon_boundary(WeightedDigraph& graph, const VertexSet& k, double eps) {
  return epsilon_boundary(graph, k, Rational(eps));
}

Rational isoperimetric_ratio(WeightedDigraph& graph, const VertexSet& k, const Rational& eps) {
  if (k.empty()) throw InvalidInput("isoperimetric ratio of an empty set");
  Rational r(static_cast<long>(epsilon_boundary(graph, k, eps).size()), static_cast<long>(k.size()));
  r.canonicalize();
  return r;
}

Rational isoperimetric_ratio(WeightedDigraph& graph, const VertexSet& k, double eps) {
  return isoperimetric_ratio(graph, k, Rational(eps));
}

VertexSet out_ball(WeightedDigraph& graph, std::size_t radius) {
  std::vector<VertexId> ball{graph.root()};
  std::unordered_set<VertexId> seen{graph.root()};
  std::size_t layer_begin = 0;
  for (std::size_t r = 0; r < radius; ++r) {
    const std::size_t layer_end = ball.size();
    for (std::size_t i = layer_begin; i < layer_end; ++i) {
      for (const Edge& e : graph.out_edges(ball[i])) {
        if (seen.insert(e.target).second) ball.push_back(e.target);
      }
    }
    if (ball.size() == layer_end) break;
    layer_begin = layer_end;
  }
  return VertexSet(std::move(ball));
}

std::vector<std::string> FolnerResult::keys(const WeightedDigraph& graph) const {
  std::vector<std::string> out;
  out.reserve(set.size());
  for (VertexId v : set) out.push_back(graph.key(v));
  return out;
}

namespace {

bool less_ratio(std::size_t b1, std::size_t k1, std::size_t b2, std::size_t k2) {
  return static_cast<unsigned __int128>(b1) * k2 < static_cast<unsigned __int128>(b2) * k1;
}

// Greedy growth state: K, the number of heavy out-edges of each member that
// leave K, and for every outside neighbour c the change in boundary size
// that adding c would cause.  Candidate scores look at c's out-edges by key
// so that scoring never discovers new vertices.
class GreedyGrower {
 public:
  GreedyGrower(WeightedDigraph& graph, const Rational& eps, const VertexSet& start)
      : graph_(graph), eps_(eps) {
    for (VertexId v : start) in_.insert(v);
    std::set<VertexId> candidates;
    for (VertexId v : start) {
      std::size_t heavy = 0;
      for (const Edge& e : graph_.out_edges(v)) {
        if (in_.count(e.target)) continue;
        candidates.insert(e.target);
        if (e.weight > eps_) {
          ++heavy;
          preds_[e.target].push_back(v);
        }
      }
      heavy_out_[v] = heavy;
      if (heavy > 0) ++boundary_;
    }
    for (VertexId c : candidates) rescore(c);
  }

  std::size_t size() const { return in_.size(); }
  std::size_t boundary() const { return boundary_; }

  // Adds the best improving candidate; false when none improves the ratio.
  bool step() {
    if (ranked_.empty()) return false;
    auto [delta, c] = *ranked_.begin();
    const std::size_t k = in_.size();
    const auto after = static_cast<std::size_t>(static_cast<long>(boundary_) + delta);
    if (!less_ratio(after, k + 1, boundary_, k)) return false;
    add(c);
    return true;
  }

  VertexSet set() const { return VertexSet(std::vector<VertexId>(in_.begin(), in_.end())); }

 private:
  void rescore(VertexId c) {
    if (auto it = delta_.find(c); it != delta_.end()) {
      ranked_.erase({it->second, c});
      delta_.erase(it);
    }
    if (in_.count(c)) return;
    long freed = 0;
    for (VertexId v : preds_[c]) {
      if (heavy_out_[v] == 1) ++freed;
    }
    const std::string& key = graph_.key(c);
    auto [slot, fresh] = heavy_targets_.try_emplace(c);
    auto& targets = slot->second;
    if (fresh) {
      for (const auto& [t, w] : graph_.peek_out_edges(key)) {
        if (w > eps_ && t != key) {
          targets.push_back(t);
          key_watchers_[t].push_back(c);
        }
      }
    }
    bool own = false;
    for (const auto& t : targets) {
      auto id = graph_.find(t);
      if (!id || !in_.count(*id)) {
        own = true;
        break;
      }
    }
    const long delta = (own ? 1 : 0) - freed;
    delta_[c] = delta;
    ranked_.insert({delta, c});
  }

  void add(VertexId c) {
    in_.insert(c);
    rescore(c);
    std::set<VertexId> affected;
    for (VertexId v : preds_[c]) {
      if (--heavy_out_[v] == 0) --boundary_;
      for (const Edge& e : graph_.out_edges(v)) {
        if (e.weight > eps_ && !in_.count(e.target)) affected.insert(e.target);
      }
    }
    std::size_t heavy = 0;
    for (const Edge& e : graph_.out_edges(c)) {
      if (in_.count(e.target)) continue;
      affected.insert(e.target);
      if (e.weight > eps_) {
        ++heavy;
        preds_[e.target].push_back(c);
      }
    }
    heavy_out_[c] = heavy;
    if (heavy > 0) ++boundary_;
    for (VertexId w : key_watchers_[graph_.key(c)]) affected.insert(w);
    for (VertexId a : affected) rescore(a);
  }

  WeightedDigraph& graph_;
  Rational eps_;
  std::unordered_set<VertexId> in_;
  std::map<VertexId, std::size_t> heavy_out_;
  std::size_t boundary_ = 0;
  std::map<VertexId, std::vector<VertexId>> preds_;
  std::map<VertexId, std::vector<std::string>> heavy_targets_;
  std::map<std::string, std::vector<VertexId>> key_watchers_;
  std::map<VertexId, long> delta_;
  std::set<std::pair<long, VertexId>> ranked_;
};

}  // namespace

FolnerResult folner_search(WeightedDigraph& graph, double eps, double target_ratio, std::size_t budget) {
  if (!(eps > 0.0)) throw InvalidInput("folner search needs eps > 0");
  if (!(target_ratio > 0.0)) throw InvalidInput("folner search needs a positive target ratio");
  if (budget == 0) throw BudgetExceeded("folner search budget exhausted before any candidate");
  const Rational eps_q(eps);
  const Rational target_q(target_ratio);

  FolnerResult best;
  best.epsilon = eps;
  bool have_best = false;
  auto consider = [&](VertexSet set, std::string phase, std::size_t radius) {
    Rational ratio = isoperimetric_ratio(graph, set, eps_q);
    if (!have_best || ratio < best.ratio) {
      best.set = std::move(set);
      best.ratio = ratio;
      best.phase = std::move(phase);
      best.radius = radius;
      have_best = true;
    }
    best.certificate = best.ratio <= target_q;
    return best.certificate;
  };

  // Phase 1: balls.
  std::vector<VertexId> ball{graph.root()};
  std::unordered_set<VertexId> seen{graph.root()};
  std::size_t layer_begin = 0;
  std::size_t radius = 0;
  try {
    while (true) {
      if (consider(VertexSet(ball), "ball", radius)) return best;
      if (graph.vertex_count() > budget) break;
      const std::size_t layer_end = ball.size();
      for (std::size_t i = layer_begin; i < layer_end; ++i) {
        for (const Edge& e : graph.out_edges(ball[i])) {
          if (seen.insert(e.target).second) ball.push_back(e.target);
        }
      }
      if (ball.size() == layer_end) break;
      layer_begin = layer_end;
      ++radius;
      if (ball.size() > budget) break;
    }
  } catch (const BudgetExceeded&) {
    if (!have_best) throw;
  }

  // Phase 2: greedy exchange from the best ball.
  try {
    GreedyGrower grower(graph, eps_q, best.set);
    while (graph.vertex_count() <= budget && grower.size() < budget) {
      if (!grower.step()) break;
      Rational ratio(static_cast<long>(grower.boundary()), static_cast<long>(grower.size()));
      ratio.canonicalize();
      if (ratio < best.ratio) {
        best.set = grower.set();
        best.ratio = ratio;
        best.phase = "greedy";
        best.certificate = best.ratio <= target_q;
        if (best.certificate) break;
      }
    }
  } catch (const BudgetExceeded&) {
  }
  return best;
}

ExpansionResult gerl_expansion_constant(WeightedDigraph& graph, std::uint64_t seed, std::size_t samples) {
  auto all = graph.all_vertices();
  if (!all) throw InvalidInput("expansion constant needs a finite graph");
  const std::size_t n = all->size();
  if (n < 2) throw InvalidInput("expansion constant needs at least two vertices");

  std::vector<std::vector<VertexId>> targets(n);
  for (VertexId v = 0; v < n; ++v) {
    for (const Edge& e : graph.out_edges(v)) {
      if (sgn(e.weight) > 0) targets[v].push_back(e.target);
    }
  }
  ExpansionResult result;
  bool have = false;
  std::size_t best_b = 0, best_k = 1;
  auto evaluate = [&](const std::vector<bool>& member) {
    std::size_t k = 0, b = 0;
    for (VertexId v = 0; v < n; ++v) {
      if (!member[v]) continue;
      ++k;
      for (VertexId t : targets[v]) {
        if (!member[t]) {
          ++b;
          break;
        }
      }
    }
    if (k == 0 || k == n) return;
    if (!have || less_ratio(b, k, best_b, best_k)) {
      have = true;
      best_b = b;
      best_k = k;
      std::vector<VertexId> ids;
      for (VertexId v = 0; v < n; ++v) {
        if (member[v]) ids.push_back(v);
      }
      result.minimizer = VertexSet(std::move(ids));
    }
  };

  std::vector<bool> member(n);
  if (n <= 20) {
    for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << n); ++mask) {
      for (std::size_t i = 0; i < n; ++i) member[i] = (mask >> i) & 1;
      evaluate(member);
    }
  } else {
    result.upper_bound = true;
    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < samples; ++s) {
      // Grow a random connected blob of random size.
      std::fill(member.begin(), member.end(), false);
      const std::size_t size = 1 + rng() % (n - 1);
      std::vector<VertexId> blob{static_cast<VertexId>(rng() % n)};
      member[blob[0]] = true;
      while (blob.size() < size) {
        const VertexId from = blob[rng() % blob.size()];
        if (targets[from].empty()) break;
        const VertexId to = targets[from][rng() % targets[from].size()];
        if (!member[to]) {
          member[to] = true;
          blob.push_back(to);
        } else if (rng() % 64 == 0) {
          break;
        }
      }
      evaluate(member);
    }
  }
  result.value = Rational(static_cast<long>(best_b), static_cast<long>(best_k));
  result.value.canonicalize();
  return result;
}

}  // namespace amenwalk
