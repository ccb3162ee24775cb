#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "amenwalk/numeric.hpp"

namespace amenwalk {

using VertexId = std::uint32_t;

// Generates a weighted digraph from canonical vertex keys.
class EdgeSource {
 public:
  virtual ~EdgeSource() = default;
  virtual std::string root() const = 0;
  // Distinct targets with their weights; weights sum to 1.
  virtual std::vector<std::pair<std::string, Rational>> out_edges(const std::string& key) const = 0;
  // The full vertex list when the graph is known to be finite.
  virtual std::optional<std::vector<std::string>> finite_vertices() const { return std::nullopt; }
};

// A finite graph given by explicit weighted edge lists.
class ExplicitEdgeSource : public EdgeSource {
 public:
  // edges[i] lists (target index, weight) pairs out of vertex i; parallel
  // edges are merged.
  ExplicitEdgeSource(std::vector<std::string> names,
                     const std::vector<std::vector<std::pair<std::size_t, Rational>>>& edges,
                     std::size_t root = 0);

  std::string root() const override { return names_[root_]; }
  std::vector<std::pair<std::string, Rational>> out_edges(const std::string& key) const override;
  std::optional<std::vector<std::string>> finite_vertices() const override { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::pair<std::string, Rational>>> edges_;
  std::size_t root_;
};

struct Edge {
  VertexId target;
  Rational weight;
  double weight_d;
};

// Lazily discovered weighted digraph.  Ids are assigned in discovery order,
// the root is id 0.  Discovery mutates the store and is not thread-safe.
class WeightedDigraph {
 public:
  WeightedDigraph(std::shared_ptr<const EdgeSource> source, std::size_t budget);

  VertexId root() const { return 0; }
  std::size_t vertex_count() const { return keys_.size(); }
  std::size_t budget() const { return budget_; }
  const std::string& key(VertexId v) const { return keys_.at(v); }
  std::optional<VertexId> find(const std::string& key) const;
  // Throws BudgetExceeded if a new vertex would exceed the budget.
  VertexId intern(const std::string& key);

  // Out-edges of a discovered vertex; interns the targets.
  const std::vector<Edge>& out_edges(VertexId v);
  // Out-edges by key, without interning anything.
  std::vector<std::pair<std::string, Rational>> peek_out_edges(const std::string& key) const {
    return source_->out_edges(key);
  }
  const EdgeSource& source() const { return *source_; }

  // Every vertex, when the source reports a finite graph; discovers them all.
  std::optional<std::vector<VertexId>> all_vertices();

 private:
  std::shared_ptr<const EdgeSource> source_;
  std::size_t budget_;
  std::deque<std::string> keys_;
  std::unordered_map<std::string, VertexId> ids_;
  std::vector<std::optional<std::vector<Edge>>> out_;
};

// Sorted, duplicate-free list of vertex ids.
class VertexSet {
 public:
  VertexSet() = default;
  explicit VertexSet(std::vector<VertexId> ids);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool contains(VertexId v) const;
  const std::vector<VertexId>& ids() const { return ids_; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  bool operator==(const VertexSet&) const = default;

 private:
  std::vector<VertexId> ids_;
};

// {v in K : some edge v -> t with t outside K and weight > eps}.
VertexSet epsilon_boundary(WeightedDigraph& graph, const VertexSet& k, const Rational& eps);
VertexSet epsilon_boundary(WeightedDigraph& graph, const VertexSet& k, double eps);

// |boundary| / |K|; throws InvalidInput for empty K.
Rational isoperimetric_ratio(WeightedDigraph& graph, const VertexSet& k, const Rational& eps);
Rational isoperimetric_ratio(WeightedDigraph& graph, const VertexSet& k, double eps);

// Vertices reachable from the root along out-edges in at most `radius` steps.
VertexSet out_ball(WeightedDigraph& graph, std::size_t radius);

struct FolnerResult {
  double epsilon = 0.0;
  VertexSet set;
  Rational ratio;
  bool certificate = false;
  // "ball" or "greedy": which phase produced the best set.
  std::string phase;
  std::size_t radius = 0;
  std::vector<std::string> keys(const WeightedDigraph& graph) const;
};

// Balls around the root, then greedy exchange from the best ball.  Stops at
// the first set meeting the target, or when `budget` vertices are discovered.
FolnerResult folner_search(WeightedDigraph& graph, double eps, double target_ratio, std::size_t budget);

struct ExpansionResult {
  Rational value;
  VertexSet minimizer;
  // True when the graph was too large for exhaustive search.
  bool upper_bound = false;
};

// min |dK|/|K| over nonempty proper K, with dK the vertices having an edge
// of positive weight leaving K.  Exhaustive up to 20 vertices, sampled above.
ExpansionResult gerl_expansion_constant(WeightedDigraph& graph, std::uint64_t seed = 1,
                                        std::size_t samples = 20000);

}  // namespace amenwalk
