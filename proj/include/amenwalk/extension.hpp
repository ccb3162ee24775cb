#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "amenwalk/symdyn.hpp"
#include "amenwalk/wgraph.hpp"

namespace amenwalk {

// A nearest-neighbour cocycle: each symbol acts on vertex keys by a
// bijection.  Implementations are immutable.
class Cocycle {
 public:
  enum class Kind { lattice, schreier, table };

  virtual ~Cocycle() = default;
  virtual Kind kind() const = 0;
  virtual std::size_t symbol_count() const = 0;
  virtual std::string root() const = 0;
  virtual std::string act(Symbol a, const std::string& v) const = 0;
  virtual std::string act_inverse(Symbol a, const std::string& v) const = 0;
  virtual std::optional<std::vector<std::string>> finite_vertices() const { return std::nullopt; }
};

std::string to_string(Cocycle::Kind kind);

// Translations of Z^d; keys are comma-separated coordinates.
class LatticeCocycle : public Cocycle {
 public:
  explicit LatticeCocycle(std::vector<std::vector<long>> steps);

  Kind kind() const override { return Kind::lattice; }
  std::size_t symbol_count() const override { return steps_.size(); }
  std::string root() const override;
  std::string act(Symbol a, const std::string& v) const override;
  std::string act_inverse(Symbol a, const std::string& v) const override;
  std::size_t dimension() const { return dim_; }

 private:
  std::string shift(Symbol a, const std::string& v, long sign) const;

  std::size_t dim_;
  std::vector<std::vector<long>> steps_;
};

// Explicit permutations of a finite vertex list; the first vertex is the root.
class TableCocycle : public Cocycle {
 public:
  TableCocycle(std::vector<std::string> vertices, std::vector<std::vector<std::size_t>> permutations);

  Kind kind() const override { return Kind::table; }
  std::size_t symbol_count() const override { return forward_.size(); }
  std::string root() const override { return vertices_.front(); }
  std::string act(Symbol a, const std::string& v) const override;
  std::string act_inverse(Symbol a, const std::string& v) const override;
  std::optional<std::vector<std::string>> finite_vertices() const override { return vertices_; }

 private:
  std::size_t index(const std::string& v) const;

  std::vector<std::string> vertices_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> forward_;
  std::vector<std::vector<std::size_t>> inverse_;
};

// Vertex store with cached symbol actions.  Ids are dense, in discovery
// order, root 0.  Discovery is serialized; lookups of already cached
// actions are safe from several threads.
class ExtensionGraph {
 public:
  static constexpr VertexId none = static_cast<VertexId>(-1);

  ExtensionGraph(std::shared_ptr<const Cocycle> cocycle, std::size_t vertex_budget);

  const Cocycle& cocycle() const { return *cocycle_; }
  std::size_t symbol_count() const { return symbols_; }
  std::size_t vertex_count() const { return keys_.size(); }
  std::size_t budget() const { return budget_; }
  const std::string& key(VertexId v) const { return keys_.at(v); }
  std::optional<VertexId> find(const std::string& key) const;
  VertexId intern(const std::string& key);

  VertexId forward(VertexId v, Symbol a);
  VertexId inverse(VertexId v, Symbol a);
  // Cached value or `none`; never discovers.
  VertexId forward_cached(VertexId v, Symbol a) const { return forward_[v * symbols_ + a]; }
  // Like forward, but returns `none` rather than discovering a vertex.
  VertexId forward_known(VertexId v, Symbol a);

  // Undirected breadth-first ball around the root, grown on demand.  Returns
  // the vertices in BFS order.
  std::vector<VertexId> ball(std::size_t radius);
  // Depth of v if the BFS has reached it.
  std::optional<std::size_t> depth(VertexId v) const;
  std::size_t explored_radius() const { return layer_end_.size() - 1; }
  // True once the BFS has run out of new vertices.
  bool exhausted() const { return exhausted_; }
  // Explores a finite cocycle completely; false for infinite ones.
  bool close();

 private:
  void grow_layer();
  void check_bijective(VertexId v, Symbol a, VertexId t);

  std::shared_ptr<const Cocycle> cocycle_;
  std::size_t symbols_;
  std::size_t budget_;
  std::deque<std::string> keys_;
  std::unordered_map<std::string, VertexId> ids_;
  std::vector<VertexId> forward_;
  std::vector<VertexId> inverse_;
  std::vector<std::uint32_t> depth_;
  std::vector<VertexId> bfs_order_;
  // layer_end_[r] = number of BFS vertices with depth <= r.
  std::vector<std::size_t> layer_end_;
  bool exhausted_ = false;
};

// Reads AMENWALK_MEM_BUDGET, default 5e7 (symbol, vertex) states.
std::size_t default_state_budget();

// The skew product over a base with a cocycle; owns the lazily discovered
// vertex store.
class GraphExtension {
 public:
  GraphExtension(MarkovBase base, std::shared_ptr<const Cocycle> cocycle,
                 std::size_t state_budget = default_state_budget());

  const MarkovBase& base() const { return base_; }
  const Cocycle& cocycle() const { return *cocycle_; }
  std::shared_ptr<const Cocycle> cocycle_ptr() const { return cocycle_; }
  ExtensionGraph& graph() const { return *graph_; }
  std::size_t state_budget() const { return state_budget_; }
  VertexId root() const { return 0; }

 private:
  MarkovBase base_;
  std::shared_ptr<const Cocycle> cocycle_;
  std::size_t state_budget_;
  std::shared_ptr<ExtensionGraph> graph_;
};

// kappa_{w_n} o ... o kappa_{w_1} applied to v.
std::string kappa_word(const GraphExtension& ext, const SymbolString& w, const std::string& v);
VertexId kappa_word(const GraphExtension& ext, const SymbolString& w, VertexId v);

// Edge source for the canonical weights p(v -> t) = sum of mu([a]) over
// symbols a with kappa_a(v) = t.
class CanonicalEdgeSource : public EdgeSource {
 public:
  CanonicalEdgeSource(MarkovBase base, std::shared_ptr<const Cocycle> cocycle);
  std::string root() const override { return cocycle_->root(); }
  std::vector<std::pair<std::string, Rational>> out_edges(const std::string& key) const override;
  std::optional<std::vector<std::string>> finite_vertices() const override { return cocycle_->finite_vertices(); }

 private:
  MarkovBase base_;
  std::shared_ptr<const Cocycle> cocycle_;
};

WeightedDigraph canonical_weight(const GraphExtension& ext, std::size_t vertex_budget = 10'000'000);

struct UniformLoopsReport {
  bool verified = false;
  std::size_t power = 0;
  std::vector<SymbolString> witness;
  std::size_t radius = 0;
  // Largest radius on which the best candidate at the highest power covered
  // every vertex (for inconclusive results).
  std::size_t covered_radius = 0;
  std::string details;
};

UniformLoopsReport check_uniform_loops(const GraphExtension& ext, std::size_t max_power, std::size_t radius);

struct TransitivityReport {
  enum class Status { verified_on_ball, counterexample, inconclusive };
  Status status = Status::inconclusive;
  std::size_t radius = 0;
  bool whole_graph = false;
  std::string details;
};

std::string to_string(TransitivityReport::Status status);

TransitivityReport check_transitivity(const GraphExtension& ext, std::size_t radius);

struct SymmetryReport {
  // Index n - 1 holds C_n and N_n.
  std::vector<double> c;
  std::vector<unsigned> big_n;
  std::vector<double> c_strict;  // with N_n = 0
  double slope = 0.0;
  bool symmetric = false;
  std::string verdict;
};

// Finite-n evidence for the weak symmetry condition, comparing forward and
// reversed transition masses for n = 1..n_max.  With no pairs given, every
// (root, w) with w reachable in n steps is compared.
SymmetryReport check_symmetry(const GraphExtension& ext, std::size_t n_max,
                              const std::vector<std::pair<VertexId, VertexId>>& pairs = {},
                              unsigned max_window = 2);

}  // namespace amenwalk
