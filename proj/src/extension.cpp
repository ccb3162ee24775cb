#include "amenwalk/extension.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cstdlib>
#include <map>
#include <numeric>
#include <queue>

#include "amenwalk/error.hpp"

namespace amenwalk {

std::string to_string(Cocycle::Kind kind) {
  switch (kind) {
    case Cocycle::Kind::lattice: return "lattice";
    case Cocycle::Kind::schreier: return "schreier";
    case Cocycle::Kind::table: return "table";
  }
  return "unknown";
}

LatticeCocycle::LatticeCocycle(std::vector<std::vector<long>> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) throw InvalidInput("lattice cocycle needs at least one step");
  dim_ = steps_.front().size();
  if (dim_ == 0) throw InvalidInput("lattice dimension must be positive");
  for (const auto& s : steps_) {
    if (s.size() != dim_) throw InvalidInput("lattice steps have inconsistent dimension");
  }
}

std::string LatticeCocycle::root() const {
  std::string key = "0";
  for (std::size_t i = 1; i < dim_; ++i) key += ",0";
  return key;
}

std::string LatticeCocycle::shift(Symbol a, const std::string& v, long sign) const {
  if (a >= steps_.size()) throw InvalidInput("unknown symbol index " + std::to_string(a));
  std::string out;
  const char* p = v.c_str();
  for (std::size_t i = 0; i < dim_; ++i) {
    char* end = nullptr;
    const long x = std::strtol(p, &end, 10);
    if (end == p || (i + 1 < dim_ && *end != ',')) throw InvalidInput("bad lattice key " + v);
    if (i > 0) out.push_back(',');
    out += std::to_string(x + sign * steps_[a][i]);
    p = end + 1;
  }
  return out;
}

std::string LatticeCocycle::act(Symbol a, const std::string& v) const { return shift(a, v, 1); }
std::string LatticeCocycle::act_inverse(Symbol a, const std::string& v) const { return shift(a, v, -1); }

TableCocycle::TableCocycle(std::vector<std::string> vertices, std::vector<std::vector<std::size_t>> permutations)
    : vertices_(std::move(vertices)), forward_(std::move(permutations)) {
  if (vertices_.empty()) throw InvalidInput("table cocycle needs at least one vertex");
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!index_.emplace(vertices_[i], i).second) throw InvalidInput("duplicate vertex " + vertices_[i]);
  }
  for (const auto& perm : forward_) {
    if (perm.size() != vertices_.size()) throw InvalidInput("permutation length differs from vertex count");
    std::vector<std::size_t> inv(perm.size(), perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (perm[i] >= perm.size() || inv[perm[i]] != perm.size()) {
        throw InvalidInput("table action is not a permutation");
      }
      inv[perm[i]] = i;
    }
    inverse_.push_back(std::move(inv));
  }
}

std::size_t TableCocycle::index(const std::string& v) const {
  auto it = index_.find(v);
  if (it == index_.end()) throw InvalidInput("unknown vertex " + v);
  return it->second;
}

std::string TableCocycle::act(Symbol a, const std::string& v) const {
  return vertices_[forward_.at(a)[index(v)]];
}

std::string TableCocycle::act_inverse(Symbol a, const std::string& v) const {
  return vertices_[inverse_.at(a)[index(v)]];
}

ExtensionGraph::ExtensionGraph(std::shared_ptr<const Cocycle> cocycle, std::size_t vertex_budget)
    : cocycle_(std::move(cocycle)), symbols_(cocycle_->symbol_count()), budget_(vertex_budget) {
  intern(cocycle_->root());
  depth_[0] = 0;
  bfs_order_.push_back(0);
  layer_end_.push_back(1);
}

std::optional<VertexId> ExtensionGraph::find(const std::string& key) const {
  auto it = ids_.find(key);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

VertexId ExtensionGraph::intern(const std::string& key) {
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  if (keys_.size() >= budget_) {
    throw BudgetExceeded("vertex budget of " + std::to_string(budget_) +
                         " exhausted; raise AMENWALK_MEM_BUDGET or use Monte Carlo");
  }
  const auto id = static_cast<VertexId>(keys_.size());
  keys_.push_back(key);
  ids_.emplace(keys_.back(), id);
  forward_.resize(forward_.size() + symbols_, none);
  inverse_.resize(inverse_.size() + symbols_, none);
  depth_.push_back(std::numeric_limits<std::uint32_t>::max());
  return id;
}

void ExtensionGraph::check_bijective(VertexId v, Symbol a, VertexId t) {
  const VertexId back = inverse_[t * symbols_ + a];
  if (back != none && back != v) {
    throw InvalidInput("cocycle action of symbol " + std::to_string(a) + " is not injective at " + keys_[t]);
  }
}

VertexId ExtensionGraph::forward(VertexId v, Symbol a) {
  VertexId& slot = forward_[v * symbols_ + a];
  if (slot != none) return slot;
  const VertexId t = intern(cocycle_->act(a, keys_[v]));
  check_bijective(v, a, t);
  if (cocycle_->act_inverse(a, keys_[t]) != keys_[v]) {
    throw InvalidInput("cocycle inverse action of symbol " + std::to_string(a) + " disagrees at " + keys_[v]);
  }
  forward_[v * symbols_ + a] = t;
  inverse_[t * symbols_ + a] = v;
  return t;
}

VertexId ExtensionGraph::forward_known(VertexId v, Symbol a) {
  if (VertexId t = forward_[v * symbols_ + a]; t != none) return t;
  auto t = find(cocycle_->act(a, keys_[v]));
  if (!t) return none;
  return forward(v, a);
}

VertexId ExtensionGraph::inverse(VertexId v, Symbol a) {
  if (VertexId s = inverse_[v * symbols_ + a]; s != none) return s;
  const VertexId s = intern(cocycle_->act_inverse(a, keys_[v]));
  const VertexId existing = forward_[s * symbols_ + a];
  if (existing != none && existing != v) {
    throw InvalidInput("cocycle action of symbol " + std::to_string(a) + " is not injective at " + keys_[s]);
  }
  if (cocycle_->act(a, keys_[s]) != keys_[v]) {
    throw InvalidInput("cocycle inverse action of symbol " + std::to_string(a) + " disagrees at " + keys_[v]);
  }
  forward_[s * symbols_ + a] = v;
  inverse_[v * symbols_ + a] = s;
  return s;
}

void ExtensionGraph::grow_layer() {
  const std::size_t begin = layer_end_.size() >= 2 ? layer_end_[layer_end_.size() - 2] : 0;
  const std::size_t end = layer_end_.back();
  const auto next_depth = static_cast<std::uint32_t>(layer_end_.size());
  for (std::size_t i = begin; i < end; ++i) {
    const VertexId v = bfs_order_[i];
    for (Symbol a = 0; a < symbols_; ++a) {
      for (VertexId t : {forward(v, a), inverse(v, a)}) {
        if (depth_[t] == std::numeric_limits<std::uint32_t>::max()) {
          depth_[t] = next_depth;
          bfs_order_.push_back(t);
        }
      }
    }
  }
  if (bfs_order_.size() == end) {
    exhausted_ = true;
    return;
  }
  layer_end_.push_back(bfs_order_.size());
}

std::vector<VertexId> ExtensionGraph::ball(std::size_t radius) {
  while (!exhausted_ && layer_end_.size() <= radius) grow_layer();
  const std::size_t r = std::min(radius, layer_end_.size() - 1);
  return {bfs_order_.begin(), bfs_order_.begin() + static_cast<std::ptrdiff_t>(layer_end_[r])};
}

std::optional<std::size_t> ExtensionGraph::depth(VertexId v) const {
  if (v >= depth_.size() || depth_[v] == std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
  return depth_[v];
}

bool ExtensionGraph::close() {
  if (!cocycle_->finite_vertices()) return false;
  while (!exhausted_) grow_layer();
  return true;
}

std::size_t default_state_budget() {
  if (const char* env = std::getenv("AMENWALK_MEM_BUDGET")) {
    char* end = nullptr;
    const double value = std::strtod(env, &end);
    if (end != env && value >= 1.0) return static_cast<std::size_t>(value);
    throw InvalidInput("AMENWALK_MEM_BUDGET must be a positive number");
  }
  return 50'000'000;
}

GraphExtension::GraphExtension(MarkovBase base, std::shared_ptr<const Cocycle> cocycle, std::size_t state_budget)
    : base_(std::move(base)), cocycle_(std::move(cocycle)), state_budget_(state_budget) {
  if (!cocycle_) throw InvalidInput("missing cocycle");
  if (cocycle_->symbol_count() != base_.size()) {
    throw InvalidInput("cocycle acts by " + std::to_string(cocycle_->symbol_count()) + " symbols but the alphabet has " +
                       std::to_string(base_.size()));
  }
  const std::size_t vertices = std::max<std::size_t>(1, state_budget_ / base_.size());
  graph_ = std::make_shared<ExtensionGraph>(cocycle_, vertices);
}

std::string kappa_word(const GraphExtension& ext, const SymbolString& w, const std::string& v) {
  if (!is_admissible(ext.base(), w)) throw InvalidInput("inadmissible word \"" + ext.base().format(w) + "\"");
  std::string g = v;
  for (Symbol a : w) g = ext.cocycle().act(a, g);
  return g;
}

VertexId kappa_word(const GraphExtension& ext, const SymbolString& w, VertexId v) {
  if (!is_admissible(ext.base(), w)) throw InvalidInput("inadmissible word \"" + ext.base().format(w) + "\"");
  for (Symbol a : w) v = ext.graph().forward(v, a);
  return v;
}

CanonicalEdgeSource::CanonicalEdgeSource(MarkovBase base, std::shared_ptr<const Cocycle> cocycle)
    : base_(std::move(base)), cocycle_(std::move(cocycle)) {}

std::vector<std::pair<std::string, Rational>> CanonicalEdgeSource::out_edges(const std::string& key) const {
  std::vector<std::pair<std::string, Rational>> out;
  for (Symbol a = 0; a < base_.size(); ++a) {
    std::string t = cocycle_->act(a, key);
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == t; });
    if (it == out.end()) {
      out.emplace_back(std::move(t), base_.weight(a));
    } else {
      it->second += base_.weight(a);
    }
  }
  return out;
}

WeightedDigraph canonical_weight(const GraphExtension& ext, std::size_t vertex_budget) {
  return WeightedDigraph(std::make_shared<CanonicalEdgeSource>(ext.base(), ext.cocycle_ptr()), vertex_budget);
}

namespace {

using Bits = std::vector<std::uint64_t>;

bool covers_all(const Bits& bits, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!((bits[i / 64] >> (i % 64)) & 1)) return false;
  }
  return true;
}

void or_into(Bits& dst, const Bits& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
}

// Largest r such that every vertex of depth <= r is covered.
std::size_t covered_radius(const Bits& bits, const std::vector<VertexId>& ball, const ExtensionGraph& g) {
  std::size_t first_gap = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < ball.size(); ++i) {
    if (!((bits[i / 64] >> (i % 64)) & 1)) first_gap = std::min(first_gap, *g.depth(ball[i]));
  }
  if (first_gap == std::numeric_limits<std::size_t>::max()) return g.depth(ball.back()).value_or(0);
  return first_gap == 0 ? 0 : first_gap - 1;
}

}  // namespace

UniformLoopsReport check_uniform_loops(const GraphExtension& ext, std::size_t max_power, std::size_t radius) {
  if (max_power < 1) throw InvalidInput("max_power must be at least 1");
  if (radius < 1) throw InvalidInput("radius must be at least 1");
  ExtensionGraph& g = ext.graph();
  const std::vector<VertexId> ball = g.ball(radius);
  const std::size_t m = ball.size();
  const std::size_t blocks = (m + 63) / 64;
  constexpr std::size_t word_cap = 1 << 16;
  constexpr std::size_t combination_cap = 2'000'000;

  UniformLoopsReport report;
  report.radius = radius;
  for (std::size_t n = 1; n <= max_power; ++n) {
    std::vector<SymbolString> words;
    std::vector<Bits> fixed;
    Bits all(blocks, 0);
    bool truncated = false;
    for_each_word(ext.base(), n, [&](const SymbolString& w) {
      if (words.size() >= word_cap) {
        truncated = true;
        return;
      }
      Bits bits(blocks, 0);
      bool any = false;
      for (std::size_t i = 0; i < m; ++i) {
        VertexId v = ball[i];
        for (Symbol a : w) v = g.forward(v, a);
        if (v == ball[i]) {
          bits[i / 64] |= std::uint64_t{1} << (i % 64);
          any = true;
        }
      }
      if (!any) return;
      or_into(all, bits);
      words.push_back(w);
      fixed.push_back(std::move(bits));
    });
    report.power = n;
    report.covered_radius = covered_radius(all, ball, g);
    if (!covers_all(all, m)) continue;

    // Lexicographically least minimal cover: combinations by size, in order.
    std::size_t evaluated = 0;
    for (std::size_t size = 1; size <= words.size() && evaluated < combination_cap; ++size) {
      std::vector<std::size_t> pick(size);
      std::iota(pick.begin(), pick.end(), 0);
      while (evaluated < combination_cap) {
        ++evaluated;
        Bits u(blocks, 0);
        for (std::size_t i : pick) or_into(u, fixed[i]);
        if (covers_all(u, m)) {
          report.verified = true;
          for (std::size_t i : pick) report.witness.push_back(words[i]);
          report.details = "minimal witness on ball of radius " + std::to_string(radius);
          return report;
        }
        std::size_t i = size;
        while (i > 0 && pick[i - 1] == words.size() - size + i - 1) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
      }
    }
    // Greedy fallback: not necessarily minimal.
    Bits u(blocks, 0);
    std::vector<bool> used(words.size(), false);
    while (!covers_all(u, m)) {
      std::size_t best = words.size(), gain_best = 0;
      for (std::size_t i = 0; i < words.size(); ++i) {
        if (used[i]) continue;
        std::size_t gain = 0;
        for (std::size_t b = 0; b < blocks; ++b) gain += std::popcount(fixed[i][b] & ~u[b]);
        if (gain > gain_best) {
          gain_best = gain;
          best = i;
        }
      }
      used[best] = true;
      or_into(u, fixed[best]);
      report.witness.push_back(words[best]);
    }
    report.verified = true;
    report.details = std::string("greedy witness (minimality not checked") + (truncated ? ", word list truncated" : "") +
                     ") on ball of radius " + std::to_string(radius);
    return report;
  }
  report.details = "no loop cover up to power " + std::to_string(max_power) + "; covered radius " +
                   std::to_string(report.covered_radius);
  return report;
}

std::string to_string(TransitivityReport::Status status) {
  switch (status) {
    case TransitivityReport::Status::verified_on_ball: return "verified-on-ball";
    case TransitivityReport::Status::counterexample: return "counterexample";
    case TransitivityReport::Status::inconclusive: return "inconclusive";
  }
  return "unknown";
}

TransitivityReport check_transitivity(const GraphExtension& ext, std::size_t radius) {
  if (radius < 1) throw InvalidInput("radius must be at least 1");
  const MarkovBase& base = ext.base();
  ExtensionGraph& g = ext.graph();
  const std::size_t symbols = base.size();
  TransitivityReport report;
  report.radius = radius;

  std::vector<VertexId> region, tested;
  try {
    if (g.close()) {
      region = g.ball(std::numeric_limits<std::size_t>::max() - 1);
      const auto keys = ext.cocycle().finite_vertices();
      for (const auto& key : keys.value_or(std::vector<std::string>{})) {
        const VertexId v = g.intern(key);
        if (std::find(region.begin(), region.end(), v) == region.end()) region.push_back(v);
      }
      tested = region;
      report.whole_graph = true;
    } else {
      tested = g.ball(radius);
      region = g.ball(2 * radius + 1);
    }
  } catch (const BudgetExceeded& e) {
    report.details = e.what();
    return report;
  }

  std::unordered_map<VertexId, std::size_t> local;
  for (std::size_t i = 0; i < region.size(); ++i) local.emplace(region[i], i);
  const std::size_t nodes = region.size() * symbols;
  std::vector<std::vector<std::size_t>> fwd(nodes), rev(nodes);
  for (std::size_t i = 0; i < region.size(); ++i) {
    for (Symbol a = 0; a < symbols; ++a) {
      const VertexId t = g.forward(region[i], a);
      auto it = local.find(t);
      if (it == local.end()) continue;
      for (Symbol b = 0; b < symbols; ++b) {
        if (!base.admissible(a, b)) continue;
        const std::size_t from = i * symbols + a, to = it->second * symbols + b;
        fwd[from].push_back(to);
        rev[to].push_back(from);
      }
    }
  }
  auto reach = [&](const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<bool> seen(nodes, false);
    std::queue<std::size_t> queue;
    seen[0] = true;
    queue.push(0);
    while (!queue.empty()) {
      const std::size_t x = queue.front();
      queue.pop();
      for (std::size_t y : adj[x]) {
        if (!seen[y]) {
          seen[y] = true;
          queue.push(y);
        }
      }
    }
    return seen;
  };
  const auto from_root = reach(fwd);
  const auto to_root = reach(rev);
  for (VertexId v : tested) {
    const std::size_t i = local.at(v);
    for (Symbol a = 0; a < symbols; ++a) {
      const std::size_t x = i * symbols + a;
      if (!from_root[x] || !to_root[x]) {
        report.status = TransitivityReport::Status::counterexample;
        report.details = "state (" + base.name(a) + ", " + g.key(v) + ") is " +
                         (!from_root[x] ? "unreachable from" : "unable to reach") + " (" + base.name(0) + ", " +
                         g.key(0) + ")" +
                         (report.whole_graph ? "" : " within radius " + std::to_string(2 * radius + 1));
        return report;
      }
    }
  }
  report.status = TransitivityReport::Status::verified_on_ball;
  report.details = report.whole_graph ? "finite graph, all states mutually reachable"
                                      : "all states of the radius-" + std::to_string(radius) +
                                            " ball mutually reachable within radius " + std::to_string(2 * radius + 1);
  return report;
}

}  // namespace amenwalk
