#pragma once

// Internal: the pull-based transition DP shared by the walk, symmetry and
// spectral code.

#include <unordered_map>
#include <utility>
#include <vector>

#include "amenwalk/error.hpp"
#include "amenwalk/parallel.hpp"
#include "amenwalk/walkdp.hpp"

namespace amenwalk::detail {

template <Scalar T>
class Walker {
 public:
  // `initial` lists (vertex, weight per slot) pairs; with `collapse` each
  // entry carries a single weight.
  Walker(const GraphExtension& ext, bool collapse, std::vector<std::pair<VertexId, std::vector<T>>> initial,
         unsigned threads, std::optional<std::size_t> horizon, VertexId target)
      : ext_(ext), graph_(ext.graph()), collapse_(collapse), threads_(threads), horizon_(horizon), target_(target) {
    const MarkovBase& base = ext.base();
    symbols_ = base.size();
    state_.slots = collapse ? 1 : symbols_;
    for (Symbol a = 0; a < symbols_; ++a) {
      weight_.push_back(from_rational<T>(base.weight(a)));
      for (Symbol b = 0; b < symbols_; ++b) transition_.push_back(from_rational<T>(base.transition(a, b)));
    }
    if (horizon_) graph_.ball(*horizon_ / 2);
    for (auto& [v, w] : initial) {
      if (w.size() != state_.slots) throw InvalidInput("initial weights do not match the slot count");
      state_.vertices.push_back(v);
      for (auto& x : w) state_.mass.push_back(std::move(x));
    }
  }

  const DPState<T>& state() const { return state_; }

  // Mass at the target vertex, over slots passing the filter.
  T mass_at_target(const std::vector<bool>* slot_filter = nullptr) const {
    Accumulator<T> acc;
    for (std::size_t i = 0; i < state_.vertices.size(); ++i) {
      if (state_.vertices[i] != target_) continue;
      for (std::size_t s = 0; s < state_.slots; ++s) {
        if (slot_filter && !(*slot_filter)[s]) continue;
        acc.add(state_.mass[i * state_.slots + s]);
      }
    }
    return acc.value();
  }

  void step() {
    const std::size_t m = state_.vertices.size();
    const std::size_t slots = state_.slots;
    const std::size_t next_step = state_.step + 1;
    std::optional<std::size_t> max_depth;
    if (horizon_) {
      if (next_step > *horizon_) throw InvalidInput("walk stepped past its horizon");
      max_depth = *horizon_ - next_step;
    }

    // Discover targets serially, in source-major, symbol-minor order.
    struct Incoming {
      std::uint32_t target;
      std::uint32_t source;
      Symbol symbol;
    };
    std::vector<Incoming> edges;
    edges.reserve(m * symbols_);
    std::vector<VertexId> targets;
    std::unordered_map<VertexId, std::uint32_t> local;
    local.reserve(m * 2);
    for (std::size_t i = 0; i < m; ++i) {
      const VertexId v = state_.vertices[i];
      for (Symbol a = 0; a < symbols_; ++a) {
        if (!collapse_ && is_zero(state_.mass[i * slots + a])) continue;
        VertexId t;
        if (max_depth) {
          const auto d = graph_.depth(v);
          // States farther than the remaining steps can never come back.
          if (!d || *d > *max_depth + 1) continue;
          t = graph_.forward_known(v, a);
          if (t == ExtensionGraph::none) continue;
          const auto dt = graph_.depth(t);
          if (!dt || *dt > *max_depth) continue;
        } else {
          t = graph_.forward(v, a);
        }
        auto [it, fresh] = local.emplace(t, static_cast<std::uint32_t>(targets.size()));
        if (fresh) targets.push_back(t);
        edges.push_back({it->second, static_cast<std::uint32_t>(i), a});
      }
    }
    if (targets.size() * slots > ext_.state_budget()) {
      throw BudgetExceeded("walk needs " + std::to_string(targets.size() * slots) + " states, over the budget of " +
                           std::to_string(ext_.state_budget()) + "; raise AMENWALK_MEM_BUDGET or use Monte Carlo");
    }

    // Stable counting sort by target keeps the per-target summation order
    // fixed, independent of the thread count.
    std::vector<std::uint32_t> offset(targets.size() + 1, 0);
    for (const auto& e : edges) ++offset[e.target + 1];
    for (std::size_t j = 0; j < targets.size(); ++j) offset[j + 1] += offset[j];
    std::vector<std::pair<std::uint32_t, Symbol>> incoming(edges.size());
    {
      std::vector<std::uint32_t> fill(offset.begin(), offset.end() - 1);
      for (const auto& e : edges) incoming[fill[e.target]++] = {e.source, e.symbol};
    }

    std::vector<T> mass(targets.size() * slots, T(0));
    const auto& old = state_.mass;
    parallel_for(targets.size(), threads_, [&](std::size_t begin, std::size_t end) {
      for (std::size_t j = begin; j < end; ++j) {
        if (collapse_) {
          Accumulator<T> acc;
          for (std::uint32_t k = offset[j]; k < offset[j + 1]; ++k) {
            const auto [i, a] = incoming[k];
            acc.add(old[i] * weight_[a]);
          }
          mass[j] = acc.value();
        } else {
          for (std::size_t b = 0; b < slots; ++b) {
            Accumulator<T> acc;
            for (std::uint32_t k = offset[j]; k < offset[j + 1]; ++k) {
              const auto [i, a] = incoming[k];
              const T& p = transition_[a * symbols_ + b];
              if (is_zero(p)) continue;
              acc.add(old[i * slots + a] * p);
            }
            mass[j * slots + b] = acc.value();
          }
        }
      }
    });
    state_.vertices = std::move(targets);
    state_.mass = std::move(mass);
    state_.step = next_step;
  }

 private:
  const GraphExtension& ext_;
  ExtensionGraph& graph_;
  bool collapse_;
  unsigned threads_;
  std::optional<std::size_t> horizon_;
  VertexId target_;
  std::size_t symbols_ = 0;
  std::vector<T> weight_;
  std::vector<T> transition_;
  DPState<T> state_;
};

// Walker started at one vertex with slot weights mu([a]) (or the given
// initial weights).
template <Scalar T>
Walker<T> make_walker(const GraphExtension& ext, const WalkOptions& options, VertexId target) {
  const MarkovBase& base = ext.base();
  const bool collapse = base.is_bernoulli() && !options.initial;
  std::vector<T> w;
  if (collapse) {
    w.push_back(T(1));
  } else {
    for (Symbol a = 0; a < base.size(); ++a) {
      w.push_back(options.initial ? from_rational<T>(options.initial->at(a)) : from_rational<T>(base.weight(a)));
    }
  }
  std::vector<std::pair<VertexId, std::vector<T>>> initial;
  initial.emplace_back(options.start, std::move(w));
  return Walker<T>(ext, collapse, std::move(initial), options.threads, options.horizon, target);
}

}  // namespace amenwalk::detail
