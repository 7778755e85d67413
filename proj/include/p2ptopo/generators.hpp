#pragma once

#include <cmath>
#include <cstddef>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "p2ptopo/error.hpp"
#include "p2ptopo/graph.hpp"
#include "p2ptopo/rng.hpp"

namespace p2ptopo {

// ---------------------------------------------------------------------------
// Fitness distributions

struct ConstantFitness {
  double value = 1.0;
};
struct UniformFitness {
  double lo = 0.0;
  double hi = 1.0;
};
struct ParetoFitness {
  double shape = 2.0;
  double scale = 1.0;
};

using FitnessDistribution = std::variant<ConstantFitness, UniformFitness, ParetoFitness>;

inline void validate(const FitnessDistribution& dist) {
  std::visit(
      [](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, ConstantFitness>) {
          if (!(d.value >= 0.0)) throw ParameterError("constant fitness must be >= 0");
        } else if constexpr (std::is_same_v<D, UniformFitness>) {
          if (!(d.lo >= 0.0 && d.hi >= d.lo)) throw ParameterError("uniform fitness needs 0 <= lo <= hi");
        } else {
          if (!(d.shape > 0.0 && d.scale > 0.0)) throw ParameterError("pareto fitness needs shape, scale > 0");
        }
      },
      dist);
}

inline double sample_fitness(const FitnessDistribution& dist, Rng& rng) {
  return std::visit(
      [&rng](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, ConstantFitness>) {
          return d.value;
        } else if constexpr (std::is_same_v<D, UniformFitness>) {
          return rng.uniform(d.lo, d.hi);
        } else {
          return d.scale * std::pow(1.0 - rng.uniform(), -1.0 / d.shape);
        }
      },
      dist);
}

namespace detail {

// Fenwick tree over non-negative weights; supports weighted sampling with
// point updates in O(log n).
class WeightTree {
 public:
  explicit WeightTree(std::size_t n) : tree_(n + 1, 0.0), weights_(n, 0.0) {}

  void set(std::size_t i, double w) {
    const double delta = w - weights_[i];
    weights_[i] = w;
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }

  double weight(std::size_t i) const { return weights_[i]; }

  double total() const {
    double s = 0.0;
    for (std::size_t k = tree_.size() - 1; k > 0; k -= k & (~k + 1)) s += tree_[k];
    return s;
  }

  // Smallest index whose inclusive prefix sum exceeds r, clamped to a
  // positive-weight slot.
  std::size_t find(double r) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 < tree_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      if (pos + step < tree_.size() && tree_[pos + step] <= r) {
        pos += step;
        r -= tree_[pos];
      }
    }
    std::size_t idx = std::min(pos, weights_.size() - 1);
    while (idx > 0 && weights_[idx] <= 0.0) --idx;
    while (idx + 1 < weights_.size() && weights_[idx] <= 0.0) ++idx;
    return idx;
  }

 private:
  std::vector<double> tree_;
  std::vector<double> weights_;
};

inline double jitter(Rng& rng) { return rng.uniform(0.8, 1.2); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Fitness-driven preferential attachment

// Grows a graph from a complete seed clique on m+1 nodes. Each arriving node
// attaches m edges (new -> old) to distinct targets chosen with probability
// proportional to fitness * total degree. Unit latency on every edge.
inline DirectedGraph bianconi_barabasi(std::size_t n, std::size_t m, const FitnessDistribution& fitness,
                                       RngSeed seed) {
  if (m < 1 || m >= n) throw ParameterError("bianconi_barabasi requires n > m >= 1");
  validate(fitness);
  Rng rng(seed);
  DirectedGraph g;
  std::vector<std::size_t> degree(n, 0);
  detail::WeightTree weights(n);

  for (std::size_t v = 0; v <= m; ++v) {
    NodeAttributes attrs;
    attrs.fitness = sample_fitness(fitness, rng);
    g.add_node(attrs);
  }
  for (NodeId v = 0; v <= m; ++v) {
    for (NodeId u = 0; u < v; ++u) g.add_edge(v, u);
    degree[v] = m;
  }
  for (NodeId v = 0; v <= m; ++v) weights.set(v, g.attributes(v).fitness * static_cast<double>(degree[v]));

  std::vector<NodeId> chosen;
  for (std::size_t t = m + 1; t < n; ++t) {
    NodeAttributes attrs;
    attrs.fitness = sample_fitness(fitness, rng);
    const NodeId v = g.add_node(attrs);

    // Successive sampling without replacement: zero each chosen slot until all
    // m targets are drawn.
    chosen.clear();
    for (std::size_t k = 0; k < m; ++k) {
      const double total = weights.total();
      NodeId target;
      if (total > 0.0) {
        target = static_cast<NodeId>(weights.find(rng.uniform() * total));
      } else {
        std::vector<NodeId> free;
        for (NodeId u = 0; u < v; ++u) {
          if (std::find(chosen.begin(), chosen.end(), u) == chosen.end()) free.push_back(u);
        }
        target = free[rng.below(free.size())];
      }
      chosen.push_back(target);
      weights.set(target, 0.0);
    }
    for (NodeId target : chosen) {
      g.add_edge(v, target);
      ++degree[target];
      weights.set(target, g.attributes(target).fitness * static_cast<double>(degree[target]));
    }
    degree[v] = m;
    weights.set(v, attrs.fitness * static_cast<double>(m));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Fitness-aware small world

// Ring lattice (each node linked to k/2 successors), then each lattice edge
// (i, i+j) is rewired with probability p to (i, w) where w is drawn with
// probability proportional to fitness; self-loops and duplicates are re-drawn.
// Every undirected link is emitted in both orientations with unit latency.
inline DirectedGraph small_world_fitness(std::size_t n, std::size_t k, double p, const FitnessDistribution& fitness,
                                         RngSeed seed) {
  if (k < 2 || k % 2 != 0 || k >= n) throw ParameterError("small_world_fitness requires even k with 2 <= k < n");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("rewiring probability must lie in [0,1]");
  validate(fitness);
  Rng rng(seed);

  std::vector<NodeAttributes> attrs(n);
  for (auto& a : attrs) a.fitness = sample_fitness(fitness, rng);

  std::vector<std::unordered_set<NodeId>> adj(n);
  auto link = [&](NodeId a, NodeId b) {
    adj[a].insert(b);
    adj[b].insert(a);
  };
  for (std::size_t j = 1; j <= k / 2; ++j) {
    for (NodeId i = 0; i < n; ++i) link(i, static_cast<NodeId>((i + j) % n));
  }

  std::vector<double> cumulative(n);
  double running = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    running += attrs[v].fitness;
    cumulative[v] = running;
  }
  auto draw = [&]() -> NodeId {
    if (running <= 0.0) return static_cast<NodeId>(rng.below(n));
    const double r = rng.uniform() * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    return static_cast<NodeId>(std::min<std::size_t>(it - cumulative.begin(), n - 1));
  };

  for (std::size_t j = 1; j <= k / 2; ++j) {
    for (NodeId i = 0; i < n; ++i) {
      if (!rng.bernoulli(p)) continue;
      if (adj[i].size() >= n - 1) continue;
      const auto old = static_cast<NodeId>((i + j) % n);
      NodeId w = draw();
      std::size_t attempts = 1;
      while (w == i || adj[i].contains(w)) {
        if (++attempts > 64 * n) {
          // Fitness mass sits entirely on existing neighbors; fall back to a
          // uniform choice over the valid targets.
          std::vector<NodeId> valid;
          for (NodeId u = 0; u < n; ++u) {
            if (u != i && !adj[i].contains(u)) valid.push_back(u);
          }
          w = valid[rng.below(valid.size())];
          break;
        }
        w = draw();
      }
      adj[i].erase(old);
      adj[old].erase(i);
      link(i, w);
    }
  }

  DirectedGraph g(std::move(attrs));
  for (NodeId v = 0; v < n; ++v) {
    std::vector<NodeId> nbrs(adj[v].begin(), adj[v].end());
    std::sort(nbrs.begin(), nbrs.end());
    for (NodeId u : nbrs) g.add_edge(v, u);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Erdos-Renyi

inline DirectedGraph erdos_renyi(std::size_t n, double p, RngSeed seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("edge probability must lie in [0,1]");
  Rng rng(seed);
  DirectedGraph g(n);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      if (i != j && rng.bernoulli(p)) g.add_edge(i, j);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Miner core with full-node periphery

struct CorePeripheryConfig {
  std::size_t miner_count = 50;
  std::size_t full_count = 450;
  double core_density = 0.8;
  std::size_t periphery_links = 2;
  double core_latency = 10.0;        // ms
  double periphery_latency = 200.0;  // ms

  void validate() const {
    if (miner_count < 1) throw ParameterError("core_periphery needs at least one miner");
    if (!(core_density > 0.0 && core_density <= 1.0)) throw ParameterError("core_density must lie in (0,1]");
    if (periphery_links < 1) throw ParameterError("periphery_links must be positive");
    if (periphery_links > miner_count) throw ParameterError("periphery_links exceeds miner_count");
    if (!(core_latency > 0.0)) throw ParameterError("core_latency must be > 0");
    if (!(periphery_latency >= core_latency)) throw ParameterError("periphery_latency must be >= core_latency");
  }
};

// Nodes [0, miner_count) are miners, the rest full nodes. Exactly
// ceil(core_density * pairs) miner pairs are linked (uniformly chosen), so the
// miner subgraph density is never below core_density. Each full node links to
// periphery_links distinct uniformly chosen miners. All links are
// bidirectional with latency base * U[0.8, 1.2].
inline DirectedGraph core_periphery(const CorePeripheryConfig& cfg, RngSeed seed) {
  cfg.validate();
  Rng rng(seed);
  const std::size_t n = cfg.miner_count + cfg.full_count;
  std::vector<NodeAttributes> attrs(n);
  for (std::size_t v = 0; v < n; ++v) {
    auto& a = attrs[v];
    if (v < cfg.miner_count) {
      a.cls = NodeClass::Miner;
      a.fitness = rng.uniform(0.8, 1.0);
      a.bandwidth = 10.0;
    } else {
      a.cls = NodeClass::FullNode;
      a.fitness = rng.uniform(0.0, 0.2);
      a.bandwidth = 1.0;
    }
  }
  DirectedGraph g(std::move(attrs));

  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId i = 0; i < cfg.miner_count; ++i) {
    for (NodeId j = i + 1; j < cfg.miner_count; ++j) pairs.emplace_back(i, j);
  }
  const auto wanted = std::min(
      pairs.size(), static_cast<std::size_t>(std::ceil(cfg.core_density * static_cast<double>(pairs.size()) - 1e-9)));
  for (std::size_t k = 0; k < wanted; ++k) {
    std::swap(pairs[k], pairs[k + rng.below(pairs.size() - k)]);
  }
  std::sort(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(wanted));
  for (std::size_t k = 0; k < wanted; ++k) {
    const double lat = cfg.core_latency * detail::jitter(rng);
    g.add_edge(pairs[k].first, pairs[k].second, lat);
    g.add_edge(pairs[k].second, pairs[k].first, lat);
  }

  std::vector<NodeId> miners(cfg.miner_count);
  std::iota(miners.begin(), miners.end(), NodeId{0});
  for (std::size_t f = cfg.miner_count; f < n; ++f) {
    for (std::size_t k = 0; k < cfg.periphery_links; ++k) {
      std::swap(miners[k], miners[k + rng.below(miners.size() - k)]);
      const double lat = cfg.periphery_latency * detail::jitter(rng);
      g.add_edge(static_cast<NodeId>(f), miners[k], lat);
      g.add_edge(miners[k], static_cast<NodeId>(f), lat);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Degree-preserving randomization

struct RewireResult {
  DirectedGraph graph;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

// Double-edge swaps (a->b, c->d) => (a->d, c->b). Swaps that would create a
// self-loop or a duplicate edge are rejected and counted. In- and out-degree
// of every node are preserved exactly.
inline RewireResult degree_preserving_rewire(const DirectedGraph& g, std::size_t swaps, RngSeed seed) {
  Rng rng(seed);
  auto edges = g.edges();
  std::unordered_set<std::uint64_t> present;
  auto key = [](NodeId s, NodeId d) { return (std::uint64_t{s} << 32) | d; };
  for (const auto& e : edges) present.insert(key(e.src, e.dst));

  RewireResult result;
  for (std::size_t attempt = 0; attempt < swaps; ++attempt) {
    if (edges.size() < 2) {
      result.rejected = swaps;
      break;
    }
    const auto i = rng.below(edges.size());
    const auto j = rng.below(edges.size());
    const auto [a, b, lat_ab] = edges[i];
    const auto [c, d, lat_cd] = edges[j];
    if (i == j || a == d || c == b || present.contains(key(a, d)) || present.contains(key(c, b))) {
      ++result.rejected;
      continue;
    }
    present.erase(key(a, b));
    present.erase(key(c, d));
    present.insert(key(a, d));
    present.insert(key(c, b));
    edges[i] = {a, d, lat_ab};
    edges[j] = {c, b, lat_cd};
    ++result.accepted;
  }

  result.graph = DirectedGraph(g.all_attributes());
  for (const auto& e : edges) result.graph.add_edge(e.src, e.dst, e.latency);
  return result;
}

}  // namespace p2ptopo
