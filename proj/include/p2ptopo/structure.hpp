#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <unordered_set>
#include <vector>

#include "p2ptopo/error.hpp"
#include "p2ptopo/graph.hpp"
#include "p2ptopo/metrics.hpp"
#include "p2ptopo/rng.hpp"

namespace p2ptopo {

// ---------------------------------------------------------------------------
// k-core

struct CorenessMap {
  std::vector<std::size_t> coreness;
  std::size_t max_k = 0;
};

// Batagelj-Zaversnik bucket peeling on the symmetrized graph, O(n + m).
inline CorenessMap k_core(const DirectedGraph& g) {
  const UndirectedGraph u(g);
  const std::size_t n = u.node_count();
  CorenessMap out;
  out.coreness.assign(n, 0);
  if (n == 0) return out;

  std::vector<std::size_t> deg(n);
  std::size_t max_deg = 0;
  for (NodeId v = 0; v < n; ++v) {
    deg[v] = u.degree(v);
    max_deg = std::max(max_deg, deg[v]);
  }
  std::vector<std::size_t> bin(max_deg + 1, 0);
  for (auto d : deg) ++bin[d];
  std::size_t start = 0;
  for (auto& b : bin) {
    const auto count = b;
    b = start;
    start += count;
  }
  std::vector<NodeId> vert(n);
  std::vector<std::size_t> pos(n);
  for (NodeId v = 0; v < n; ++v) {
    pos[v] = bin[deg[v]]++;
    vert[pos[v]] = v;
  }
  for (std::size_t d = max_deg; d > 0; --d) bin[d] = bin[d - 1];
  bin[0] = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const NodeId v = vert[i];
    for (const Arc& a : u.neighbors(v)) {
      const NodeId w = a.node;
      if (deg[w] > deg[v]) {
        const std::size_t dw = deg[w];
        const std::size_t pw = pos[w];
        const std::size_t ps = bin[dw];
        const NodeId first = vert[ps];
        if (first != w) {
          std::swap(vert[pw], vert[ps]);
          pos[w] = ps;
          pos[first] = pw;
        }
        ++bin[dw];
        --deg[w];
      }
    }
  }
  out.coreness = deg;
  out.max_k = *std::max_element(deg.begin(), deg.end());
  return out;
}

// ---------------------------------------------------------------------------
// Articulation points

// Iterative Hopcroft-Tarjan lowpoint search on the symmetrized graph.
inline std::vector<NodeId> articulation_points(const DirectedGraph& g) {
  const UndirectedGraph u(g);
  const std::size_t n = u.node_count();
  constexpr auto unvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> disc(n, unvisited);
  std::vector<std::size_t> low(n, 0);
  std::vector<bool> cut(n, false);
  std::size_t timer = 0;

  struct Frame {
    NodeId v;
    NodeId parent;
    std::size_t next;
    std::size_t children;
  };
  std::vector<Frame> stack;
  for (NodeId root = 0; root < n; ++root) {
    if (disc[root] != unvisited) continue;
    disc[root] = low[root] = timer++;
    stack.push_back({root, root, 0, 0});
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto nbrs = u.neighbors(f.v);
      if (f.next < nbrs.size()) {
        const NodeId w = nbrs[f.next++].node;
        if (disc[w] == unvisited) {
          ++f.children;
          disc[w] = low[w] = timer++;
          stack.push_back({w, f.v, 0, 0});
        } else if (w != f.parent) {
          low[f.v] = std::min(low[f.v], disc[w]);
        }
        continue;
      }
      const Frame done = f;
      stack.pop_back();
      if (stack.empty()) {
        if (done.children >= 2) cut[done.v] = true;
        continue;
      }
      Frame& parent = stack.back();
      low[parent.v] = std::min(low[parent.v], low[done.v]);
      if (parent.v != root && low[done.v] >= disc[parent.v]) cut[parent.v] = true;
    }
  }
  std::vector<NodeId> result;
  for (NodeId v = 0; v < n; ++v) {
    if (cut[v]) result.push_back(v);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Minimum spanning trees

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

enum class MstScope { whole_graph, miner_subgraph };

struct TreeEdge {
  NodeId u = 0;  // u < v
  NodeId v = 0;
  double weight = 0.0;
  friend bool operator==(const TreeEdge&, const TreeEdge&) = default;
};

struct SpanningForest {
  std::vector<TreeEdge> edges;  // in acceptance order
  double total_weight = 0.0;
  bool forest = false;          // scope was disconnected
};

// Kruskal on the symmetrized latency graph; ties broken by (weight, min id,
// max id). Node ids in the result refer to the input graph.
inline SpanningForest minimum_spanning_tree(const DirectedGraph& g, MstScope scope = MstScope::whole_graph) {
  std::vector<NodeId> members;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (scope == MstScope::whole_graph || g.is_miner(v)) members.push_back(v);
  }
  const auto sub = induced_subgraph(g, members);
  const UndirectedGraph u(sub.graph);
  std::vector<TreeEdge> candidates;
  for (NodeId a = 0; a < u.node_count(); ++a) {
    for (const Arc& arc : u.neighbors(a)) {
      if (a < arc.node) candidates.push_back({a, arc.node, arc.latency});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const TreeEdge& x, const TreeEdge& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    if (x.u != y.u) return x.u < y.u;
    return x.v < y.v;
  });
  DisjointSets sets(u.node_count());
  SpanningForest result;
  for (const auto& e : candidates) {
    if (sets.unite(e.u, e.v)) {
      result.edges.push_back({sub.original[e.u], sub.original[e.v], e.weight});
      result.total_weight += e.weight;
    }
  }
  result.forest = u.node_count() > 0 && result.edges.size() + 1 < u.node_count();
  return result;
}

// Fraction of miner-miner pairs whose path in the whole-graph MST has a
// full-node interior vertex. Pairs in different trees are not counted.
inline double mst_fullnode_bridging(const DirectedGraph& g) {
  const auto mst = minimum_spanning_tree(g, MstScope::whole_graph);
  const std::size_t n = g.node_count();
  std::vector<std::vector<NodeId>> tree(n);
  for (const auto& e : mst.edges) {
    tree[e.u].push_back(e.v);
    tree[e.v].push_back(e.u);
  }
  std::size_t total = 0;
  std::size_t bridged = 0;
  std::vector<int> flag(n);
  std::vector<NodeId> stack;
  for (NodeId m = 0; m < n; ++m) {
    if (!g.is_miner(m)) continue;
    std::fill(flag.begin(), flag.end(), -1);  // -1 unvisited, 0 clean, 1 bridged
    flag[m] = 0;
    stack.assign(1, m);
    while (!stack.empty()) {
      const NodeId x = stack.back();
      stack.pop_back();
      for (NodeId y : tree[x]) {
        if (flag[y] != -1) continue;
        flag[y] = (flag[x] == 1 || (x != m && !g.is_miner(x))) ? 1 : 0;
        stack.push_back(y);
      }
    }
    for (NodeId t = m + 1; t < n; ++t) {
      if (g.is_miner(t) && flag[t] != -1) {
        ++total;
        if (flag[t] == 1) ++bridged;
      }
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(bridged) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Modularity communities

struct Partition {
  std::vector<std::size_t> community;  // dense ids, numbered by first appearance
  double modularity = 0.0;
};

namespace detail {

using WeightedAdjacency = std::vector<std::vector<std::pair<NodeId, double>>>;

inline WeightedAdjacency modularity_weights(const DirectedGraph& g, bool latency_weighted) {
  const UndirectedGraph u(g);
  WeightedAdjacency adj(u.node_count());
  for (NodeId v = 0; v < u.node_count(); ++v) {
    for (const Arc& a : u.neighbors(v)) adj[v].emplace_back(a.node, latency_weighted ? 1.0 / a.latency : 1.0);
  }
  return adj;
}

inline double modularity_of(const WeightedAdjacency& adj, const std::vector<std::size_t>& community) {
  std::size_t k = 0;
  for (auto c : community) k = std::max(k, c + 1);
  std::vector<double> in(k, 0.0);
  std::vector<double> tot(k, 0.0);
  double two_m = 0.0;
  for (NodeId v = 0; v < adj.size(); ++v) {
    for (const auto& [w, weight] : adj[v]) {
      two_m += weight;
      tot[community[v]] += weight;
      if (community[v] == community[w]) in[community[v]] += weight;
    }
  }
  if (two_m == 0.0) throw UndefinedError("modularity undefined: graph has no edges");
  double q = 0.0;
  for (std::size_t c = 0; c < k; ++c) q += in[c] / two_m - (tot[c] / two_m) * (tot[c] / two_m);
  return q;
}

}  // namespace detail

// Direct evaluation of Newman modularity on the symmetrized graph.
inline double modularity(const DirectedGraph& g, const std::vector<std::size_t>& community,
                         bool latency_weighted = false) {
  if (community.size() != g.node_count()) throw ParameterError("partition size does not match graph");
  return detail::modularity_of(detail::modularity_weights(g, latency_weighted), community);
}

// Louvain: local moving in a seed-shuffled sweep order, then aggregation,
// repeated until a level makes no move.
inline Partition louvain_communities(const DirectedGraph& g, RngSeed seed, bool latency_weighted = false) {
  const auto base = detail::modularity_weights(g, latency_weighted);
  Rng rng(seed);

  detail::WeightedAdjacency level = base;  // may contain self-loops after aggregation
  std::vector<std::size_t> membership(g.node_count());
  for (std::size_t v = 0; v < membership.size(); ++v) membership[v] = v;

  double two_m = 0.0;
  for (const auto& list : base) {
    for (const auto& e : list) two_m += e.second;
  }
  if (two_m == 0.0) throw UndefinedError("modularity undefined: graph has no edges");

  for (;;) {
    const std::size_t n = level.size();
    std::vector<double> k(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      for (const auto& e : level[v]) k[v] += e.second;
    }
    std::vector<std::size_t> comm(n);
    std::vector<double> tot(n);
    for (std::size_t v = 0; v < n; ++v) {
      comm[v] = v;
      tot[v] = k[v];
    }
    std::vector<NodeId> order(n);
    for (std::size_t v = 0; v < n; ++v) order[v] = static_cast<NodeId>(v);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    bool any_move = false;
    std::vector<double> link(n, 0.0);
    std::vector<std::size_t> touched;
    for (bool moved = true; moved;) {
      moved = false;
      for (NodeId v : order) {
        const std::size_t own = comm[v];
        touched.clear();
        for (const auto& [w, weight] : level[v]) {
          if (w == v) continue;
          if (link[comm[w]] == 0.0) touched.push_back(comm[w]);
          link[comm[w]] += weight;
        }
        tot[own] -= k[v];
        std::size_t best = own;
        double best_gain = link[own] - tot[own] * k[v] / two_m;
        for (std::size_t c : touched) {
          const double gain = link[c] - tot[c] * k[v] / two_m;
          if (gain > best_gain + 1e-12) {
            best_gain = gain;
            best = c;
          }
        }
        tot[best] += k[v];
        comm[v] = best;
        for (std::size_t c : touched) link[c] = 0.0;
        link[own] = 0.0;
        if (best != own) moved = any_move = true;
      }
    }
    if (!any_move) break;

    // Renumber and aggregate.
    std::vector<std::size_t> dense(n, static_cast<std::size_t>(-1));
    std::size_t count = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (dense[comm[v]] == static_cast<std::size_t>(-1)) dense[comm[v]] = count++;
    }
    for (auto& m : membership) m = dense[comm[m]];
    std::vector<std::map<NodeId, double>> merged(count);
    for (std::size_t v = 0; v < n; ++v) {
      for (const auto& [w, weight] : level[v]) {
        merged[dense[comm[v]]][static_cast<NodeId>(dense[comm[w]])] += weight;
      }
    }
    detail::WeightedAdjacency next(count);
    for (std::size_t c = 0; c < count; ++c) next[c].assign(merged[c].begin(), merged[c].end());
    level = std::move(next);
    if (count == 1) break;
  }

  Partition p;
  std::vector<std::size_t> dense(membership.size(), static_cast<std::size_t>(-1));
  std::size_t count = 0;
  p.community.resize(membership.size());
  for (std::size_t v = 0; v < membership.size(); ++v) {
    if (dense[membership[v]] == static_cast<std::size_t>(-1)) dense[membership[v]] = count++;
    p.community[v] = dense[membership[v]];
  }
  p.modularity = detail::modularity_of(base, p.community);
  return p;
}

// ---------------------------------------------------------------------------
// Motif census

struct MotifCounts {
  std::size_t triangles = 0;
  std::size_t claws = 0;  // induced K_{1,3}
  friend bool operator==(const MotifCounts&, const MotifCounts&) = default;
};

inline MotifCounts count_motifs(const UndirectedGraph& u) {
  MotifCounts counts;
  const auto tri = triangles_per_node(u);
  for (auto t : tri) counts.triangles += t;
  counts.triangles /= 3;

  // For every center, count independent triples among its neighbors using a
  // local non-adjacency bitset.
  std::vector<std::size_t> local(u.node_count(), static_cast<std::size_t>(-1));
  for (NodeId v = 0; v < u.node_count(); ++v) {
    const auto nv = u.neighbors(v);
    const std::size_t d = nv.size();
    if (d < 3) continue;
    const std::size_t words = (d + 63) / 64;
    for (std::size_t i = 0; i < d; ++i) local[nv[i].node] = i;
    std::vector<std::uint64_t> free_of(d * words, 0);  // bit j set: j > i and not adjacent
    for (std::size_t i = 0; i < d; ++i) {
      std::uint64_t* row = &free_of[i * words];
      for (std::size_t j = i + 1; j < d; ++j) row[j / 64] |= std::uint64_t{1} << (j % 64);
      for (const Arc& a : u.neighbors(nv[i].node)) {
        const std::size_t j = local[a.node];
        if (j != static_cast<std::size_t>(-1) && a.node != v && j > i) row[j / 64] &= ~(std::uint64_t{1} << (j % 64));
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      const std::uint64_t* ri = &free_of[i * words];
      for (std::size_t j = i + 1; j < d; ++j) {
        if (!(ri[j / 64] >> (j % 64) & 1)) continue;
        const std::uint64_t* rj = &free_of[j * words];
        for (std::size_t w = 0; w < words; ++w) counts.claws += static_cast<std::size_t>(std::popcount(ri[w] & rj[w]));
      }
    }
    for (std::size_t i = 0; i < d; ++i) local[nv[i].node] = static_cast<std::size_t>(-1);
  }
  return counts;
}

struct MotifCensus {
  std::size_t triangles = 0;
  std::size_t four_stars = 0;  // induced claws
  std::optional<double> z_triangle;
  std::optional<double> z_four_star;
  double null_mean_triangle = 0.0;
  double null_std_triangle = 0.0;
  double null_mean_four_star = 0.0;
  double null_std_four_star = 0.0;
  std::size_t null_samples = 0;
};

// Uniform G(n, M) sample matched on node and edge count.
inline UndirectedGraph gnm_graph(std::size_t n, std::size_t m, RngSeed seed) {
  const std::size_t pairs = n * (n - 1) / 2;
  if (m > pairs) throw ParameterError("G(n,M) edge count exceeds available pairs");
  Rng rng(seed);
  const bool complement = m > pairs / 2;
  const std::size_t draws = complement ? pairs - m : m;
  std::unordered_set<std::uint64_t> picked;
  auto key = [](std::uint64_t a, std::uint64_t b) { return (a << 32) | b; };
  while (picked.size() < draws) {
    auto a = rng.below(n);
    auto b = rng.below(n);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    picked.insert(key(a, b));
  }
  DirectedGraph g(n);
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      if (picked.contains(key(a, b)) != complement) g.add_edge(a, b);
    }
  }
  return UndirectedGraph(g);
}

inline MotifCensus motif_census(const DirectedGraph& g, std::size_t null_samples, RngSeed seed) {
  if (null_samples < 2) throw ParameterError("motif_census needs at least 2 null samples");
  const UndirectedGraph u(g);
  const auto observed = count_motifs(u);
  MotifCensus census;
  census.triangles = observed.triangles;
  census.four_stars = observed.claws;
  census.null_samples = null_samples;

  std::vector<double> tri(null_samples);
  std::vector<double> claw(null_samples);
  for (std::size_t i = 0; i < null_samples; ++i) {
    const auto c = count_motifs(gnm_graph(u.node_count(), u.edge_count(), derive_seed(seed, i)));
    tri[i] = static_cast<double>(c.triangles);
    claw[i] = static_cast<double>(c.claws);
  }
  auto summarize = [&](const std::vector<double>& xs, double obs, double& mean, double& sd) -> std::optional<double> {
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    if (sd == 0.0) return std::nullopt;
    return (obs - mean) / sd;
  };
  census.z_triangle = summarize(tri, static_cast<double>(observed.triangles), census.null_mean_triangle,
                                census.null_std_triangle);
  census.z_four_star = summarize(claw, static_cast<double>(observed.claws), census.null_mean_four_star,
                                 census.null_std_four_star);
  return census;
}

}  // namespace p2ptopo
