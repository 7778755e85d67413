#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "p2ptopo/error.hpp"

namespace p2ptopo {

using NodeId = std::uint32_t;

enum class NodeClass : std::uint8_t { Miner, FullNode };

inline const char* to_string(NodeClass c) { return c == NodeClass::Miner ? "miner" : "full"; }

struct NodeAttributes {
  NodeClass cls = NodeClass::FullNode;
  double fitness = 1.0;    // dimensionless attachment weight
  double bandwidth = 1.0;  // messages per ms
  double uptime = 1.0;     // per-step availability probability

  void validate() const {
    if (!(fitness >= 0.0)) throw ParameterError("node fitness must be >= 0");
    if (!(bandwidth > 0.0)) throw ParameterError("node bandwidth must be > 0");
    if (!(uptime >= 0.0 && uptime <= 1.0)) throw ParameterError("node uptime must lie in [0,1]");
  }

  friend bool operator==(const NodeAttributes&, const NodeAttributes&) = default;
};

struct WeightedEdge {
  NodeId src = 0;
  NodeId dst = 0;
  double latency = 1.0;  // ms

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

// One endpoint of an adjacency list entry.
struct Arc {
  NodeId node = 0;
  double latency = 1.0;
};

enum class Weight { hop, latency };

// Simple directed graph with per-edge latency. Parallel edges and self-loops are
// rejected on insertion; node ids are dense in [0, n).
class DirectedGraph {
 public:
  DirectedGraph() = default;

  explicit DirectedGraph(std::size_t n, const NodeAttributes& attrs = {}) {
    for (std::size_t i = 0; i < n; ++i) add_node(attrs);
  }

  explicit DirectedGraph(std::vector<NodeAttributes> nodes) {
    for (auto& a : nodes) add_node(a);
  }

  NodeId add_node(const NodeAttributes& attrs = {}) {
    attrs.validate();
    nodes_.push_back(attrs);
    out_.emplace_back();
    in_.emplace_back();
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  void add_edge(NodeId src, NodeId dst, double latency = 1.0) {
    check_node(src);
    check_node(dst);
    if (src == dst) throw ParameterError("self-loop on node " + std::to_string(src));
    if (!(latency > 0.0)) throw ParameterError("edge latency must be > 0");
    if (!keys_.insert(key(src, dst)).second) {
      throw ParameterError("duplicate edge " + std::to_string(src) + "->" + std::to_string(dst));
    }
    out_[src].push_back({dst, latency});
    in_[dst].push_back({src, latency});
    ++edge_count_;
  }

  bool remove_edge(NodeId src, NodeId dst) {
    if (src >= nodes_.size() || dst >= nodes_.size() || keys_.erase(key(src, dst)) == 0) return false;
    auto drop = [](std::vector<Arc>& list, NodeId other) {
      list.erase(std::find_if(list.begin(), list.end(), [&](const Arc& a) { return a.node == other; }));
    };
    drop(out_[src], dst);
    drop(in_[dst], src);
    --edge_count_;
    return true;
  }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  const NodeAttributes& attributes(NodeId v) const { return nodes_.at(v); }
  NodeAttributes& attributes(NodeId v) { return nodes_.at(v); }
  NodeClass node_class(NodeId v) const { return nodes_.at(v).cls; }
  bool is_miner(NodeId v) const { return node_class(v) == NodeClass::Miner; }
  const std::vector<NodeAttributes>& all_attributes() const noexcept { return nodes_; }

  std::span<const Arc> out_arcs(NodeId v) const { return out_.at(v); }
  std::span<const Arc> in_arcs(NodeId v) const { return in_.at(v); }
  std::size_t out_degree(NodeId v) const { return out_.at(v).size(); }
  std::size_t in_degree(NodeId v) const { return in_.at(v).size(); }

  bool has_edge(NodeId src, NodeId dst) const { return keys_.contains(key(src, dst)); }

  std::optional<double> latency(NodeId src, NodeId dst) const {
    if (!has_edge(src, dst)) return std::nullopt;
    for (const Arc& a : out_[src]) {
      if (a.node == dst) return a.latency;
    }
    return std::nullopt;
  }

  // Edges ordered by source, then by insertion order within the source.
  std::vector<WeightedEdge> edges() const {
    std::vector<WeightedEdge> result;
    result.reserve(edge_count_);
    for (NodeId s = 0; s < nodes_.size(); ++s) {
      for (const Arc& a : out_[s]) result.push_back({s, a.node, a.latency});
    }
    return result;
  }

  std::vector<WeightedEdge> sorted_edges() const {
    auto e = edges();
    std::sort(e.begin(), e.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
      return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });
    return e;
  }

  std::vector<NodeId> nodes_of_class(NodeClass c) const {
    std::vector<NodeId> ids;
    for (NodeId v = 0; v < nodes_.size(); ++v) {
      if (nodes_[v].cls == c) ids.push_back(v);
    }
    return ids;
  }

  void check_node(NodeId v) const {
    if (v >= nodes_.size()) throw ParameterError("unknown node id " + std::to_string(v));
  }

  // Same attributes and same edge set, independent of insertion order.
  friend bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
    return a.nodes_ == b.nodes_ && a.sorted_edges() == b.sorted_edges();
  }

 private:
  static std::uint64_t key(NodeId s, NodeId d) { return (std::uint64_t{s} << 32) | d; }

  std::vector<NodeAttributes> nodes_;
  std::vector<std::vector<Arc>> out_;
  std::vector<std::vector<Arc>> in_;
  std::unordered_set<std::uint64_t> keys_;
  std::size_t edge_count_ = 0;
};

// Undirected view: {u,v} present iff u->v or v->u; weight is the smaller latency.
// Neighbor lists are sorted by node id.
class UndirectedGraph {
 public:
  explicit UndirectedGraph(const DirectedGraph& g) : adj_(g.node_count()) {
    for (NodeId u = 0; u < g.node_count(); ++u) {
      for (const Arc& a : g.out_arcs(u)) {
        adj_[u].push_back(a);
        adj_[a.node].push_back({u, a.latency});
      }
    }
    for (auto& list : adj_) {
      std::sort(list.begin(), list.end(), [](const Arc& x, const Arc& y) {
        return x.node != y.node ? x.node < y.node : x.latency < y.latency;
      });
      // Keep the first (smallest-latency) entry per neighbor.
      list.erase(std::unique(list.begin(), list.end(),
                             [](const Arc& x, const Arc& y) { return x.node == y.node; }),
                 list.end());
      edge_count_ += list.size();
    }
    edge_count_ /= 2;
  }

  std::size_t node_count() const noexcept { return adj_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  std::span<const Arc> neighbors(NodeId v) const { return adj_.at(v); }
  std::size_t degree(NodeId v) const { return adj_.at(v).size(); }

  bool adjacent(NodeId u, NodeId v) const {
    const auto& list = adj_.at(u);
    auto it = std::lower_bound(list.begin(), list.end(), v,
                               [](const Arc& a, NodeId x) { return a.node < x; });
    return it != list.end() && it->node == v;
  }

 private:
  std::vector<std::vector<Arc>> adj_;
  std::size_t edge_count_ = 0;
};

// Directed graph holding both orientations of every symmetrized edge.
inline DirectedGraph symmetrized(const DirectedGraph& g) {
  UndirectedGraph u(g);
  DirectedGraph out(g.all_attributes());
  for (NodeId v = 0; v < u.node_count(); ++v) {
    for (const Arc& a : u.neighbors(v)) out.add_edge(v, a.node, a.latency);
  }
  return out;
}

// Component label per node (labels dense, ordered by smallest member id).
inline std::vector<std::size_t> component_labels(const UndirectedGraph& u) {
  constexpr auto unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(u.node_count(), unset);
  std::size_t next = 0;
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < u.node_count(); ++s) {
    if (label[s] != unset) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (const Arc& a : u.neighbors(v)) {
        if (label[a.node] == unset) {
          label[a.node] = next;
          stack.push_back(a.node);
        }
      }
    }
    ++next;
  }
  return label;
}

inline std::size_t component_count(const UndirectedGraph& u) {
  auto labels = component_labels(u);
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

inline std::size_t largest_component_size(const UndirectedGraph& u) {
  auto labels = component_labels(u);
  std::vector<std::size_t> sizes(u.node_count(), 0);
  for (auto l : labels) ++sizes[l];
  return sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
}

// ---------------------------------------------------------------------------
// Adjacency matrices

enum class MatrixSemantics { binary, inverse_latency };

struct AdjacencyMatrix {
  std::size_t n = 0;
  std::vector<double> entries;  // row-major n*n
  MatrixSemantics semantics = MatrixSemantics::binary;

  AdjacencyMatrix() = default;
  AdjacencyMatrix(std::size_t size, MatrixSemantics s) : n(size), entries(size * size, 0.0), semantics(s) {}

  double operator()(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
  double& operator()(std::size_t i, std::size_t j) { return entries[i * n + j]; }

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;
};

inline AdjacencyMatrix to_matrix(const DirectedGraph& g, MatrixSemantics semantics) {
  AdjacencyMatrix m(g.node_count(), semantics);
  for (NodeId s = 0; s < g.node_count(); ++s) {
    for (const Arc& a : g.out_arcs(s)) {
      m(s, a.node) = semantics == MatrixSemantics::binary ? 1.0 : 1.0 / a.latency;
    }
  }
  return m;
}

// Inverse of to_matrix. Binary entries become 1 ms edges; inverse-latency
// entries w become edges of latency 1/w.
inline DirectedGraph from_matrix(const AdjacencyMatrix& m, std::vector<NodeAttributes> attrs = {}) {
  if (attrs.empty()) attrs.resize(m.n);
  if (attrs.size() != m.n) throw ParameterError("attribute count does not match matrix size");
  DirectedGraph g(std::move(attrs));
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.n; ++j) {
      const double w = m(i, j);
      if (w == 0.0) continue;
      if (i == j) throw ParameterError("nonzero diagonal entry at " + std::to_string(i));
      if (w < 0.0) throw ParameterError("negative matrix entry");
      if (m.semantics == MatrixSemantics::binary && w != 1.0) throw ParameterError("non-binary entry");
      g.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(j),
                 m.semantics == MatrixSemantics::binary ? 1.0 : 1.0 / w);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Structural operations

struct Subgraph {
  DirectedGraph graph;
  std::vector<NodeId> original;  // new id -> id in the parent graph
};

inline Subgraph induced_subgraph(const DirectedGraph& g, std::span<const NodeId> keep) {
  std::vector<NodeId> ids(keep.begin(), keep.end());
  for (NodeId v : ids) {
    if (v >= g.node_count()) throw ParameterError("induced_subgraph: unknown node id " + std::to_string(v));
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  constexpr auto absent = static_cast<NodeId>(-1);
  std::vector<NodeId> remap(g.node_count(), absent);
  Subgraph sub;
  for (NodeId v : ids) remap[v] = sub.graph.add_node(g.attributes(v));
  for (NodeId v : ids) {
    for (const Arc& a : g.out_arcs(v)) {
      if (remap[a.node] != absent) sub.graph.add_edge(remap[v], remap[a.node], a.latency);
    }
  }
  sub.original = std::move(ids);
  return sub;
}

inline Subgraph remove_nodes(const DirectedGraph& g, std::span<const NodeId> removed) {
  std::vector<bool> drop(g.node_count(), false);
  for (NodeId v : removed) {
    if (v >= g.node_count()) throw ParameterError("remove_nodes: unknown node id " + std::to_string(v));
    drop[v] = true;
  }
  std::vector<NodeId> keep;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (!drop[v]) keep.push_back(v);
  }
  return induced_subgraph(g, keep);
}

struct DegreePair {
  std::size_t in = 0;
  std::size_t out = 0;
  friend bool operator==(const DegreePair&, const DegreePair&) = default;
};

inline std::vector<DegreePair> degree_sequences(const DirectedGraph& g) {
  std::vector<DegreePair> d(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) d[v] = {g.in_degree(v), g.out_degree(v)};
  return d;
}

inline double edge_density(const DirectedGraph& g) {
  const auto n = static_cast<double>(g.node_count());
  if (g.node_count() < 2) throw UndefinedError("edge density undefined for fewer than 2 nodes");
  return static_cast<double>(g.edge_count()) / (n * (n - 1.0));
}

// Kahn's algorithm.
inline bool is_acyclic(const DirectedGraph& g) {
  std::vector<std::size_t> indeg(g.node_count());
  std::queue<NodeId> ready;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    indeg[v] = g.in_degree(v);
    if (indeg[v] == 0) ready.push(v);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    NodeId v = ready.front();
    ready.pop();
    ++visited;
    for (const Arc& a : g.out_arcs(v)) {
      if (--indeg[a.node] == 0) ready.push(a.node);
    }
  }
  return visited == g.node_count();
}

}  // namespace p2ptopo
