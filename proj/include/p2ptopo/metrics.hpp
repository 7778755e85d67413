#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "p2ptopo/error.hpp"
#include "p2ptopo/graph.hpp"

namespace p2ptopo {

class InsufficientDataError : public UndefinedError {
 public:
  using UndefinedError::UndefinedError;
};

class InfiniteExponentError : public UndefinedError {
 public:
  using UndefinedError::UndefinedError;
};

inline constexpr double unreachable = std::numeric_limits<double>::infinity();

namespace detail {

// Latency sums along different routes can differ in the last bits; treat them
// as ties within a relative 1e-12.
inline bool same_distance(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

inline double edge_cost(const Arc& a, Weight w) { return w == Weight::hop ? 1.0 : a.latency; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Single-source shortest paths

struct ShortestPathTree {
  NodeId source = 0;
  std::vector<double> dist;                // `unreachable` when not reached
  std::vector<std::vector<NodeId>> preds;  // every minimal predecessor, ascending
  std::vector<double> sigma;               // number of shortest source->v paths
  std::vector<NodeId> order;               // reached nodes, non-decreasing distance

  bool reachable(NodeId v) const { return dist[v] != unreachable; }
};

// BFS for hop weight, Dijkstra for latency. Ties on distance are broken by the
// smaller node id when settling, so `order` is deterministic.
inline ShortestPathTree shortest_paths(const DirectedGraph& g, NodeId source, Weight weight,
                                       double per_hop_extra = 0.0) {
  g.check_node(source);
  const std::size_t n = g.node_count();
  ShortestPathTree sp;
  sp.source = source;
  sp.dist.assign(n, unreachable);
  sp.preds.assign(n, {});
  sp.sigma.assign(n, 0.0);
  sp.order.reserve(n);
  sp.dist[source] = 0.0;
  sp.sigma[source] = 1.0;

  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  std::vector<bool> settled(n, false);
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (settled[u] || d != sp.dist[u]) continue;
    settled[u] = true;
    sp.order.push_back(u);
    for (const Arc& a : g.out_arcs(u)) {
      const NodeId v = a.node;
      if (settled[v]) continue;
      const double nd = d + detail::edge_cost(a, weight) + per_hop_extra;
      if (sp.dist[v] != unreachable && detail::same_distance(nd, sp.dist[v])) {
        sp.preds[v].push_back(u);
        sp.sigma[v] += sp.sigma[u];
      } else if (nd < sp.dist[v]) {
        sp.dist[v] = nd;
        sp.preds[v].assign(1, u);
        sp.sigma[v] = sp.sigma[u];
        heap.push({nd, v});
      }
    }
  }
  for (auto& p : sp.preds) std::sort(p.begin(), p.end());
  return sp;
}

// For every node t reached from the tree's source: true when at least one
// shortest source->t path has an interior vertex for which `marked` holds.
template <typename Marked>
std::vector<bool> interior_contamination(const ShortestPathTree& sp, Marked&& marked) {
  std::vector<bool> bad(sp.dist.size(), false);
  for (NodeId v : sp.order) {
    if (v == sp.source) continue;
    for (NodeId u : sp.preds[v]) {
      if (bad[u] || (u != sp.source && marked(u))) {
        bad[v] = true;
        break;
      }
    }
  }
  return bad;
}

// ---------------------------------------------------------------------------
// Path-length summaries. Unreachable pairs are excluded from means and counted
// separately, since the textbook formulas assume strong connectivity.

struct PathLengthSummary {
  double mean = 0.0;
  std::size_t reachable_pairs = 0;
  std::size_t total_pairs = 0;
  double reachable_fraction = 0.0;
};

inline PathLengthSummary average_path_length(const DirectedGraph& g, Weight weight) {
  const std::size_t n = g.node_count();
  if (n < 2) throw UndefinedError("average path length needs at least 2 nodes");
  PathLengthSummary s;
  s.total_pairs = n * (n - 1);
  double sum = 0.0;
  for (NodeId src = 0; src < n; ++src) {
    const auto sp = shortest_paths(g, src, weight);
    for (NodeId t = 0; t < n; ++t) {
      if (t != src && sp.reachable(t)) {
        sum += sp.dist[t];
        ++s.reachable_pairs;
      }
    }
  }
  if (s.reachable_pairs == 0) throw UndefinedError("average path length undefined: no reachable pair");
  s.mean = sum / static_cast<double>(s.reachable_pairs);
  s.reachable_fraction = static_cast<double>(s.reachable_pairs) / static_cast<double>(s.total_pairs);
  return s;
}

struct Eccentricity {
  double diameter = 0.0;
  std::vector<double> ecc;  // max distance to any reachable node; 0 if none
  double reachable_fraction = 0.0;
};

inline Eccentricity diameter_and_eccentricity(const DirectedGraph& g, Weight weight) {
  const std::size_t n = g.node_count();
  if (n < 2) throw UndefinedError("diameter needs at least 2 nodes");
  Eccentricity e;
  e.ecc.assign(n, 0.0);
  std::size_t reachable = 0;
  for (NodeId src = 0; src < n; ++src) {
    const auto sp = shortest_paths(g, src, weight);
    for (NodeId t = 0; t < n; ++t) {
      if (t != src && sp.reachable(t)) {
        e.ecc[src] = std::max(e.ecc[src], sp.dist[t]);
        ++reachable;
      }
    }
    e.diameter = std::max(e.diameter, e.ecc[src]);
  }
  if (reachable == 0) throw UndefinedError("diameter undefined: no reachable pair");
  e.reachable_fraction = static_cast<double>(reachable) / static_cast<double>(n * (n - 1));
  return e;
}

// ---------------------------------------------------------------------------
// Centralities

// Exact, non-normalized betweenness over ordered pairs (Brandes accumulation).
inline std::vector<double> betweenness(const DirectedGraph& g, Weight weight) {
  const std::size_t n = g.node_count();
  std::vector<double> cb(n, 0.0);
  std::vector<double> delta(n);
  for (NodeId s = 0; s < n; ++s) {
    const auto sp = shortest_paths(g, s, weight);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto it = sp.order.rbegin(); it != sp.order.rend(); ++it) {
      const NodeId w = *it;
      for (NodeId v : sp.preds[w]) delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  return cb;
}

// Wasserman-Faust closeness: (r / sum d) * (r / (n-1)), r = nodes reachable
// from v. Zero for nodes that reach nothing.
inline std::vector<double> closeness(const DirectedGraph& g, Weight weight) {
  const std::size_t n = g.node_count();
  std::vector<double> c(n, 0.0);
  if (n < 2) return c;
  for (NodeId v = 0; v < n; ++v) {
    const auto sp = shortest_paths(g, v, weight);
    double total = 0.0;
    std::size_t r = 0;
    for (NodeId u = 0; u < n; ++u) {
      if (u != v && sp.reachable(u)) {
        total += sp.dist[u];
        ++r;
      }
    }
    if (r == 0 || total <= 0.0) continue;
    const auto rd = static_cast<double>(r);
    c[v] = (rd / total) * (rd / static_cast<double>(n - 1));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Clustering and assortativity (symmetrized graph)

struct Clustering {
  double global = 0.0;
  std::vector<double> local;
  std::size_t triangles = 0;
};

inline std::vector<std::size_t> triangles_per_node(const UndirectedGraph& u) {
  std::vector<std::size_t> tri(u.node_count(), 0);
  for (NodeId v = 0; v < u.node_count(); ++v) {
    const auto nv = u.neighbors(v);
    for (const Arc& wa : nv) {
      const NodeId w = wa.node;
      if (w <= v) continue;
      const auto nw = u.neighbors(w);
      auto i = nv.begin();
      auto j = nw.begin();
      while (i != nv.end() && j != nw.end()) {
        if (i->node < j->node) {
          ++i;
        } else if (j->node < i->node) {
          ++j;
        } else {
          const NodeId x = i->node;
          if (x > w) {
            ++tri[v];
            ++tri[w];
            ++tri[x];
          }
          ++i;
          ++j;
        }
      }
    }
  }
  return tri;
}

inline Clustering clustering(const DirectedGraph& g) {
  const UndirectedGraph u(g);
  const auto tri = triangles_per_node(u);
  Clustering c;
  c.local.assign(u.node_count(), 0.0);
  double closed = 0.0;
  double triplets = 0.0;
  for (NodeId v = 0; v < u.node_count(); ++v) {
    const auto d = static_cast<double>(u.degree(v));
    const double pairs = d * (d - 1.0) / 2.0;
    if (pairs > 0.0) c.local[v] = static_cast<double>(tri[v]) / pairs;
    closed += static_cast<double>(tri[v]);
    triplets += pairs;
    c.triangles += tri[v];
  }
  c.triangles /= 3;
  c.global = triplets > 0.0 ? closed / triplets : 0.0;
  return c;
}

// Pearson correlation of remaining degrees across both orientations of every
// symmetrized edge.
inline double assortativity(const DirectedGraph& g) {
  const UndirectedGraph u(g);
  double sx = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  double count = 0.0;
  for (NodeId v = 0; v < u.node_count(); ++v) {
    const auto dv = static_cast<double>(u.degree(v)) - 1.0;
    for (const Arc& a : u.neighbors(v)) {
      const auto dw = static_cast<double>(u.degree(a.node)) - 1.0;
      sx += dv;
      sxx += dv * dv;
      sxy += dv * dw;
      count += 1.0;
    }
  }
  if (count == 0.0) throw UndefinedError("assortativity undefined: graph has no edges");
  const double mean = sx / count;
  const double var = sxx / count - mean * mean;
  if (var <= 1e-12 * std::max(1.0, sxx / count)) {
    throw UndefinedError("assortativity undefined: zero variance of endpoint degrees");
  }
  return (sxy / count - mean * mean) / var;
}

// ---------------------------------------------------------------------------
// Degree distributions and power-law fitting

enum class DegreeDirection { in, out, total };

struct DegreeHistogram {
  DegreeDirection direction = DegreeDirection::total;
  std::vector<std::pair<std::size_t, std::size_t>> bins;  // (k, count), ascending k, counts > 0
};

inline std::vector<std::size_t> degrees(const DirectedGraph& g, DegreeDirection dir) {
  std::vector<std::size_t> k(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    switch (dir) {
      case DegreeDirection::in: k[v] = g.in_degree(v); break;
      case DegreeDirection::out: k[v] = g.out_degree(v); break;
      case DegreeDirection::total: k[v] = g.in_degree(v) + g.out_degree(v); break;
    }
  }
  return k;
}

inline DegreeHistogram degree_histogram(const DirectedGraph& g, DegreeDirection dir) {
  auto k = degrees(g, dir);
  std::sort(k.begin(), k.end());
  DegreeHistogram h;
  h.direction = dir;
  for (std::size_t x : k) {
    if (h.bins.empty() || h.bins.back().first != x) h.bins.emplace_back(x, 0);
    ++h.bins.back().second;
  }
  return h;
}

struct PowerLawFit {
  double gamma = 0.0;
  std::size_t xmin = 1;
  double ks_statistic = 0.0;
  std::size_t n_tail = 0;
};

namespace detail {

// `tail` sorted ascending, all >= xmin.
inline PowerLawFit fit_tail(std::span<const std::size_t> tail, std::size_t xmin) {
  if (tail.size() < 2) throw InsufficientDataError("power-law fit needs at least 2 samples >= xmin");
  if (tail.front() == tail.back()) throw InfiniteExponentError("power-law exponent infinite: all tail samples equal");
  const double shift = static_cast<double>(xmin) - 0.5;
  double log_sum = 0.0;
  for (std::size_t x : tail) log_sum += std::log(static_cast<double>(x) / shift);
  PowerLawFit fit;
  fit.xmin = xmin;
  fit.n_tail = tail.size();
  fit.gamma = 1.0 + static_cast<double>(tail.size()) / log_sum;

  // Model CDF of integer k: continuous law evaluated at the bin edge k + 0.5.
  auto model = [&](double k) { return 1.0 - std::pow((k + 0.5) / shift, 1.0 - fit.gamma); };
  const auto n = static_cast<double>(tail.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < tail.size();) {
    std::size_t j = i;
    while (j < tail.size() && tail[j] == tail[i]) ++j;
    const double empirical = static_cast<double>(j) / n;
    ks = std::max(ks, std::abs(empirical - model(static_cast<double>(tail[i]))));
    if (j < tail.size() && tail[j] > tail[i] + 1) {
      ks = std::max(ks, std::abs(empirical - model(static_cast<double>(tail[j] - 1))));
    }
    // Gap just below the first value of this run.
    const double before = static_cast<double>(i) / n;
    const double prev = tail[i] > xmin ? model(static_cast<double>(tail[i] - 1)) : 0.0;
    ks = std::max(ks, std::abs(before - prev));
    i = j;
  }
  fit.ks_statistic = ks;
  return fit;
}

}  // namespace detail

// Continuous-approximation MLE with the -0.5 discreteness shift. When xmin is
// not given, every distinct sample value is tried and the fit with the
// smallest KS distance wins (ties to the smaller xmin).
inline PowerLawFit fit_power_law(std::span<const std::size_t> samples, std::optional<std::size_t> xmin = std::nullopt) {
  std::vector<std::size_t> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  auto tail_from = [&](std::size_t lo) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), lo);
    return std::span<const std::size_t>(sorted.data() + (it - sorted.begin()),
                                        static_cast<std::size_t>(sorted.end() - it));
  };
  if (xmin) {
    if (*xmin < 1) throw ParameterError("xmin must be >= 1");
    return detail::fit_tail(tail_from(*xmin), *xmin);
  }
  std::optional<PowerLawFit> best;
  bool saw_degenerate = false;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const std::size_t candidate = sorted[i];
    if (candidate < 1 || (i > 0 && sorted[i - 1] == candidate)) continue;
    const auto tail = tail_from(candidate);
    if (tail.size() < 2) break;
    if (tail.front() == tail.back()) {
      saw_degenerate = true;
      break;
    }
    const auto fit = detail::fit_tail(tail, candidate);
    if (!best || fit.ks_statistic < best->ks_statistic) best = fit;
  }
  if (!best) {
    if (saw_degenerate) throw InfiniteExponentError("power-law exponent infinite: all tail samples equal");
    throw InsufficientDataError("power-law fit needs at least 2 samples >= 1");
  }
  return *best;
}

}  // namespace p2ptopo
