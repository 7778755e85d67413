#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "p2ptopo/error.hpp"
#include "p2ptopo/generators.hpp"
#include "p2ptopo/graph.hpp"
#include "p2ptopo/metrics.hpp"
#include "p2ptopo/propagation.hpp"
#include "p2ptopo/rng.hpp"
#include "p2ptopo/spectral.hpp"
#include "p2ptopo/structure.hpp"

namespace p2ptopo {

// ---------------------------------------------------------------------------
// Path exclusion

struct ExclusionResult {
  std::size_t total_paths = 0;  // reachable ordered (s, t) pairs, s != t
  std::size_t paths_with_fullnode_interior = 0;
  std::size_t unreachable_pairs = 0;
  double exclusion_fraction = 1.0;
  // Pairs for which the node is interior to at least one shortest path.
  // Filled only when requested.
  std::vector<std::size_t> interior_hits;
};

namespace detail {

inline std::vector<bool> membership(const DirectedGraph& g, std::span<const NodeId> ids, const char* what) {
  if (ids.empty()) throw ParameterError(std::string(what) + " must be nonempty");
  std::vector<bool> in(g.node_count(), false);
  for (NodeId v : ids) {
    if (v >= g.node_count()) throw ParameterError(std::string(what) + " contains unknown node " + std::to_string(v));
    in[v] = true;
  }
  return in;
}

}  // namespace detail

// A pair counts as contaminated when ANY latency-shortest path has a full node
// strictly inside it.
inline ExclusionResult path_exclusion(const DirectedGraph& g, std::span<const NodeId> sources,
                                      std::span<const NodeId> targets, bool per_node_hits = false) {
  const auto src = detail::membership(g, sources, "sources");
  const auto dst = detail::membership(g, targets, "targets");
  const std::size_t n = g.node_count();
  ExclusionResult r;
  if (per_node_hits) r.interior_hits.assign(n, 0);
  auto is_full = [&](NodeId v) { return !g.is_miner(v); };

  const std::size_t words = (n + 63) / 64;
  std::vector<std::uint64_t> ancestors;
  for (NodeId s = 0; s < n; ++s) {
    if (!src[s]) continue;
    const auto sp = shortest_paths(g, s, Weight::latency);
    const auto bad = interior_contamination(sp, is_full);
    for (NodeId t = 0; t < n; ++t) {
      if (!dst[t] || t == s) continue;
      if (!sp.reachable(t)) {
        ++r.unreachable_pairs;
        continue;
      }
      ++r.total_paths;
      if (bad[t]) ++r.paths_with_fullnode_interior;
    }
    if (!per_node_hits) continue;
    // anc[v] = every vertex on some shortest s->v path, excluding v itself.
    ancestors.assign(n * words, 0);
    for (NodeId v : sp.order) {
      std::uint64_t* row = &ancestors[v * words];
      for (NodeId u : sp.preds[v]) {
        const std::uint64_t* pu = &ancestors[u * words];
        for (std::size_t w = 0; w < words; ++w) row[w] |= pu[w];
        row[u / 64] |= std::uint64_t{1} << (u % 64);
      }
    }
    for (NodeId t = 0; t < n; ++t) {
      if (!dst[t] || t == s || !sp.reachable(t)) continue;
      const std::uint64_t* row = &ancestors[t * words];
      for (std::size_t w = 0; w < words; ++w) {
        for (std::uint64_t bits = row[w]; bits != 0; bits &= bits - 1) {
          const auto v = static_cast<NodeId>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
          if (v != s) ++r.interior_hits[v];
        }
      }
    }
  }
  if (r.total_paths > 0)
    r.exclusion_fraction =
        1.0 - static_cast<double>(r.paths_with_fullnode_interior) / static_cast<double>(r.total_paths);
  return r;
}

// ---------------------------------------------------------------------------
// Permutation significance

enum class Statistic {
  interior_hit_count,  // full nodes interior to any latency-shortest path; left-tailed
  miner_perron_mass,   // right-tailed
  triangle_count,      // right-tailed
};

inline const char* to_string(Statistic s) {
  switch (s) {
    case Statistic::interior_hit_count: return "interior_hit_count";
    case Statistic::miner_perron_mass: return "miner_perron_mass";
    case Statistic::triangle_count: return "triangle_count";
  }
  return "?";
}

inline bool left_tailed(Statistic s) { return s == Statistic::interior_hit_count; }

inline double evaluate_statistic(const DirectedGraph& g, Statistic s) {
  switch (s) {
    case Statistic::interior_hit_count: {
      const auto b = betweenness(g, Weight::latency);
      std::size_t hit = 0;
      for (NodeId v = 0; v < g.node_count(); ++v) {
        if (!g.is_miner(v) && b[v] > 0.0) ++hit;
      }
      return static_cast<double>(hit);
    }
    case Statistic::miner_perron_mass:
      return perron_mass(g, g.nodes_of_class(NodeClass::Miner));
    case Statistic::triangle_count:
      return static_cast<double>(count_motifs(UndirectedGraph(g)).triangles);
  }
  return 0.0;
}

struct PermutationTest {
  Statistic statistic = Statistic::interior_hit_count;
  double observed = 0.0;
  double null_mean = 0.0;
  double null_std = 0.0;      // sample standard deviation
  std::optional<double> z;    // empty when null_std == 0
  double p_upper_bound = 1.0;
  std::size_t samples = 0;
  std::size_t as_extreme = 0; // null values at least as extreme as observed
  std::vector<double> null_values;
};

inline PermutationTest summarize_permutation(double observed, std::vector<double> nulls, bool left) {
  PermutationTest t;
  t.observed = observed;
  t.samples = nulls.size();
  for (double x : nulls) t.null_mean += x;
  t.null_mean /= static_cast<double>(nulls.size());
  double ss = 0.0;
  for (double x : nulls) ss += (x - t.null_mean) * (x - t.null_mean);
  t.null_std = nulls.size() > 1 ? std::sqrt(ss / static_cast<double>(nulls.size() - 1)) : 0.0;
  if (t.null_std > 0.0) t.z = (observed - t.null_mean) / t.null_std;
  for (double x : nulls) {
    if (left ? x <= observed : x >= observed) ++t.as_extreme;
  }
  t.p_upper_bound = static_cast<double>(1 + t.as_extreme) / static_cast<double>(nulls.size() + 1);
  t.null_values = std::move(nulls);
  return t;
}

inline constexpr std::size_t swaps_per_edge = 10;

// Null graphs from degree-preserving rewiring with 10|E| swap attempts each;
// sample i uses derive_seed(seed, i).
inline PermutationTest permutation_significance(const DirectedGraph& g, Statistic statistic, std::size_t samples,
                                                RngSeed seed) {
  if (samples < 20) throw ParameterError("permutation_significance needs at least 20 samples");
  const double observed = evaluate_statistic(g, statistic);
  std::vector<double> nulls(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto null = degree_preserving_rewire(g, swaps_per_edge * g.edge_count(), derive_seed(seed, i));
    nulls[i] = evaluate_statistic(null.graph, statistic);
  }
  auto t = summarize_permutation(observed, std::move(nulls), left_tailed(statistic));
  t.statistic = statistic;
  return t;
}

// ---------------------------------------------------------------------------
// Targeted removal

enum class Ranking { degree, betweenness, eigenvector };

inline const char* to_string(Ranking r) {
  switch (r) {
    case Ranking::degree: return "degree";
    case Ranking::betweenness: return "betweenness";
    case Ranking::eigenvector: return "eigenvector";
  }
  return "?";
}

struct RobustnessPoint {
  std::size_t removed = 0;
  std::size_t largest_component = 0;
  double reachable_pair_fraction = 0.0;  // over the original n(n-1) ordered pairs
  std::optional<NodeId> last_removed;
};

struct RobustnessCurve {
  Ranking ranking = Ranking::degree;
  bool adaptive = true;
  bool truncated = false;
  std::vector<RobustnessPoint> points;  // points[0] is the intact graph
};

inline std::vector<double> centrality_scores(const DirectedGraph& g, Ranking r) {
  switch (r) {
    case Ranking::degree: {
      const UndirectedGraph u(g);
      std::vector<double> d(u.node_count());
      for (NodeId v = 0; v < u.node_count(); ++v) d[v] = static_cast<double>(u.degree(v));
      return d;
    }
    case Ranking::betweenness:
      return betweenness(g, Weight::latency);
    case Ranking::eigenvector:
      if (g.edge_count() == 0) return std::vector<double>(g.node_count(), 0.0);
      return eigenvector_centrality(g);
  }
  return {};
}

namespace detail {

inline RobustnessPoint measure(const DirectedGraph& g, std::size_t removed, std::size_t original_n) {
  const UndirectedGraph u(g);
  const auto labels = component_labels(u);
  std::vector<std::size_t> sizes(u.node_count(), 0);
  for (auto l : labels) ++sizes[l];
  RobustnessPoint p;
  p.removed = removed;
  double pairs = 0.0;
  for (auto s : sizes) {
    p.largest_component = std::max(p.largest_component, s);
    pairs += static_cast<double>(s) * static_cast<double>(s == 0 ? 0 : s - 1);
  }
  const double total = static_cast<double>(original_n) * static_cast<double>(original_n - 1);
  p.reachable_pair_fraction = total > 0.0 ? pairs / total : 0.0;
  return p;
}

// Highest score wins; ties go to the smaller id.
inline std::size_t top_index(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

}  // namespace detail

// Removes the top-ranked remaining node `steps` times, re-ranking after every
// removal unless `adaptive` is false.
inline RobustnessCurve robustness_curve(const DirectedGraph& g, Ranking ranking, std::size_t steps,
                                        bool adaptive = true) {
  RobustnessCurve curve;
  curve.ranking = ranking;
  curve.adaptive = adaptive;
  const std::size_t n = g.node_count();
  if (steps > n) {
    curve.truncated = true;
    steps = n;
  }
  curve.points.push_back(detail::measure(g, 0, n));

  std::vector<NodeId> static_order;
  if (!adaptive) {
    const auto scores = centrality_scores(g, ranking);
    static_order.resize(n);
    for (NodeId v = 0; v < n; ++v) static_order[v] = v;
    std::stable_sort(static_order.begin(), static_order.end(),
                     [&](NodeId a, NodeId b) { return scores[a] > scores[b]; });
  }

  std::vector<NodeId> removed;
  Subgraph current{g, {}};
  current.original.resize(n);
  for (NodeId v = 0; v < n; ++v) current.original[v] = v;
  for (std::size_t step = 0; step < steps; ++step) {
    NodeId victim = 0;
    if (adaptive) {
      victim = current.original[detail::top_index(centrality_scores(current.graph, ranking))];
    } else {
      victim = static_order[step];
    }
    removed.push_back(victim);
    current = remove_nodes(g, removed);
    auto p = detail::measure(current.graph, removed.size(), n);
    p.last_removed = victim;
    curve.points.push_back(p);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Full-node removal

struct TxReplay {
  std::size_t tx_id = 0;
  NodeId origin = 0;             // id in the original graph
  std::optional<NodeId> replay_origin;
  bool reoriginated = false;     // origin was a full node
  double max_abs_delta = 0.0;    // over miners reached in both runs
  std::size_t reach_mismatches = 0;
};

struct RemovalInvarianceReport {
  bool miners_connected_before = false;
  bool miners_connected_after = false;
  bool counterexample = false;  // connectivity lost
  std::size_t miner_pairs = 0;
  std::size_t changed_distance_pairs = 0;
  double max_distance_delta = 0.0;  // finite pairs only
  double max_reception_delta = 0.0; // miner-origin transactions only
  std::vector<TxReplay> transactions;
  std::optional<double> diameter_before;  // empty when no pair is reachable
  std::optional<double> diameter_after;
  double spectral_radius_before = 0.0;
  double spectral_radius_after = 0.0;
};

// Distances are latency-weighted on the symmetrized graph, matching the
// simulator's bidirectional connections.
inline RemovalInvarianceReport removal_invariance(const DirectedGraph& g, std::span<const PropagationTrace> traces_before,
                                                  const SimConfig& cfg) {
  const auto miners = g.nodes_of_class(NodeClass::Miner);
  if (miners.size() < 2) throw ParameterError("removal_invariance needs at least 2 miners");
  const auto fulls = g.nodes_of_class(NodeClass::FullNode);
  const auto reduced = remove_nodes(g, fulls);
  std::vector<std::size_t> new_id(g.node_count(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < reduced.original.size(); ++i) new_id[reduced.original[i]] = i;

  RemovalInvarianceReport r;
  const auto before = symmetrized(g);
  const auto after = symmetrized(reduced.graph);

  const auto labels_before = component_labels(UndirectedGraph(before));
  r.miners_connected_before = std::all_of(miners.begin(), miners.end(),
                                          [&](NodeId m) { return labels_before[m] == labels_before[miners[0]]; });
  r.miners_connected_after = component_count(UndirectedGraph(after)) == 1;
  r.counterexample = r.miners_connected_before && !r.miners_connected_after;

  for (NodeId m : miners) {
    const auto d0 = shortest_paths(before, m, Weight::latency).dist;
    const auto d1 = shortest_paths(after, static_cast<NodeId>(new_id[m]), Weight::latency).dist;
    for (NodeId t : miners) {
      if (t <= m) continue;
      ++r.miner_pairs;
      const double a = d0[t];
      const double b = d1[new_id[t]];
      if (a != b) {
        ++r.changed_distance_pairs;
        if (a != unreachable && b != unreachable) r.max_distance_delta = std::max(r.max_distance_delta, std::abs(b - a));
      }
    }
  }

  // Replay the schedule on G'.
  std::vector<TxSpec> schedule;
  for (const auto& t : traces_before) {
    if (t.first_reception.size() != g.node_count()) throw ParameterError("trace does not match graph size");
    TxReplay rep;
    rep.tx_id = t.tx_id;
    rep.origin = t.origin;
    if (g.is_miner(t.origin)) {
      rep.replay_origin = t.origin;
    } else {
      rep.reoriginated = true;
      const auto sp = shortest_paths(before, t.origin, Weight::latency);
      double best = unreachable;
      for (NodeId m : miners) {
        if (sp.dist[m] < best) {
          best = sp.dist[m];
          rep.replay_origin = m;
        }
      }
    }
    if (rep.replay_origin) schedule.push_back({t.origin_time, static_cast<NodeId>(new_id[*rep.replay_origin])});
    r.transactions.push_back(rep);
  }
  const auto replay = run_on(reduced.graph, cfg, schedule);
  std::size_t k = 0;
  for (std::size_t i = 0; i < r.transactions.size(); ++i) {
    auto& rep = r.transactions[i];
    if (!rep.replay_origin) continue;
    const auto& t0 = traces_before[i];
    const auto& t1 = replay.traces[k++];
    for (NodeId m : miners) {
      const bool r0 = t0.reached(m);
      const bool r1 = t1.reached(static_cast<NodeId>(new_id[m]));
      if (r0 != r1) {
        ++rep.reach_mismatches;
      } else if (r0) {
        rep.max_abs_delta = std::max(rep.max_abs_delta, std::abs(t1.first_reception[new_id[m]] - t0.first_reception[m]));
      }
    }
    if (!rep.reoriginated) r.max_reception_delta = std::max(r.max_reception_delta, rep.max_abs_delta);
  }

  auto diameter = [](const DirectedGraph& h) -> std::optional<double> {
    try {
      return diameter_and_eccentricity(h, Weight::latency).diameter;
    } catch (const UndefinedError&) {
      return std::nullopt;
    }
  };
  r.diameter_before = diameter(before);
  r.diameter_after = diameter(after);
  if (before.edge_count() > 0) r.spectral_radius_before = spectral_radius(g);
  if (after.edge_count() > 0) r.spectral_radius_after = spectral_radius(reduced.graph);
  return r;
}

// ---------------------------------------------------------------------------
// k-core class audit

struct ShellComposition {
  std::size_t k = 0;
  std::size_t miners = 0;
  std::size_t full_nodes = 0;
};

struct KcoreAudit {
  std::vector<ShellComposition> shells;  // only nonempty shells, ascending k
  std::vector<NodeId> violations;        // full nodes with coreness >= threshold
  std::size_t threshold = 3;
};

inline KcoreAudit kcore_class_audit(const CorenessMap& coreness, std::span<const NodeClass> classes,
                                    std::size_t threshold = 3) {
  if (coreness.coreness.size() != classes.size()) throw ParameterError("coreness and class vectors differ in size");
  KcoreAudit audit;
  audit.threshold = threshold;
  std::vector<ShellComposition> shells(coreness.max_k + 1);
  for (NodeId v = 0; v < classes.size(); ++v) {
    const auto k = coreness.coreness[v];
    shells[k].k = k;
    if (classes[v] == NodeClass::Miner) {
      ++shells[k].miners;
    } else {
      ++shells[k].full_nodes;
      if (k >= threshold) audit.violations.push_back(v);
    }
  }
  for (const auto& s : shells) {
    if (s.miners + s.full_nodes > 0) audit.shells.push_back(s);
  }
  return audit;
}

inline std::vector<NodeClass> node_classes(const DirectedGraph& g) {
  std::vector<NodeClass> c(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) c[v] = g.node_class(v);
  return c;
}

}  // namespace p2ptopo
