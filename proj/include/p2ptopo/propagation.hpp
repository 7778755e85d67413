#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "p2ptopo/error.hpp"
#include "p2ptopo/generators.hpp"
#include "p2ptopo/graph.hpp"
#include "p2ptopo/metrics.hpp"
#include "p2ptopo/rng.hpp"

namespace p2ptopo {

// ---------------------------------------------------------------------------
// Configuration

struct NodeSpec {
  std::size_t count = 0;
  FitnessDistribution fitness = ConstantFitness{1.0};
  FitnessDistribution uptime = ConstantFitness{1.0};  // must stay within [0, 1]
  double bandwidth = 1.0;
};

// Base latency per class pair in ms; every connection gets base * U[1-j, 1+j].
struct LatencySpec {
  double miner_miner = 10.0;
  double miner_full = 100.0;
  double full_full = 150.0;
  double jitter = 0.2;
};

struct SimConfig {
  NodeSpec miners{20, UniformFitness{0.8, 1.0}, ConstantFitness{1.0}, 10.0};
  NodeSpec full_nodes{200, UniformFitness{0.0, 0.2}, UniformFitness{0.7, 1.0}, 1.0};
  double seed_miner_bias = 0.9;
  std::size_t outbound_cap = 8;
  double churn_rate = 0.3;
  double miner_pin_probability = 0.95;
  double relay_processing_delay = 0.0;  // ms per hop
  double step_length = 1000.0;          // ms
  std::size_t total_steps = 60;
  std::size_t snapshot_interval = 1;    // in steps
  LatencySpec latency;
  double miner_relay_refusal = 0.0;
  double full_relay_refusal = 0.0;
  RngSeed rng{0};

  double horizon() const { return static_cast<double>(total_steps) * step_length; }

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) throw ParameterError(std::string(name) + " must lie in [0,1]");
    };
    prob(seed_miner_bias, "seed_miner_bias");
    prob(churn_rate, "churn_rate");
    prob(miner_pin_probability, "miner_pin_probability");
    prob(miner_relay_refusal, "miner_relay_refusal");
    prob(full_relay_refusal, "full_relay_refusal");
    if (outbound_cap < 1) throw ParameterError("outbound_cap must be >= 1");
    if (!(relay_processing_delay >= 0.0)) throw ParameterError("relay_processing_delay must be >= 0");
    if (!(step_length > 0.0)) throw ParameterError("step_length must be > 0");
    if (snapshot_interval < 1) throw ParameterError("snapshot_interval must be >= 1");
    if (total_steps < snapshot_interval) throw ParameterError("total_steps must cover at least one snapshot interval");
    if (!(latency.miner_miner > 0.0 && latency.miner_full > 0.0 && latency.full_full > 0.0))
      throw ParameterError("latencies must be > 0");
    if (!(latency.jitter >= 0.0 && latency.jitter < 1.0)) throw ParameterError("latency jitter must lie in [0,1)");
    for (const NodeSpec* spec : {&miners, &full_nodes}) {
      p2ptopo::validate(spec->fitness);
      p2ptopo::validate(spec->uptime);
      if (std::holds_alternative<ParetoFitness>(spec->uptime)) throw ParameterError("uptime cannot be Pareto");
      if (const auto* c = std::get_if<ConstantFitness>(&spec->uptime); c && c->value > 1.0)
        throw ParameterError("uptime must be <= 1");
      if (const auto* u = std::get_if<UniformFitness>(&spec->uptime); u && u->hi > 1.0)
        throw ParameterError("uptime must be <= 1");
      if (!(spec->bandwidth > 0.0)) throw ParameterError("bandwidth must be > 0");
    }
    if (seed_miner_bias > 0.0 && miners.count == 0) throw ParameterError("seed_miner_bias > 0 requires miners");
  }
};

struct TxSpec {
  double time = 0.0;
  NodeId origin = 0;
};

// ---------------------------------------------------------------------------
// Outputs

struct PropagationTrace {
  std::size_t tx_id = 0;
  NodeId origin = 0;
  double origin_time = 0.0;
  std::vector<double> first_reception;               // `unreachable` if never received
  std::vector<std::optional<NodeId>> relay_parent;   // empty for origin and unreached
  std::vector<std::size_t> hop_count;
  std::size_t duplicates = 0;
  bool origin_offline = false;

  bool reached(NodeId v) const { return first_reception[v] != unreachable; }
};

struct Snapshot {
  double time = 0.0;
  DirectedGraph graph;
};
using SnapshotSeries = std::vector<Snapshot>;

struct EdgeLifetime {
  NodeId u = 0;  // u < v, symmetrized
  NodeId v = 0;
  double fraction = 0.0;
};

struct PersistenceStats {
  std::vector<EdgeLifetime> edges;
  std::optional<double> miner_miner;
  std::optional<double> miner_full;
  std::optional<double> full_full;
  std::optional<double> full_aggregate;  // every full-node-incident edge
  double miner_mean_degree = 0.0;        // symmetrized, averaged over snapshots
  double full_mean_degree = 0.0;
  std::size_t snapshots = 0;
};

struct SimulationResult {
  SnapshotSeries snapshots;
  std::vector<PropagationTrace> traces;
  PersistenceStats persistence;
  std::size_t events_processed = 0;
};

// ---------------------------------------------------------------------------
// Persistence

inline PersistenceStats persistence(const SnapshotSeries& series) {
  if (series.size() < 2) throw InsufficientDataError("persistence needs at least 2 snapshots");
  const auto& first = series.front().graph;
  std::map<std::pair<NodeId, NodeId>, std::size_t> seen;
  PersistenceStats stats;
  stats.snapshots = series.size();
  double miner_deg = 0.0;
  double full_deg = 0.0;
  const auto miners = first.nodes_of_class(NodeClass::Miner).size();
  const auto fulls = first.node_count() - miners;
  for (const auto& snap : series) {
    const UndirectedGraph u(snap.graph);
    for (NodeId a = 0; a < u.node_count(); ++a) {
      (snap.graph.is_miner(a) ? miner_deg : full_deg) += static_cast<double>(u.degree(a));
      for (const Arc& arc : u.neighbors(a)) {
        if (a < arc.node) ++seen[{a, arc.node}];
      }
    }
  }
  const auto count = static_cast<double>(series.size());
  if (miners > 0) stats.miner_mean_degree = miner_deg / (count * static_cast<double>(miners));
  if (fulls > 0) stats.full_mean_degree = full_deg / (count * static_cast<double>(fulls));

  double sums[3] = {0, 0, 0};
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& [pair, hits] : seen) {
    const double f = static_cast<double>(hits) / count;
    stats.edges.push_back({pair.first, pair.second, f});
    const int cls = static_cast<int>(!first.is_miner(pair.first)) + static_cast<int>(!first.is_miner(pair.second));
    sums[cls] += f;
    ++counts[cls];
  }
  auto mean = [](double s, std::size_t c) -> std::optional<double> {
    if (c == 0) return std::nullopt;
    return s / static_cast<double>(c);
  };
  stats.miner_miner = mean(sums[0], counts[0]);
  stats.miner_full = mean(sums[1], counts[1]);
  stats.full_full = mean(sums[2], counts[2]);
  stats.full_aggregate = mean(sums[1] + sums[2], counts[1] + counts[2]);
  return stats;
}

// ---------------------------------------------------------------------------
// Engine

namespace detail {

struct Connection {
  NodeId initiator = 0;
  bool pinned = false;
  double latency = 1.0;
};

using ConnectionKey = std::pair<NodeId, NodeId>;  // (min, max)

inline ConnectionKey connection_key(NodeId a, NodeId b) { return {std::min(a, b), std::max(a, b)}; }

inline std::uint64_t pack(NodeId a, NodeId b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

// Independent streams per purpose, so that changing one probability does not
// shift the draws of another.
enum Stream : std::uint64_t {
  stream_attributes = 1,
  stream_seeding,
  stream_refill,
  stream_churn,
  stream_uptime,
  stream_refusal,
  stream_bootstrap_latency,
  stream_refill_latency,
};

inline double connection_latency(const SimConfig& cfg, const DirectedGraph& g, NodeId a, NodeId b, Rng& rng) {
  const bool ma = g.is_miner(a);
  const bool mb = g.is_miner(b);
  const double base = ma && mb ? cfg.latency.miner_miner : (ma || mb ? cfg.latency.miner_full : cfg.latency.full_full);
  return base * rng.uniform(1.0 - cfg.latency.jitter, 1.0 + cfg.latency.jitter);
}

struct Network {
  DirectedGraph graph;
  std::map<ConnectionKey, Connection> connections;

  bool connected(NodeId a, NodeId b) const { return connections.contains(connection_key(a, b)); }

  void connect(NodeId initiator, NodeId peer, double latency, bool pinned) {
    connections[connection_key(initiator, peer)] = {initiator, pinned, latency};
    graph.add_edge(initiator, peer, latency);
    graph.add_edge(peer, initiator, latency);
  }

  void disconnect(NodeId a, NodeId b) {
    connections.erase(connection_key(a, b));
    graph.remove_edge(a, b);
    graph.remove_edge(b, a);
  }
};

// Wraps an existing graph. Every symmetrized pair becomes one connection; the
// initiator is the lower id unless only the reverse arc exists.
inline Network adopt(const DirectedGraph& g) {
  Network net{symmetrized(g), {}};
  for (const auto& e : net.graph.edges()) {
    if (e.src < e.dst) {
      const bool forward = g.has_edge(e.src, e.dst);
      net.connections[{e.src, e.dst}] = {forward ? e.src : e.dst, false, e.latency};
    }
  }
  return net;
}

}  // namespace detail

inline std::vector<NodeAttributes> sample_population(const SimConfig& cfg) {
  Rng rng(derive_seed(cfg.rng, detail::stream_attributes));
  std::vector<NodeAttributes> attrs;
  attrs.reserve(cfg.miners.count + cfg.full_nodes.count);
  for (const auto* spec : {&cfg.miners, &cfg.full_nodes}) {
    const NodeClass cls = spec == &cfg.miners ? NodeClass::Miner : NodeClass::FullNode;
    for (std::size_t i = 0; i < spec->count; ++i) {
      NodeAttributes a;
      a.cls = cls;
      a.fitness = sample_fitness(spec->fitness, rng);
      a.uptime = sample_fitness(spec->uptime, rng);
      a.bandwidth = spec->bandwidth;
      attrs.push_back(a);
    }
  }
  return attrs;
}

namespace detail {

inline Network bootstrap_network(const SimConfig& cfg) {
  cfg.validate();
  Network net{DirectedGraph(sample_population(cfg)), {}};
  auto& g = net.graph;
  Rng rng(derive_seed(cfg.rng, stream_seeding));
  Rng lat(derive_seed(cfg.rng, stream_bootstrap_latency));
  const auto miners = g.nodes_of_class(NodeClass::Miner);
  const auto fulls = g.nodes_of_class(NodeClass::FullNode);

  // addnode-style miner peering first.
  for (std::size_t i = 0; i < miners.size(); ++i) {
    for (std::size_t j = i + 1; j < miners.size(); ++j) {
      if (rng.bernoulli(cfg.miner_pin_probability))
        net.connect(miners[i], miners[j], connection_latency(cfg, g, miners[i], miners[j], lat), true);
    }
  }

  std::vector<NodeId> eligible;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    for (std::size_t draw = 0; draw < cfg.outbound_cap; ++draw) {
      const auto& pool = rng.bernoulli(cfg.seed_miner_bias) ? miners : fulls;
      eligible.clear();
      for (NodeId w : pool) {
        if (w != v && !net.connected(v, w)) eligible.push_back(w);
      }
      if (eligible.empty()) continue;
      const NodeId w = eligible[rng.below(eligible.size())];
      net.connect(v, w, connection_latency(cfg, g, v, w, lat), false);
    }
  }
  return net;
}

}  // namespace detail

inline DirectedGraph bootstrap(const SimConfig& cfg) { return detail::bootstrap_network(cfg).graph; }

enum class EventKind : std::uint8_t { TxReceive, TxOriginate, EdgeDrop, EdgeForm, NodeLeave, NodeJoin, SnapshotTick };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::TxReceive;
  std::uint64_t a = 0;  // tx id / node / edge endpoint
  std::uint64_t b = 0;  // node / edge endpoint
  std::uint64_t c = 0;  // relay parent
  std::size_t hops = 0;

  auto order_key() const { return std::tie(time, kind, a, b, c); }
  friend bool operator>(const Event& x, const Event& y) { return x.order_key() > y.order_key(); }
};

namespace detail {

class Engine {
 public:
  Engine(Network net, const SimConfig& cfg, std::span<const TxSpec> schedule)
      : net_(std::move(net)), cfg_(cfg), refill_(derive_seed(cfg.rng, stream_refill)),
        lat_(derive_seed(cfg.rng, stream_refill_latency)) {
    const std::size_t n = net_.graph.node_count();
    for (const auto& tx : schedule) {
      if (tx.origin >= n) throw ParameterError("transaction origin " + std::to_string(tx.origin) + " does not exist");
      if (!(tx.time >= 0.0 && tx.time <= cfg.horizon()))
        throw ParameterError("transaction time outside simulation horizon");
    }
    online_.assign(n, true);
    redraw_online(0, false);
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      PropagationTrace t;
      t.tx_id = i;
      t.origin = schedule[i].origin;
      t.origin_time = schedule[i].time;
      t.first_reception.assign(n, unreachable);
      t.relay_parent.assign(n, std::nullopt);
      t.hop_count.assign(n, 0);
      traces_.push_back(std::move(t));
      queue_.push({schedule[i].time, EventKind::TxOriginate, i, schedule[i].origin, 0, 0});
    }
    for (std::size_t k = 0; k <= cfg.total_steps; k += cfg.snapshot_interval)
      queue_.push({static_cast<double>(k) * cfg.step_length, EventKind::SnapshotTick, k, 0, 0, 0});
  }

  SimulationResult run() {
    std::size_t next_step = 1;
    std::size_t processed = 0;
    for (;;) {
      const double t_step = static_cast<double>(next_step) * cfg_.step_length;
      if (next_step <= cfg_.total_steps && (queue_.empty() || queue_.top().time >= t_step)) {
        schedule_step(next_step++, t_step);
        continue;
      }
      if (queue_.empty()) break;
      const Event e = queue_.top();
      queue_.pop();
      ++processed;
      dispatch(e);
    }
    SimulationResult result;
    result.snapshots = std::move(snapshots_);
    result.traces = std::move(traces_);
    result.persistence = persistence(result.snapshots);
    result.events_processed = processed;
    return result;
  }

 private:
  void redraw_online(std::size_t step, bool emit) {
    const RngSeed seed = derive_seed(cfg_.rng, stream_uptime);
    const double t = static_cast<double>(step) * cfg_.step_length;
    for (NodeId v = 0; v < online_.size(); ++v) {
      const bool up = keyed_uniform(seed, step, v) < net_.graph.attributes(v).uptime;
      if (!emit) {
        online_[v] = up;
      } else if (up != online_[v]) {
        queue_.push({t, up ? EventKind::NodeJoin : EventKind::NodeLeave, v, 0, 0, 0});
      }
    }
  }

  void schedule_step(std::size_t step, double t) {
    const RngSeed seed = derive_seed(cfg_.rng, stream_churn);
    for (const auto& [key, conn] : net_.connections) {
      if (conn.pinned) continue;
      if (net_.graph.is_miner(key.first) && net_.graph.is_miner(key.second)) continue;
      if (keyed_uniform(seed, step, pack(key.first, key.second)) < cfg_.churn_rate)
        queue_.push({t, EventKind::EdgeDrop, key.first, key.second, 0, 0});
    }
    redraw_online(step, true);
  }

  void dispatch(const Event& e) {
    switch (e.kind) {
      case EventKind::TxOriginate: originate(e); break;
      case EventKind::TxReceive: receive(e); break;
      case EventKind::EdgeDrop: drop(e); break;
      case EventKind::EdgeForm: form(e); break;
      case EventKind::NodeLeave: online_[e.a] = false; break;
      case EventKind::NodeJoin: online_[e.a] = true; break;
      case EventKind::SnapshotTick: snapshots_.push_back({e.time, net_.graph}); break;
    }
  }

  void originate(const Event& e) {
    auto& t = traces_[e.a];
    const auto origin = static_cast<NodeId>(e.b);
    t.first_reception[origin] = e.time;
    if (!online_[origin]) {
      t.origin_offline = true;
      return;
    }
    relay(e.a, origin, e.time, 0);
  }

  void receive(const Event& e) {
    auto& t = traces_[e.a];
    const auto v = static_cast<NodeId>(e.b);
    if (!online_[v]) return;  // lost, not delayed
    if (t.reached(v)) {
      ++t.duplicates;
      return;
    }
    t.first_reception[v] = e.time;
    t.relay_parent[v] = static_cast<NodeId>(e.c);
    t.hop_count[v] = e.hops;
    relay(e.a, v, e.time, e.hops);
  }

  void relay(std::size_t tx, NodeId v, double now, std::size_t hops) {
    const double refusal = net_.graph.is_miner(v) ? cfg_.miner_relay_refusal : cfg_.full_relay_refusal;
    if (refusal > 0.0 && keyed_uniform(derive_seed(cfg_.rng, stream_refusal), tx, v) < refusal) return;
    for (const Arc& a : net_.graph.out_arcs(v)) {
      queue_.push({now + a.latency + cfg_.relay_processing_delay, EventKind::TxReceive, tx, a.node, v, hops + 1});
    }
  }

  void drop(const Event& e) {
    const auto a = static_cast<NodeId>(e.a);
    const auto b = static_cast<NodeId>(e.b);
    const auto it = net_.connections.find(connection_key(a, b));
    if (it == net_.connections.end()) return;
    const NodeId initiator = it->second.initiator;
    net_.disconnect(a, b);
    queue_.push({e.time, EventKind::EdgeForm, initiator, a == initiator ? b : a, 0, 0});
  }

  // Fitness-proportional replacement peer; excludes self, current peers and
  // the peer just dropped.
  void form(const Event& e) {
    const auto v = static_cast<NodeId>(e.a);
    const auto dropped = static_cast<NodeId>(e.b);
    const auto& g = net_.graph;
    double total = 0.0;
    std::vector<double> cumulative(g.node_count());
    for (NodeId w = 0; w < g.node_count(); ++w) {
      const bool ok = w != v && w != dropped && !net_.connected(v, w);
      total += ok ? g.attributes(w).fitness : 0.0;
      cumulative[w] = total;
    }
    if (!(total > 0.0)) return;
    const double r = refill_.uniform() * total;
    auto pick = static_cast<NodeId>(std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
    pick = std::min<NodeId>(pick, static_cast<NodeId>(g.node_count() - 1));
    net_.connect(v, pick, connection_latency(cfg_, g, v, pick, lat_), false);
  }

  Network net_;
  SimConfig cfg_;
  Rng refill_;
  Rng lat_;
  std::vector<bool> online_;
  std::vector<PropagationTrace> traces_;
  SnapshotSeries snapshots_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
};

}  // namespace detail

// Simulates on a given initial topology. Node attributes (fitness, uptime)
// come from the graph; the config's node specs are ignored.
inline SimulationResult run_on(const DirectedGraph& initial, const SimConfig& cfg, std::span<const TxSpec> schedule) {
  cfg.validate();
  return detail::Engine(detail::adopt(initial), cfg, schedule).run();
}

inline SimulationResult run(const SimConfig& cfg, std::span<const TxSpec> schedule) {
  return detail::Engine(detail::bootstrap_network(cfg), cfg, schedule).run();
}

// ---------------------------------------------------------------------------
// Reception lag

struct LagSummary {
  std::size_t count = 0;
  double median = 0.0;
  double mean = 0.0;
  double p90 = 0.0;
};

struct LagReport {
  std::optional<LagSummary> miner;
  std::optional<LagSummary> full;
  std::optional<LagSummary> isolated;   // symmetrized degree < 4
  std::optional<LagSummary> connected;  // degree >= 4
  std::size_t unreached = 0;
};

inline constexpr std::size_t isolated_degree = 4;

namespace detail {

// Linear interpolation between order statistics.
inline double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline std::optional<LagSummary> summarize_lags(std::vector<double> xs) {
  if (xs.empty()) return std::nullopt;
  std::sort(xs.begin(), xs.end());
  LagSummary s;
  s.count = xs.size();
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  s.median = quantile(xs, 0.5);
  s.p90 = quantile(xs, 0.9);
  return s;
}

}  // namespace detail

inline LagReport reception_lag_stats(std::span<const PropagationTrace> traces, const DirectedGraph& g) {
  const UndirectedGraph u(g);
  std::vector<double> miner, full, isolated, connected;
  LagReport report;
  for (const auto& t : traces) {
    if (t.first_reception.size() != g.node_count()) throw ParameterError("trace does not match graph size");
    for (NodeId v = 0; v < g.node_count(); ++v) {
      if (v == t.origin) continue;
      if (!t.reached(v)) {
        ++report.unreached;
        continue;
      }
      const double lag = t.first_reception[v] - t.origin_time;
      (g.is_miner(v) ? miner : full).push_back(lag);
      (u.degree(v) < isolated_degree ? isolated : connected).push_back(lag);
    }
  }
  report.miner = detail::summarize_lags(std::move(miner));
  report.full = detail::summarize_lags(std::move(full));
  report.isolated = detail::summarize_lags(std::move(isolated));
  report.connected = detail::summarize_lags(std::move(connected));
  return report;
}

// ---------------------------------------------------------------------------
// Miner backbone

struct BackboneReport {
  bool vacuous = false;  // no miners
  bool miner_subgraph_connected = false;
  bool dominating = false;
  std::size_t fullnode_interior_paths = 0;  // unordered miner pairs
};

inline BackboneReport backbone_check(const DirectedGraph& g) {
  BackboneReport r;
  const auto miners = g.nodes_of_class(NodeClass::Miner);
  if (miners.empty()) {
    r.vacuous = true;
    return r;
  }
  const auto core = induced_subgraph(g, miners);
  r.miner_subgraph_connected = component_count(UndirectedGraph(core.graph)) == 1;

  const UndirectedGraph u(g);
  r.dominating = true;
  for (NodeId v = 0; v < g.node_count() && r.dominating; ++v) {
    if (g.is_miner(v)) continue;
    const auto nbrs = u.neighbors(v);
    r.dominating = std::any_of(nbrs.begin(), nbrs.end(), [&](const Arc& a) { return g.is_miner(a.node); });
  }

  const auto sym = symmetrized(g);
  auto is_full = [&](NodeId v) { return !g.is_miner(v); };
  for (NodeId m : miners) {
    const auto sp = shortest_paths(sym, m, Weight::latency);
    const auto bad = interior_contamination(sp, is_full);
    for (NodeId t : miners) {
      if (t > m && bad[t]) ++r.fullnode_interior_paths;
    }
  }
  return r;
}

}  // namespace p2ptopo
