#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "p2ptopo/analysis.hpp"
#include "p2ptopo/fixtures.hpp"
#include "p2ptopo/generators.hpp"
#include "p2ptopo/io.hpp"
#include "p2ptopo/metrics.hpp"
#include "p2ptopo/propagation.hpp"
#include "p2ptopo/spectral.hpp"
#include "p2ptopo/structure.hpp"

namespace p2ptopo::cli {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* version = "0.3.0";
inline constexpr const char* report_schema = "p2ptopo.report/1";
inline constexpr const char* experiment_schema = "p2ptopo.experiment/1";
inline constexpr const char* params_schema = "p2ptopo.params/1";
inline constexpr const char* sim_schema = "p2ptopo.sim/1";

enum ExitCode { ok = 0, usage = 1, data = 2, convergence = 3 };

class UsageError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Strict JSON config reading: every key must be consumed.

class ConfigReader {
 public:
  ConfigReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw DataError(where_ + ": expected a JSON object");
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw DataError(where_ + ": key '" + key + "' has the wrong type");
    }
  }

  std::optional<json> child(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.contains(k)) throw DataError(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

inline void check_schema(ConfigReader& r, const json& j, const char* expected, const std::string& where) {
  const auto s = r.get<std::string>("schema", "");
  if (s != expected) throw DataError(where + ": schema must be \"" + expected + "\"" + (j.contains("schema") ? "" : " (missing)"));
}

inline FitnessDistribution parse_distribution(const json& j, const std::string& where) {
  ConfigReader r(j, where);
  const auto kind = r.get<std::string>("kind", "");
  FitnessDistribution d;
  if (kind == "constant") {
    d = ConstantFitness{r.get("value", 1.0)};
  } else if (kind == "uniform") {
    d = UniformFitness{r.get("lo", 0.0), r.get("hi", 1.0)};
  } else if (kind == "pareto") {
    d = ParetoFitness{r.get("shape", 2.0), r.get("scale", 1.0)};
  } else {
    throw DataError(where + ": kind must be constant, uniform or pareto");
  }
  r.finish();
  validate(d);
  return d;
}

inline json distribution_json(const FitnessDistribution& d) {
  return std::visit(
      [](const auto& x) -> json {
        using D = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<D, ConstantFitness>) {
          return {{"kind", "constant"}, {"value", x.value}};
        } else if constexpr (std::is_same_v<D, UniformFitness>) {
          return {{"kind", "uniform"}, {"lo", x.lo}, {"hi", x.hi}};
        } else {
          return {{"kind", "pareto"}, {"shape", x.shape}, {"scale", x.scale}};
        }
      },
      d);
}

inline json load_json(const fs::path& path) {
  try {
    return json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// Parses a p2ptopo.sim/1 document. `initial_graph`, when present, is resolved
// relative to the config file.
struct SimFile {
  SimConfig config;
  std::optional<fs::path> initial_graph;
};

inline SimFile parse_sim_config(const json& j, const fs::path& base_dir) {
  const std::string where = "simulation config";
  ConfigReader r(j, where);
  check_schema(r, j, sim_schema, where);
  SimFile f;
  auto& c = f.config;
  auto node_spec = [&](const char* key, NodeSpec& spec) {
    if (auto sub = r.child(key)) {
      ConfigReader n(*sub, where + "." + key);
      spec.count = n.get("count", spec.count);
      if (auto d = n.child("fitness")) spec.fitness = parse_distribution(*d, where + "." + key + ".fitness");
      if (auto d = n.child("uptime")) spec.uptime = parse_distribution(*d, where + "." + key + ".uptime");
      spec.bandwidth = n.get("bandwidth", spec.bandwidth);
      n.finish();
    }
  };
  node_spec("miners", c.miners);
  node_spec("full_nodes", c.full_nodes);
  c.seed_miner_bias = r.get("seed_miner_bias", c.seed_miner_bias);
  c.outbound_cap = r.get("outbound_cap", c.outbound_cap);
  c.churn_rate = r.get("churn_rate", c.churn_rate);
  c.miner_pin_probability = r.get("miner_pin_probability", c.miner_pin_probability);
  c.relay_processing_delay = r.get("relay_processing_delay_ms", c.relay_processing_delay);
  c.step_length = r.get("step_length_ms", c.step_length);
  c.total_steps = r.get("total_steps", c.total_steps);
  c.snapshot_interval = r.get("snapshot_interval", c.snapshot_interval);
  if (auto lat = r.child("latency")) {
    ConfigReader l(*lat, where + ".latency");
    c.latency.miner_miner = l.get("miner_miner_ms", c.latency.miner_miner);
    c.latency.miner_full = l.get("miner_full_ms", c.latency.miner_full);
    c.latency.full_full = l.get("full_full_ms", c.latency.full_full);
    c.latency.jitter = l.get("jitter", c.latency.jitter);
    l.finish();
  }
  if (auto ref = r.child("relay_refusal")) {
    ConfigReader l(*ref, where + ".relay_refusal");
    c.miner_relay_refusal = l.get("miner", c.miner_relay_refusal);
    c.full_relay_refusal = l.get("full", c.full_relay_refusal);
    l.finish();
  }
  if (auto g = r.child("initial_graph")) {
    if (!g->is_string()) throw DataError(where + ": initial_graph must be a path string");
    f.initial_graph = base_dir / g->get<std::string>();
  }
  r.finish();
  return f;
}

inline json sim_config_json(const SimConfig& c) {
  auto spec = [](const NodeSpec& s) {
    return json{{"count", s.count},
                {"fitness", distribution_json(s.fitness)},
                {"uptime", distribution_json(s.uptime)},
                {"bandwidth", s.bandwidth}};
  };
  return {{"schema", sim_schema},
          {"miners", spec(c.miners)},
          {"full_nodes", spec(c.full_nodes)},
          {"seed_miner_bias", c.seed_miner_bias},
          {"outbound_cap", c.outbound_cap},
          {"churn_rate", c.churn_rate},
          {"miner_pin_probability", c.miner_pin_probability},
          {"relay_processing_delay_ms", c.relay_processing_delay},
          {"step_length_ms", c.step_length},
          {"total_steps", c.total_steps},
          {"snapshot_interval", c.snapshot_interval},
          {"latency",
           {{"miner_miner_ms", c.latency.miner_miner},
            {"miner_full_ms", c.latency.miner_full},
            {"full_full_ms", c.latency.full_full},
            {"jitter", c.latency.jitter}}},
          {"relay_refusal", {{"miner", c.miner_relay_refusal}, {"full", c.full_relay_refusal}}}};
}

inline std::vector<TxSpec> parse_schedule(std::string_view csv, const io::LabeledGraph& lg) {
  std::vector<TxSpec> out;
  const auto rows = io::detail::lines(csv);
  bool header = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto line = io::detail::trim(rows[i]);
    if (line.empty()) continue;
    const auto f = io::detail::split(line, ',');
    if (!header) {
      if (f.size() != 2 || f[0] != "time_ms" || f[1] != "origin")
        throw io::ParseError("schedule header must be time_ms,origin", i + 1);
      header = true;
      continue;
    }
    if (f.size() != 2) throw io::ParseError("expected 2 fields", i + 1);
    const auto t = io::parse_number(f[0]);
    if (!t) throw io::ParseError("bad time", i + 1, 1);
    const auto v = lg.find(f[1]);
    if (!v) throw io::ParseError("unknown origin '" + std::string(f[1]) + "'", i + 1, 2);
    out.push_back({*t, *v});
  }
  if (!header) throw io::ParseError("missing schedule header", 1);
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline json make_report(const std::string& command, const json& config, const json& seeds, json results) {
  return {{"schema", report_schema},
          {"tool", "p2ptopo"},
          {"version", version},
          {"command", command},
          {"config", config},
          {"config_hash", io::hex64(io::fnv1a(config.dump()))},
          {"seeds", seeds},
          {"results", std::move(results)}};
}

inline void emit(const json& doc, const std::string& out_path, std::ostream& out) {
  const auto text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    io::write_file_atomic(out_path, text);
  }
}

inline json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

inline json lag_json(const std::optional<LagSummary>& s) {
  if (!s) return nullptr;
  return {{"count", s->count}, {"median_ms", s->median}, {"mean_ms", s->mean}, {"p90_ms", s->p90}};
}

inline json names_of(const io::LabeledGraph& lg, std::span<const NodeId> ids) {
  json a = json::array();
  for (NodeId v : ids) a.push_back(lg.names[v]);
  return a;
}

inline std::vector<NodeId> select_nodes(const io::LabeledGraph& lg, const std::string& spec) {
  const auto& g = lg.graph;
  std::vector<NodeId> out;
  if (spec == "all") {
    for (NodeId v = 0; v < g.node_count(); ++v) out.push_back(v);
  } else if (spec == "miners") {
    out = g.nodes_of_class(NodeClass::Miner);
  } else if (spec == "full") {
    out = g.nodes_of_class(NodeClass::FullNode);
  } else {
    for (auto name : io::detail::split(spec, ',')) {
      const auto v = lg.find(name);
      if (!v) throw DataError("unknown node '" + std::string(name) + "' in node selection");
      out.push_back(*v);
    }
  }
  return out;
}

// Per-node table shared by `metrics` and the centrality CSV.
struct NodeTable {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

inline NodeTable centrality_table(const io::LabeledGraph& lg, Weight weight, std::optional<RngSeed> seed) {
  const auto& g = lg.graph;
  const auto bc = betweenness(g, weight);
  const auto cc = closeness(g, weight);
  std::vector<double> ev(g.node_count(), 0.0);
  if (g.edge_count() > 0) ev = eigenvector_centrality(g);
  const auto pr = pagerank(g);
  const auto core = k_core(g);
  NodeTable t;
  t.columns = {"node", "name", "class", "in_deg", "out_deg", "betweenness", "closeness", "eigenvector", "pagerank",
               "coreness"};
  std::optional<Partition> part;
  if (seed && g.edge_count() > 0) {
    part = louvain_communities(g, *seed);
    t.columns.push_back("community");
  }
  for (NodeId v = 0; v < g.node_count(); ++v) {
    std::vector<json> row{v,     lg.names[v], to_string(g.node_class(v)), g.in_degree(v), g.out_degree(v),
                          bc[v], cc[v],       ev[v],                      pr[v],          core.coreness[v]};
    if (part) row.push_back(part->community[v]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::string table_csv(const NodeTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      const auto& x = row[i];
      if (x.is_string()) {
        out += x.get<std::string>();
      } else if (x.is_number_float()) {
        out += io::format_number(x.get<double>());
      } else {
        out += x.dump();
      }
    }
    out += "\n";
  }
  return out;
}

inline std::string traces_csv(std::span<const PropagationTrace> traces, const io::LabeledGraph& lg) {
  std::string out = "tx_id,node,first_reception_ms,hop_count,relay_parent\n";
  for (const auto& t : traces) {
    for (NodeId v = 0; v < lg.graph.node_count(); ++v) {
      if (!t.reached(v)) continue;
      out += std::to_string(t.tx_id) + "," + lg.names[v] + "," + io::format_number(t.first_reception[v]) + "," +
             std::to_string(t.hop_count[v]) + "," + (t.relay_parent[v] ? lg.names[*t.relay_parent[v]] : "") + "\n";
    }
  }
  return out;
}

template <typename F>
json guarded(F&& f) {
  try {
    return f();
  } catch (const UndefinedError& e) {
    return json{{"undefined", e.what()}};
  }
}

// ---------------------------------------------------------------------------
// Subcommands

struct Options {
  std::string model, params, in, out, out_dir, config, schedule, dir, sources = "all", targets = "miners",
      ranking = "degree", statistic = "interior_hit_count", weight = "latency", centrality_csv;
  std::optional<std::uint64_t> seed;
  std::size_t permutations = 0;
  std::size_t steps = 10;
  std::size_t null_samples = 100;
  bool static_ranking = false;
};

inline Weight parse_weight(const std::string& w) { return w == "hop" ? Weight::hop : Weight::latency; }

inline RngSeed require_seed(const Options& o, const char* command) {
  if (!o.seed) throw UsageError(std::string(command) + " is randomized and requires --seed");
  return RngSeed{*o.seed};
}

inline json seeds_json(const Options& o) { return o.seed ? json{{"seed", *o.seed}} : json::object(); }

inline int cmd_generate(const Options& o, std::ostream&) {
  const RngSeed seed = require_seed(o, "generate");
  json params = json::object();
  if (!o.params.empty()) params = load_json(o.params);
  ConfigReader r(params, "params");
  if (params.contains("schema") || !o.params.empty()) check_schema(r, params, params_schema, "params");
  DirectedGraph g(0);
  json echo{{"model", o.model}};
  auto fitness = [&]() -> FitnessDistribution {
    if (auto f = r.child("fitness")) return parse_distribution(*f, "params.fitness");
    return ConstantFitness{1.0};
  };
  if (o.model == "bb") {
    const auto n = r.get<std::size_t>("n", 1000);
    const auto m = r.get<std::size_t>("m", 4);
    const auto fit = fitness();
    r.finish();
    echo.update({{"n", n}, {"m", m}, {"fitness", distribution_json(fit)}});
    g = bianconi_barabasi(n, m, fit, seed);
  } else if (o.model == "ws") {
    const auto n = r.get<std::size_t>("n", 1000);
    const auto k = r.get<std::size_t>("k", 6);
    const auto p = r.get("p", 0.1);
    const auto fit = fitness();
    r.finish();
    echo.update({{"n", n}, {"k", k}, {"p", p}, {"fitness", distribution_json(fit)}});
    g = small_world_fitness(n, k, p, fit, seed);
  } else if (o.model == "er") {
    const auto n = r.get<std::size_t>("n", 1000);
    const auto p = r.get("p", 0.01);
    r.finish();
    echo.update({{"n", n}, {"p", p}});
    g = erdos_renyi(n, p, seed);
  } else {
    CorePeripheryConfig c;
    c.miner_count = r.get("miners", c.miner_count);
    c.full_count = r.get("full_nodes", c.full_count);
    c.core_density = r.get("core_density", c.core_density);
    c.periphery_links = r.get("periphery_links", c.periphery_links);
    c.core_latency = r.get("core_latency_ms", c.core_latency);
    c.periphery_latency = r.get("periphery_latency_ms", c.periphery_latency);
    r.finish();
    echo.update({{"miners", c.miner_count},
                 {"full_nodes", c.full_count},
                 {"core_density", c.core_density},
                 {"periphery_links", c.periphery_links},
                 {"core_latency_ms", c.core_latency},
                 {"periphery_latency_ms", c.periphery_latency}});
    g = core_periphery(c, seed);
  }
  io::save_graph(o.out, io::label(std::move(g)));
  return ok;
}

inline int cmd_metrics(const Options& o, std::ostream& out) {
  const auto lg = io::load_graph(o.in);
  const auto& g = lg.graph;
  const Weight w = parse_weight(o.weight);
  std::optional<RngSeed> seed;
  if (o.seed) seed = RngSeed{*o.seed};
  const auto table = centrality_table(lg, w, seed);
  if (!o.centrality_csv.empty()) io::write_file_atomic(o.centrality_csv, table_csv(table));

  json results;
  results["node_count"] = g.node_count();
  results["edge_count"] = g.edge_count();
  results["acyclic"] = is_acyclic(g);
  results["density"] = guarded([&] { return json(edge_density(g)); });
  const auto apl = average_path_length(g, w);
  results["path_length"] = {{"mean", apl.mean},
                            {"reachable_pairs", apl.reachable_pairs},
                            {"total_pairs", apl.total_pairs},
                            {"reachable_fraction", apl.reachable_fraction}};
  results["diameter"] = diameter_and_eccentricity(g, w).diameter;
  const auto cl = clustering(g);
  results["clustering"] = {{"global", cl.global}, {"triangles", cl.triangles}};
  results["assortativity"] = guarded([&] { return json(assortativity(g)); });
  results["power_law"] = guarded([&] {
    const auto k = degrees(g, DegreeDirection::total);
    const auto fit = fit_power_law(k);
    return json{{"gamma", fit.gamma}, {"xmin", fit.xmin}, {"ks", fit.ks_statistic}, {"n_tail", fit.n_tail}};
  });
  json nodes = json::array();
  for (const auto& row : table.rows) {
    json r = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[table.columns[i]] = row[i];
    nodes.push_back(std::move(r));
  }
  results["nodes"] = std::move(nodes);
  const json config{{"input", o.in}, {"weight", o.weight}};
  emit(make_report("metrics", config, seeds_json(o), std::move(results)), o.out, out);
  return ok;
}

inline int cmd_spectral(const Options& o, std::ostream& out) {
  const auto lg = io::load_graph(o.in);
  const auto& g = lg.graph;
  json results;
  results["summary"] = guarded([&] {
    const auto s = laplacian_connectivity(g);
    return json{{"spectral_radius", s.spectral_radius},
                {"spectral_gap", s.spectral_gap},
                {"algebraic_connectivity", s.algebraic_connectivity}};
  });
  const auto miners = g.nodes_of_class(NodeClass::Miner);
  results["perron_mass_miners"] = guarded([&] {
    return json{{"inverse_latency", perron_mass(g, miners, MatrixSemantics::inverse_latency)},
                {"binary", perron_mass(g, miners, MatrixSemantics::binary)}};
  });
  results["eigenvector"] = guarded([&] {
    const auto e = symmetric_eigenpair(g, MatrixSemantics::binary);
    return json{{"value", e.value}, {"iterations", e.iterations}, {"residual", e.residual}, {"vector", e.vector}};
  });
  json pr = json::array();
  for (double d : {0.80, 0.85, 0.90, 0.95}) {
    const auto p = pagerank(g, d);
    double min_miner = 2.0;
    double max_full = -1.0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
      if (g.is_miner(v)) {
        min_miner = std::min(min_miner, p[v]);
      } else {
        max_full = std::max(max_full, p[v]);
      }
    }
    pr.push_back({{"damping", d}, {"scores", p}, {"miners_outrank_full", min_miner > max_full}});
  }
  results["pagerank"] = std::move(pr);
  emit(make_report("spectral", {{"input", o.in}}, seeds_json(o), std::move(results)), o.out, out);
  return ok;
}

inline json forest_json(const io::LabeledGraph& lg, const SpanningForest& f) {
  json edges = json::array();
  for (const auto& e : f.edges) edges.push_back({lg.names[e.u], lg.names[e.v], e.weight});
  return {{"edges", edges}, {"total_weight", f.total_weight}, {"forest", f.forest}};
}

inline int cmd_structure(const Options& o, std::ostream& out) {
  const auto lg = io::load_graph(o.in);
  const auto& g = lg.graph;
  json results;
  const auto core = k_core(g);
  results["coreness"] = core.coreness;
  results["max_core"] = core.max_k;
  const auto audit = kcore_class_audit(core, node_classes(g));
  json shells = json::array();
  for (const auto& s : audit.shells) shells.push_back({{"k", s.k}, {"miners", s.miners}, {"full_nodes", s.full_nodes}});
  results["kcore_audit"] = {{"shells", shells}, {"violations", names_of(lg, audit.violations)}};
  results["articulation_points"] = names_of(lg, articulation_points(g));
  results["mst"] = forest_json(lg, minimum_spanning_tree(g, MstScope::whole_graph));
  results["mst_miners"] = forest_json(lg, minimum_spanning_tree(g, MstScope::miner_subgraph));
  results["mst_fullnode_bridging"] = mst_fullnode_bridging(g);
  const auto bb = backbone_check(g);
  results["backbone"] = {{"vacuous", bb.vacuous},
                         {"miner_subgraph_connected", bb.miner_subgraph_connected},
                         {"dominating", bb.dominating},
                         {"fullnode_interior_paths", bb.fullnode_interior_paths}};
  const auto motifs = count_motifs(UndirectedGraph(g));
  results["motifs"] = {{"triangles", motifs.triangles}, {"four_stars", motifs.claws}};
  if (o.seed && g.edge_count() > 0) {
    const RngSeed seed{*o.seed};
    const auto p = louvain_communities(g, seed);
    results["communities"] = {{"membership", p.community}, {"modularity", p.modularity}};
    if (g.node_count() >= 2) {
      const auto m = motif_census(g, o.null_samples, derive_seed(seed, 1));
      results["motif_census"] = {{"null_samples", m.null_samples},
                                 {"triangle", {{"null_mean", m.null_mean_triangle},
                                               {"null_std", m.null_std_triangle},
                                               {"z", optional_json(m.z_triangle)}}},
                                 {"four_star", {{"null_mean", m.null_mean_four_star},
                                                {"null_std", m.null_std_four_star},
                                                {"z", optional_json(m.z_four_star)}}}};
    }
  }
  json config{{"input", o.in}};
  if (o.seed) config["null_samples"] = o.null_samples;
  emit(make_report("structure", config, seeds_json(o), std::move(results)), o.out, out);
  return ok;
}

inline int cmd_simulate(const Options& o, std::ostream&) {
  const RngSeed seed = require_seed(o, "simulate");
  const fs::path cfg_path = o.config;
  auto file = parse_sim_config(load_json(cfg_path), cfg_path.parent_path());
  file.config.rng = seed;
  file.config.validate();

  io::LabeledGraph initial{DirectedGraph(0), {}};
  if (file.initial_graph) {
    initial = io::load_graph(*file.initial_graph);
  } else {
    initial = io::label(bootstrap(file.config));
  }
  const auto schedule = parse_schedule(io::read_file(o.schedule), initial);
  const auto result = file.initial_graph ? run_on(initial.graph, file.config, schedule) : run(file.config, schedule);

  const fs::path dir = o.out_dir;
  fs::create_directories(dir / "snapshots");
  io::write_file_atomic(dir / "traces.csv", traces_csv(result.traces, initial));
  json manifest{{"schema", "p2ptopo.snapshots/1"}, {"snapshots", json::array()}};
  for (std::size_t i = 0; i < result.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%04zu.csv", i);
    io::save_graph(dir / "snapshots" / name, {result.snapshots[i].graph, initial.names});
    manifest["snapshots"].push_back({{"index", i}, {"time_ms", result.snapshots[i].time}, {"file", name}});
  }
  io::write_file_atomic(dir / "snapshots" / "manifest.json", manifest.dump(2) + "\n");

  const auto& p = result.persistence;
  const auto lag = reception_lag_stats(result.traces, result.snapshots.front().graph);
  const auto bb = backbone_check(result.snapshots.back().graph);
  json results{
      {"events_processed", result.events_processed},
      {"snapshots", result.snapshots.size()},
      {"persistence",
       {{"miner_miner", optional_json(p.miner_miner)},
        {"miner_full", optional_json(p.miner_full)},
        {"full_full", optional_json(p.full_full)},
        {"full_aggregate", optional_json(p.full_aggregate)},
        {"miner_mean_degree", p.miner_mean_degree},
        {"full_mean_degree", p.full_mean_degree}}},
      {"reception_lag",
       {{"miner", lag_json(lag.miner)},
        {"full", lag_json(lag.full)},
        {"isolated", lag_json(lag.isolated)},
        {"connected", lag_json(lag.connected)},
        {"unreached", lag.unreached}}},
      {"final_backbone",
       {{"miner_subgraph_connected", bb.miner_subgraph_connected},
        {"dominating", bb.dominating},
        {"fullnode_interior_paths", bb.fullnode_interior_paths}}}};
  json config = sim_config_json(file.config);
  config["schedule"] = o.schedule;
  if (file.initial_graph) config["initial_graph"] = file.initial_graph->generic_string();
  emit(make_report("simulate", config, seeds_json(o), std::move(results)), (dir / "simulate.json").string(),
       std::cout);
  return ok;
}

inline Statistic parse_statistic(const std::string& s) {
  if (s == "interior_hit_count") return Statistic::interior_hit_count;
  if (s == "miner_perron_mass") return Statistic::miner_perron_mass;
  if (s == "triangle_count") return Statistic::triangle_count;
  throw UsageError("unknown statistic '" + s + "'");
}

inline int cmd_exclusion(const Options& o, std::ostream& out) {
  const auto lg = io::load_graph(o.in);
  const auto sources = select_nodes(lg, o.sources);
  const auto targets = select_nodes(lg, o.targets);
  const auto ex = path_exclusion(lg.graph, sources, targets, true);
  json hits = json::object();
  for (NodeId v = 0; v < lg.graph.node_count(); ++v) {
    if (ex.interior_hits[v] > 0) hits[lg.names[v]] = ex.interior_hits[v];
  }
  json results{{"total_paths", ex.total_paths},
               {"paths_with_fullnode_interior", ex.paths_with_fullnode_interior},
               {"unreachable_pairs", ex.unreachable_pairs},
               {"exclusion_fraction", ex.exclusion_fraction},
               {"interior_hits", hits}};
  json config{{"input", o.in}, {"sources", o.sources}, {"targets", o.targets}, {"permutations", o.permutations}};
  if (o.permutations > 0) {
    const RngSeed seed = require_seed(o, "exclusion with --permutations");
    const auto stat = parse_statistic(o.statistic);
    const auto t = permutation_significance(lg.graph, stat, o.permutations, seed);
    results["permutation"] = {{"statistic", to_string(stat)},
                              {"observed", t.observed},
                              {"null_mean", t.null_mean},
                              {"null_std", t.null_std},
                              {"z", optional_json(t.z)},
                              {"p_upper_bound", t.p_upper_bound},
                              {"samples", t.samples}};
    config["statistic"] = o.statistic;
  }
  emit(make_report("exclusion", config, seeds_json(o), std::move(results)), o.out, out);
  return ok;
}

inline int cmd_robustness(const Options& o, std::ostream& out) {
  const auto lg = io::load_graph(o.in);
  Ranking ranking = Ranking::degree;
  if (o.ranking == "betweenness") ranking = Ranking::betweenness;
  if (o.ranking == "eigenvector") ranking = Ranking::eigenvector;
  const auto curve = robustness_curve(lg.graph, ranking, o.steps, !o.static_ranking);
  json points = json::array();
  for (const auto& p : curve.points) {
    points.push_back({{"removed", p.removed},
                      {"largest_component", p.largest_component},
                      {"reachable_pair_fraction", p.reachable_pair_fraction},
                      {"node", p.last_removed ? json(lg.names[*p.last_removed]) : json(nullptr)}});
  }
  json results{{"truncated", curve.truncated}, {"points", points}};
  json config{{"input", o.in}, {"ranking", o.ranking}, {"steps", o.steps}, {"adaptive", !o.static_ranking}};
  emit(make_report("robustness", config, json::object(), std::move(results)), o.out, out);
  return ok;
}

inline int cmd_report(const Options& o, std::ostream& out) {
  const fs::path dir = o.dir;
  if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  json artifacts = json::object();
  json seeds = json::object();
  std::string hashes;
  for (const auto& f : files) {
    const auto j = load_json(f);
    if (!j.is_object() || j.value("schema", "") != report_schema) continue;
    const auto rel = fs::relative(f, dir).generic_string();
    hashes += j.value("config_hash", "");
    const json file_seeds = j.value("seeds", json::object());
    for (const auto& [k, v] : file_seeds.items()) seeds[rel + ":" + k] = v;
    artifacts[rel] = j;
  }
  if (artifacts.empty()) throw DataError("no p2ptopo reports found under " + dir.string());
  json doc{{"schema", experiment_schema},
           {"tool", "p2ptopo"},
           {"version", version},
           {"config_hash", io::hex64(io::fnv1a(hashes))},
           {"seeds", seeds},
           {"artifacts", artifacts}};
  emit(doc, o.out.empty() ? (dir / "experiment.json").string() : o.out, out);
  return ok;
}

inline int cmd_fixtures(const Options& o, std::ostream& out) {
  const fs::path dir = o.out_dir.empty() ? fs::path(".") : fs::path(o.out_dir);
  fs::create_directories(dir);
  for (const auto& [name, lg] : fixtures::all()) {
    io::save_graph(dir / name, lg);
    out << (dir / name).generic_string() << "\n";
  }
  return ok;
}

inline bool verbose() {
  const char* v = std::getenv("P2PTOPO_LOG");
  return v != nullptr && std::string(v) == "debug";
}

// Entry point. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Peer-to-peer relay topology laboratory", "p2ptopo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version);
  Options o;

  auto* gen = app.add_subcommand("generate", "Generate a synthetic topology");
  gen->add_option("--model", o.model, "Generator")->required()->check(CLI::IsMember({"bb", "ws", "er", "coreper"}));
  gen->add_option("--params", o.params, "Parameter JSON (p2ptopo.params/1)");
  gen->add_option("--seed", o.seed, "RNG seed");
  gen->add_option("--out", o.out, "Output graph (.mat, .csv or .json)")->required();

  auto input = [&](CLI::App* sub) {
    sub->add_option("--in", o.in, "Input graph (.mat, .csv or .json)")->required();
    sub->add_option("--out", o.out, "Report path (default: stdout)");
  };
  auto* met = app.add_subcommand("metrics", "Path, clustering, degree and centrality metrics");
  input(met);
  met->add_option("--weight", o.weight, "Path weight")->check(CLI::IsMember({"hop", "latency"}));
  met->add_option("--seed", o.seed, "Seed for community labels");
  met->add_option("--centrality-csv", o.centrality_csv, "Also write the per-node table as CSV");
  auto* spe = app.add_subcommand("spectral", "Eigenvector, PageRank and Laplacian spectrum");
  input(spe);
  auto* str = app.add_subcommand("structure", "k-core, cut vertices, spanning trees, communities, motifs");
  input(str);
  str->add_option("--seed", o.seed, "Seed for communities and motif nulls");
  str->add_option("--null-samples", o.null_samples, "Motif null samples")->check(CLI::Range(2, 1000000));

  auto* sim = app.add_subcommand("simulate", "Run the propagation simulator");
  sim->add_option("--config", o.config, "Simulation JSON (p2ptopo.sim/1)")->required();
  sim->add_option("--tx-schedule", o.schedule, "CSV time_ms,origin")->required();
  sim->add_option("--out-dir", o.out_dir, "Output directory")->required();
  sim->add_option("--seed", o.seed, "RNG seed");

  auto* exc = app.add_subcommand("exclusion", "Shortest-path exclusion of full nodes");
  input(exc);
  exc->add_option("--sources", o.sources, "all | miners | full | comma-separated names");
  exc->add_option("--targets", o.targets, "all | miners | full | comma-separated names");
  exc->add_option("--permutations", o.permutations, "Null samples (0 = skip, else >= 20)");
  exc->add_option("--statistic", o.statistic, "Permutation statistic")
      ->check(CLI::IsMember({"interior_hit_count", "miner_perron_mass", "triangle_count"}));
  exc->add_option("--seed", o.seed, "RNG seed");

  auto* rob = app.add_subcommand("robustness", "Largest component under targeted removal");
  input(rob);
  rob->add_option("--ranking", o.ranking, "Attack ranking")
      ->check(CLI::IsMember({"degree", "betweenness", "eigenvector"}));
  rob->add_option("--steps", o.steps, "Nodes to remove");
  rob->add_flag("--static", o.static_ranking, "Rank once instead of after every removal");

  auto* rep = app.add_subcommand("report", "Merge reports in a directory into one experiment report");
  rep->add_option("--dir", o.dir, "Directory to scan")->required();
  rep->add_option("--out", o.out, "Output (default: <dir>/experiment.json)");

  auto* fix = app.add_subcommand("fixtures", "Write the reference fixture files");
  fix->add_option("--out-dir", o.out_dir, "Directory (default: current)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return usage;
  }

  const std::map<CLI::App*, std::function<int()>> handlers{
      {gen, [&] { return cmd_generate(o, out); }},   {met, [&] { return cmd_metrics(o, out); }},
      {spe, [&] { return cmd_spectral(o, out); }},   {str, [&] { return cmd_structure(o, out); }},
      {sim, [&] { return cmd_simulate(o, out); }},   {exc, [&] { return cmd_exclusion(o, out); }},
      {rob, [&] { return cmd_robustness(o, out); }}, {rep, [&] { return cmd_report(o, out); }},
      {fix, [&] { return cmd_fixtures(o, out); }}};
  try {
    for (const auto& [sub, handler] : handlers) {
      if (sub->parsed()) {
        if (verbose()) err << "p2ptopo: running " << sub->get_name() << "\n";
        return handler();
      }
    }
    return usage;
  } catch (const UsageError& e) {
    err << "p2ptopo: " << e.what() << "\n";
    return usage;
  } catch (const ConvergenceError& e) {
    err << "p2ptopo: convergence failure: " << e.what() << " (residual " << e.residual() << ")\n";
    return convergence;
  } catch (const Error& e) {
    err << "p2ptopo: " << e.what() << "\n";
    return data;
  } catch (const fs::filesystem_error& e) {
    err << "p2ptopo: " << e.what() << "\n";
    return data;
  }
}

}  // namespace p2ptopo::cli
