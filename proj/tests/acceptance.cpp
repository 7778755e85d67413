// Acceptance run: one PASS/FAIL line per criterion. Exit status is 0 unless
// the harness itself breaks; verdicts are reported, not enforced.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "oracle_suites.hpp"
#include "p2ptopo/p2ptopo.hpp"

using namespace p2ptopo;
using nlohmann::json;

namespace {

constexpr std::uint64_t graph_seed = 42;
constexpr std::uint64_t permutation_seed = 42;
constexpr std::size_t null_samples = 200;

struct Verdict {
  bool pass = false;
  std::string summary;
  json report;  // everything measured; compared byte-for-byte by criterion 8
};

std::vector<NodeId> all_nodes(const DirectedGraph& g) {
  std::vector<NodeId> v(g.node_count());
  std::iota(v.begin(), v.end(), NodeId{0});
  return v;
}

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

// ---------------------------------------------------------------------------

Verdict golden_fixtures() {
  Verdict v;
  struct Want {
    const char* name;
    io::LabeledGraph lg;
    std::vector<std::size_t> out;
    std::size_t edges;
    bool acyclic;
  };
  const Want wants[] = {{"btc", fixtures::btc_sample(), {2, 2, 1, 2, 1, 0}, 8, true},
                        {"bsv", fixtures::bsv_sample(), {3, 3, 2, 3, 2, 1}, 14, false}};
  v.pass = true;
  for (const auto& w : wants) {
    // Round-trip through text so the parser is on the path.
    const auto g = io::parse_matrix(io::format_matrix(w.lg)).graph;
    const auto out = degrees(g, DegreeDirection::out);
    const bool acyclic = is_acyclic(g);
    v.pass = v.pass && out == w.out && g.edge_count() == w.edges && acyclic == w.acyclic;
    v.report[w.name] = {{"out_degrees", out}, {"edges", g.edge_count()}, {"acyclic", acyclic}};
  }
  v.summary = "out-degrees, edge counts 8/14, acyclic true/false";
  return v;
}

Verdict oracle_equivalence() {
  Verdict v;
  v.pass = true;
  std::size_t instances = 0;
  std::string bad;
  for (const auto& r : oracle::suites::required()) {
    v.pass = v.pass && r.ok();
    instances += r.instances;
    v.report[r.name] = {{"instances", r.instances}, {"mismatches", r.mismatches}};
    if (!r.ok() && bad.empty()) bad = "; " + r.name + ": " + r.first;
  }
  v.summary = std::to_string(instances) + " instances across 6 suites" + bad;
  return v;
}

Verdict weighted_core_pipeline() {
  Verdict v;
  const auto lg = io::parse_edges(io::format_edges(fixtures::weighted_core()), io::format_nodes(fixtures::weighted_core()));
  const NodeId f1 = *lg.find("F1");
  const NodeId m5 = *lg.find("M5");
  const double dist = shortest_paths(lg.graph, f1, Weight::latency).dist[m5];

  SimConfig cfg;
  cfg.churn_rate = 0.0;
  cfg.total_steps = 1;
  cfg.relay_processing_delay = 0.0;
  cfg.rng = RngSeed{graph_seed};
  const std::vector<TxSpec> tx{{0.0, f1}};
  const double arrival = run_on(lg.graph, cfg, tx).traces.at(0).first_reception[m5];
  const double mst = minimum_spanning_tree(lg.graph).total_weight;

  v.pass = dist == 66.0 && arrival == 66.0 && mst == 110.0;
  v.report = {{"dijkstra_f1_m5", dist}, {"flood_f1_m5", arrival}, {"mst_weight", mst}};
  v.summary = "F1->M5 " + io::format_number(dist) + " ms, flood " + io::format_number(arrival) + " ms, MST " +
              io::format_number(mst);
  return v;
}

Verdict generator_statistics() {
  Verdict v;
  std::vector<double> gammas;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto g = bianconi_barabasi(20000, 4, ConstantFitness{1.0}, RngSeed{graph_seed + s - 1});
    const auto fit = fit_power_law(degrees(g, DegreeDirection::total));
    gammas.push_back(fit.gamma);
    v.report["fits"].push_back({{"seed", graph_seed + s - 1}, {"gamma", fit.gamma}, {"xmin", fit.xmin}});
  }
  auto sorted = gammas;
  std::sort(sorted.begin(), sorted.end());
  const double med = sorted[2];
  v.report["median_gamma"] = med;
  v.pass = med >= 2.6 && med <= 3.4;
  v.summary = "median gamma " + fmt(med, 3) + " over 5 seeds";
  return v;
}

Verdict claim_reproduction() {
  Verdict v;
  const CorePeripheryConfig cfg{50, 450, 0.8, 2, 10.0, 200.0};
  const auto g = core_periphery(cfg, RngSeed{graph_seed});
  const auto miners = g.nodes_of_class(NodeClass::Miner);
  const auto fulls = g.nodes_of_class(NodeClass::FullNode);

  const double excl = path_exclusion(g, all_nodes(g), miners).exclusion_fraction;
  const double mass = perron_mass(g, miners);
  const auto perm = permutation_significance(g, Statistic::interior_hit_count, null_samples, RngSeed{permutation_seed});

  bool pr_ok = true;
  json pr = json::array();
  for (double d : {0.80, 0.85, 0.90, 0.95}) {
    const auto p = pagerank(g, d);
    double lo = 1.0, hi = 0.0;
    for (NodeId m : miners) lo = std::min(lo, p[m]);
    for (NodeId f : fulls) hi = std::max(hi, p[f]);
    pr_ok = pr_ok && lo > hi;
    pr.push_back({{"damping", d}, {"min_miner", lo}, {"max_full", hi}});
  }
  const auto audit = kcore_class_audit(k_core(g), node_classes(g), 3);

  const bool a = excl >= 0.98;
  const bool b = mass >= 0.97;
  const bool c = perm.z && std::abs(*perm.z) > 5.0;
  const bool e = audit.violations.empty();
  v.pass = a && b && c && pr_ok && e;
  v.report = {{"exclusion_fraction", excl},
              {"perron_mass", mass},
              {"permutation",
               {{"observed", perm.observed},
                {"null_mean", perm.null_mean},
                {"null_std", perm.null_std},
                {"z", perm.z ? json(*perm.z) : json(nullptr)},
                {"samples", perm.samples}}},
              {"pagerank", pr},
              {"fullnode_coreness_ge3", audit.violations.size()}};
  auto flag = [](bool ok) { return ok ? "ok" : "FAIL"; };
  v.summary = std::string("a excl ") + fmt(excl) + " " + flag(a) + "; b mass " + fmt(mass) + " " + flag(b) +
              "; c |z| " + (perm.z ? fmt(std::abs(*perm.z), 2) : std::string("undef")) + " " + flag(c) +
              "; d pagerank " + flag(pr_ok) + "; e k>=3 full " + std::to_string(audit.violations.size()) + " " +
              flag(e);
  return v;
}

Verdict simulation_orderings() {
  Verdict v;
  double mm_deg = 0.0, full_deg = 0.0, mm_pers = 0.0, full_pers = 0.0;
  std::size_t min_snaps = static_cast<std::size_t>(-1);
  constexpr int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    SimConfig cfg;
    cfg.rng = RngSeed{graph_seed + static_cast<std::uint64_t>(s)};
    const auto r = run(cfg, std::vector<TxSpec>{});
    const auto& p = r.persistence;
    min_snaps = std::min(min_snaps, p.snapshots);
    mm_deg += p.miner_mean_degree;
    full_deg += p.full_mean_degree;
    mm_pers += p.miner_miner.value_or(0.0);
    full_pers += p.full_aggregate.value_or(1.0);
  }
  mm_deg /= seeds;
  full_deg /= seeds;
  mm_pers /= seeds;
  full_pers /= seeds;
  v.pass = min_snaps >= 50 && mm_deg > 3.0 * full_deg && mm_pers > 0.7 && full_pers < 0.4;
  v.report = {{"seeds", seeds},           {"min_snapshots", min_snaps},     {"miner_mean_degree", mm_deg},
              {"full_mean_degree", full_deg}, {"miner_miner_persistence", mm_pers}, {"full_persistence", full_pers}};
  v.summary = "degree " + fmt(mm_deg, 2) + " vs " + fmt(full_deg, 2) + ", persistence " + fmt(mm_pers, 3) + " vs " +
              fmt(full_pers, 3) + ", " + std::to_string(min_snaps) + " snapshots";
  return v;
}

Verdict removal_invariance_check() {
  Verdict v;
  SimConfig replay;
  replay.churn_rate = 0.0;
  replay.total_steps = 1;
  replay.rng = RngSeed{graph_seed};

  std::size_t qualifying = 0, skipped = 0, changed = 0;
  double max_dist = 0.0, max_recv = 0.0;
  auto consider = [&](const DirectedGraph& g) {
    const auto miners = g.nodes_of_class(NodeClass::Miner);
    const auto b = backbone_check(g);
    if (miners.size() < 2 || !b.dominating || b.fullnode_interior_paths != 0) {
      ++skipped;
      return;
    }
    ++qualifying;
    std::vector<TxSpec> txs;
    for (std::size_t i = 0; i < miners.size(); i += std::max<std::size_t>(1, miners.size() / 8))
      txs.push_back({0.0, miners[i]});
    const auto before = run_on(g, replay, txs);
    const auto r = removal_invariance(g, before.traces, replay);
    changed += r.changed_distance_pairs;
    max_dist = std::max(max_dist, r.max_distance_delta);
    max_recv = std::max(max_recv, r.max_reception_delta);
  };

  for (std::uint64_t s = 0; s < 10; ++s) consider(core_periphery({}, RngSeed{graph_seed + s}));
  for (std::uint64_t s = 0; s < 5; ++s) {
    SimConfig cfg;
    cfg.rng = RngSeed{graph_seed + s};
    cfg.total_steps = 10;
    const auto r = run(cfg, std::vector<TxSpec>{});
    consider(r.snapshots.back().graph);
  }
  std::mt19937_64 rng(graph_seed);
  for (int i = 0; i < 200; ++i) consider(oracle::random_graph(12, 0.3, rng, 9, 0.6));

  v.pass = qualifying > 0 && changed == 0 && max_dist == 0.0 && max_recv == 0.0;
  v.report = {{"qualifying", qualifying},
              {"skipped", skipped},
              {"changed_distance_pairs", changed},
              {"max_distance_delta", max_dist},
              {"max_reception_delta", max_recv}};
  v.summary = std::to_string(qualifying) + " clean-backbone graphs, " + std::to_string(changed) +
              " changed distances, max reception delta " + io::format_number(max_recv);
  return v;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "golden fixtures", 1.0, golden_fixtures},
      {2, "oracle equivalence", 120.0, oracle_equivalence},
      {3, "weighted core pipeline", 1.0, weighted_core_pipeline},
      {4, "generator statistics", 60.0, generator_statistics},
      {5, "claim reproduction", 120.0, claim_reproduction},
      {6, "simulation orderings", 90.0, simulation_orderings},
      {7, "removal invariance", 30.0, removal_invariance_check},
  };

  using clock = std::chrono::steady_clock;
  std::vector<std::string> first_reports;
  std::vector<double> first_times;
  int failed = 0;
  try {
    for (const auto& c : criteria) {
      const auto t0 = clock::now();
      const auto v = c.run();
      const double secs = std::chrono::duration<double>(clock::now() - t0).count();
      const bool ok = v.pass && secs < c.budget_s;
      failed += ok ? 0 : 1;
      std::printf("%s %d %s: %s (%.2f s / %.0f s)\n", ok ? "PASS" : "FAIL", c.id, c.name, v.summary.c_str(), secs,
                  c.budget_s);
      std::fflush(stdout);
      first_reports.push_back(v.report.dump());
      first_times.push_back(secs);
    }

    // Criterion 8: every run above, again, with the same seeds.
    std::size_t identical = 0;
    bool in_budget = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
      const auto t0 = clock::now();
      const auto again = criteria[i].run().report.dump();
      const double secs = std::chrono::duration<double>(clock::now() - t0).count();
      in_budget = in_budget && secs < criteria[i].budget_s;
      identical += again == first_reports[i] ? 1 : 0;
    }
    const bool ok = identical == criteria.size() && in_budget;
    failed += ok ? 0 : 1;
    std::printf("%s 8 determinism: %zu/%zu reports byte-identical on rerun\n", ok ? "PASS" : "FAIL", identical,
                criteria.size());
  } catch (const std::exception& e) {
    std::printf("ERROR acceptance harness: %s\n", e.what());
    return 1;
  }
  std::printf("%d of 8 criteria failed\n", failed);
  return 0;
}
