#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "p2ptopo/p2ptopo.hpp"

using namespace p2ptopo;

namespace {

std::vector<NodeId> all_nodes(const DirectedGraph& g) {
  std::vector<NodeId> v(g.node_count());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

SimConfig static_config() {
  SimConfig cfg;
  cfg.churn_rate = 0.0;
  cfg.total_steps = 1;
  cfg.rng = RngSeed{1};
  return cfg;
}

}  // namespace

// ---------------------------------------------------------------------------
// Path exclusion

TEST(PathExclusion, CliquePendantsPendantsAreNeverInterior) {
  const auto g = fixtures::clique_pendants().graph;
  const auto r = path_exclusion(g, g.nodes_of_class(NodeClass::FullNode), g.nodes_of_class(NodeClass::Miner));
  EXPECT_EQ(r.exclusion_fraction, 1.0);
  EXPECT_EQ(r.total_paths, 36u);
  EXPECT_EQ(r.unreachable_pairs, 0u);
}

TEST(PathExclusion, ForcedFullNodeInterior) {
  const auto lg = fixtures::detail::build(2, 1, {{"M1", "F1", 1}, {"F1", "M2", 1}});
  const std::vector<NodeId> m1{*lg.find("M1")};
  const std::vector<NodeId> m2{*lg.find("M2")};
  const auto r = path_exclusion(lg.graph, m1, m2);
  EXPECT_EQ(r.total_paths, 1u);
  EXPECT_EQ(r.exclusion_fraction, 0.0);
}

TEST(PathExclusion, AnyTiedPathContaminates) {
  // Two equal routes M1->M3: through M2 and through F1.
  const auto lg = fixtures::detail::build(
      3, 1, {{"M1", "M2", 1}, {"M2", "M3", 1}, {"M1", "F1", 1}, {"F1", "M3", 1}}, true);
  const std::vector<NodeId> s{*lg.find("M1")};
  const std::vector<NodeId> t{*lg.find("M3")};
  EXPECT_EQ(path_exclusion(lg.graph, s, t).paths_with_fullnode_interior, 1u);
}

TEST(PathExclusion, CorePeripheryDefaults) {
  const auto g = core_periphery({}, RngSeed{42});
  const auto r = path_exclusion(g, all_nodes(g), g.nodes_of_class(NodeClass::Miner));
  EXPECT_GE(r.exclusion_fraction, 0.98);
}

TEST(PathExclusion, InteriorHitsSkipEndpoints) {
  const auto g = oracle::path(4);
  const auto r = path_exclusion(g, all_nodes(g), all_nodes(g), true);
  // Node 1 is interior to 0<->2, 0<->3 both ways; node 0 never.
  EXPECT_EQ(r.interior_hits, (std::vector<std::size_t>{0, 4, 4, 0}));
}

TEST(PathExclusion, RejectsEmptyOrUnknownSets) {
  const auto g = oracle::path(3);
  const std::vector<NodeId> none;
  const std::vector<NodeId> some{0};
  const std::vector<NodeId> bogus{7};
  EXPECT_THROW((void)path_exclusion(g, none, some), ParameterError);
  EXPECT_THROW((void)path_exclusion(g, some, bogus), ParameterError);
}

// ---------------------------------------------------------------------------
// Permutation significance

TEST(Permutation, ConstantStatisticHasNoZ) {
  const auto t = summarize_permutation(3.0, std::vector<double>(25, 3.0), false);
  EXPECT_FALSE(t.z.has_value());
  EXPECT_EQ(t.p_upper_bound, 1.0);
  EXPECT_EQ(t.null_std, 0.0);
}

TEST(Permutation, ObservedAtNullMeanGivesZeroZ) {
  const auto t = summarize_permutation(2.0, {1.0, 2.0, 3.0, 1.0, 3.0}, false);
  ASSERT_TRUE(t.z.has_value());
  EXPECT_EQ(*t.z, 0.0);
  EXPECT_NEAR(t.null_std, 1.0, 1e-15);
}

TEST(Permutation, PValueFloorAndTail) {
  std::vector<double> nulls(99);
  std::iota(nulls.begin(), nulls.end(), 1.0);
  const auto right = summarize_permutation(1000.0, nulls, false);
  EXPECT_EQ(right.as_extreme, 0u);
  EXPECT_EQ(right.p_upper_bound, 0.01);
  const auto left = summarize_permutation(0.0, nulls, true);
  EXPECT_EQ(left.p_upper_bound, 0.01);
  EXPECT_LT(*left.z, 0.0);
}

TEST(Permutation, DeterministicAndSignConsistent) {
  std::mt19937_64 rng(31);
  const auto g = oracle::random_undirected(25, 0.25, rng);
  const auto a = permutation_significance(g, Statistic::triangle_count, 20, RngSeed{5});
  const auto b = permutation_significance(g, Statistic::triangle_count, 20, RngSeed{5});
  EXPECT_EQ(a.null_values, b.null_values);
  EXPECT_EQ(a.observed, evaluate_statistic(g, Statistic::triangle_count));
  if (a.z) {
    EXPECT_EQ(*a.z > 0, a.observed > a.null_mean);
  }
  EXPECT_GE(a.p_upper_bound, 1.0 / 21.0);
  EXPECT_THROW((void)permutation_significance(g, Statistic::triangle_count, 19, RngSeed{5}), ParameterError);
}

TEST(Permutation, InteriorHitCountOnCliquePendants) {
  EXPECT_EQ(evaluate_statistic(fixtures::clique_pendants().graph, Statistic::interior_hit_count), 0.0);
  const auto lg = fixtures::detail::build(2, 1, {{"M1", "F1", 1}, {"F1", "M2", 1}});
  EXPECT_EQ(evaluate_statistic(lg.graph, Statistic::interior_hit_count), 1.0);
}

// ---------------------------------------------------------------------------
// Targeted removal

TEST(Robustness, StarShattersOnHubRemoval) {
  const auto c = robustness_curve(oracle::star(5), Ranking::degree, 1);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[0].largest_component, 6u);
  EXPECT_EQ(c.points[1].largest_component, 1u);
  EXPECT_EQ(c.points[1].last_removed, NodeId{0});
  EXPECT_EQ(c.points[0].reachable_pair_fraction, 1.0);
  EXPECT_EQ(c.points[1].reachable_pair_fraction, 0.0);
}

TEST(Robustness, CompleteGraphLosesOne) {
  for (auto r : {Ranking::degree, Ranking::betweenness, Ranking::eigenvector}) {
    const auto c = robustness_curve(oracle::complete(6), r, 1);
    EXPECT_EQ(c.points[1].largest_component, 5u) << to_string(r);
  }
}

TEST(Robustness, StepsBeyondNodeCountAreTruncated) {
  const auto c = robustness_curve(oracle::path(3), Ranking::degree, 10);
  EXPECT_TRUE(c.truncated);
  EXPECT_EQ(c.points.size(), 4u);
  EXPECT_EQ(c.points.back().largest_component, 0u);
}

TEST(Robustness, MinerRemovalCollapsesCorePeriphery) {
  CorePeripheryConfig cfg;
  cfg.miner_count = 20;
  cfg.full_count = 180;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = core_periphery(cfg, RngSeed{seed});
    const auto c = robustness_curve(g, Ranking::eigenvector, 20);
    std::set<NodeId> removed;
    for (std::size_t i = 1; i < c.points.size(); ++i) removed.insert(*c.points[i].last_removed);
    const auto miners = g.nodes_of_class(NodeClass::Miner);
    EXPECT_EQ(removed, std::set<NodeId>(miners.begin(), miners.end())) << "seed " << seed;
    EXPECT_GT(c.points.front().largest_component, 5 * c.points.back().largest_component);

    // 20 random full nodes leave the core in one piece.
    std::mt19937_64 rng(seed);
    auto fulls = g.nodes_of_class(NodeClass::FullNode);
    std::shuffle(fulls.begin(), fulls.end(), rng);
    fulls.resize(20);
    EXPECT_GE(largest_component_size(UndirectedGraph(remove_nodes(g, fulls).graph)), 20u);
  }
}

TEST(Robustness, LargestComponentNeverGrows) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_graph(30, 0.1, rng);
    for (auto r : {Ranking::degree, Ranking::betweenness, Ranking::eigenvector}) {
      for (bool adaptive : {true, false}) {
        const auto c = robustness_curve(g, r, 15, adaptive);
        for (std::size_t i = 1; i < c.points.size(); ++i)
          EXPECT_LE(c.points[i].largest_component, c.points[i - 1].largest_component);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Full-node removal invariance

TEST(RemovalInvariance, CliquePendantsDistancesUnchanged) {
  const auto g = fixtures::clique_pendants().graph;
  const std::vector<TxSpec> txs{{0.0, 0}, {0.0, 8}};
  const auto before = run_on(g, static_config(), txs);
  const auto r = removal_invariance(g, before.traces, static_config());
  EXPECT_TRUE(r.miners_connected_before && r.miners_connected_after);
  EXPECT_FALSE(r.counterexample);
  EXPECT_EQ(r.miner_pairs, 15u);
  EXPECT_EQ(r.changed_distance_pairs, 0u);
  EXPECT_EQ(r.max_reception_delta, 0.0);
  ASSERT_EQ(r.transactions.size(), 2u);
  EXPECT_TRUE(r.transactions[1].reoriginated);
  EXPECT_EQ(r.transactions[1].replay_origin, NodeId{1});  // F3 hangs off M2
  ASSERT_TRUE(r.diameter_before && r.diameter_after);
  EXPECT_GT(*r.diameter_before, *r.diameter_after);
}

TEST(RemovalInvariance, FullNodeBridgeIsACounterexample) {
  const auto lg = fixtures::detail::build(2, 1, {{"M1", "F1", 1}, {"F1", "M2", 1}});
  const std::vector<TxSpec> txs{{0.0, 0}};
  const auto before = run_on(lg.graph, static_config(), txs);
  const auto r = removal_invariance(lg.graph, before.traces, static_config());
  EXPECT_TRUE(r.counterexample);
  EXPECT_EQ(r.changed_distance_pairs, 1u);
  EXPECT_EQ(r.transactions[0].reach_mismatches, 1u);
  EXPECT_FALSE(r.diameter_after.has_value());
}

TEST(RemovalInvariance, CorePeripheryDefaultsReplayExactly) {
  const auto g = core_periphery({}, RngSeed{42});
  std::vector<TxSpec> txs;
  for (NodeId m = 0; m < 50; m += 5) txs.push_back({0.0, m});
  const auto before = run_on(g, static_config(), txs);
  const auto r = removal_invariance(g, before.traces, static_config());
  EXPECT_EQ(r.max_reception_delta, 0.0);
  EXPECT_EQ(r.changed_distance_pairs, 0u);
  EXPECT_GT(r.spectral_radius_before, r.spectral_radius_after);
}

TEST(RemovalInvariance, CleanBackboneImpliesIdenticalDistances) {
  std::mt19937_64 rng(40);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto g = oracle::random_graph(12, 0.3, rng, 9, 0.6);
    if (g.nodes_of_class(NodeClass::Miner).size() < 2) continue;
    const auto b = backbone_check(g);
    if (!b.dominating || b.fullnode_interior_paths != 0) continue;
    ++checked;
    const auto r = removal_invariance(g, std::vector<PropagationTrace>{}, static_config());
    EXPECT_EQ(r.changed_distance_pairs, 0u);
  }
  EXPECT_GT(checked, 5);
}

// ---------------------------------------------------------------------------
// k-core class audit

TEST(KcoreAudit, CliquePendants) {
  const auto g = fixtures::clique_pendants().graph;
  const auto a = kcore_class_audit(k_core(g), node_classes(g));
  ASSERT_EQ(a.shells.size(), 2u);
  EXPECT_EQ(a.shells[0].k, 1u);
  EXPECT_EQ(a.shells[0].full_nodes, 6u);
  EXPECT_EQ(a.shells[0].miners, 0u);
  EXPECT_EQ(a.shells[1].k, 5u);
  EXPECT_EQ(a.shells[1].miners, 6u);
  EXPECT_TRUE(a.violations.empty());
}

TEST(KcoreAudit, MinerCliqueAndFullNodeClique) {
  const auto miners = fixtures::detail::build(4, 0, {{"M1", "M2", 1}, {"M1", "M3", 1}, {"M1", "M4", 1},
                                                     {"M2", "M3", 1}, {"M2", "M4", 1}, {"M3", "M4", 1}});
  EXPECT_TRUE(kcore_class_audit(k_core(miners.graph), node_classes(miners.graph)).violations.empty());
  const auto k4 = oracle::complete(4);
  EXPECT_EQ(kcore_class_audit(k_core(k4), node_classes(k4)).violations.size(), 4u);
  EXPECT_THROW((void)kcore_class_audit(k_core(k4), std::vector<NodeClass>(3)), ParameterError);
}
