#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "p2ptopo/p2ptopo.hpp"

using namespace p2ptopo;

namespace {

AdjacencyMatrix symmetric_binary(const DirectedGraph& g) { return to_matrix(symmetrized(g), MatrixSemantics::binary); }

std::vector<NodeId> miners_of(const DirectedGraph& g) { return g.nodes_of_class(NodeClass::Miner); }
std::vector<NodeId> fulls_of(const DirectedGraph& g) { return g.nodes_of_class(NodeClass::FullNode); }

double mass_of(const std::vector<double>& v, const std::vector<NodeId>& s) {
  double m = 0.0;
  for (NodeId x : s) m += v[x];
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Principal eigenpair

TEST(PrincipalEigenpair, CompleteGraphK4) {
  const auto r = principal_eigenpair(symmetric_binary(oracle::complete(4)));
  EXPECT_NEAR(r.value, 3.0, 1e-9);
  for (double x : r.vector) EXPECT_NEAR(x, 0.25, 1e-9);
}

TEST(PrincipalEigenpair, StarClosedForm) {
  const auto r = principal_eigenpair(symmetric_binary(oracle::star(3)));
  EXPECT_NEAR(r.value, std::sqrt(3.0), 1e-8);
  EXPECT_NEAR(r.vector[0] / r.vector[1], std::sqrt(3.0), 1e-6);
  EXPECT_TRUE(r.damped);  // bipartite: +-sqrt(3) would oscillate undamped
}

TEST(PrincipalEigenpair, BsvMatrixMatchesDenseSolve) {
  const auto m = to_matrix(fixtures::bsv_sample().graph, MatrixSemantics::binary);
  const auto r = principal_eigenpair(m, 1e-12);
  const auto d = oracle::dominant(oracle::dense(m));
  EXPECT_NEAR(r.value, d.value, 1e-8);
  for (std::size_t i = 0; i < r.vector.size(); ++i) EXPECT_NEAR(r.vector[i], d.vector[i], 1e-8);
}

TEST(PrincipalEigenpair, ResidualWithinTenTolerances) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = oracle::random_undirected(20, 0.3, rng);
    if (g.edge_count() == 0) continue;
    const double tol = 1e-9;
    const auto m = symmetric_binary(g);
    const auto r = principal_eigenpair(m, tol);
    double res = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m.n; ++j) s += m(i, j) * r.vector[j];
      res += std::abs(s - r.value * r.vector[i]);
    }
    EXPECT_LE(res, 10 * tol);
  }
}

TEST(PrincipalEigenpair, Errors) {
  EXPECT_THROW((void)principal_eigenpair(to_matrix(DirectedGraph(3), MatrixSemantics::binary)), UndefinedError);
  AdjacencyMatrix neg(2, MatrixSemantics::binary);
  neg(0, 1) = -1.0;
  neg(1, 0) = 1.0;
  EXPECT_THROW((void)principal_eigenpair(neg), ParameterError);
  // Non-symmetric, slow mixing: two iterations cannot converge.
  try {
    (void)principal_eigenpair(to_matrix(symmetrized(oracle::path(30)), MatrixSemantics::binary), 1e-14, 2);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(PrincipalEigenpair, ScalingLeavesVectorUnchanged) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = oracle::random_undirected(15, 0.35, rng);
    if (g.edge_count() == 0) continue;
    auto m = symmetric_binary(g);
    const auto base = principal_eigenpair(m, 1e-12);
    for (auto& x : m.entries) x *= 7.5;
    const auto scaled = principal_eigenpair(m, 1e-12);
    EXPECT_NEAR(scaled.value, 7.5 * base.value, 1e-8);
    for (std::size_t i = 0; i < m.n; ++i) EXPECT_NEAR(scaled.vector[i], base.vector[i], 1e-9);
  }
}

// ---------------------------------------------------------------------------
// Eigenvector centrality

TEST(EigenvectorCentrality, CycleIsUniform) {
  const auto v = eigenvector_centrality(oracle::cycle(7));
  for (double x : v) EXPECT_NEAR(x, 1.0 / 7.0, 1e-9);
}

TEST(EigenvectorCentrality, CliquePendantsMinersAboveFullNodes) {
  const auto g = fixtures::clique_pendants().graph;
  const auto v = eigenvector_centrality(g);
  const auto d = oracle::dominant(oracle::dense(symmetric_binary(g)));
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(v[i], d.vector[i], 1e-8);
  for (NodeId m : miners_of(g))
    for (NodeId f : fulls_of(g)) EXPECT_GT(v[m], v[f]);
}

TEST(EigenvectorCentrality, LargerComponentTakesTheMass) {
  DirectedGraph g(8);
  for (NodeId a = 0; a < 5; ++a)
    for (NodeId b = a + 1; b < 5; ++b) oracle::both(g, a, b);
  oracle::both(g, 5, 6);
  oracle::both(g, 6, 7);
  oracle::both(g, 5, 7);
  const auto v = eigenvector_centrality(g);
  for (NodeId a = 0; a < 5; ++a) EXPECT_NEAR(v[a], 0.2, 1e-8);
  for (NodeId a = 5; a < 8; ++a) EXPECT_NEAR(v[a], 0.0, 1e-8);
}

TEST(EigenvectorCentrality, DagUsesSymmetrizedAdjacency) {
  // The directed matrix is nilpotent; the symmetrized one is not.
  const auto g = fixtures::btc_sample().graph;
  EXPECT_THROW((void)principal_eigenpair(to_matrix(g, MatrixSemantics::binary)), UndefinedError);
  const auto v = eigenvector_centrality(g);
  EXPECT_NEAR(std::accumulate(v.begin(), v.end(), 0.0), 1.0, 1e-12);
}

// ---------------------------------------------------------------------------
// Perron mass

TEST(PerronMass, AllAndNone) {
  const auto g = fixtures::clique_pendants().graph;
  std::vector<NodeId> all(g.node_count());
  std::iota(all.begin(), all.end(), 0);
  EXPECT_NEAR(perron_mass(g, all), 1.0, 1e-12);
  EXPECT_EQ(perron_mass(g, std::vector<NodeId>{}), 0.0);
  EXPECT_THROW((void)perron_mass(g, std::vector<NodeId>{99}), ParameterError);
}

TEST(PerronMass, CorePeripheryConcentratesOnMiners) {
  CorePeripheryConfig cfg;
  cfg.miner_count = 25;
  cfg.full_count = 475;
  cfg.core_density = 0.9;
  cfg.periphery_links = 1;
  const auto g = core_periphery(cfg, RngSeed{42});
  const auto miners = miners_of(g);

  // At 10/200 ms the mass sits a little under 0.97; pin it to a dense solve.
  const auto d = oracle::dominant(oracle::dense(to_matrix(symmetrized(g), MatrixSemantics::inverse_latency)));
  const double mass = perron_mass(g, miners);
  EXPECT_NEAR(mass, mass_of(d.vector, miners), 1e-8);
  EXPECT_GT(mass, 0.9);

  cfg.periphery_latency = 400.0;
  const auto slow = core_periphery(cfg, RngSeed{42});
  EXPECT_GE(perron_mass(slow, miners_of(slow)), 0.97);
  EXPECT_LT(perron_mass(slow, miners_of(slow), MatrixSemantics::binary), perron_mass(slow, miners_of(slow)));
}

// ---------------------------------------------------------------------------
// PageRank

TEST(PageRank, DirectedThreeCycleIsUniform) {
  auto g = oracle::nodes(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 0);
  for (double d : {0.5, 0.85, 0.95})
    for (double x : pagerank(g, d)) EXPECT_NEAR(x, 1.0 / 3.0, 1e-10);
}

TEST(PageRank, TwoNodeChainClosedForm) {
  // a -> b, b dangling. x_a = (1-d)/2 + d x_b / 2 with x_a + x_b = 1.
  auto g = oracle::nodes(2);
  g.add_edge(0, 1);
  const double d = 0.85;
  const auto pr = pagerank(g, d);
  EXPECT_NEAR(pr[0], 1.0 / (2.0 + d), 1e-10);
  EXPECT_NEAR(pr[1], (1.0 + d) / (2.0 + d), 1e-10);
}

TEST(PageRank, CliquePendantsMinersRankAboveFullNodes) {
  const auto g = fixtures::clique_pendants().graph;
  for (double d : {0.80, 0.85, 0.90, 0.95}) {
    const auto pr = pagerank(g, d);
    for (NodeId m : miners_of(g))
      for (NodeId f : fulls_of(g)) EXPECT_GT(pr[m], pr[f]) << "d=" << d;
  }
}

TEST(PageRank, MatchesLinearSolveAndSumsToOne) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = oracle::random_graph(25, 0.12, rng);
    const double d = 0.80 + 0.05 * (trial % 4);
    const auto pr = pagerank(g, d);
    const auto lin = oracle::pagerank_linear(g, d);
    EXPECT_NEAR(std::accumulate(pr.begin(), pr.end(), 0.0), 1.0, 1e-9);
    for (std::size_t i = 0; i < pr.size(); ++i) EXPECT_NEAR(pr[i], lin[i], 1e-9);
  }
}

TEST(PageRank, SmallDampingIsNearUniform) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_graph(30, 0.2, rng);
    for (double x : pagerank(g, 0.01)) EXPECT_LT(std::abs(x - 1.0 / 30.0), 0.01);
  }
}

TEST(PageRank, RejectsDampingOutsideOpenInterval) {
  const auto g = oracle::cycle(3);
  EXPECT_THROW((void)pagerank(g, 0.0), ParameterError);
  EXPECT_THROW((void)pagerank(g, 1.0), ParameterError);
  EXPECT_THROW((void)pagerank(oracle::path(6, false), 0.85, 1e-12, 1), ConvergenceError);
}

// ---------------------------------------------------------------------------
// Laplacian

TEST(Laplacian, KnownSpectra) {
  EXPECT_NEAR(laplacian_connectivity(oracle::complete(6)).algebraic_connectivity, 6.0, 1e-8);
  EXPECT_NEAR(laplacian_connectivity(oracle::path(3)).algebraic_connectivity, 1.0, 1e-8);
  const auto spectrum = oracle::laplacian_spectrum(oracle::path(3));
  EXPECT_NEAR(spectrum(0), 0.0, 1e-12);
  EXPECT_NEAR(spectrum(2), 3.0, 1e-12);
  DirectedGraph split(4);
  oracle::both(split, 0, 1);
  oracle::both(split, 2, 3);
  EXPECT_NEAR(laplacian_connectivity(split).algebraic_connectivity, 0.0, 1e-9);
  EXPECT_THROW((void)laplacian_connectivity(DirectedGraph(1)), UndefinedError);
}

TEST(Laplacian, SpectralGapOfCompleteGraph) {
  // K_n adjacency: n-1 once, -1 with multiplicity n-1.
  const auto s = laplacian_connectivity(oracle::complete(5));
  EXPECT_NEAR(s.spectral_radius, 4.0, 1e-9);
  EXPECT_NEAR(s.spectral_gap, 3.0, 1e-9);
  EXPECT_NEAR(spectral_radius(oracle::complete(5)), 4.0, 1e-9);
  EXPECT_EQ(spectral_radius(DirectedGraph(3)), 0.0);
}

TEST(Laplacian, PositiveExactlyWhenConnected) {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = oracle::random_graph(12, 0.06 + 0.002 * trial, rng);
    const bool connected = component_count(UndirectedGraph(g)) == 1;
    const double l2 = laplacian_connectivity(g).algebraic_connectivity;
    EXPECT_EQ(l2 > 1e-9, connected) << "lambda2=" << l2;
    EXPECT_NEAR(l2, std::max(0.0, oracle::laplacian_spectrum(g)(1)), 1e-8);
  }
}

TEST(Laplacian, IterativePathAgreesWithDense) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = oracle::random_undirected(40, 0.2, rng);
    const UndirectedGraph u(g);
    if (component_count(u) != 1) continue;
    const double dense = laplacian_connectivity(g).algebraic_connectivity;
    const double iter = detail::laplacian_lambda2_iterative(u, {1e-13, 2000000});
    EXPECT_NEAR(iter, dense, 1e-5 * std::max(1.0, dense));
  }
}
