#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "p2ptopo/p2ptopo.hpp"

using namespace p2ptopo;

namespace {

std::vector<std::size_t> outs(const DirectedGraph& g) {
  std::vector<std::size_t> d;
  for (const auto& p : degree_sequences(g)) d.push_back(p.out);
  return d;
}

std::vector<std::size_t> ins(const DirectedGraph& g) {
  std::vector<std::size_t> d;
  for (const auto& p : degree_sequences(g)) d.push_back(p.in);
  return d;
}

std::vector<NodeId> ids(std::initializer_list<const char*> names, const io::LabeledGraph& lg) {
  std::vector<NodeId> out;
  for (const char* n : names) out.push_back(*lg.find(n));
  return out;
}

}  // namespace

TEST(Graph, RejectsSelfLoopsDuplicatesAndBadLatency) {
  DirectedGraph g(2);
  EXPECT_THROW(g.add_edge(0, 0), ParameterError);
  g.add_edge(0, 1, 2.0);
  EXPECT_THROW(g.add_edge(0, 1, 3.0), ParameterError);
  EXPECT_THROW(g.add_edge(1, 0, 0.0), ParameterError);
  EXPECT_THROW(g.add_edge(1, 5), ParameterError);
  EXPECT_EQ(g.edge_count(), 1u);
}

TEST(Graph, RejectsInvalidAttributes) {
  DirectedGraph g;
  EXPECT_THROW(g.add_node({NodeClass::Miner, -1.0, 1.0, 1.0}), ParameterError);
  EXPECT_THROW(g.add_node({NodeClass::Miner, 1.0, 0.0, 1.0}), ParameterError);
  EXPECT_THROW(g.add_node({NodeClass::Miner, 1.0, 1.0, 1.5}), ParameterError);
}

TEST(Graph, RemoveEdgeKeepsAdjacencyConsistent) {
  auto g = oracle::complete(4);
  EXPECT_TRUE(g.remove_edge(1, 2));
  EXPECT_FALSE(g.remove_edge(1, 2));
  EXPECT_FALSE(g.has_edge(1, 2));
  EXPECT_EQ(g.edge_count(), 11u);
  EXPECT_EQ(g.edges().size(), 11u);
  EXPECT_EQ(g.out_degree(1), 2u);
  EXPECT_EQ(g.in_degree(2), 2u);
}

TEST(InducedSubgraph, AllNodesGivesIdentityMap) {
  const auto g = fixtures::bsv_sample().graph;
  std::vector<NodeId> all{0, 1, 2, 3, 4, 5};
  const auto sub = induced_subgraph(g, all);
  EXPECT_EQ(sub.original, all);
  EXPECT_EQ(sub.graph.sorted_edges(), g.sorted_edges());
}

TEST(InducedSubgraph, BsvFirstThreeRowsAreMutualTriangle) {
  const auto g = fixtures::bsv_sample().graph;
  const std::vector<NodeId> keep{0, 1, 2};
  const auto sub = induced_subgraph(g, keep);
  EXPECT_EQ(sub.graph.edge_count(), 6u);
  for (NodeId a = 0; a < 3; ++a) {
    for (NodeId b = 0; b < 3; ++b) {
      if (a != b) {
        EXPECT_TRUE(sub.graph.has_edge(a, b));
      }
    }
  }
}

TEST(InducedSubgraph, EmptyKeepAndUnknownId) {
  const auto g = fixtures::bsv_sample().graph;
  const auto sub = induced_subgraph(g, std::vector<NodeId>{});
  EXPECT_EQ(sub.graph.node_count(), 0u);
  EXPECT_EQ(sub.graph.edge_count(), 0u);
  try {
    (void)induced_subgraph(g, std::vector<NodeId>{1, 17});
    FAIL() << "expected ParameterError";
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("17"), std::string::npos);
  }
}

TEST(InducedSubgraph, ComposesAsIntersection) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = oracle::random_graph(12, 0.3, rng);
    std::vector<NodeId> keep, inner;
    std::bernoulli_distribution coin(0.6);
    for (NodeId v = 0; v < 12; ++v)
      if (coin(rng)) keep.push_back(v);
    const auto first = induced_subgraph(g, keep);
    std::vector<NodeId> local, global;
    for (NodeId i = 0; i < first.original.size(); ++i) {
      if (coin(rng)) {
        local.push_back(i);
        global.push_back(first.original[i]);
      }
    }
    const auto twice = induced_subgraph(first.graph, local);
    const auto once = induced_subgraph(g, global);
    EXPECT_EQ(twice.graph.sorted_edges(), once.graph.sorted_edges());
    EXPECT_EQ(twice.graph.all_attributes(), once.graph.all_attributes());
  }
}

TEST(RemoveNodes, EmptySetLeavesGraphUnchanged) {
  const auto g = fixtures::chorded_path().graph;
  const auto r = remove_nodes(g, std::vector<NodeId>{});
  EXPECT_EQ(r.graph.sorted_edges(), g.sorted_edges());
}

TEST(RemoveNodes, ChordedPathMinerCore) {
  const auto lg = fixtures::chorded_path();
  const auto r = remove_nodes(lg.graph, ids({"F1", "F2", "F3"}, lg));
  ASSERT_EQ(r.graph.node_count(), 5u);
  const UndirectedGraph u(r.graph);
  EXPECT_EQ(u.edge_count(), 5u);
  auto name = [&](NodeId v) { return lg.names[r.original[v]]; };
  std::set<std::pair<std::string, std::string>> edges;
  for (NodeId v = 0; v < 5; ++v)
    for (const Arc& a : u.neighbors(v))
      if (v < a.node) edges.insert({name(v), name(a.node)});
  const std::set<std::pair<std::string, std::string>> expected{
      {"M1", "M2"}, {"M2", "M3"}, {"M3", "M4"}, {"M4", "M5"}, {"M1", "M3"}};
  EXPECT_EQ(edges, expected);
  EXPECT_EQ(component_count(u), 1u);
}

TEST(RemoveNodes, StarHubLeavesIsolatedLeaves) {
  const auto r = remove_nodes(oracle::star(3), std::vector<NodeId>{0});
  EXPECT_EQ(r.graph.node_count(), 3u);
  EXPECT_EQ(r.graph.edge_count(), 0u);
}

TEST(RemoveNodes, NeverKeepsIncidentEdges) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = oracle::random_graph(15, 0.25, rng);
    std::vector<NodeId> f;
    for (NodeId v = 0; v < 15; v += 3) f.push_back(v);
    const auto r = remove_nodes(g, f);
    EXPECT_EQ(r.graph.node_count(), 15 - f.size());
    for (const auto& e : r.graph.edges()) {
      EXPECT_NE(r.original[e.src] % 3, 0u);
      EXPECT_NE(r.original[e.dst] % 3, 0u);
    }
  }
}

TEST(ToMatrix, BtcFixtureMatchesPrintedMatrix) {
  const auto m = to_matrix(fixtures::btc_sample().graph, MatrixSemantics::binary);
  const int printed[6][6] = {{0, 1, 1, 0, 0, 0}, {0, 0, 1, 1, 0, 0}, {0, 0, 0, 1, 0, 0},
                             {0, 0, 0, 0, 1, 1}, {0, 0, 0, 0, 0, 1}, {0, 0, 0, 0, 0, 0}};
  int ones = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      EXPECT_EQ(m(i, j), printed[i][j]);
      ones += printed[i][j];
    }
  EXPECT_EQ(ones, 8);
}

TEST(ToMatrix, EmptyAndInverseLatency) {
  const auto z = to_matrix(DirectedGraph(3), MatrixSemantics::binary);
  EXPECT_EQ(z.entries, std::vector<double>(9, 0.0));
  DirectedGraph g(2);
  g.add_edge(0, 1, 4.0);
  EXPECT_DOUBLE_EQ(to_matrix(g, MatrixSemantics::inverse_latency)(0, 1), 0.25);
}

TEST(ToMatrix, BinaryRoundTrip) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = to_matrix(oracle::random_graph(10, 0.3, rng), MatrixSemantics::binary);
    EXPECT_EQ(to_matrix(from_matrix(m), MatrixSemantics::binary), m);
  }
}

TEST(DegreeSequences, ReferenceFixtures) {
  const auto btc = fixtures::btc_sample().graph;
  EXPECT_EQ(outs(btc), (std::vector<std::size_t>{2, 2, 1, 2, 1, 0}));
  EXPECT_EQ(ins(btc), (std::vector<std::size_t>{0, 1, 2, 2, 1, 2}));
  EXPECT_EQ(outs(fixtures::bsv_sample().graph), (std::vector<std::size_t>{3, 3, 2, 3, 2, 1}));
  EXPECT_EQ(degree_sequences(DirectedGraph(1)).front(), (DegreePair{0, 0}));
}

TEST(DegreeSequences, SumsEqualEdgeCount) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_graph(20, 0.2, rng);
    std::size_t in = 0, out = 0;
    for (const auto& d : degree_sequences(g)) {
      in += d.in;
      out += d.out;
    }
    EXPECT_EQ(in, g.edge_count());
    EXPECT_EQ(out, g.edge_count());
  }
}

TEST(EdgeDensity, Examples) {
  // 14 printed ones over 6*5 ordered pairs.
  EXPECT_NEAR(edge_density(fixtures::bsv_sample().graph), 14.0 / 30.0, 1e-15);
  EXPECT_DOUBLE_EQ(edge_density(oracle::complete(4)), 1.0);
  EXPECT_DOUBLE_EQ(edge_density(DirectedGraph(5)), 0.0);
  EXPECT_THROW((void)edge_density(DirectedGraph(1)), UndefinedError);
}

TEST(IsAcyclic, Examples) {
  EXPECT_TRUE(is_acyclic(fixtures::btc_sample().graph));
  EXPECT_FALSE(is_acyclic(fixtures::bsv_sample().graph));
  EXPECT_TRUE(is_acyclic(DirectedGraph(1)));
  EXPECT_TRUE(is_acyclic(oracle::path(5, false)));
  EXPECT_FALSE(is_acyclic(oracle::cycle(3)));
}

TEST(Symmetrized, KeepsSmallerLatency) {
  DirectedGraph g(2);
  g.add_edge(0, 1, 7.0);
  g.add_edge(1, 0, 3.0);
  const auto s = symmetrized(g);
  EXPECT_EQ(s.latency(0, 1), 3.0);
  EXPECT_EQ(s.latency(1, 0), 3.0);
  const UndirectedGraph u(g);
  EXPECT_EQ(u.edge_count(), 1u);
  EXPECT_EQ(u.neighbors(0)[0].latency, 3.0);
}

TEST(Components, CountAndLargest) {
  auto g = oracle::complete(5);
  DirectedGraph both(8);
  for (const auto& e : g.edges()) both.add_edge(e.src, e.dst);
  both.add_edge(5, 6);
  const UndirectedGraph u(both);
  EXPECT_EQ(component_count(u), 3u);  // K5, one edge, one isolated node
  EXPECT_EQ(largest_component_size(u), 5u);
  EXPECT_EQ(largest_component_size(UndirectedGraph(DirectedGraph(0))), 0u);
}
