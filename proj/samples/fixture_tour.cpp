// Walks the bundled reference graphs: degree sequences, a shortest path on the
// weighted one, and a DOT rendering of the clique-plus-pendants layout.
#include <cstdio>
#include <iostream>

#include "p2ptopo/p2ptopo.hpp"

using namespace p2ptopo;

int main() {
  for (const auto& [file, lg] : fixtures::all()) {
    std::printf("%-18s n=%zu m=%zu %s  out:", file.c_str(), lg.graph.node_count(), lg.graph.edge_count(),
                is_acyclic(lg.graph) ? "dag   " : "cyclic");
    for (const auto& d : degree_sequences(lg.graph)) std::printf(" %zu", d.out);
    std::printf("\n");
  }

  const auto c3 = fixtures::weighted_core();
  const auto sp = shortest_paths(c3.graph, *c3.find("F1"), Weight::latency);
  std::printf("\nF1 -> M5: %g ms\n", sp.dist[*c3.find("M5")]);
  std::printf("MST weight: %g\n\n", minimum_spanning_tree(c3.graph).total_weight);

  const auto b = fixtures::clique_pendants();
  std::cout << io::export_dot(b.graph, b.names);
}
