// Builds a miner core with a full-node periphery and prints the headline
// structural checks. Usage: core_periphery_demo [seed]
#include <cstdio>
#include <cstdlib>

#include "p2ptopo/p2ptopo.hpp"

using namespace p2ptopo;

int main(int argc, char** argv) {
  const RngSeed seed{argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 42};
  const auto g = core_periphery(CorePeripheryConfig{}, seed);
  const auto miners = g.nodes_of_class(NodeClass::Miner);
  std::vector<NodeId> all(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) all[v] = v;

  const auto ex = path_exclusion(g, all, miners);
  std::printf("nodes %zu, edges %zu, miners %zu\n", g.node_count(), g.edge_count(), miners.size());
  std::printf("exclusion fraction   %.4f (%zu of %zu pairs touch a full node)\n", ex.exclusion_fraction,
              ex.paths_with_fullnode_interior, ex.total_paths);
  std::printf("miner perron mass    %.4f\n", perron_mass(g, miners));

  const auto audit = kcore_class_audit(k_core(g), node_classes(g));
  for (const auto& s : audit.shells) std::printf("  %zu-shell: %zu miners, %zu full\n", s.k, s.miners, s.full_nodes);
  std::printf("full nodes in 3-core %zu\n", audit.violations.size());

  const auto bb = backbone_check(g);
  std::printf("backbone: connected=%d dominating=%d interior paths=%zu\n", bb.miner_subgraph_connected,
              bb.dominating, bb.fullnode_interior_paths);
}
