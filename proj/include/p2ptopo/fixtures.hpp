#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "p2ptopo/io.hpp"

// Small reference topologies used as golden inputs. Class assignments for the
// two matrices are ours; the source matrices carry none.
namespace p2ptopo::fixtures {

using io::LabeledGraph;

inline constexpr std::string_view btc_matrix = R"(M1 M2 M3 M4 F1 F2
M M M M F F
0 & 1 & 1 & 0 & 0 & 0 \\
0 & 0 & 1 & 1 & 0 & 0 \\
0 & 0 & 0 & 1 & 0 & 0 \\
0 & 0 & 0 & 0 & 1 & 1 \\
0 & 0 & 0 & 0 & 0 & 1 \\
0 & 0 & 0 & 0 & 0 & 0 \\
)";

inline constexpr std::string_view bsv_matrix = R"(M1 M2 M3 F1 F2 F3
M M M F F F
0 & 1 & 1 & 1 & 0 & 0 \\
1 & 0 & 1 & 0 & 1 & 0 \\
1 & 1 & 0 & 0 & 0 & 0 \\
0 & 0 & 1 & 0 & 1 & 1 \\
0 & 0 & 0 & 1 & 0 & 1 \\
0 & 0 & 0 & 0 & 1 & 0 \\
)";

namespace detail {

inline std::string nodes_csv(int miners, int fulls) {
  std::string s = "name,class,fitness,uptime,bandwidth\n";
  for (int i = 1; i <= miners; ++i) s += "M" + std::to_string(i) + ",miner,1,1,10\n";
  for (int i = 1; i <= fulls; ++i) s += "F" + std::to_string(i) + ",full,0.1,1,1\n";
  return s;
}

struct Link {
  const char* a;
  const char* b;
  double latency;
};

inline LabeledGraph build(int miners, int fulls, std::initializer_list<Link> links, bool directed = false) {
  std::string csv = "src,dst,latency_ms,directed\n";
  for (const auto& l : links) {
    csv += std::string(l.a) + "," + l.b + "," + io::format_number(l.latency) + (directed ? ",true\n" : ",false\n");
  }
  return io::parse_edges(csv, nodes_csv(miners, fulls));
}

}  // namespace detail

inline LabeledGraph btc_sample() { return io::parse_matrix(btc_matrix); }
inline LabeledGraph bsv_sample() { return io::parse_matrix(bsv_matrix); }

// Six-miner clique with six pendant full nodes; M3 has no pendant.
// Core links 10 ms, pendant links 200 ms.
inline LabeledGraph clique_pendants() {
  return detail::build(6, 6,
                       {{"M1", "M2", 10}, {"M1", "M3", 10}, {"M1", "M4", 10}, {"M1", "M5", 10}, {"M1", "M6", 10},
                        {"M2", "M3", 10}, {"M2", "M4", 10}, {"M2", "M5", 10}, {"M2", "M6", 10},
                        {"M3", "M4", 10}, {"M3", "M5", 10}, {"M3", "M6", 10},
                        {"M4", "M5", 10}, {"M4", "M6", 10},
                        {"M5", "M6", 10},
                        {"F1", "M1", 200}, {"F2", "M1", 200}, {"F3", "M2", 200},
                        {"F4", "M4", 200}, {"F5", "M5", 200}, {"F6", "M6", 200}});
}

// Five-miner clique, three full nodes on M1..M3.
inline LabeledGraph clique_five() {
  return detail::build(5, 3,
                       {{"M1", "M2", 1}, {"M1", "M3", 1}, {"M1", "M4", 1}, {"M1", "M5", 1},
                        {"M2", "M3", 1}, {"M2", "M4", 1}, {"M2", "M5", 1},
                        {"M3", "M4", 1}, {"M3", "M5", 1},
                        {"M4", "M5", 1},
                        {"F1", "M1", 1}, {"F2", "M2", 1}, {"F3", "M3", 1}});
}

// Directed relay DAG from full nodes into a miner chain.
inline LabeledGraph relay_dag() {
  return detail::build(5, 3,
                       {{"F1", "M1", 1}, {"F2", "M2", 1}, {"F3", "M1", 1},
                        {"M1", "M2", 1}, {"M2", "M3", 1}, {"M3", "M4", 1}, {"M4", "M5", 1}},
                       true);
}

// Latency-weighted miner subgraph with two slow full-node links.
inline LabeledGraph weighted_core() {
  return detail::build(5, 2,
                       {{"M1", "M2", 5}, {"M1", "M3", 8}, {"M2", "M3", 3}, {"M3", "M4", 6},
                        {"M4", "M5", 4}, {"M2", "M4", 7}, {"F1", "M1", 50}, {"F2", "M2", 42}});
}

// Miner path with one chord, three full-node attachments.
inline LabeledGraph chorded_path() {
  return detail::build(5, 3,
                       {{"M1", "M2", 1}, {"M2", "M3", 1}, {"M3", "M4", 1}, {"M4", "M5", 1}, {"M1", "M3", 1},
                        {"F1", "M1", 1}, {"F2", "M2", 1}, {"F3", "M4", 1}});
}

// File name -> fixture, in the order `fixtures` writes them.
inline std::vector<std::pair<std::string, LabeledGraph>> all() {
  return {{"btc_sample.mat", btc_sample()}, {"bsv_sample.mat", bsv_sample()},
          {"clique_pendants.csv", clique_pendants()},        {"clique_five.csv", clique_five()},
          {"relay_dag.csv", relay_dag()},      {"weighted_core.csv", weighted_core()},
          {"chorded_path.csv", chorded_path()}};
}

}  // namespace p2ptopo::fixtures
