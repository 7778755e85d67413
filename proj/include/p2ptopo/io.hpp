#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "p2ptopo/error.hpp"
#include "p2ptopo/graph.hpp"

namespace p2ptopo::io {

using nlohmann::json;

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : DataError(locate(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string locate(const std::string& what, std::size_t line, std::size_t column) {
    std::string s = "line " + std::to_string(line);
    if (column > 0) s += ", column " + std::to_string(column);
    return s + ": " + what;
  }
  std::size_t line_;
  std::size_t column_;
};

// A graph plus external labels; names[v] is the label of node v.
struct LabeledGraph {
  DirectedGraph graph;
  std::vector<std::string> names;

  std::optional<NodeId> find(std::string_view name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<NodeId>(it - names.begin());
  }
};

// M1, M2, ... for miners and F1, F2, ... for full nodes, in id order.
inline std::vector<std::string> default_names(const DirectedGraph& g) {
  std::vector<std::string> names(g.node_count());
  std::size_t miners = 0;
  std::size_t fulls = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    names[v] = g.is_miner(v) ? "M" + std::to_string(++miners) : "F" + std::to_string(++fulls);
  }
  return names;
}

inline LabeledGraph label(DirectedGraph g) {
  auto names = default_names(g);
  return {std::move(g), std::move(names)};
}

// ---------------------------------------------------------------------------
// Number formatting: shortest round-trip representation.

inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_number(std::string_view s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return x;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> lines(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    out.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto p = line.find(sep);
    out.push_back(trim(line.substr(0, p)));
    if (p == std::string_view::npos) break;
    line.remove_prefix(p + 1);
  }
  return out;
}

inline std::vector<std::string_view> words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline NodeClass parse_class(std::string_view token, std::size_t line, std::size_t column) {
  if (token == "miner" || token == "M") return NodeClass::Miner;
  if (token == "full" || token == "F") return NodeClass::FullNode;
  throw ParseError("unknown class token '" + std::string(token) + "'", line, column);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dense 0/1 matrix text
//
//   M1 M2 M3          optional label line
//   M  M  F           optional class line
//   0 1 1             rows
//
// `&` separators, trailing `\\`, lines starting with a backslash and `#`
// comments are ignored, so a LaTeX bmatrix body can be pasted in unchanged.

inline LabeledGraph parse_matrix(std::string_view text) {
  struct Row {
    std::size_t line;
    std::vector<std::string_view> tokens;
  };
  std::vector<Row> rows;
  const auto all = detail::lines(text);
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::string_view line = all[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty() || line.front() == '\\') continue;
    std::vector<std::string_view> tokens;
    for (auto w : detail::words(line)) {
      if (w == "&" || w == "\\\\") continue;
      tokens.push_back(w);
    }
    if (!tokens.empty()) rows.push_back({i + 1, std::move(tokens)});
  }

  auto all_binary = [](const Row& r) {
    return std::all_of(r.tokens.begin(), r.tokens.end(), [](auto t) { return t == "0" || t == "1"; });
  };
  auto all_class = [](const Row& r) {
    return std::all_of(r.tokens.begin(), r.tokens.end(), [](auto t) { return t == "M" || t == "F"; });
  };

  std::size_t at = 0;
  std::optional<Row> labels;
  std::optional<Row> classes;
  if (at < rows.size() && !all_binary(rows[at]) && !all_class(rows[at])) labels = rows[at++];
  if (at < rows.size() && all_class(rows[at])) classes = rows[at++];

  const std::size_t n = rows.size() - at;
  if (n == 0) throw ParseError("matrix has no rows", rows.empty() ? 1 : rows.back().line);
  auto check_width = [&](const Row& r, const char* what) {
    if (r.tokens.size() != n)
      throw ParseError(std::string(what) + " has " + std::to_string(r.tokens.size()) + " entries, expected " +
                           std::to_string(n),
                       r.line);
  };
  if (labels) check_width(*labels, "label line");
  if (classes) check_width(*classes, "class line");

  std::vector<NodeAttributes> attrs(n);
  if (classes) {
    for (std::size_t j = 0; j < n; ++j) attrs[j].cls = detail::parse_class(classes->tokens[j], classes->line, j + 1);
  }
  LabeledGraph lg{DirectedGraph(attrs), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const Row& r = rows[at + i];
    if (r.tokens.size() != n)
      throw ParseError("matrix is not square: row " + std::to_string(i + 1) + " has " +
                           std::to_string(r.tokens.size()) + " entries, expected " + std::to_string(n),
                       r.line);
    for (std::size_t j = 0; j < n; ++j) {
      const auto t = r.tokens[j];
      if (t != "0" && t != "1") throw ParseError("non-binary entry '" + std::string(t) + "'", r.line, j + 1);
      if (t == "1") {
        if (i == j) throw ParseError("nonzero diagonal entry", r.line, j + 1);
        lg.graph.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(j), 1.0);
      }
    }
  }
  if (labels) {
    for (auto t : labels->tokens) lg.names.emplace_back(t);
    for (std::size_t j = 0; j < n; ++j) {
      if (std::count(lg.names.begin(), lg.names.end(), lg.names[j]) > 1)
        throw ParseError("duplicate label '" + lg.names[j] + "'", labels->line, j + 1);
    }
  } else {
    lg.names = default_names(lg.graph);
  }
  return lg;
}

// Canonical form always writes the label and class lines. Latencies are not
// representable and are dropped.
inline std::string format_matrix(const LabeledGraph& lg) {
  const auto& g = lg.graph;
  std::string out;
  for (NodeId v = 0; v < g.node_count(); ++v) out += (v ? " " : "") + lg.names[v];
  out += '\n';
  for (NodeId v = 0; v < g.node_count(); ++v) out += std::string(v ? " " : "") + (g.is_miner(v) ? "M" : "F");
  out += '\n';
  for (NodeId i = 0; i < g.node_count(); ++i) {
    for (NodeId j = 0; j < g.node_count(); ++j) {
      if (j) out += ' ';
      out += g.has_edge(i, j) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Edge-list CSV with optional node sidecar

inline std::filesystem::path sidecar_path(const std::filesystem::path& edges) {
  auto p = edges;
  p.replace_extension();
  p += ".nodes.csv";
  return p;
}

inline LabeledGraph parse_edges(std::string_view csv, std::optional<std::string_view> nodes_csv = std::nullopt) {
  LabeledGraph lg{DirectedGraph(0), {}};
  std::map<std::string, NodeId, std::less<>> index;

  if (nodes_csv) {
    const auto rows = detail::lines(*nodes_csv);
    bool header = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto line = detail::trim(rows[i]);
      if (line.empty()) continue;
      const auto f = detail::split(line, ',');
      if (!header) {
        if (f.size() != 5 || f[0] != "name" || f[1] != "class" || f[2] != "fitness" || f[3] != "uptime" ||
            f[4] != "bandwidth")
          throw ParseError("node header must be name,class,fitness,uptime,bandwidth", i + 1);
        header = true;
        continue;
      }
      if (f.size() != 5) throw ParseError("expected 5 fields", i + 1);
      if (f[0].empty()) throw ParseError("empty node name", i + 1, 1);
      if (index.contains(f[0])) throw ParseError("duplicate node '" + std::string(f[0]) + "'", i + 1, 1);
      NodeAttributes a;
      a.cls = detail::parse_class(f[1], i + 1, 2);
      const auto fit = parse_number(f[2]);
      const auto up = parse_number(f[3]);
      const auto bw = parse_number(f[4]);
      if (!fit) throw ParseError("bad fitness", i + 1, 3);
      if (!up) throw ParseError("bad uptime", i + 1, 4);
      if (!bw) throw ParseError("bad bandwidth", i + 1, 5);
      a.fitness = *fit;
      a.uptime = *up;
      a.bandwidth = *bw;
      try {
        a.validate();
      } catch (const ParameterError& e) {
        throw ParseError(e.what(), i + 1);
      }
      index.emplace(std::string(f[0]), lg.graph.add_node(a));
      lg.names.emplace_back(f[0]);
    }
  }

  auto node = [&](std::string_view name, std::size_t line, std::size_t col) {
    if (name.empty()) throw ParseError("empty node name", line, col);
    if (const auto it = index.find(name); it != index.end()) return it->second;
    const NodeId v = lg.graph.add_node();
    index.emplace(std::string(name), v);
    lg.names.emplace_back(name);
    return v;
  };

  const auto rows = detail::lines(csv);
  bool header = false;
  bool has_directed = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto line = detail::trim(rows[i]);
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (!header) {
      const bool base = f.size() >= 3 && f[0] == "src" && f[1] == "dst" && f[2] == "latency_ms";
      has_directed = f.size() == 4 && f[3] == "directed";
      if (!base || (f.size() != 3 && !has_directed))
        throw ParseError("edge header must be src,dst,latency_ms[,directed]", i + 1);
      header = true;
      continue;
    }
    if (f.size() != (has_directed ? 4u : 3u)) throw ParseError("wrong number of fields", i + 1);
    const NodeId a = node(f[0], i + 1, 1);
    const NodeId b = node(f[1], i + 1, 2);
    const auto lat = parse_number(f[2]);
    if (!lat) throw ParseError("bad latency '" + std::string(f[2]) + "'", i + 1, 3);
    if (!(*lat > 0.0)) throw ParseError("latency must be > 0", i + 1, 3);
    bool directed = true;
    if (has_directed) {
      if (f[3] == "true" || f[3] == "1") {
        directed = true;
      } else if (f[3] == "false" || f[3] == "0") {
        directed = false;
      } else {
        throw ParseError("directed must be true or false", i + 1, 4);
      }
    }
    if (a == b) throw ParseError("self-loop", i + 1);
    auto add = [&](NodeId s, NodeId d) {
      if (lg.graph.has_edge(s, d))
        throw ParseError("duplicate edge " + lg.names[s] + " -> " + lg.names[d], i + 1);
      lg.graph.add_edge(s, d, *lat);
    };
    add(a, b);
    if (!directed) add(b, a);
  }
  if (!header) throw ParseError("missing edge header", 1);
  return lg;
}

// Canonical edge CSV: reciprocal pairs with equal latency become one
// `directed=false` row; rows are ordered by (src id, dst id).
inline std::string format_edges(const LabeledGraph& lg) {
  const auto& g = lg.graph;
  std::string out = "src,dst,latency_ms,directed\n";
  for (const auto& e : g.sorted_edges()) {
    const auto back = g.latency(e.dst, e.src);
    const bool paired = back && *back == e.latency;
    if (paired && e.src > e.dst) continue;
    out += lg.names[e.src] + "," + lg.names[e.dst] + "," + format_number(e.latency) + "," +
           (paired ? "false" : "true") + "\n";
  }
  return out;
}

inline std::string format_nodes(const LabeledGraph& lg) {
  std::string out = "name,class,fitness,uptime,bandwidth\n";
  for (NodeId v = 0; v < lg.graph.node_count(); ++v) {
    const auto& a = lg.graph.attributes(v);
    out += lg.names[v] + "," + to_string(a.cls) + "," + format_number(a.fitness) + "," + format_number(a.uptime) +
           "," + format_number(a.bandwidth) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON snapshot

inline constexpr const char* graph_schema = "p2ptopo.graph/1";

inline json to_json(const LabeledGraph& lg) {
  json nodes = json::array();
  for (NodeId v = 0; v < lg.graph.node_count(); ++v) {
    const auto& a = lg.graph.attributes(v);
    nodes.push_back({{"name", lg.names[v]},
                     {"class", to_string(a.cls)},
                     {"fitness", a.fitness},
                     {"uptime", a.uptime},
                     {"bandwidth", a.bandwidth}});
  }
  json edges = json::array();
  for (const auto& e : lg.graph.sorted_edges())
    edges.push_back({{"src", lg.names[e.src]}, {"dst", lg.names[e.dst]}, {"latency_ms", e.latency}});
  return {{"schema", graph_schema}, {"nodes", nodes}, {"edges", edges}};
}

inline LabeledGraph graph_from_json(const json& j) {
  try {
    if (j.at("schema") != graph_schema) throw DataError("unsupported graph schema " + j.at("schema").dump());
    LabeledGraph lg{DirectedGraph(0), {}};
    for (const auto& n : j.at("nodes")) {
      NodeAttributes a;
      a.cls = detail::parse_class(n.at("class").get<std::string>(), 0, 0);
      a.fitness = n.at("fitness").get<double>();
      a.uptime = n.at("uptime").get<double>();
      a.bandwidth = n.at("bandwidth").get<double>();
      a.validate();
      const auto name = n.at("name").get<std::string>();
      if (lg.find(name)) throw DataError("duplicate node '" + name + "'");
      lg.graph.add_node(a);
      lg.names.push_back(name);
    }
    for (const auto& e : j.at("edges")) {
      const auto s = lg.find(e.at("src").get<std::string>());
      const auto d = lg.find(e.at("dst").get<std::string>());
      if (!s || !d) throw DataError("edge references unknown node");
      lg.graph.add_edge(*s, *d, e.at("latency_ms").get<double>());
    }
    return lg;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed graph JSON: ") + e.what());
  } catch (const ParameterError& e) {
    throw DataError(e.what());
  }
}

// ---------------------------------------------------------------------------
// Graphviz export. Miners are filled core nodes; every edge touching a full
// node is dashed. Reciprocal arcs are merged into one `dir=both` edge.

inline std::string export_dot(const DirectedGraph& g, const std::vector<std::string>& names = {}) {
  const auto label = names.empty() ? default_names(g) : names;
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') q += '\\';
      q += c;
    }
    return q + "\"";
  };
  std::string out = "digraph p2ptopo {\n";
  for (NodeId v = 0; v < g.node_count(); ++v) {
    out += "  " + quote(label[v]) +
           (g.is_miner(v) ? " [shape=circle, style=\"filled,bold\", fillcolor=gold];\n"
                          : " [shape=circle, style=dashed];\n");
  }
  for (const auto& e : g.sorted_edges()) {
    const bool both = g.has_edge(e.dst, e.src);
    if (both && e.src > e.dst) continue;
    std::string attrs;
    if (!g.is_miner(e.src) || !g.is_miner(e.dst)) attrs += "style=dashed";
    if (both) attrs += std::string(attrs.empty() ? "" : ", ") + "dir=both";
    out += "  " + quote(label[e.src]) + " -> " + quote(label[e.dst]) + (attrs.empty() ? "" : " [" + attrs + "]") +
           ";\n";
  }
  out += "}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to a sibling temporary file and renames it over the target.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw DataError("cannot rename into " + path.string());
  }
}

enum class GraphFormat { matrix, edges, json };

inline GraphFormat format_for(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".mat" || ext == ".txt") return GraphFormat::matrix;
  if (ext == ".csv") return GraphFormat::edges;
  if (ext == ".json") return GraphFormat::json;
  throw DataError("unrecognized graph file extension '" + ext + "' (expected .mat, .csv or .json)");
}

inline LabeledGraph load_graph(const std::filesystem::path& path) {
  const auto text = read_file(path);
  switch (format_for(path)) {
    case GraphFormat::matrix: return parse_matrix(text);
    case GraphFormat::edges: {
      const auto side = sidecar_path(path);
      if (std::filesystem::exists(side)) {
        const auto nodes = read_file(side);
        return parse_edges(text, nodes);
      }
      return parse_edges(text);
    }
    case GraphFormat::json: {
      json j;
      try {
        j = json::parse(text);
      } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
      }
      return graph_from_json(j);
    }
  }
  throw DataError("unreachable");
}

// Edge-list output also writes the node sidecar next to it.
inline void save_graph(const std::filesystem::path& path, const LabeledGraph& lg) {
  switch (format_for(path)) {
    case GraphFormat::matrix: write_file_atomic(path, format_matrix(lg)); break;
    case GraphFormat::edges:
      write_file_atomic(path, format_edges(lg));
      write_file_atomic(sidecar_path(path), format_nodes(lg));
      break;
    case GraphFormat::json: write_file_atomic(path, to_json(lg).dump(2) + "\n"); break;
  }
}

// ---------------------------------------------------------------------------
// Hashing for report provenance.

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, x >>= 4) s[static_cast<std::size_t>(i)] = digits[x & 0xf];
  return s;
}

}  // namespace p2ptopo::io
