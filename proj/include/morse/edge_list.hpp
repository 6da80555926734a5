#pragma once

// Edge-list text format for trees and graphs: one `u v weight` triple per
// line, '#' starts a comment, blank lines are ignored. Vertex ids are
// 0-based; the vertex count is one more than the largest id seen.

#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "morse/common.hpp"
#include "morse/graph_space.hpp"
#include "morse/metric_tree.hpp"

namespace morse {

struct EdgeList {
  std::size_t vertex_count = 0;
  std::vector<WeightedEdge> edges;
};

inline EdgeList read_edge_list(std::istream& in) {
  EdgeList out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long u = 0, v = 0;
    double w = 0.0;
    if (!(fields >> u)) continue;  // blank
    std::string extra;
    if (!(fields >> v >> w) || (fields >> extra))
      throw Error("edge list line " + std::to_string(line_no) + ": expected `u v weight`");
    if (u < 0 || v < 0) throw Error("edge list line " + std::to_string(line_no) + ": negative vertex id");
    if (!(w > 0.0)) throw Error("edge list line " + std::to_string(line_no) + ": weight must be positive");
    out.edges.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v), w});
    out.vertex_count = std::max({out.vertex_count, static_cast<std::size_t>(u) + 1, static_cast<std::size_t>(v) + 1});
  }
  if (out.edges.empty()) throw Error("edge list is empty");
  return out;
}

inline EdgeList read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list '" + path + "'");
  return read_edge_list(in);
}

inline void write_edge_list(std::ostream& out, const std::vector<WeightedEdge>& edges) {
  out.precision(17);
  for (const auto& e : edges) out << e.u << ' ' << e.v << ' ' << e.length << '\n';
}

inline MetricTree tree_from_edge_list(const EdgeList& list) { return MetricTree(list.vertex_count, list.edges); }

inline GraphSpace graph_from_edge_list(const EdgeList& list) { return GraphSpace(list.vertex_count, list.edges); }

}  // namespace morse
