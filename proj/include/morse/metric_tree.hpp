#pragma once

// Finite weighted metric trees (0-hyperbolic geodesic spaces). Points are
// vertices or interior points of edges; all distances are exact path sums.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "morse/common.hpp"
#include "morse/metric_core.hpp"

namespace morse {

/// Rounds to a multiple of 2^-bits. Trees built from such lengths and offsets
/// have exact path sums, so their four-point excess is exactly 0.
inline double dyadic(double x, int bits) { return std::ldexp(std::round(std::ldexp(x, bits)), -bits); }

struct WeightedEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  double length = 1.0;
};

/// A vertex (edge == npos) or the point at `offset` from edge.u along an edge,
/// with 0 < offset < edge length.
struct TreePoint {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  std::size_t vertex = npos;
  std::size_t edge = npos;
  double offset = 0.0;

  bool is_vertex() const { return edge == npos; }
  friend bool operator==(const TreePoint&, const TreePoint&) = default;
};

class MetricTree {
 public:
  using point_type = TreePoint;

  MetricTree(std::size_t vertex_count, std::vector<WeightedEdge> edges)
      : n_(vertex_count), edges_(std::move(edges)) {
    if (n_ == 0) throw Error("MetricTree: needs at least one vertex");
    if (edges_.size() + 1 != n_)
      throw Error("MetricTree: a tree on " + std::to_string(n_) + " vertices has " + std::to_string(n_ - 1) +
                  " edges, got " + std::to_string(edges_.size()));
    adjacency_.assign(n_, {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto& edge = edges_[e];
      if (edge.u >= n_ || edge.v >= n_) throw Error("MetricTree: edge endpoint out of range");
      if (edge.u == edge.v) throw Error("MetricTree: self-loop");
      if (!(edge.length > 0.0) || !std::isfinite(edge.length))
        throw Error("MetricTree: edge lengths must be positive and finite");
      adjacency_[edge.u].push_back(e);
      adjacency_[edge.v].push_back(e);
      total_length_ += edge.length;
    }
    build_tables();
  }

  SpaceKind kind() const { return SpaceKind::metric_tree; }
  std::optional<double> delta_hint() const { return 0.0; }

  std::size_t vertex_count() const { return n_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  double total_length() const { return total_length_; }
  double vertex_distance(std::size_t a, std::size_t b) const { return dist_[a * n_ + b]; }

  TreePoint vertex_point(std::size_t v) const {
    if (v >= n_) throw Error("MetricTree: vertex out of range");
    return {v, TreePoint::npos, 0.0};
  }

  /// Point at `offset` from edges()[e].u; snapped to a vertex at either end.
  TreePoint edge_point(std::size_t e, double offset) const {
    const auto& edge = edges_.at(e);
    if (offset <= 0.0) return vertex_point(edge.u);
    if (offset >= edge.length) return vertex_point(edge.v);
    return {TreePoint::npos, e, offset};
  }

  double distance(const TreePoint& p, const TreePoint& q) const {
    if (!p.is_vertex() && !q.is_vertex() && p.edge == q.edge) return std::abs(p.offset - q.offset);
    double best = kInf;
    for (const auto& a : exits(p))
      for (const auto& b : exits(q)) best = std::min(best, a.cost + vertex_distance(a.vertex, b.vertex) + b.cost);
    return best;
  }

  /// Walks the unique path from p to q.
  TreePoint geodesic_point(const TreePoint& p, const TreePoint& q, double t) const {
    if (t <= 0.0) return p;
    if (!p.is_vertex() && !q.is_vertex() && p.edge == q.edge) {
      const double len = std::abs(q.offset - p.offset);
      if (t >= len) return q;
      return edge_point(p.edge, p.offset + (q.offset > p.offset ? t : -t));
    }
    Exit best_a{}, best_b{};
    double best = kInf;
    for (const auto& a : exits(p))
      for (const auto& b : exits(q)) {
        const double d = a.cost + vertex_distance(a.vertex, b.vertex) + b.cost;
        if (d < best) {
          best = d;
          best_a = a;
          best_b = b;
        }
      }
    if (t >= best) return q;
    if (t < best_a.cost) return toward(p.edge, best_a.vertex, best_a.cost - t);
    double rest = t - best_a.cost;
    std::size_t cur = best_a.vertex;
    while (cur != best_b.vertex) {
      const std::size_t e = next_edge_[cur * n_ + best_b.vertex];
      const auto& edge = edges_[e];
      const std::size_t other = edge.u == cur ? edge.v : edge.u;
      if (rest < edge.length) return toward(e, cur, rest);
      rest -= edge.length;
      cur = other;
    }
    if (best_b.cost == 0.0) return vertex_point(cur);
    return toward(q.edge, cur, rest);
  }

  /// Length-uniform random point; the offset is rounded to a multiple of 2^-20.
  TreePoint sample_point(Rng& rng) const {
    if (edges_.empty()) return vertex_point(0);
    double pick = dyadic(uniform(rng, 0.0, total_length_), 20);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      if (pick < edges_[e].length || e + 1 == edges_.size())
        return edge_point(e, std::min(pick, edges_[e].length));
      pick -= edges_[e].length;
    }
    return vertex_point(0);
  }

  /// Every vertex plus interior edge points so that consecutive points along
  /// each edge are at most `resolution` apart.
  PointSet<TreePoint> discretize(double resolution) const {
    if (!(resolution > 0.0)) throw Error("MetricTree::discretize: resolution must be > 0");
    std::vector<TreePoint> pts;
    double spacing = 0.0;
    for (std::size_t v = 0; v < n_; ++v) pts.push_back(vertex_point(v));
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const double len = edges_[e].length;
      const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / resolution - 1e-12)));
      spacing = std::max(spacing, len / static_cast<double>(k));
      for (std::size_t i = 1; i < k; ++i) pts.push_back(edge_point(e, len * static_cast<double>(i) / static_cast<double>(k)));
    }
    return PointSet<TreePoint>(std::move(pts), spacing);
  }

  /// Arclength positions, from p, of the vertices strictly inside the path p -> q.
  std::vector<double> path_vertex_positions(const TreePoint& p, const TreePoint& q) const {
    std::vector<double> out;
    if (!p.is_vertex() && !q.is_vertex() && p.edge == q.edge) return out;
    Exit best_a{}, best_b{};
    double best = kInf;
    for (const auto& a : exits(p))
      for (const auto& b : exits(q)) {
        const double d = a.cost + vertex_distance(a.vertex, b.vertex) + b.cost;
        if (d < best) {
          best = d;
          best_a = a;
          best_b = b;
        }
      }
    double pos = best_a.cost;
    std::size_t cur = best_a.vertex;
    if (pos > 0.0) out.push_back(pos);
    while (cur != best_b.vertex) {
      const auto& edge = edges_[next_edge_[cur * n_ + best_b.vertex]];
      pos += edge.length;
      cur = edge.u == cur ? edge.v : edge.u;
      if (pos < best) out.push_back(pos);
    }
    return out;
  }

  /// Discretized path p -> q containing every vertex on it, so projections of
  /// off-path points (which land on vertices) are exact.
  PointSet<TreePoint> geodesic_pointset(const TreePoint& p, const TreePoint& q, double resolution) const {
    if (!(resolution > 0.0)) throw Error("MetricTree::geodesic_pointset: resolution must be > 0");
    const double len = distance(p, q);
    std::vector<double> breaks{0.0};
    for (double v : path_vertex_positions(p, q)) breaks.push_back(v);
    breaks.push_back(len);
    std::vector<TreePoint> pts{p};
    double spacing = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
      const double seg = breaks[k + 1] - breaks[k];
      if (seg <= 0.0) continue;
      const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(seg / resolution - 1e-12)));
      spacing = std::max(spacing, seg / static_cast<double>(m));
      for (std::size_t i = 1; i <= m; ++i) {
        const double at = breaks[k] + seg * static_cast<double>(i) / static_cast<double>(m);
        pts.push_back(k + 2 == breaks.size() && i == m ? q : geodesic_point(p, q, at));
      }
    }
    return PointSet<TreePoint>(std::move(pts), spacing);
  }

  /// Two vertices realizing the vertex diameter (double sweep).
  std::pair<std::size_t, std::size_t> diameter_endpoints() const {
    auto farthest = [&](std::size_t from) {
      std::size_t arg = from;
      for (std::size_t v = 0; v < n_; ++v)
        if (vertex_distance(from, v) > vertex_distance(from, arg)) arg = v;
      return arg;
    };
    const std::size_t a = farthest(0);
    return {a, farthest(a)};
  }

 private:
  struct Exit {
    std::size_t vertex = 0;
    double cost = 0.0;
  };

  std::vector<Exit> exits(const TreePoint& p) const {
    if (p.is_vertex()) return {{p.vertex, 0.0}};
    const auto& edge = edges_[p.edge];
    return {{edge.u, p.offset}, {edge.v, edge.length - p.offset}};
  }

  // Point on edge e at distance `dist` from its endpoint `from`.
  TreePoint toward(std::size_t e, std::size_t from, double dist) const {
    const auto& edge = edges_[e];
    return edge_point(e, from == edge.u ? dist : edge.length - dist);
  }

  void build_tables() {
    dist_.assign(n_ * n_, kInf);
    next_edge_.assign(n_ * n_, std::numeric_limits<std::uint32_t>::max());
    // BFS from each root r: parent edge of u is the first edge on the path u -> r.
    for (std::size_t r = 0; r < n_; ++r) {
      std::queue<std::size_t> queue;
      std::vector<bool> visited(n_, false);
      visited[r] = true;
      dist_[r * n_ + r] = 0.0;
      queue.push(r);
      std::size_t seen = 1;
      while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop();
        for (std::size_t e : adjacency_[u]) {
          const std::size_t w = edges_[e].u == u ? edges_[e].v : edges_[e].u;
          if (visited[w]) continue;
          visited[w] = true;
          const double d = dist_[u * n_ + r] + edges_[e].length;
          dist_[w * n_ + r] = d;
          dist_[r * n_ + w] = d;
          next_edge_[w * n_ + r] = static_cast<std::uint32_t>(e);
          ++seen;
          queue.push(w);
        }
      }
      if (seen != n_) throw Error("MetricTree: graph is not connected");
    }
  }

  std::size_t n_;
  std::vector<WeightedEdge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<double> dist_;
  std::vector<std::uint32_t> next_edge_;
  double total_length_ = 0.0;
};

/// Vertex i > 0 attaches to a uniformly random earlier vertex.
inline MetricTree random_recursive_tree(std::size_t n, double min_length, double max_length, Rng& rng) {
  std::vector<WeightedEdge> edges;
  for (std::size_t i = 1; i < n; ++i)
    edges.push_back({uniform_index(rng, i), i, std::max(dyadic(uniform(rng, min_length, max_length), 10), 0x1p-10)});
  return MetricTree(n, std::move(edges));
}

/// A spine path 0 - 1 - ... - (spine_vertices-1) with unit-`spine_step` edges and,
/// at spine vertex i, a pendant path (hair) of total length hair_lengths[i]
/// split into `hair_segments` edges (no hair where the length is 0).
inline MetricTree comb_tree(std::size_t spine_vertices, double spine_step, const std::vector<double>& hair_lengths,
                            std::size_t hair_segments = 4) {
  if (spine_vertices < 2) throw Error("comb_tree: spine needs at least two vertices");
  if (hair_lengths.size() != spine_vertices) throw Error("comb_tree: one hair length per spine vertex");
  std::vector<WeightedEdge> edges;
  std::size_t next = spine_vertices;
  for (std::size_t i = 0; i + 1 < spine_vertices; ++i) edges.push_back({i, i + 1, spine_step});
  for (std::size_t i = 0; i < spine_vertices; ++i) {
    if (hair_lengths[i] <= 0.0) continue;
    std::size_t prev = i;
    for (std::size_t s = 0; s < hair_segments; ++s) {
      edges.push_back({prev, next, hair_lengths[i] / static_cast<double>(hair_segments)});
      prev = next++;
    }
  }
  return MetricTree(next, std::move(edges));
}

/// comb_tree with hair lengths drawn uniformly from [0, max_hair].
inline MetricTree random_comb_tree(std::size_t spine_vertices, double spine_step, double max_hair, Rng& rng) {
  std::vector<double> hairs(spine_vertices);
  for (auto& h : hairs) h = dyadic(uniform(rng, 0.0, max_hair), 8);
  return comb_tree(spine_vertices, spine_step, hairs);
}

}  // namespace morse
