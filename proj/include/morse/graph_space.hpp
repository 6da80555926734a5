#pragma once

// Finite weighted graphs with the shortest-path metric on vertices. Used for
// exhaustive four-point scans and discrete sanity checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "morse/common.hpp"
#include "morse/metric_core.hpp"
#include "morse/metric_tree.hpp"

namespace morse {

struct GraphPoint {
  std::size_t vertex = 0;
  friend bool operator==(const GraphPoint&, const GraphPoint&) = default;
};

class GraphSpace {
 public:
  using point_type = GraphPoint;

  GraphSpace(std::size_t vertex_count, std::vector<WeightedEdge> edges, std::optional<double> delta = {})
      : n_(vertex_count), edges_(std::move(edges)), delta_(delta) {
    if (n_ == 0) throw Error("GraphSpace: needs at least one vertex");
    weight_.assign(n_ * n_, kInf);
    for (const auto& e : edges_) {
      if (e.u >= n_ || e.v >= n_) throw Error("GraphSpace: edge endpoint out of range");
      if (!(e.length > 0.0) || !std::isfinite(e.length))
        throw Error("GraphSpace: edge weights must be positive and finite");
      if (e.u == e.v) continue;
      const double w = std::min(weight_[e.u * n_ + e.v], e.length);
      weight_[e.u * n_ + e.v] = w;
      weight_[e.v * n_ + e.u] = w;
    }
    // Floyd-Warshall
    dist_ = weight_;
    for (std::size_t v = 0; v < n_; ++v) dist_[v * n_ + v] = 0.0;
    for (std::size_t k = 0; k < n_; ++k)
      for (std::size_t i = 0; i < n_; ++i) {
        const double dik = dist_[i * n_ + k];
        if (dik == kInf) continue;
        for (std::size_t j = 0; j < n_; ++j) dist_[i * n_ + j] = std::min(dist_[i * n_ + j], dik + dist_[k * n_ + j]);
      }
    for (double d : dist_)
      if (d == kInf) throw Error("GraphSpace: graph is not connected");
  }

  /// Same graph with delta_hint set to its exact four-point constant.
  static GraphSpace with_exhaustive_delta(std::size_t vertex_count, std::vector<WeightedEdge> edges);

  SpaceKind kind() const { return SpaceKind::graph; }
  std::optional<double> delta_hint() const { return delta_; }
  std::size_t vertex_count() const { return n_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }

  double distance(const GraphPoint& p, const GraphPoint& q) const { return dist_[p.vertex * n_ + q.vertex]; }

  /// Shortest path from u to v; each step goes to the smallest-id neighbour that
  /// stays on a shortest path.
  std::vector<std::size_t> shortest_path(std::size_t u, std::size_t v) const {
    std::vector<std::size_t> path{u};
    std::size_t cur = u;
    while (cur != v) {
      const double remaining = dist_[cur * n_ + v];
      std::size_t next = cur;
      for (std::size_t w = 0; w < n_; ++w) {
        const double step = weight_[cur * n_ + w];
        if (step == kInf || w == cur) continue;
        if (std::abs(step + dist_[w * n_ + v] - remaining) <= 1e-12 * std::max(1.0, remaining)) {
          next = w;
          break;
        }
      }
      if (next == cur) throw Error("GraphSpace: shortest-path table inconsistent");
      path.push_back(next);
      cur = next;
    }
    return path;
  }

  /// Vertex of the fixed shortest path whose distance from p is nearest to t.
  GraphPoint geodesic_point(const GraphPoint& p, const GraphPoint& q, double t) const {
    const auto path = shortest_path(p.vertex, q.vertex);
    std::size_t best = path.front();
    double best_gap = std::abs(t);
    for (std::size_t v : path) {
      const double gap = std::abs(dist_[p.vertex * n_ + v] - t);
      if (gap < best_gap) {
        best_gap = gap;
        best = v;
      }
    }
    return {best};
  }

  GraphPoint sample_point(Rng& rng) const { return {uniform_index(rng, n_)}; }

 private:
  std::size_t n_;
  std::vector<WeightedEdge> edges_;
  std::vector<double> weight_;
  std::vector<double> dist_;
  std::optional<double> delta_;
};

/// Exact four-point constant: max over all ordered vertex quadruples of
/// min((x,y)_w, (y,z)_w) - (x,z)_w, clamped at 0.
inline double graph_delta_exhaustive(const GraphSpace& g) {
  const std::size_t n = g.vertex_count();
  const double quads = std::pow(static_cast<double>(n), 4);
  if (quads > 1e8) throw Error("graph_delta_exhaustive: |V|^4 = " + std::to_string(quads) + " exceeds 1e8");
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = g.distance({i}, {j});
  double best = 0.0;
  for (std::size_t w = 0; w < n; ++w)
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        const double xy = 0.5 * (d[x * n + w] + d[y * n + w] - d[x * n + y]);
        for (std::size_t z = 0; z < n; ++z) {
          const double yz = 0.5 * (d[y * n + w] + d[z * n + w] - d[y * n + z]);
          const double xz = 0.5 * (d[x * n + w] + d[z * n + w] - d[x * n + z]);
          best = std::max(best, std::min(xy, yz) - xz);
        }
      }
  return best;
}

inline GraphSpace GraphSpace::with_exhaustive_delta(std::size_t vertex_count, std::vector<WeightedEdge> edges) {
  GraphSpace g(vertex_count, edges);
  return GraphSpace(vertex_count, std::move(edges), graph_delta_exhaustive(g));
}

/// Connected random graph: a random recursive spanning tree plus `extra_edges`
/// random chords, integer weights in [1, max_weight].
inline GraphSpace random_graph(std::size_t n, std::size_t extra_edges, int max_weight, Rng& rng) {
  std::vector<WeightedEdge> edges;
  auto weight = [&] { return static_cast<double>(std::uniform_int_distribution<int>(1, max_weight)(rng)); };
  for (std::size_t i = 1; i < n; ++i) edges.push_back({uniform_index(rng, i), i, weight()});
  for (std::size_t k = 0; k < extra_edges && n > 1; ++k) {
    const std::size_t a = uniform_index(rng, n);
    const std::size_t b = uniform_index(rng, n);
    if (a != b) edges.push_back({a, b, weight()});
  }
  return GraphSpace(n, std::move(edges));
}

}  // namespace morse
