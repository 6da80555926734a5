#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "morse/edge_list.hpp"
#include "morse/graph_space.hpp"
#include "morse/hyperbolic_plane.hpp"
#include "morse/metric_tree.hpp"
#include "morse/path_io.hpp"

using namespace morse;

namespace {

double half_plane_distance(double u1, double v1, double u2, double v2) {
  return std::acosh(1.0 + ((u1 - u2) * (u1 - u2) + (v1 - v2) * (v1 - v2)) / (2.0 * v1 * v2));
}

// Splits the tree at the given interior points and measures with Floyd-Warshall.
double subdivided_distance(const MetricTree& t, const TreePoint& p, const TreePoint& q) {
  std::vector<WeightedEdge> edges;
  std::size_t n = t.vertex_count();
  auto attach = [&](const TreePoint& x) -> std::size_t { return x.is_vertex() ? x.vertex : n++; };
  const std::size_t a = attach(p);
  const std::size_t b = (!q.is_vertex() && !p.is_vertex() && q.edge == p.edge && q.offset == p.offset) ? a : attach(q);
  for (std::size_t e = 0; e < t.edges().size(); ++e) {
    const auto& edge = t.edges()[e];
    std::vector<std::pair<double, std::size_t>> cuts{{0.0, edge.u}, {edge.length, edge.v}};
    if (!p.is_vertex() && p.edge == e) cuts.push_back({p.offset, a});
    if (!q.is_vertex() && q.edge == e && b != a) cuts.push_back({q.offset, b});
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 1; i < cuts.size(); ++i)
      if (cuts[i].second != cuts[i - 1].second)
        edges.push_back({cuts[i - 1].second, cuts[i].second, cuts[i].first - cuts[i - 1].first});
  }
  const GraphSpace g(n, edges);
  return g.distance({a}, {b});
}

}  // namespace

TEST(H2, UnitExample) {
  const auto a = H2Point::from_half_plane(0.0, 1.0);
  const auto b = H2Point::from_half_plane(0.0, std::numbers::e);
  EXPECT_NEAR(h2_distance(a, b), 1.0, 1e-12);
}

TEST(H2, MatchesHalfPlaneFormula) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double u1 = uniform(rng, -3, 3), v1 = std::exp(uniform(rng, -2, 2));
    const double u2 = uniform(rng, -3, 3), v2 = std::exp(uniform(rng, -2, 2));
    EXPECT_NEAR(h2_distance(H2Point::from_half_plane(u1, v1), H2Point::from_half_plane(u2, v2)),
                half_plane_distance(u1, v1, u2, v2), 1e-9);
  }
}

TEST(H2, HalfPlaneRoundTrip) {
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const double u = uniform(rng, -5, 5), v = std::exp(uniform(rng, -3, 3));
    const auto [u2, v2] = H2Point::from_half_plane(u, v).to_half_plane();
    EXPECT_NEAR(u2, u, 1e-9 * std::max(1.0, std::abs(u)));
    EXPECT_NEAR(v2, v, 1e-9 * v);
  }
  EXPECT_THROW(H2Point::from_half_plane(0.0, 0.0), Error);
}

TEST(H2, NearbyPointsKeepPrecision) {
  // Along the x axis x = sinh(s), so the distance is asinh(x2) - asinh(x1)
  // ~ dx / sqrt(1 + x^2); dyadic coordinates keep the inputs exact.
  for (double x : {0.25, 4.0, 1024.0, 65536.0}) {
    const double dx = 0x1p-30;
    const double expected = dx / std::sqrt(1.0 + x * x);
    EXPECT_NEAR(h2_distance(H2Point::from_xy(x, 0.0), H2Point::from_xy(x + dx, 0.0)), expected, 1e-9 * expected) << x;
    EXPECT_NEAR(h2_distance(H2Point::from_xy(0.0, x), H2Point::from_xy(0.0, x + dx)), expected, 1e-9 * expected) << x;
  }
}

TEST(H2, GeodesicInvariants) {
  const HyperbolicPlane h(H2Point{}, 4.0);
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const auto p = h.sample_point(rng), q = h.sample_point(rng);
    const double len = h.distance(p, q);
    for (double frac : {0.0, 0.13, 0.5, 0.77, 1.0}) {
      const double s = frac * len;
      const auto x = h.geodesic_point(p, q, s);
      EXPECT_TRUE(x.on_sheet(1e-9));
      EXPECT_NEAR(h.distance(p, x), s, 1e-9);
      EXPECT_NEAR(h.distance(x, q), len - s, 1e-9);
    }
    EXPECT_NEAR(h.distance(h.geodesic_point(p, q, len), q), 0.0, 1e-9);
  }
}

TEST(H2, CoincidentEndpoints) {
  const H2Point p{};
  EXPECT_EQ(h2_geodesic_point(p, p, 0.0), p);
  EXPECT_THROW(h2_geodesic_point(p, p, 1.0), Error);
}

TEST(H2, PointAtAndDirection) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto base = h2_point_at(H2Point{}, uniform(rng, 0, 6.28), uniform(rng, 0, 4));
    const double angle = uniform(rng, -3.0, 3.0), r = uniform(rng, 0.1, 5.0);
    const auto x = h2_point_at(base, angle, r);
    EXPECT_NEAR(h2_distance(base, x), r, 1e-9);
    EXPECT_NEAR(std::remainder(h2_direction(base, x) - angle, 2 * std::numbers::pi), 0.0, 1e-7);
  }
}

TEST(H2, PerpendicularOffsetIsAtHeight) {
  const HyperbolicPlane h;
  const auto p = h2_point_at(h.center(), 0.0, 2.0), q = h2_point_at(h.center(), std::numbers::pi, 2.0);
  const auto g = discretize_geodesic(h, p, q, 0.001);
  const auto base = h.geodesic_point(p, q, 1.5);
  for (int side : {-1, 1}) {
    const auto x = h.perpendicular_offset(p, q, base, side, 1.25);
    EXPECT_NEAR(h.distance(x, base), 1.25, 1e-9);
    EXPECT_NEAR(infdist(h, x, g), 1.25, 1e-6);
  }
}

TEST(H2, SamplesStayInDisc) {
  const auto h = HyperbolicPlane::from_half_plane_region(1.0, 2.0, 3.0);
  Rng rng(4);
  for (int i = 0; i < 500; ++i) EXPECT_LE(h.distance(h.center(), h.sample_point(rng)), 3.0 + 1e-9);
}

TEST(Tree, ValidationErrors) {
  EXPECT_THROW(MetricTree(3, {{0, 1, 1.0}}), Error);                // too few edges
  EXPECT_THROW(MetricTree(3, {{0, 1, 1.0}, {0, 1, 1.0}}), Error);  // cycle, disconnected
  EXPECT_THROW(MetricTree(2, {{0, 1, 0.0}}), Error);                // zero length
  EXPECT_THROW(MetricTree(2, {{0, 2, 1.0}}), Error);                // out of range
  EXPECT_THROW(MetricTree(2, {{1, 1, 1.0}}), Error);                // self loop
}

TEST(Tree, DistanceMatchesSubdivisionOracle) {
  Rng rng(17);
  for (int k = 0; k < 20; ++k) {
    const auto t = random_recursive_tree(25, 0.2, 3.0, rng);
    for (int i = 0; i < 20; ++i) {
      const auto p = t.sample_point(rng), q = t.sample_point(rng);
      EXPECT_NEAR(t.distance(p, q), subdivided_distance(t, p, q), 1e-9);
      EXPECT_DOUBLE_EQ(t.distance(p, q), t.distance(q, p));
    }
  }
}

TEST(Tree, GeodesicInvariants) {
  Rng rng(6);
  const auto t = random_comb_tree(15, 1.0, 3.0, rng);
  for (int i = 0; i < 200; ++i) {
    const auto p = t.sample_point(rng), q = t.sample_point(rng);
    const double len = t.distance(p, q);
    for (double frac : {0.0, 0.25, 0.5, 0.9, 1.0}) {
      const auto x = t.geodesic_point(p, q, frac * len);
      EXPECT_NEAR(t.distance(p, x), frac * len, 1e-9);
      EXPECT_NEAR(t.distance(x, q), (1 - frac) * len, 1e-9);
    }
  }
}

TEST(Tree, GeodesicPointsetContainsPathVertices) {
  const auto t = comb_tree(5, 1.0, {0.0, 2.0, 0.0, 1.0, 0.0});
  const auto g = t.geodesic_pointset(t.vertex_point(0), t.vertex_point(4), 0.3);
  for (std::size_t v = 0; v < 5; ++v) EXPECT_EQ(infdist(t, t.vertex_point(v), g), 0.0);
  EXPECT_LE(g.resolution(), 0.3);
  // Hair tips project to their base with distance equal to the hair length.
  EXPECT_DOUBLE_EQ(infdist(t, t.vertex_point(8), g), 2.0);
}

TEST(Tree, CombStructure) {
  const auto t = comb_tree(4, 2.0, {1.0, 0.0, 3.0, 0.0}, 2);
  EXPECT_EQ(t.vertex_count(), 8u);
  EXPECT_DOUBLE_EQ(t.total_length(), 6.0 + 4.0);
  EXPECT_DOUBLE_EQ(t.vertex_distance(5, 7), 1.0 + 4.0 + 3.0);
  const auto [a, b] = t.diameter_endpoints();
  EXPECT_DOUBLE_EQ(t.vertex_distance(a, b), 1.0 + 4.0 + 3.0);
}

TEST(Graph, DisconnectedThrows) { EXPECT_THROW(GraphSpace(3, {{0, 1, 1.0}}), Error); }

TEST(Graph, ShortestPathPrefersSmallIds) {
  const GraphSpace g(4, {{0, 1, 1.0}, {1, 3, 1.0}, {0, 2, 1.0}, {2, 3, 1.0}});
  EXPECT_EQ(g.shortest_path(0, 3), (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_EQ(g.geodesic_point({0}, {3}, 0.9).vertex, 1u);
  EXPECT_EQ(g.geodesic_point({0}, {3}, 2.0).vertex, 3u);
}

TEST(Graph, TreesHaveZeroDelta) {
  Rng rng(2);
  const auto g = random_graph(10, 0, 3, rng);
  EXPECT_DOUBLE_EQ(graph_delta_exhaustive(g), 0.0);
}

TEST(Graph, ExhaustiveGuard) {
  std::vector<WeightedEdge> path;
  for (std::size_t i = 0; i + 1 < 120; ++i) path.push_back({i, i + 1, 1.0});
  EXPECT_THROW(graph_delta_exhaustive(GraphSpace(120, path)), Error);
}

TEST(EdgeList, ParsesCommentsAndBlanks) {
  std::istringstream in("# a triangle\n0 1 1.5\n\n1 2 2  # chord\n2 0 1\n");
  const auto list = read_edge_list(in);
  EXPECT_EQ(list.vertex_count, 3u);
  ASSERT_EQ(list.edges.size(), 3u);
  EXPECT_DOUBLE_EQ(list.edges[0].length, 1.5);
  EXPECT_DOUBLE_EQ(graph_from_edge_list(list).distance({0}, {2}), 1.0);
}

TEST(EdgeList, ErrorsNameTheLine) {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_edge_list(in);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("0 1 1\n1 x 2\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("0 1 1\n1 2 -3\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("0 1 1 7\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("# nothing\n").find("empty"), std::string::npos);
}

TEST(EdgeList, RoundTrip) {
  Rng rng(5);
  const auto t = random_recursive_tree(30, 0.1, 2.0, rng);
  std::stringstream s;
  write_edge_list(s, t.edges());
  const auto back = tree_from_edge_list(read_edge_list(s));
  for (std::size_t a = 0; a < 30; ++a)
    for (std::size_t b = 0; b < 30; ++b) EXPECT_DOUBLE_EQ(back.vertex_distance(a, b), t.vertex_distance(a, b));
}

TEST(PathCsv, RoundTripAllPointTypes) {
  Rng rng(31);
  const HyperbolicPlane h;
  const auto tree = random_comb_tree(8, 1.0, 2.0, rng);
  const auto graph = random_graph(9, 4, 3, rng);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> t{0.0};
    for (int i = 1; i < 12; ++i) t.push_back(t.back() + uniform(rng, 1e-3, 2.0));
    std::vector<H2Point> hp;
    std::vector<TreePoint> tp;
    std::vector<GraphPoint> gp;
    for (int i = 0; i < 12; ++i) {
      hp.push_back(h.sample_point(rng));
      tp.push_back(i % 3 ? tree.sample_point(rng) : tree.vertex_point(i % tree.vertex_count()));
      gp.push_back(graph.sample_point(rng));
    }
    std::stringstream a, b, c;
    write_path_csv(a, SampledPath<H2Point>(t, hp));
    write_path_csv(b, SampledPath<TreePoint>(t, tp));
    write_path_csv(c, SampledPath<GraphPoint>(t, gp));
    const auto ha = read_path_csv<H2Point>(a);
    const auto tb = read_path_csv<TreePoint>(b);
    const auto gc = read_path_csv<GraphPoint>(c);
    EXPECT_EQ(ha.params(), t);
    EXPECT_EQ(tb.points(), tp);
    EXPECT_EQ(gc.points(), gp);
    for (int i = 0; i < 12; ++i) EXPECT_NEAR(h.distance(ha.points()[i], hp[i]), 0.0, 1e-12);
  }
}

TEST(PathCsv, RejectsBadInput) {
  std::istringstream wrong_header("t,x,y\n0,1,2\n");
  EXPECT_THROW(read_path_csv<H2Point>(wrong_header), Error);
  std::istringstream bad_number("t,vertex\n0,1\n1,abc\n");
  EXPECT_THROW(read_path_csv<GraphPoint>(bad_number), Error);
  std::istringstream short_row("t,x0,x1,x2\n0,1,0\n");
  EXPECT_THROW(read_path_csv<H2Point>(short_row), Error);
  std::istringstream off_sheet("t,x0,x1,x2\n0,2,0,0\n1,1,0,0\n");
  EXPECT_THROW(read_path_csv<H2Point>(off_sheet), Error);
}
