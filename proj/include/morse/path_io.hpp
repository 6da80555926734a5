#pragma once

// CSV serialization of sampled paths: header `t,<coords...>`, one row per sample.
//   H2Point:    t,x0,x1,x2   (hyperboloid coordinates)
//   TreePoint:  t,vertex,edge,offset   (-1 marks an absent vertex / edge)
//   GraphPoint: t,vertex

#include <array>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "morse/graph_space.hpp"
#include "morse/hyperbolic_plane.hpp"
#include "morse/metric_tree.hpp"
#include "morse/quasi_geodesic.hpp"

namespace morse {

template <class P>
struct PointCodec;

template <>
struct PointCodec<H2Point> {
  static constexpr std::array<const char*, 3> columns{"x0", "x1", "x2"};
  static std::vector<double> encode(const H2Point& p) { return {p.t, p.x, p.y}; }
  static H2Point decode(const std::vector<double>& c) {
    const H2Point p{c[0], c[1], c[2]};
    if (!p.on_sheet(1e-9)) throw Error("path csv: point is not on the hyperboloid");
    return H2Point::from_xy(p.x, p.y);
  }
};

template <>
struct PointCodec<TreePoint> {
  static constexpr std::array<const char*, 3> columns{"vertex", "edge", "offset"};
  static std::vector<double> encode(const TreePoint& p) {
    return {p.is_vertex() ? static_cast<double>(p.vertex) : -1.0, p.is_vertex() ? -1.0 : static_cast<double>(p.edge),
            p.offset};
  }
  static TreePoint decode(const std::vector<double>& c) {
    if (c[1] < 0.0) return {static_cast<std::size_t>(c[0]), TreePoint::npos, 0.0};
    return {TreePoint::npos, static_cast<std::size_t>(c[1]), c[2]};
  }
};

template <>
struct PointCodec<GraphPoint> {
  static constexpr std::array<const char*, 1> columns{"vertex"};
  static std::vector<double> encode(const GraphPoint& p) { return {static_cast<double>(p.vertex)}; }
  static GraphPoint decode(const std::vector<double>& c) { return {static_cast<std::size_t>(c[0])}; }
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class P>
void write_path_csv(std::ostream& out, const SampledPath<P>& path) {
  out << 't';
  for (const char* c : PointCodec<P>::columns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < path.size(); ++i) {
    out << format_double(path.params()[i]);
    for (double v : PointCodec<P>::encode(path.points()[i])) out << ',' << format_double(v);
    out << '\n';
  }
}

template <class P>
SampledPath<P> read_path_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("path csv: missing header");
  std::string expected = "t";
  for (const char* c : PointCodec<P>::columns) expected += std::string(",") + c;
  if (line != expected) throw Error("path csv: expected header '" + expected + "', got '" + line + "'");
  std::vector<double> params;
  std::vector<P> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw Error("trailing characters");
      } catch (const std::exception&) {
        throw Error("path csv line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (fields.size() != PointCodec<P>::columns.size() + 1)
      throw Error("path csv line " + std::to_string(line_no) + ": wrong column count");
    params.push_back(fields[0]);
    points.push_back(PointCodec<P>::decode(std::vector<double>(fields.begin() + 1, fields.end())));
  }
  return SampledPath<P>(std::move(params), std::move(points));
}

}  // namespace morse
