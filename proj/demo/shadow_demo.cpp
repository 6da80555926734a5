// Builds one sawtooth quasi-geodesic in a comb tree and in H^2, measures its
// (lambda, C) and prints how far it strays from the geodesic between its ends.

#include <cmath>
#include <cstdio>

#include "morse/certificate.hpp"
#include "morse/hyperbolic_plane.hpp"
#include "morse/metric_tree.hpp"
#include "morse/quasi_geodesic.hpp"

template <class S>
void report(const char* name, const S& space, const morse::GeneratedPath<morse::PointOf<S>>& gen,
            const morse::PointSet<morse::PointOf<S>>& geodesic, double delta) {
  const auto image = gen.path.image(morse::max_point_step(space, gen.path));
  const double hd = morse::hausdorff_distance(space, image, geodesic);
  const double denom = gen.qi.lambda * gen.qi.lambda * (gen.qi.C + delta);
  std::printf("%-5s lambda=%.4f C=%.4f delta=%.4f HD=%.4f  HD/(lambda^2 (C+delta))=%.4f\n", name, gen.qi.lambda,
              gen.qi.C, delta, hd, denom > 0 ? hd / denom : 0.0);
}

int main() {
  morse::Rng rng(7);
  const auto tree = morse::random_comb_tree(24, 1.0, 5.0, rng);
  const auto a = tree.vertex_point(0), b = tree.vertex_point(23);
  const auto tg = morse::generate_sawtooth(tree, a, b, 2.0, 5, 11, 0.05);
  report("tree", tree, tg, tree.geodesic_pointset(a, b, 0.02), 0.0);

  const morse::HyperbolicPlane plane;
  const auto p = morse::h2_point_at(plane.center(), 0.3, 3.0);
  const auto q = morse::h2_point_at(plane.center(), 0.3 + 3.14159, 3.0);
  const double delta = std::log(1.0 + std::sqrt(2.0));
  const auto hg = morse::generate_sawtooth(plane, p, q, 1.0, 4, 11, 0.05, {delta, {}});
  report("h2", plane, hg, morse::discretize_geodesic(plane, p, q, 0.01), delta);

  const auto opt = morse::certificate::optimize_constant({});
  std::printf("certified constant at l=d=100: %.3f, optimized: %.3f at l=%.3f d=%.3f\n",
              morse::certificate::morse_constant({}).k_total, opt.k, opt.params.l, opt.params.d);
}
