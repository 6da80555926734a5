#pragma once

// Experiment harness: instance generation, Morse-bound trials, adversarial
// search, lemma batches, delta reports and their CSV / JSON serialization.
//
// Every trial draws from its own RNG stream derived from (master seed, trial
// index), and reports are assembled in trial order, so output does not depend
// on the number of worker threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "morse/certificate.hpp"
#include "morse/common.hpp"
#include "morse/edge_list.hpp"
#include "morse/graph_space.hpp"
#include "morse/hyperbolic_plane.hpp"
#include "morse/lemma_checks.hpp"
#include "morse/metric_core.hpp"
#include "morse/metric_tree.hpp"
#include "morse/path_io.hpp"
#include "morse/quasi_geodesic.hpp"

namespace morse::harness {

using json = nlohmann::json;

class ConfigError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Configuration

struct TreeConfig {
  std::string edge_list;  // fixed tree for every trial when set
  std::size_t vertices = 80;
  double min_edge = 0.5;
  double max_edge = 2.0;
  std::size_t spine = 32;
  double spine_step = 1.0;
  double max_hair = 6.0;
};

struct H2Config {
  double center_u = 0.0;
  double center_v = 1.0;
  double radius = 3.0;
  std::size_t delta_samples = 100000;
  double safety = 1.5;
};

struct GraphConfig {
  std::string edge_list;
  std::size_t count = 20;  // random graphs when no edge list is given
  std::size_t vertices = 12;
  std::size_t extra_edges = 8;
  int max_weight = 3;
};

struct GeneratorConfig {
  std::size_t samples = 160;
  double max_amplitude = 3.0;
  double max_tooth_height = 3.0;
  std::size_t max_teeth = 6;
};

struct LemmaBatchConfig {
  std::size_t tree_trials = 1000;
  std::size_t h2_trials = 200;
  std::size_t monotonicity_pairs = 100;
};

struct SearchConfig {
  std::string space = "tree";
  std::size_t budget = 60;
  std::optional<double> fixed_lambda;
};

struct CertificateConfig {
  certificate::GridSpec grid;
  std::size_t refine_steps = 200;
  bool lipschitz_reduction = false;
};

struct Config {
  int version = 1;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::vector<std::string> spaces{"tree", "h2"};
  std::size_t tree_trials = 500;
  std::size_t h2_trials = 200;
  TreeConfig tree;
  H2Config h2;
  GraphConfig graph;
  GeneratorConfig generators;
  LemmaBatchConfig lemmas;
  SearchConfig search;
  CertificateConfig certificate;
};

namespace detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

}  // namespace detail

inline Config parse_config(const json& j) {
  using detail::check_keys;
  using detail::read;
  Config c;
  check_keys(j, "config", {"version", "seed", "jobs", "spaces", "trials", "tree", "h2", "graph", "generators",
                           "lemmas", "search", "certificate"});
  if (!j.contains("version")) throw ConfigError("config: missing 'version'");
  read(j, "version", c.version, "config");
  if (c.version != 1) throw ConfigError("config: unsupported version " + std::to_string(c.version));
  read(j, "seed", c.seed, "config");
  read(j, "jobs", c.jobs, "config");
  read(j, "spaces", c.spaces, "config");
  for (const auto& s : c.spaces)
    if (s != "tree" && s != "h2") throw ConfigError("config.spaces: unknown space '" + s + "' (tree, h2)");
  if (j.contains("trials")) {
    const auto& t = j["trials"];
    check_keys(t, "trials", {"tree", "h2"});
    read(t, "tree", c.tree_trials, "trials");
    read(t, "h2", c.h2_trials, "trials");
  }
  if (j.contains("tree")) {
    const auto& t = j["tree"];
    check_keys(t, "tree", {"edge_list", "vertices", "min_edge", "max_edge", "spine", "spine_step", "max_hair"});
    read(t, "edge_list", c.tree.edge_list, "tree");
    read(t, "vertices", c.tree.vertices, "tree");
    read(t, "min_edge", c.tree.min_edge, "tree");
    read(t, "max_edge", c.tree.max_edge, "tree");
    read(t, "spine", c.tree.spine, "tree");
    read(t, "spine_step", c.tree.spine_step, "tree");
    read(t, "max_hair", c.tree.max_hair, "tree");
    if (c.tree.vertices < 2 || c.tree.spine < 2) throw ConfigError("tree: needs at least two vertices");
    if (!(c.tree.min_edge > 0.0) || c.tree.max_edge < c.tree.min_edge) throw ConfigError("tree: bad edge range");
  }
  if (j.contains("h2")) {
    const auto& h = j["h2"];
    check_keys(h, "h2", {"center", "radius", "delta_samples", "safety"});
    if (h.contains("center")) {
      std::vector<double> center;
      read(h, "center", center, "h2");
      if (center.size() != 2 || !(center[1] > 0.0))
        throw ConfigError("h2.center: expected [u, v] half-plane coordinates with v > 0");
      c.h2.center_u = center[0];
      c.h2.center_v = center[1];
    }
    read(h, "radius", c.h2.radius, "h2");
    read(h, "delta_samples", c.h2.delta_samples, "h2");
    read(h, "safety", c.h2.safety, "h2");
    if (!(c.h2.radius > 0.0)) throw ConfigError("h2.radius must be > 0");
    if (c.h2.delta_samples == 0) throw ConfigError("h2.delta_samples must be >= 1");
    if (!(c.h2.safety >= 1.0)) throw ConfigError("h2.safety must be >= 1");
  }
  if (j.contains("graph")) {
    const auto& g = j["graph"];
    check_keys(g, "graph", {"edge_list", "count", "vertices", "extra_edges", "max_weight"});
    read(g, "edge_list", c.graph.edge_list, "graph");
    read(g, "count", c.graph.count, "graph");
    read(g, "vertices", c.graph.vertices, "graph");
    read(g, "extra_edges", c.graph.extra_edges, "graph");
    read(g, "max_weight", c.graph.max_weight, "graph");
    if (c.graph.max_weight < 1) throw ConfigError("graph.max_weight must be >= 1");
  }
  if (j.contains("generators")) {
    const auto& g = j["generators"];
    check_keys(g, "generators", {"samples", "max_amplitude", "max_tooth_height", "max_teeth"});
    read(g, "samples", c.generators.samples, "generators");
    read(g, "max_amplitude", c.generators.max_amplitude, "generators");
    read(g, "max_tooth_height", c.generators.max_tooth_height, "generators");
    read(g, "max_teeth", c.generators.max_teeth, "generators");
    if (c.generators.samples < 8) throw ConfigError("generators.samples must be >= 8");
    if (c.generators.max_teeth == 0) throw ConfigError("generators.max_teeth must be >= 1");
  }
  if (j.contains("lemmas")) {
    const auto& l = j["lemmas"];
    check_keys(l, "lemmas", {"tree_trials", "h2_trials", "monotonicity_pairs"});
    read(l, "tree_trials", c.lemmas.tree_trials, "lemmas");
    read(l, "h2_trials", c.lemmas.h2_trials, "lemmas");
    read(l, "monotonicity_pairs", c.lemmas.monotonicity_pairs, "lemmas");
  }
  if (j.contains("search")) {
    const auto& s = j["search"];
    check_keys(s, "search", {"space", "budget", "fixed_lambda"});
    read(s, "space", c.search.space, "search");
    read(s, "budget", c.search.budget, "search");
    if (s.contains("fixed_lambda") && !s["fixed_lambda"].is_null()) {
      double lambda = 1.0;
      read(s, "fixed_lambda", lambda, "search");
      if (!(lambda >= 1.0)) throw ConfigError("search.fixed_lambda must be >= 1");
      c.search.fixed_lambda = lambda;
    }
    if (c.search.space != "tree" && c.search.space != "h2") throw ConfigError("search.space must be tree or h2");
  }
  if (j.contains("certificate")) {
    const auto& k = j["certificate"];
    check_keys(k, "certificate", {"l_min", "l_max", "d_min", "d_max", "l_steps", "d_steps", "refine_steps",
                                  "lipschitz_reduction"});
    read(k, "l_min", c.certificate.grid.l_min, "certificate");
    read(k, "l_max", c.certificate.grid.l_max, "certificate");
    read(k, "d_min", c.certificate.grid.d_min, "certificate");
    read(k, "d_max", c.certificate.grid.d_max, "certificate");
    read(k, "l_steps", c.certificate.grid.l_steps, "certificate");
    read(k, "d_steps", c.certificate.grid.d_steps, "certificate");
    read(k, "refine_steps", c.certificate.refine_steps, "certificate");
    read(k, "lipschitz_reduction", c.certificate.lipschitz_reduction, "certificate");
  }
  if (c.jobs == 0) throw ConfigError("config.jobs must be >= 1");
  return c;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Work pool

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; results must be written
/// to per-index slots by the caller.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Shared per-run context

/// Sampled four-point estimate over `samples` quadruples of the configured disc.
inline double h2_delta_estimate(const H2Config& cfg, std::uint64_t seed) {
  const auto plane = HyperbolicPlane::from_half_plane_region(cfg.center_u, cfg.center_v, cfg.radius);
  Rng rng = stream_rng(seed, 0xde17a);
  const auto quads = sample_quadruples(plane, cfg.delta_samples, rng);
  return estimate_delta(plane, std::span<const Quadruple<HyperbolicPlane>>(quads));
}

struct RunContext {
  double k_cert = kInf;        // certificate coefficient used for bound_cert
  double h2_delta_raw = 0.0;   // sampled estimate
  double h2_delta = 0.0;       // safety * estimate
  std::string h2_delta_source;
};

inline std::string format_number(double v, int digits = 12) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline RunContext make_context(const Config& cfg, bool need_h2) {
  RunContext ctx;
  const auto opt = certificate::optimize_constant(cfg.certificate.grid, cfg.certificate.refine_steps);
  ctx.k_cert = cfg.certificate.lipschitz_reduction ? certificate::with_lipschitz_reduction(opt.k) : opt.k;
  if (need_h2) {
    ctx.h2_delta_raw = h2_delta_estimate(cfg.h2, cfg.seed);
    ctx.h2_delta = cfg.h2.safety * ctx.h2_delta_raw;
    ctx.h2_delta_source = "estimated*" + format_number(cfg.h2.safety, 6);
  }
  return ctx;
}

// ---------------------------------------------------------------------------
// Morse-bound trials

enum class Generator { perturbed, sawtooth };

inline std::string_view to_string(Generator g) { return g == Generator::perturbed ? "perturbed" : "sawtooth"; }

struct InstanceSpec {
  Generator generator = Generator::perturbed;
  double amplitude = 0.0;   // perturbation amplitude or tooth height
  std::size_t teeth = 1;
  std::size_t samples = 160;
  std::uint64_t seed = 0;   // generator seed
};

struct ExperimentRecord {
  std::string space;
  std::string generator;
  std::uint64_t seed = 0;  // trial seed
  double lambda = 1.0;
  double C = 0.0;
  double delta = 0.0;
  std::string delta_source;
  double hd_qg = 0.0;
  double hd_gq = 0.0;
  double bound92 = 0.0;
  double bound_cert = 0.0;
  double ratio = 0.0;
  double slack = 0.0;
  std::string verdict;  // pass | fail | skipped
  std::string note;
};

inline constexpr double kTheoremCoefficient = 92.0;

/// Recomputes the verdict from the record's stored fields.
inline std::string reevaluate_verdict(const ExperimentRecord& r) {
  if (r.verdict == "skipped") return "skipped";
  const double hd = std::max(r.hd_qg, r.hd_gq);
  const double denom = r.lambda * r.lambda * (r.C + r.delta);
  const bool ok = hd <= kTheoremCoefficient * denom + r.slack + kTolerance &&
                  hd <= r.bound_cert + r.slack + kTolerance;
  return ok ? "pass" : "fail";
}

/// Measures a generated instance against the geodesic G between its endpoint samples.
template <GeodesicSpace S>
ExperimentRecord measure_instance(const S& space, const GeneratedPath<PointOf<S>>& gen,
                                  const PointSet<PointOf<S>>& geodesic, double delta, double k_cert) {
  ExperimentRecord r;
  r.space = std::string(to_string(space.kind()));
  r.lambda = gen.qi.lambda;
  r.C = gen.qi.C;
  r.delta = delta;
  const auto image = gen.path.image(max_point_step(space, gen.path));
  r.hd_qg = directed_hausdorff(space, image, geodesic);
  r.hd_gq = directed_hausdorff(space, geodesic, image);
  r.slack = 0.5 * (image.resolution() + geodesic.resolution());
  const double denom = r.lambda * r.lambda * (r.C + r.delta);
  r.bound92 = kTheoremCoefficient * denom;
  r.bound_cert = k_cert * denom;
  const double excess = std::max(std::max(r.hd_qg, r.hd_gq) - r.slack, 0.0);
  r.ratio = denom > 0.0 ? excess / denom : (excess > 0.0 ? kInf : 0.0);
  r.verdict = "pass";
  r.verdict = reevaluate_verdict(r);
  return r;
}

template <GeodesicSpace S>
GeneratedPath<PointOf<S>> generate_instance(const S& space, const PointOf<S>& p, const PointOf<S>& q,
                                            const InstanceSpec& spec, const FitOptions& fit) {
  if (spec.generator == Generator::perturbed)
    return generate_perturbed_geodesic(space, p, q, spec.amplitude, spec.samples, spec.seed, fit);
  const double len = space.distance(p, q);
  const double step = (len + 2.0 * static_cast<double>(spec.teeth) * spec.amplitude) / static_cast<double>(spec.samples);
  return generate_sawtooth(space, p, q, spec.amplitude, spec.teeth, spec.seed, step, fit);
}

/// A concrete space with the endpoints of the geodesic to shadow.
struct TreeInstanceSpace {
  MetricTree tree;
  TreePoint p, q;
};

inline TreeInstanceSpace make_trial_tree(const TreeConfig& cfg, std::size_t index, Rng& rng) {
  if (!cfg.edge_list.empty()) {
    auto tree = tree_from_edge_list(read_edge_list_file(cfg.edge_list));
    const auto [a, b] = tree.diameter_endpoints();
    return {tree, tree.vertex_point(a), tree.vertex_point(b)};
  }
  if (index % 2 == 0) {
    auto tree = random_comb_tree(cfg.spine, cfg.spine_step, cfg.max_hair, rng);
    return {tree, tree.vertex_point(0), tree.vertex_point(cfg.spine - 1)};
  }
  auto tree = random_recursive_tree(cfg.vertices, cfg.min_edge, cfg.max_edge, rng);
  const auto [a, b] = tree.diameter_endpoints();
  return {tree, tree.vertex_point(a), tree.vertex_point(b)};
}

inline InstanceSpec random_spec(const GeneratorConfig& g, std::size_t index, Rng& rng) {
  InstanceSpec spec;
  spec.generator = (index / 2) % 2 == 0 ? Generator::perturbed : Generator::sawtooth;
  spec.samples = g.samples;
  spec.teeth = 1 + uniform_index(rng, g.max_teeth);
  spec.amplitude = spec.generator == Generator::perturbed ? uniform(rng, 0.0, g.max_amplitude)
                                                           : uniform(rng, 0.0, g.max_tooth_height);
  spec.seed = rng();
  return spec;
}

inline std::pair<H2Point, H2Point> h2_endpoints(const HyperbolicPlane& plane, Rng& rng) {
  // Endpoints at least one sampling radius apart.
  for (int attempt = 0;; ++attempt) {
    const auto p = plane.sample_point(rng);
    const auto q = plane.sample_point(rng);
    if (plane.distance(p, q) >= plane.radius() || attempt >= 64) return {p, q};
  }
}

inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t stream, std::size_t index) {
  return mix_seed(mix_seed(master ^ mix_seed(stream)) + index);
}

struct TrialSetup {
  std::optional<double> fixed_lambda;
};

inline ExperimentRecord tree_trial(const Config& cfg, const RunContext& ctx, std::size_t index,
                                   std::optional<InstanceSpec> override_spec = {}, const TrialSetup& setup = {}) {
  const std::uint64_t seed = trial_seed(cfg.seed, 0x7eee, index);
  Rng rng(seed);
  const auto inst = make_trial_tree(cfg.tree, index, rng);
  auto spec = random_spec(cfg.generators, index, rng);
  if (override_spec) spec = *override_spec;
  const FitOptions fit{0.0, setup.fixed_lambda};
  const auto gen = generate_instance(inst.tree, inst.p, inst.q, spec, fit);
  const auto& f = gen.path.points();
  const double len = inst.tree.distance(f.front(), f.back());
  const auto geodesic = inst.tree.geodesic_pointset(f.front(), f.back(), default_resolution(0.0, len));
  auto r = measure_instance(inst.tree, gen, geodesic, 0.0, ctx.k_cert);
  r.seed = seed;
  r.generator = std::string(to_string(spec.generator));
  r.delta_source = "exact";
  return r;
}

inline ExperimentRecord h2_trial(const Config& cfg, const RunContext& ctx, std::size_t index,
                                 std::optional<InstanceSpec> override_spec = {}, const TrialSetup& setup = {}) {
  const std::uint64_t seed = trial_seed(cfg.seed, 0x42, index);
  Rng rng(seed);
  const auto plane = HyperbolicPlane::from_half_plane_region(cfg.h2.center_u, cfg.h2.center_v, cfg.h2.radius,
                                                             ctx.h2_delta);
  const auto [p, q] = h2_endpoints(plane, rng);
  auto spec = random_spec(cfg.generators, index, rng);
  if (override_spec) spec = *override_spec;
  const FitOptions fit{ctx.h2_delta, setup.fixed_lambda};
  const auto gen = generate_instance(plane, p, q, spec, fit);
  const auto& f = gen.path.points();
  const double len = plane.distance(f.front(), f.back());
  const auto geodesic = discretize_geodesic(plane, f.front(), f.back(), default_resolution(ctx.h2_delta, len));
  auto r = measure_instance(plane, gen, geodesic, ctx.h2_delta, ctx.k_cert);
  r.seed = seed;
  r.generator = std::string(to_string(spec.generator));
  r.delta_source = ctx.h2_delta_source;
  r.note = "indicative";
  return r;
}

inline std::vector<ExperimentRecord> run_morse_experiment(const Config& cfg, const RunContext& ctx) {
  struct Job {
    bool h2;
    std::size_t index;
  };
  std::vector<Job> jobs;
  for (const auto& s : cfg.spaces) {
    const bool h2 = s == "h2";
    const std::size_t n = h2 ? cfg.h2_trials : cfg.tree_trials;
    for (std::size_t i = 0; i < n; ++i) jobs.push_back({h2, i});
  }
  std::vector<ExperimentRecord> out(jobs.size());
  parallel_for(jobs.size(), cfg.jobs, [&](std::size_t k) {
    try {
      out[k] = jobs[k].h2 ? h2_trial(cfg, ctx, jobs[k].index) : tree_trial(cfg, ctx, jobs[k].index);
    } catch (const PreconditionError& e) {
      out[k].space = jobs[k].h2 ? "h2" : "tree";
      out[k].seed = trial_seed(cfg.seed, jobs[k].h2 ? 0x42 : 0x7eee, jobs[k].index);
      out[k].verdict = "skipped";
      out[k].note = e.what();
    }
  });
  return out;
}

struct SearchResult {
  ExperimentRecord best;
  InstanceSpec spec;
  std::vector<double> trajectory;  // best ratio after each step
};

/// Hill climbing over (generator, amplitude, teeth) maximizing the ratio; the
/// instance space and endpoints stay those of trial 0 under the config seed.
inline SearchResult worst_case_search(const Config& cfg, const RunContext& ctx) {
  const bool h2 = cfg.search.space == "h2";
  const TrialSetup setup{cfg.search.fixed_lambda};
  Rng rng = stream_rng(cfg.seed, 0x5ea7c4);
  auto eval = [&](const InstanceSpec& s) {
    return h2 ? h2_trial(cfg, ctx, 0, s, setup) : tree_trial(cfg, ctx, 0, s, setup);
  };
  SearchResult res;
  res.spec.generator = Generator::sawtooth;
  res.spec.amplitude = 0.5 * cfg.generators.max_tooth_height;
  res.spec.teeth = std::max<std::size_t>(1, cfg.generators.max_teeth / 2);
  res.spec.samples = cfg.generators.samples;
  res.spec.seed = rng();
  res.best = eval(res.spec);
  for (std::size_t step = 0; step < cfg.search.budget; ++step) {
    InstanceSpec cand = res.spec;
    switch (uniform_index(rng, 4)) {
      case 0: cand.amplitude *= std::exp(uniform(rng, -0.5, 0.5)); break;
      case 1: cand.teeth = std::max<std::size_t>(1, cand.teeth + (uniform_index(rng, 2) == 0 ? 1 : std::size_t(-1)));
        if (cand.teeth == 0 || cand.teeth > 64) cand.teeth = 1;
        break;
      case 2: cand.generator = cand.generator == Generator::sawtooth ? Generator::perturbed : Generator::sawtooth; break;
      default: cand.seed = rng(); break;
    }
    cand.amplitude = std::clamp(cand.amplitude, 1e-3, 4.0 * std::max(cfg.generators.max_tooth_height, cfg.generators.max_amplitude));
    try {
      auto r = eval(cand);
      if (r.ratio > res.best.ratio && std::isfinite(r.ratio)) {
        res.best = std::move(r);
        res.spec = cand;
      }
    } catch (const PreconditionError&) {
    }
    res.trajectory.push_back(res.best.ratio);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Lemma batches

struct LemmaRow {
  std::string lemma;  // 2.2 | 2.4 | 2.5, or <id>-monotone
  std::string space;
  std::uint64_t seed = 0;
  double margin = 0.0;
  double slack = 0.0;
  std::string verdict;
  std::string note;
};

namespace lemma_trials {

// A random point of the tree; by default length-uniform.
struct TreeLemmaWorld {
  MetricTree tree;
  PointSet<TreePoint> target;
};

inline TreeLemmaWorld tree_world(Rng& rng) {
  auto tree = random_comb_tree(24, 1.0, 6.0, rng);
  TreePoint a = tree.sample_point(rng), b = tree.sample_point(rng);
  for (int k = 0; k < 64 && tree.distance(a, b) < 2.0; ++k) b = tree.sample_point(rng);
  auto target = tree.geodesic_pointset(a, b, 0.05);
  return {std::move(tree), std::move(target)};
}

struct H2LemmaWorld {
  HyperbolicPlane plane;
  H2Point a, b;
  PointSet<H2Point> target;
};

inline H2LemmaWorld h2_world(const HyperbolicPlane& plane, double delta, double min_length, double max_length,
                             Rng& rng) {
  const auto a = plane.sample_point(rng);
  const double len = uniform(rng, min_length, max_length);
  const auto b = h2_point_at(a, uniform(rng, 0.0, 2.0 * std::numbers::pi), len);
  auto target = discretize_geodesic(plane, a, b, default_resolution(delta, len));
  return {plane, a, b, std::move(target)};
}

struct CrossingInstance {
  double d_target = 0.0;
  double span = 0.0;
};

template <GeodesicSpace S>
double projection_span(const S& space, const SampledPath<PointOf<S>>& path, const PointSet<PointOf<S>>& target) {
  const auto& p0 = target[proj_indices(space, path.points().front(), target, 0.0).front()];
  const auto& pn = target[proj_indices(space, path.points().back(), target, 0.0).front()];
  return space.distance(p0, pn);
}

inline LemmaRow tree22(std::uint64_t seed, std::optional<std::pair<double, double>> deltas = {}) {
  Rng rng(seed);
  auto w = tree_world(rng);
  for (int attempt = 0; attempt < 32; ++attempt) {
    const auto a = w.target[0];
    const auto b = w.target[w.target.size() - 1];
    // Path wandering from near one end of the target to near the other.
    const auto start = w.tree.geodesic_point(a, w.tree.sample_point(rng), uniform(rng, 0.0, 1.5));
    const auto end = w.tree.geodesic_point(b, w.tree.sample_point(rng), uniform(rng, 0.0, 1.5));
    if (w.tree.distance(start, end) == 0.0) continue;
    const auto gen = generate_perturbed_geodesic(w.tree, start, end, uniform(rng, 0.0, 2.0), 120, rng());
    const double span = projection_span(w.tree, gen.path, w.target);
    if (span <= 1e-6) continue;
    const double d_target = uniform(rng, 0.0, span);
    if (!deltas) {
      const auto r = find_projection_crossing(w.tree, gen.path, w.target, LemmaConfig{0.0, 0.0, 0.0}, d_target);
      return {"2.2", "tree", seed, r.margin.margin, r.margin.slack, std::string(to_string(r.margin.verdict)), ""};
    }
    const double lo = deltas->first * d_target / 4.0, hi = deltas->second * d_target / 4.0;
    const auto r1 = find_projection_crossing(w.tree, gen.path, w.target, LemmaConfig{0.0, lo, 0.0}, d_target);
    const auto r2 = find_projection_crossing(w.tree, gen.path, w.target, LemmaConfig{0.0, hi, 0.0}, d_target);
    const double diff = r2.margin.margin - r1.margin.margin;
    return {"2.2-monotone", "tree", seed, diff, 0.0, diff >= -kTolerance ? "ok" : "violation", ""};
  }
  return {"2.2", "tree", seed, 0.0, 0.0, "skipped", "no admissible path"};
}

inline LemmaRow tree24(std::uint64_t seed, std::optional<std::pair<double, double>> deltas = {}) {
  Rng rng(seed);
  auto w = tree_world(rng);
  const auto x = w.tree.sample_point(rng);
  const auto y = w.tree.sample_point(rng);
  if (!deltas) {
    const auto m = lemma24_margin(w.tree, w.target, LemmaConfig{0.0, 0.0, 0.0}, x, y);
    return {"2.4", "tree", seed, m.margin, m.slack, std::string(to_string(m.verdict)), ""};
  }
  const auto m1 = lemma24_margin(w.tree, w.target, LemmaConfig{0.0, deltas->first, 0.0}, x, y);
  const auto m2 = lemma24_margin(w.tree, w.target, LemmaConfig{0.0, deltas->second, 0.0}, x, y);
  const double diff = m2.margin - m1.margin;
  return {"2.4-monotone", "tree", seed, diff, 0.0, diff >= -kTolerance ? "ok" : "violation", ""};
}

/// Path wandering inside one hair of a comb, beyond depth D from the spine.
inline LemmaRow tree25(std::uint64_t seed, std::optional<std::pair<double, double>> deltas = {}) {
  Rng rng(seed);
  constexpr std::size_t kSpine = 24;
  std::vector<double> hairs(kSpine);
  for (auto& h : hairs) h = dyadic(uniform(rng, 0.0, 6.0), 8);
  const std::size_t chosen = uniform_index(rng, kSpine);
  hairs[chosen] = dyadic(uniform(rng, 2.0, 6.0), 8);
  const auto tree = comb_tree(kSpine, 1.0, hairs);
  std::size_t tip = kSpine;
  for (std::size_t i = 0; i <= chosen; ++i)
    if (hairs[i] > 0.0) tip += 4;
  tip -= 1;
  const auto base = tree.vertex_point(chosen);
  const auto leaf = tree.vertex_point(tip);
  const auto target = tree.geodesic_pointset(tree.vertex_point(0), tree.vertex_point(kSpine - 1), 0.05);
  const double hair = hairs[chosen];
  const double depth = uniform(rng, 0.2, 0.7) * hair;
  std::vector<TreePoint> pts;
  double s = uniform(rng, depth, hair);
  for (int i = 0; i < 60; ++i) {
    pts.push_back(tree.geodesic_point(base, leaf, s));
    s += uniform(rng, -0.3, 0.3);
    if (s < depth) s = 2.0 * depth - s;
    if (s > hair) s = 2.0 * hair - s;
    s = std::clamp(s, depth, hair);
  }
  const double lambda = uniform(rng, 1.0, 3.0);
  auto path = arclength_path(tree, pts);
  std::vector<double> params = path.params();
  for (auto& t : params) t /= lambda;
  const SampledPath<TreePoint> scaled(params, path.points());
  const QIParams qi{lambda, qi_upper_defect(tree, scaled, lambda)};
  double D = kInf;
  for (const auto& p : pts) D = std::min(D, infdist(tree, p, target));
  if (!deltas) {
    const auto m = lemma25_margin(tree, target, LemmaConfig{0.0, 0.0, 0.0}, scaled, qi, D);
    return {"2.5", "tree", seed, m.margin, m.slack, std::string(to_string(m.verdict)), ""};
  }
  const double room = std::max(0.0, (D - qi.C / 2.0) / 7.5);
  const auto m1 = lemma25_margin(tree, target, LemmaConfig{0.0, deltas->first * room, 0.0}, scaled, qi, D);
  const auto m2 = lemma25_margin(tree, target, LemmaConfig{0.0, deltas->second * room, 0.0}, scaled, qi, D);
  const double diff = m2.margin - m1.margin;
  return {"2.5-monotone", "tree", seed, diff, 0.0, diff >= -kTolerance ? "ok" : "violation", ""};
}

inline LemmaRow h2_22(const HyperbolicPlane& plane, double delta, std::uint64_t seed,
                      std::optional<std::pair<double, double>> deltas = {}) {
  Rng rng(seed);
  for (int attempt = 0; attempt < 32; ++attempt) {
    const auto w = h2_world(plane, delta, 4.0 * delta + 1.0, 4.0 * delta + 5.0, rng);
    const auto start = h2_point_at(w.a, uniform(rng, 0.0, 2.0 * std::numbers::pi), uniform(rng, 0.0, 1.0));
    const auto end = h2_point_at(w.b, uniform(rng, 0.0, 2.0 * std::numbers::pi), uniform(rng, 0.0, 1.0));
    const auto gen = generate_perturbed_geodesic(plane, start, end, uniform(rng, 0.0, 1.5), 160, rng());
    const double span = projection_span(plane, gen.path, w.target);
    if (span < 4.0 * delta + 1e-6) continue;
    const double d_target = uniform(rng, 4.0 * delta, span);
    if (!deltas) {
      const auto r = find_projection_crossing(plane, gen.path, w.target, LemmaConfig{0.0, delta, 0.0}, d_target);
      return {"2.2", "h2", seed, r.margin.margin, r.margin.slack, std::string(to_string(r.margin.verdict)), ""};
    }
    const double lo = deltas->first * d_target / 4.0, hi = deltas->second * d_target / 4.0;
    const auto r1 = find_projection_crossing(plane, gen.path, w.target, LemmaConfig{0.0, lo, 0.0}, d_target);
    const auto r2 = find_projection_crossing(plane, gen.path, w.target, LemmaConfig{0.0, hi, 0.0}, d_target);
    const double diff = r2.margin.margin - r1.margin.margin;
    return {"2.2-monotone", "h2", seed, diff, 0.0, diff >= -kTolerance ? "ok" : "violation", ""};
  }
  return {"2.2", "h2", seed, 0.0, 0.0, "skipped", "no admissible path"};
}

inline LemmaRow h2_24(const HyperbolicPlane& plane, double delta, std::uint64_t seed,
                      std::optional<std::pair<double, double>> deltas = {}) {
  Rng rng(seed);
  const auto w = h2_world(plane, delta, 0.5, 6.0, rng);
  const auto x = plane.sample_point(rng);
  const auto y = plane.sample_point(rng);
  if (!deltas) {
    const auto m = lemma24_margin(plane, w.target, LemmaConfig{0.0, delta, 0.0}, x, y);
    return {"2.4", "h2", seed, m.margin, m.slack, std::string(to_string(m.verdict)), ""};
  }
  const auto m1 = lemma24_margin(plane, w.target, LemmaConfig{0.0, deltas->first * 2.0 * delta, 0.0}, x, y);
  const auto m2 = lemma24_margin(plane, w.target, LemmaConfig{0.0, deltas->second * 2.0 * delta, 0.0}, x, y);
  const double diff = m2.margin - m1.margin;
  return {"2.4-monotone", "h2", seed, diff, 0.0, diff >= -kTolerance ? "ok" : "violation", ""};
}

/// Path running along an equidistant curve at distance >= 15/2 delta + margin from the target.
inline LemmaRow h2_25(const HyperbolicPlane& plane, double delta, std::uint64_t seed,
                      std::optional<std::pair<double, double>> deltas = {}) {
  Rng rng(seed);
  const auto w = h2_world(plane, delta, 1.0, 6.0, rng);
  const double len = plane.distance(w.a, w.b);
  const double height = 7.5 * delta + uniform(rng, 0.5, 2.0);
  const int side = uniform_index(rng, 2) == 0 ? 1 : -1;
  const double s0 = uniform(rng, 0.0, 0.5 * len), s1 = uniform(rng, s0 + 0.1 * len, len);
  std::vector<H2Point> pts;
  constexpr int kSamples = 80;
  for (int i = 0; i < kSamples; ++i) {
    const double s = s0 + (s1 - s0) * i / (kSamples - 1);
    const auto base = plane.geodesic_point(w.a, w.b, s);
    pts.push_back(plane.perpendicular_offset(w.a, w.b, base, side, height + uniform(rng, 0.0, 0.2)));
  }
  const double lambda = uniform(rng, 1.0, 3.0);
  const auto path = arclength_path(plane, pts);
  std::vector<double> params = path.params();
  for (auto& t : params) t /= lambda;
  const SampledPath<H2Point> scaled(params, path.points());
  const QIParams qi{lambda, qi_upper_defect(plane, scaled, lambda)};
  double D = kInf;
  for (const auto& p : pts) D = std::min(D, infdist(plane, p, w.target));
  if (!deltas) {
    const auto m = lemma25_margin(plane, w.target, LemmaConfig{0.0, delta, 0.0}, scaled, qi, D);
    return {"2.5", "h2", seed, m.margin, m.slack, std::string(to_string(m.verdict)), ""};
  }
  const double room = std::max(0.0, (D - qi.C / 2.0) / 7.5);
  const auto m1 = lemma25_margin(plane, w.target, LemmaConfig{0.0, deltas->first * room, 0.0}, scaled, qi, D);
  const auto m2 = lemma25_margin(plane, w.target, LemmaConfig{0.0, deltas->second * room, 0.0}, scaled, qi, D);
  const double diff = m2.margin - m1.margin;
  return {"2.5-monotone", "h2", seed, diff, 0.0, diff >= -kTolerance ? "ok" : "violation", ""};
}

}  // namespace lemma_trials

/// N seeded trials per lemma per space, plus paired monotonicity trials
/// (margin at a larger delta minus margin at a smaller one, same instance).
inline std::vector<LemmaRow> check_lemmas_batch(const Config& cfg, const RunContext& ctx) {
  using Fn = std::function<LemmaRow(std::uint64_t, std::optional<std::pair<double, double>>)>;
  const auto plane = HyperbolicPlane::from_half_plane_region(cfg.h2.center_u, cfg.h2.center_v, cfg.h2.radius,
                                                             ctx.h2_delta);
  const double delta = ctx.h2_delta;
  const bool use_tree = std::find(cfg.spaces.begin(), cfg.spaces.end(), "tree") != cfg.spaces.end();
  const bool use_h2 = std::find(cfg.spaces.begin(), cfg.spaces.end(), "h2") != cfg.spaces.end();
  struct Family {
    std::string lemma;
    std::uint64_t stream;
    bool h2;
    Fn fn;
  };
  const std::vector<Family> families{
      {"2.2", 0x22, false, [](std::uint64_t s, auto d) { return lemma_trials::tree22(s, d); }},
      {"2.4", 0x24, false, [](std::uint64_t s, auto d) { return lemma_trials::tree24(s, d); }},
      {"2.5", 0x25, false, [](std::uint64_t s, auto d) { return lemma_trials::tree25(s, d); }},
      {"2.2", 0x122, true, [&](std::uint64_t s, auto d) { return lemma_trials::h2_22(plane, delta, s, d); }},
      {"2.4", 0x124, true, [&](std::uint64_t s, auto d) { return lemma_trials::h2_24(plane, delta, s, d); }},
      {"2.5", 0x125, true, [&](std::uint64_t s, auto d) { return lemma_trials::h2_25(plane, delta, s, d); }},
  };
  struct Job {
    const Family* family;
    std::uint64_t seed;
    bool monotone;
  };
  std::vector<Job> jobs;
  for (const auto& f : families) {
    if (f.h2 ? !use_h2 : !use_tree) continue;
    const std::size_t n = f.h2 ? cfg.lemmas.h2_trials : cfg.lemmas.tree_trials;
    for (std::size_t i = 0; i < n; ++i) jobs.push_back({&f, trial_seed(cfg.seed, f.stream, i), false});
  }
  // Monotonicity pairs alternate between the enabled spaces, per lemma.
  for (std::size_t lemma = 0; lemma < 3; ++lemma)
    for (std::size_t i = 0; i < cfg.lemmas.monotonicity_pairs; ++i) {
      bool h2 = i % 2 == 1;
      if (h2 && !use_h2) h2 = false;
      if (!h2 && !use_tree) h2 = true;
      if (h2 ? !use_h2 : !use_tree) continue;
      const auto& f = families[lemma + (h2 ? 3 : 0)];
      jobs.push_back({&f, trial_seed(cfg.seed, f.stream ^ 0x30000, i), true});
    }
  std::vector<LemmaRow> rows(jobs.size());
  parallel_for(jobs.size(), cfg.jobs, [&](std::size_t k) {
    const auto& job = jobs[k];
    std::optional<std::pair<double, double>> deltas;
    if (job.monotone) {
      Rng rng(mix_seed(job.seed));
      const double a = uniform(rng, 0.0, 1.0), b = uniform(rng, 0.0, 1.0);
      deltas = std::pair(std::min(a, b), std::max(a, b));
    }
    try {
      rows[k] = job.family->fn(job.seed, deltas);
    } catch (const PreconditionError& e) {
      rows[k] = {job.family->lemma + (job.monotone ? "-monotone" : ""), job.family->h2 ? "h2" : "tree", job.seed, 0.0, 0.0, "skipped",
                 e.what()};
    }
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Delta reports

struct DeltaRow {
  std::string space;
  std::string method;  // exact | exhaustive | sampled | estimated*safety
  double delta = 0.0;
  std::size_t samples = 0;
  double safety = 1.0;
  double delta_used = 0.0;
};

inline std::vector<DeltaRow> estimate_delta_report(const Config& cfg, const RunContext& ctx) {
  std::vector<DeltaRow> rows;
  const bool use_tree = std::find(cfg.spaces.begin(), cfg.spaces.end(), "tree") != cfg.spaces.end();
  const bool use_h2 = std::find(cfg.spaces.begin(), cfg.spaces.end(), "h2") != cfg.spaces.end();
  if (use_tree) {
    Rng rng = stream_rng(cfg.seed, 0x7eee);
    const auto inst = make_trial_tree(cfg.tree, 0, rng);
    constexpr std::size_t kTreeSamples = 20000;
    const auto quads = sample_quadruples(inst.tree, kTreeSamples, rng);
    const double est = estimate_delta(inst.tree, std::span<const Quadruple<MetricTree>>(quads));
    rows.push_back({"tree", "exact", 0.0, 0, 1.0, 0.0});
    rows.push_back({"tree", "sampled", est, kTreeSamples, 1.0, 0.0});
  }
  // Graphs: from the edge list if given, else random small graphs.
  std::vector<GraphSpace> graphs;
  if (!cfg.graph.edge_list.empty()) {
    graphs.push_back(graph_from_edge_list(read_edge_list_file(cfg.graph.edge_list)));
  } else {
    Rng rng = stream_rng(cfg.seed, 0x9a9);
    for (std::size_t i = 0; i < cfg.graph.count; ++i)
      graphs.push_back(random_graph(cfg.graph.vertices, cfg.graph.extra_edges, cfg.graph.max_weight, rng));
  }
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const double exact = graph_delta_exhaustive(graphs[i]);
    rows.push_back({"graph[" + std::to_string(i) + "]", "exhaustive", exact,
                    static_cast<std::size_t>(std::pow(static_cast<double>(graphs[i].vertex_count()), 4)), 1.0, exact});
  }
  if (use_h2)
    rows.push_back({"h2", ctx.h2_delta_source, ctx.h2_delta_raw, cfg.h2.delta_samples, cfg.h2.safety, ctx.h2_delta});
  return rows;
}

// ---------------------------------------------------------------------------
// Serialization

inline const char* kMorseCsvHeader = "space,seed,lambda,C,delta,delta_source,hd_qg,hd_gq,bound92,bound_cert,ratio,slack,verdict";

inline void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records) {
  out << kMorseCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.space << ',' << r.seed << ',' << format_number(r.lambda) << ',' << format_number(r.C) << ','
        << format_number(r.delta) << ',' << r.delta_source << ',' << format_number(r.hd_qg) << ','
        << format_number(r.hd_gq) << ',' << format_number(r.bound92) << ',' << format_number(r.bound_cert) << ','
        << format_number(r.ratio) << ',' << format_number(r.slack) << ',' << r.verdict << '\n';
  }
}

inline json to_json(const ExperimentRecord& r) {
  return json{{"space", r.space},   {"generator", r.generator}, {"seed", r.seed},
              {"lambda", r.lambda}, {"C", r.C},                 {"delta", r.delta},
              {"delta_source", r.delta_source},
              {"hd_qg", r.hd_qg},   {"hd_gq", r.hd_gq},         {"bound92", r.bound92},
              {"bound_cert", r.bound_cert},
              {"ratio", std::isfinite(r.ratio) ? json(r.ratio) : json("inf")},
              {"slack", r.slack},   {"verdict", r.verdict},     {"note", r.note}};
}

struct MorseSummary {
  std::size_t trials = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;
  double max_ratio = 0.0;
};

inline MorseSummary summarize(const std::vector<ExperimentRecord>& records, const std::string& space = "") {
  MorseSummary s;
  for (const auto& r : records) {
    if (!space.empty() && r.space != space) continue;
    ++s.trials;
    if (r.verdict == "pass") ++s.passed;
    else if (r.verdict == "fail") ++s.failed;
    else ++s.skipped;
    if (r.verdict != "skipped") s.max_ratio = std::max(s.max_ratio, r.ratio);
  }
  return s;
}

inline json to_json(const MorseSummary& s) {
  return json{{"trials", s.trials}, {"passed", s.passed}, {"failed", s.failed}, {"skipped", s.skipped},
              {"max_ratio", s.max_ratio}};
}

inline void write_records_json(std::ostream& out, const std::vector<ExperimentRecord>& records) {
  json j;
  j["records"] = json::array();
  for (const auto& r : records) j["records"].push_back(to_json(r));
  j["summary"] = {{"all", to_json(summarize(records))},
                  {"tree", to_json(summarize(records, "tree"))},
                  {"h2", to_json(summarize(records, "h2"))}};
  out << j.dump(2) << '\n';
}

inline void write_lemma_csv(std::ostream& out, const std::vector<LemmaRow>& rows) {
  out << "lemma,space,seed,margin,slack,verdict\n";
  for (const auto& r : rows)
    out << r.lemma << ',' << r.space << ',' << r.seed << ',' << format_number(r.margin) << ','
        << format_number(r.slack) << ',' << r.verdict << '\n';
}

inline json lemma_json(const std::vector<LemmaRow>& rows) {
  json j;
  j["rows"] = json::array();
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& r : rows) {
    j["rows"].push_back({{"lemma", r.lemma}, {"space", r.space}, {"seed", r.seed}, {"margin", r.margin},
                         {"slack", r.slack}, {"verdict", r.verdict}, {"note", r.note}});
    ++counts[r.lemma + "/" + r.space][r.verdict];
  }
  j["counts"] = counts;
  return j;
}

inline void write_delta_csv(std::ostream& out, const std::vector<DeltaRow>& rows) {
  out << "space,method,delta,samples,safety,delta_used\n";
  for (const auto& r : rows)
    out << r.space << ',' << r.method << ',' << format_number(r.delta) << ',' << r.samples << ','
        << format_number(r.safety) << ',' << format_number(r.delta_used) << '\n';
}

inline json delta_json(const std::vector<DeltaRow>& rows) {
  json j = json::array();
  for (const auto& r : rows)
    j.push_back({{"space", r.space}, {"method", r.method}, {"delta", r.delta}, {"samples", r.samples},
                 {"safety", r.safety}, {"delta_used", r.delta_used}});
  return j;
}

inline json certificate_json(const certificate::Optimum& opt, bool lipschitz_reduction) {
  const auto at_opt = certificate::morse_constant(opt.params);
  const auto reference = certificate::morse_constant({100.0, 100.0});
  json margins = json::object();
  for (const auto& m : at_opt.margins) margins[m.name] = m.value;
  json j{{"l_star", opt.params.l},
         {"d_star", opt.params.d},
         {"k_star", opt.k},
         {"k0", at_opt.k0},
         {"k1", at_opt.k1},
         {"k2", at_opt.k2},
         {"margins", margins},
         {"k_at_paper_params", reference.k_total},
         {"evaluations", opt.evaluations}};
  if (lipschitz_reduction) {
    j["k_star_with_lipschitz_reduction"] = certificate::with_lipschitz_reduction(opt.k);
    j["k_at_paper_params_with_lipschitz_reduction"] = certificate::with_lipschitz_reduction(reference.k_total);
  }
  return j;
}

}  // namespace morse::harness
