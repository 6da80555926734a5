// morse: experiment runner for the quasi-geodesic shadowing toolkit.
//
//   morse verify-morse      --config c.json [--seed N] [--jobs N] [--format csv|json] [--out file]
//   morse worst-case        --config c.json
//   morse check-lemmas      --config c.json
//   morse estimate-delta    --config c.json
//   morse optimize-constant [--l-min ...] [--refine-steps N]
//   morse sample-path       --space tree|h2 [--generator perturbed|sawtooth]
//
// Exit codes: 0 all pass, 1 violation, 2 config error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "morse/harness.hpp"

namespace {

using namespace morse;
using namespace morse::harness;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::string out;
  std::string format = "csv";
};

Config resolve(const Globals& g) {
  Config cfg = g.config_path.empty() ? parse_config(json{{"version", 1}}) : load_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (g.jobs) {
    if (*g.jobs == 0) throw ConfigError("--jobs must be >= 1");
    cfg.jobs = *g.jobs;
  }
  return cfg;
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw ConfigError("cannot write '" + g.out + "'");
  f << text;
}

int verify_morse(const Globals& g) {
  const auto cfg = resolve(g);
  const bool need_h2 = std::find(cfg.spaces.begin(), cfg.spaces.end(), "h2") != cfg.spaces.end();
  const auto ctx = make_context(cfg, need_h2);
  const auto records = run_morse_experiment(cfg, ctx);
  std::ostringstream out;
  if (g.format == "json") write_records_json(out, records);
  else write_records_csv(out, records);
  emit(g, out.str());
  for (const auto& space : {"tree", "h2"}) {
    const auto s = summarize(records, space);
    if (s.trials == 0) continue;
    std::cerr << space << ": " << s.passed << " pass, " << s.failed << " fail, " << s.skipped
              << " skipped, max ratio " << format_number(s.max_ratio, 6) << '\n';
  }
  return summarize(records).failed > 0 ? 1 : 0;
}

int worst_case(const Globals& g) {
  const auto cfg = resolve(g);
  const auto ctx = make_context(cfg, cfg.search.space == "h2");
  const auto res = worst_case_search(cfg, ctx);
  std::ostringstream out;
  if (g.format == "json") {
    json j{{"best", to_json(res.best)},
           {"generator", std::string(to_string(res.spec.generator))},
           {"amplitude", res.spec.amplitude},
           {"teeth", res.spec.teeth},
           {"trajectory", res.trajectory}};
    out << j.dump(2) << '\n';
  } else {
    write_records_csv(out, {res.best});
  }
  emit(g, out.str());
  return res.best.verdict == "fail" ? 1 : 0;
}

int check_lemmas(const Globals& g) {
  const auto cfg = resolve(g);
  const bool need_h2 = std::find(cfg.spaces.begin(), cfg.spaces.end(), "h2") != cfg.spaces.end();
  const auto ctx = make_context(cfg, need_h2);
  const auto rows = check_lemmas_batch(cfg, ctx);
  std::ostringstream out;
  if (g.format == "json") out << lemma_json(rows).dump(2) << '\n';
  else write_lemma_csv(out, rows);
  emit(g, out.str());
  std::size_t violations = 0;
  for (const auto& r : rows) violations += r.verdict == "violation";
  std::cerr << rows.size() << " lemma trials, " << violations << " violations\n";
  return violations > 0 ? 1 : 0;
}

int estimate_delta_cmd(const Globals& g) {
  const auto cfg = resolve(g);
  const bool need_h2 = std::find(cfg.spaces.begin(), cfg.spaces.end(), "h2") != cfg.spaces.end();
  RunContext ctx;
  if (need_h2) {
    ctx.h2_delta_raw = h2_delta_estimate(cfg.h2, cfg.seed);
    ctx.h2_delta = cfg.h2.safety * ctx.h2_delta_raw;
    ctx.h2_delta_source = "estimated*" + format_number(cfg.h2.safety, 6);
  }
  const auto rows = estimate_delta_report(cfg, ctx);
  std::ostringstream out;
  if (g.format == "json") out << delta_json(rows).dump(2) << '\n';
  else write_delta_csv(out, rows);
  emit(g, out.str());
  return 0;
}

struct OptimizeFlags {
  std::optional<double> l_min, l_max, d_min, d_max;
  std::optional<std::size_t> l_steps, d_steps, refine_steps;
  bool lipschitz_reduction = false;
};

int optimize(const Globals& g, const OptimizeFlags& f) {
  auto cfg = resolve(g);
  auto& grid = cfg.certificate.grid;
  if (f.l_min) grid.l_min = *f.l_min;
  if (f.l_max) grid.l_max = *f.l_max;
  if (f.d_min) grid.d_min = *f.d_min;
  if (f.d_max) grid.d_max = *f.d_max;
  if (f.l_steps) grid.l_steps = *f.l_steps;
  if (f.d_steps) grid.d_steps = *f.d_steps;
  if (f.refine_steps) cfg.certificate.refine_steps = *f.refine_steps;
  if (f.lipschitz_reduction) cfg.certificate.lipschitz_reduction = true;
  certificate::Optimum opt;
  try {
    opt = certificate::optimize_constant(grid, cfg.certificate.refine_steps);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  emit(g, certificate_json(opt, cfg.certificate.lipschitz_reduction).dump(2) + "\n");
  return 0;
}

struct SampleFlags {
  std::string space = "tree";
  std::string generator = "perturbed";
  double amplitude = 1.0;
  std::size_t teeth = 4;
  std::size_t samples = 160;
};

int sample_path(const Globals& g, const SampleFlags& f) {
  const auto cfg = resolve(g);
  InstanceSpec spec;
  spec.generator = f.generator == "sawtooth" ? Generator::sawtooth : Generator::perturbed;
  spec.amplitude = f.amplitude;
  spec.teeth = f.teeth;
  spec.samples = f.samples;
  spec.seed = cfg.seed;
  std::ostringstream out;
  Rng rng(cfg.seed);
  if (f.space == "h2") {
    const auto plane = HyperbolicPlane::from_half_plane_region(cfg.h2.center_u, cfg.h2.center_v, cfg.h2.radius);
    const auto [p, q] = h2_endpoints(plane, rng);
    write_path_csv(out, generate_instance(plane, p, q, spec, {}).path);
  } else {
    const auto inst = make_trial_tree(cfg.tree, 0, rng);
    write_path_csv(out, generate_instance(inst.tree, inst.p, inst.q, spec, {}).path);
  }
  emit(g, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-geodesic shadowing experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON config (version 1)");
  app.add_option("--seed", g.seed, "master seed (overrides config)");
  app.add_option("--out", g.out, "output file (default stdout)");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--jobs", g.jobs, "worker threads (overrides config)");

  auto* verify = app.add_subcommand("verify-morse", "check HD(Q, G) against 92 and the certificate constant");
  auto* worst = app.add_subcommand("worst-case", "hill-climb generator parameters to maximize the ratio");
  auto* lemmas = app.add_subcommand("check-lemmas", "batch the projection lemma checkers");
  auto* delta = app.add_subcommand("estimate-delta", "per-space delta report");
  auto* opt = app.add_subcommand("optimize-constant", "minimize the certified constant over (l, d)");
  auto* sample = app.add_subcommand("sample-path", "write one generated path as CSV");

  OptimizeFlags of;
  opt->add_option("--l-min", of.l_min);
  opt->add_option("--l-max", of.l_max);
  opt->add_option("--d-min", of.d_min);
  opt->add_option("--d-max", of.d_max);
  opt->add_option("--l-steps", of.l_steps);
  opt->add_option("--d-steps", of.d_steps);
  opt->add_option("--refine-steps", of.refine_steps);
  opt->add_flag("--lipschitz-reduction", of.lipschitz_reduction, "also report 17k + 8");

  SampleFlags sf;
  sample->add_option("--space", sf.space)->check(CLI::IsMember({"tree", "h2"}));
  sample->add_option("--generator", sf.generator)->check(CLI::IsMember({"perturbed", "sawtooth"}));
  sample->add_option("--amplitude", sf.amplitude);
  sample->add_option("--teeth", sf.teeth);
  sample->add_option("--samples", sf.samples);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*verify) return verify_morse(g);
    if (*worst) return worst_case(g);
    if (*lemmas) return check_lemmas(g);
    if (*delta) return estimate_delta_cmd(g);
    if (*opt) return optimize(g, of);
    if (*sample) return sample_path(g, sf);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
