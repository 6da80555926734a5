#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "morse/harness.hpp"

using namespace morse;
using namespace morse::harness;

namespace {

Config small_config(std::size_t jobs = 1) {
  return parse_config(json::parse(R"({
    "version": 1, "seed": 42, "jobs": )" + std::to_string(jobs) + R"(,
    "trials": {"tree": 12, "h2": 4},
    "h2": {"delta_samples": 2000},
    "generators": {"samples": 48},
    "lemmas": {"tree_trials": 6, "h2_trials": 3, "monotonicity_pairs": 4},
    "certificate": {"l_steps": 20, "d_steps": 20, "refine_steps": 60}
  })"));
}

std::string csv(const std::vector<ExperimentRecord>& r) {
  std::ostringstream s;
  write_records_csv(s, r);
  return s.str();
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(MORSE_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(Config, Defaults) {
  const auto c = parse_config(json{{"version", 1}});
  EXPECT_EQ(c.tree_trials, 500u);
  EXPECT_EQ(c.h2_trials, 200u);
  EXPECT_EQ(c.h2.delta_samples, 100000u);
  EXPECT_DOUBLE_EQ(c.h2.safety, 1.5);
  EXPECT_FALSE(c.certificate.lipschitz_reduction);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config(json::object()), ConfigError);
  EXPECT_THROW(parse_config(json{{"version", 2}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"version", 1}, {"sede", 3}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"version", 1}, {"spaces", {"graph"}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"version", 1}, {"seed", "x"}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"version", 1}, {"h2", {{"safety", 0.5}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"version", 1}, {"jobs", 0}}), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Morse, RecordsAreSelfContained) {
  const auto cfg = small_config();
  const auto ctx = make_context(cfg, true);
  const auto records = run_morse_experiment(cfg, ctx);
  ASSERT_EQ(records.size(), 16u);
  for (const auto& r : records) {
    ASSERT_NE(r.verdict, "skipped") << r.note;
    EXPECT_EQ(reevaluate_verdict(r), r.verdict);
    EXPECT_EQ(r.verdict, "pass");
    EXPECT_GE(r.ratio, 0.0);
    EXPECT_GE(r.lambda, 1.0);
    EXPECT_NEAR(r.bound92, 92.0 * r.lambda * r.lambda * (r.C + r.delta), 1e-9 * std::max(1.0, r.bound92));
  }
  EXPECT_EQ(records[0].delta_source, "exact");
  EXPECT_EQ(records.back().delta_source, "estimated*1.5");
  EXPECT_NEAR(records.back().delta, 1.5 * ctx.h2_delta_raw, 1e-15);
}

TEST(Morse, DirectedHausdorffMatchesSymmetric) {
  const auto cfg = small_config();
  const auto ctx = make_context(cfg, false);
  Rng rng(1);
  const auto inst = make_trial_tree(cfg.tree, 1, rng);
  const auto gen = generate_sawtooth(inst.tree, inst.p, inst.q, 2.0, 3, 5, 0.1);
  const auto g = inst.tree.geodesic_pointset(inst.p, inst.q, 0.05);
  const auto r = measure_instance(inst.tree, gen, g, 0.0, ctx.k_cert);
  const double hd = hausdorff_distance(inst.tree, gen.path.image(), g);
  EXPECT_LE(r.hd_qg, hd + 1e-12);
  EXPECT_LE(r.hd_gq, hd + 1e-12);
  EXPECT_NEAR(std::max(r.hd_qg, r.hd_gq), hd, 1e-12);
}

TEST(Morse, GeodesicInstanceHasZeroRatio) {
  const auto cfg = small_config();
  const auto ctx = make_context(cfg, true);
  InstanceSpec spec;
  spec.generator = Generator::perturbed;
  spec.amplitude = 0.0;
  spec.samples = 64;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto t = tree_trial(cfg, ctx, i, spec);
    EXPECT_EQ(t.verdict, "pass");
    EXPECT_NEAR(t.ratio, 0.0, 1e-9);
    const auto h = h2_trial(cfg, ctx, i, spec);
    EXPECT_EQ(h.verdict, "pass");
    EXPECT_NEAR(h.ratio, 0.0, 1e-6);
  }
}

TEST(Morse, ByteIdenticalAcrossJobCounts) {
  const auto c1 = small_config(1), c4 = small_config(4);
  const auto a = csv(run_morse_experiment(c1, make_context(c1, true)));
  const auto b = csv(run_morse_experiment(c4, make_context(c4, true)));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), "space,seed,lambda,C,delta,delta_source,hd_qg,hd_gq,bound92,bound_cert,ratio,slack,verdict");
}

TEST(Morse, ReevaluateCatchesTamperedRecord) {
  const auto cfg = small_config();
  auto r = tree_trial(cfg, make_context(cfg, false), 2);
  ASSERT_EQ(r.verdict, "pass");
  r.hd_qg = r.bound92 + r.slack + 1.0;
  EXPECT_EQ(reevaluate_verdict(r), "fail");
}

TEST(WorstCase, ZeroBudgetReturnsInitialInstance) {
  auto cfg = small_config();
  cfg.search.budget = 0;
  const auto ctx = make_context(cfg, false);
  const auto res = worst_case_search(cfg, ctx);
  EXPECT_TRUE(res.trajectory.empty());
  EXPECT_EQ(res.spec.generator, Generator::sawtooth);
  const auto again = tree_trial(cfg, ctx, 0, res.spec);
  EXPECT_EQ(csv({again}), csv({res.best}));
}

TEST(WorstCase, NeverAboveTheBound) {
  auto cfg = small_config();
  cfg.search.budget = 15;
  const auto res = worst_case_search(cfg, make_context(cfg, false));
  ASSERT_EQ(res.trajectory.size(), 15u);
  for (std::size_t i = 1; i < res.trajectory.size(); ++i) EXPECT_GE(res.trajectory[i], res.trajectory[i - 1]);
  EXPECT_LE(res.best.ratio, 92.0);
}

// Regression floor: the shipped quick config at unit stretch reached 0.1947.
TEST(WorstCase, FixedLambdaReachesRecordedFloor) {
  const auto cfg = load_config(std::string(MORSE_SOURCE_DIR) + "/configs/quick.json");
  ASSERT_TRUE(cfg.search.fixed_lambda.has_value());
  const auto res = worst_case_search(cfg, make_context(cfg, cfg.search.space == "h2"));
  EXPECT_NEAR(res.best.lambda, 1.0, 1e-12);
  EXPECT_GE(res.best.ratio, 0.19);
  EXPECT_LE(res.best.ratio, 92.0);
}

TEST(Lemmas, BatchHasNoViolations) {
  const auto cfg = small_config(3);
  const auto rows = check_lemmas_batch(cfg, make_context(cfg, true));
  EXPECT_EQ(rows.size(), 3u * 6 + 3u * 3 + 3u * 4);
  for (const auto& r : rows) EXPECT_NE(r.verdict, "violation") << r.lemma << " " << r.space << " " << r.seed;
  std::ostringstream s;
  write_lemma_csv(s, rows);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "lemma,space,seed,margin,slack,verdict");
}

TEST(Delta, Report) {
  auto cfg = small_config();
  cfg.graph.count = 3;
  const auto ctx = make_context(cfg, true);
  const auto rows = estimate_delta_report(cfg, ctx);
  ASSERT_EQ(rows.size(), 2u + 3u + 1u);
  EXPECT_EQ(rows[0].method, "exact");
  EXPECT_EQ(rows[1].delta, 0.0);  // sampled four-point check on a tree
  EXPECT_EQ(rows[2].method, "exhaustive");
  EXPECT_EQ(rows.back().space, "h2");
  EXPECT_EQ(rows.back().samples, 2000u);
  EXPECT_GT(rows.back().delta, 0.0);
}

TEST(Cli, ExitCodes) {
  const auto good = temp_file("morse_cli_good.json", R"({"version": 1, "trials": {"tree": 4, "h2": 2},
    "h2": {"delta_samples": 500}, "generators": {"samples": 32},
    "certificate": {"l_steps": 10, "d_steps": 10, "refine_steps": 20}})");
  const auto bad = temp_file("morse_cli_bad.json", R"({"version": 1, "unknown": true})");
  const auto broken = temp_file("morse_cli_broken.json", "{ not json");
  EXPECT_EQ(run_cli("verify-morse --config " + good.string()), 0);
  EXPECT_EQ(run_cli("verify-morse --config " + good.string() + " --format json --jobs 2"), 0);
  EXPECT_EQ(run_cli("verify-morse --config " + bad.string()), 2);
  EXPECT_EQ(run_cli("verify-morse --config " + broken.string()), 2);
  EXPECT_EQ(run_cli("estimate-delta --config " + good.string()), 0);
  EXPECT_EQ(run_cli("optimize-constant --l-steps 5 --d-steps 5"), 0);
  EXPECT_EQ(run_cli("optimize-constant --l-min 10 --l-max 20 --d-min 10 --d-max 20"), 2);
  EXPECT_EQ(run_cli("no-such-command"), 2);
  EXPECT_EQ(run_cli("verify-morse --format xml"), 2);
}

TEST(Cli, OptimizeConstantJson) {
  const auto out = std::filesystem::temp_directory_path() / "morse_opt.json";
  ASSERT_EQ(run_cli("optimize-constant --out " + out.string()), 0);
  std::ifstream in(out);
  const auto j = json::parse(in);
  for (const char* key : {"l_star", "d_star", "k_star", "margins", "k_at_paper_params"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_LT(j["k_star"].get<double>(), 2460.0);
  EXPECT_EQ(std::ceil(j["k_at_paper_params"].get<double>()), 2460.0);
}

TEST(Cli, ShippedConfigParses) {
  EXPECT_NO_THROW(load_config(std::string(MORSE_SOURCE_DIR) + "/configs/default.json"));
  EXPECT_NO_THROW(load_config(std::string(MORSE_SOURCE_DIR) + "/configs/quick.json"));
}
