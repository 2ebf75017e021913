#include <cstdlib>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "limbdyn/commands.hpp"

using namespace limbdyn;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("limbdyn_test_" + std::to_string(std::random_device{}()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void expect_config_error(const std::string& text, const std::string& fragment) {
  try {
    (void)parse_config(text);
    FAIL() << "expected ConfigError for " << text;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

ToolConfig quick_config() {
  ToolConfig c = parse_config("{}");
  c.optimizer.de.max_generations = 20;
  c.optimizer.de.population_size = 20;
  c.control.duration = 1.0;
  c.control.rms_start = 0.0;
  return c;
}

std::string run_cli(const std::string& args) {
  return std::string(LIMBDYN_CLI) + " " + args + " > /dev/null 2>&1";
}

}  // namespace

TEST(Csv, HeaderOnly) { EXPECT_EQ(format_csv({{"a", "b"}, {}}), "a,b\n"); }

TEST(Csv, SingleRow) { EXPECT_EQ(format_csv({{"a", "b"}, {{1.0, 2.5}}}), "a,b\n1,2.5\n"); }

TEST(Csv, NineSignificantDigits) {
  EXPECT_EQ(format_number(kPi), "3.14159265");
  EXPECT_EQ(format_number(-1.0 / 3.0), "-0.333333333");
  EXPECT_EQ(format_number(1.5e-12), "1.5e-12");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(123456789012.0), "1.23456789e+11");
}

TEST(Csv, QuotesAwkwardHeaders) {
  EXPECT_EQ(format_csv({{"x,y", "say \"hi\""}, {}}), "\"x,y\",\"say \"\"hi\"\"\"\n");
  EXPECT_EQ(parse_csv("\"x,y\",\"say \"\"hi\"\"\"\n").header, (std::vector<std::string>{"x,y", "say \"hi\""}));
}

TEST(Csv, RaggedRowRejected) { EXPECT_THROW(format_csv({{"a", "b"}, {{1.0}}}), IoError); }

TEST(Csv, RoundTripAtNineDigits) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mant(-10.0, 10.0);
  std::uniform_int_distribution<int> expo(-12, 12);
  Table t{{"a", "b", "c"}, {}};
  for (int i = 0; i < 500; ++i) {
    t.rows.push_back({mant(rng) * std::pow(10.0, expo(rng)), mant(rng), static_cast<double>(i)});
  }
  const std::string text = format_csv(t);
  const Table back = parse_csv(text);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double x = t.rows[r][c];
      EXPECT_LE(std::abs(back.rows[r][c] - x), 5e-9 * std::abs(x)) << x;
    }
  }
  EXPECT_EQ(format_csv(back), text);
}

TEST(Csv, UnwritablePathReported) {
  EXPECT_THROW(write_series({{"a"}, {}}, "/nonexistent_dir_limbdyn/x.csv"), IoError);
}

TEST(Config, EmptyObjectGivesDefaults) {
  const ToolConfig c = parse_config("{}");
  const SystemModel m = c.model.model();
  const SystemModel ref = reference_model();
  for (std::size_t b = 0; b < 4; ++b) {
    EXPECT_EQ(m.links[b].mass, ref.links[b].mass);
    EXPECT_EQ(m.links[b].com0, ref.links[b].com0);
    EXPECT_EQ(m.links[b].inertia, ref.links[b].inertia);
  }
  EXPECT_EQ(c.optimizer.de.population_size, 100u);
  EXPECT_EQ(c.optimizer.de.amplification, 0.6);
  EXPECT_EQ(c.control.resolved_gains()[0].kp, 120.0);
  EXPECT_EQ(c.control.resolved_gains()[1].kp, 4000.0);
  EXPECT_EQ(c.control.subjects.size(), 3u);
  EXPECT_EQ(c.trajectory.coupling.c, 0.818);
  EXPECT_EQ(parse_config("").model.passive.knee_damping, 0.1);
}

TEST(Config, NegativeDampingRejected) {
  expect_config_error(R"({"model": {"knee_damping": -1}})", "knee_damping");
}

TEST(Config, ExperimentPreset) {
  const AxisGains g = parse_config(R"({"control": {"gains_preset": "experiment"}})").control.resolved_gains();
  EXPECT_EQ(g[0].kp, 60.0);
  EXPECT_EQ(g[0].ki, 30.0);
  EXPECT_EQ(g[1].kp, 2000.0);
  EXPECT_EQ(g[2].ki, 20.0);
}

TEST(Config, ExplicitGainsOverridePreset) {
  const AxisGains g =
      parse_config(R"({"control": {"gains_preset": "experiment", "gains": {"phi": {"kp": 1}}}})").control.resolved_gains();
  EXPECT_EQ(g[0].kp, 60.0);
  EXPECT_EQ(g[1].kp, 1.0);
  EXPECT_EQ(g[1].ki, 30.0);
}

TEST(Config, UnknownPresetRejected) {
  expect_config_error(R"({"control": {"gains_preset": "turbo"}})", "gains_preset");
}

TEST(Config, UnknownKeysRejected) {
  expect_config_error(R"({"modle": {}})", "modle");
  expect_config_error(R"({"model": {"knee_dampign": 1}})", "model.knee_dampign");
  expect_config_error(R"({"control": {"subjects": [{"height": 1.7, "mas": 60}]}})", "subjects[0].mas");
}

TEST(Config, ParseErrorGivesLine) {
  expect_config_error("{\n  \"model\": {\n    \"gravity\": 9.81,,\n  }\n}\n", "line 3");
}

TEST(Config, DegreeSuffix) {
  const ToolConfig c = parse_config(R"({"trajectory": {"theta_hi_deg": 60, "phi_lo": -0.2}})");
  EXPECT_EQ(c.trajectory.theta_hi, deg_to_rad(60.0));
  EXPECT_EQ(c.trajectory.phi_lo, -0.2);
  expect_config_error(R"({"trajectory": {"theta_hi_deg": 60, "theta_hi": 1}})", "theta_hi");
}

TEST(Config, WrongTypesAndCounts) {
  expect_config_error(R"({"model": {"gravity": "down"}})", "model.gravity");
  expect_config_error(R"({"model": {"k_alpha": [1, 2, 3]}})", "model.k_alpha");
  expect_config_error(R"({"optimizer": {"population_size": -5}})", "population_size");
  expect_config_error(R"({"optimizer": {"population_size": 2}})", "population_size");
}

TEST(Config, StiffnessMustStayPositive) {
  expect_config_error(R"({"model": {"k_phi": [0, 0, -100, 0, 1]}})", "model.k_phi");
}

TEST(Config, SubjectRangeChecked) {
  expect_config_error(R"({"control": {"subjects": [{"height": 2.5, "mass": 60}]}})", "height");
}

TEST(Config, TableOverrideRoundTripsExactly) {
  const ToolConfig c = parse_config(R"({"model": {"links": {"ls": {"mass": 2.5, "com_cm": [-3.8, -1.1, -31.0]}}}})");
  const RigidLink ls = c.model.model().links[kLowerShank];
  EXPECT_EQ(ls.mass, 2.5);
  EXPECT_EQ(ls.com0.z(), cm_to_m(-31.0));
  EXPECT_EQ(ls.inertia(0, 0), kgcm2_to_kgm2(170.0));
}

TEST(Config, EchoReloadsToSameConfig) {
  ToolConfig c = parse_config(R"({"control": {"gains_preset": "experiment", "gains": {"alpha": {"ki": 7}}},
                                   "ankle": {"subtalar_incline_deg": 40}})");
  const Json echo = config_to_json(c);
  const ToolConfig back = parse_config(echo.dump());
  EXPECT_EQ(config_to_json(back).dump(), echo.dump());
  EXPECT_EQ(back.ankle.params.subtalar_incline, c.ankle.params.subtalar_incline);
  EXPECT_EQ(back.control.motors[1].rated_speed, c.control.motors[1].rated_speed);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/limbdyn.json"), ConfigError); }

TEST(RunCommand, GenTargets) {
  TempDir dir;
  const RunManifest m = run_command("gen-targets", quick_config(), dir.path());
  EXPECT_EQ(m.outputs, std::vector<std::string>{"targets.csv"});
  const Table t = read_series(dir.path() / "targets.csv");
  EXPECT_EQ(t.header.size(), 10u);
  EXPECT_EQ(t.rows.size(), 11u);
  EXPECT_TRUE(fs::exists(dir.path() / "manifest.json"));
  EXPECT_FALSE(fs::exists(dir.path() / "manifest.json.tmp"));
}

TEST(RunCommand, OptimizeAxisSummary) {
  TempDir dir;
  const RunManifest m = run_command("optimize-axis", quick_config(), dir.path());
  const Table summary = read_series(dir.path() / "axis_summary.csv");
  ASSERT_EQ(summary.rows.size(), 1u);
  const Table hist = read_series(dir.path() / "axis_history.csv");
  EXPECT_EQ(hist.rows.size(), 21u);
  EXPECT_EQ(summary.rows[0][1], hist.rows.back()[1]);
  const Json manifest = Json::parse(read_text(dir.path() / "manifest.json"));
  EXPECT_EQ(manifest["command"], "optimize-axis");
  EXPECT_EQ(manifest["seed"], quick_config().optimizer.de.rng_seed);
  EXPECT_EQ(manifest["outputs"].size(), m.outputs.size());
  for (const auto& f : m.outputs) EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
}

TEST(RunCommand, InverseDynamicsSpansOnePeriod) {
  TempDir dir;
  run_command("inverse-dynamics", quick_config(), dir.path());
  const Table t = read_series(dir.path() / "inverse_dynamics.csv");
  EXPECT_EQ(t.header.size(), 17u);
  EXPECT_EQ(t.rows.front()[0], 0.0);
  EXPECT_EQ(t.rows.back()[0], 15.0);
  EXPECT_EQ(t.rows.size(), 1501u);
}

TEST(RunCommand, SimulateControlThreeSubjects) {
  TempDir dir;
  const RunManifest m = run_command("simulate-control", quick_config(), dir.path());
  for (const char* f : {"sim_subject1.csv", "sim_subject2.csv", "sim_subject3.csv", "rms_summary.csv"}) {
    EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
  }
  EXPECT_EQ(read_series(dir.path() / "rms_summary.csv").rows.size(), 3u);
  // Tabulated 'ff' inertia, then the 1.5 m subject.
  ASSERT_EQ(m.warnings.size(), 2u);
  EXPECT_NE(m.warnings[0].find("'ff'"), std::string::npos);
  EXPECT_NE(m.warnings[1].find("1.5"), std::string::npos);
}

TEST(RunCommand, FailureRemovesPartialOutputs) {
  TempDir dir;
  fs::create_directories(dir.path() / "axis_summary.csv");  // blocks the second artifact
  EXPECT_THROW(run_command("optimize-axis", quick_config(), dir.path()), IoError);
  EXPECT_FALSE(fs::exists(dir.path() / "targets.csv"));
  EXPECT_FALSE(fs::exists(dir.path() / "axis_history.csv"));
  EXPECT_FALSE(fs::exists(dir.path() / "manifest.json"));
}

TEST(RunCommand, UnknownCommand) {
  TempDir dir;
  EXPECT_THROW(run_command("fly", quick_config(), dir.path()), ConfigError);
}

TEST(RunCommand, ByteIdenticalReruns) {
  TempDir a, b;
  const ToolConfig c = quick_config();
  for (const char* cmd : {"gen-targets", "optimize-axis", "inverse-dynamics"}) {
    const RunManifest m = run_command(cmd, c, a.path());
    run_command(cmd, c, b.path());
    for (const auto& f : m.outputs) EXPECT_EQ(read_text(a.path() / f), read_text(b.path() / f)) << f;
  }
}

TEST(Cli, EnvironmentFallbackAndSeed) {
  TempDir dir;
  const fs::path cfg = dir.path() / "cfg.json";
  write_text(cfg, R"({"optimizer": {"max_generations": 5, "population_size": 10}})");
  const fs::path out = dir.path() / "from_env";
  const std::string env = "LIMBDYN_OUT=" + out.string() + " ";
  ASSERT_EQ(std::system((env + run_cli("optimize-axis --config " + cfg.string() + " --seed 42")).c_str()), 0);
  const Json manifest = Json::parse(read_text(out / "manifest.json"));
  EXPECT_EQ(manifest["seed"], 42);
  EXPECT_TRUE(fs::exists(out / "axis_history.csv"));
}

TEST(Cli, ErrorsGiveNonzeroExit) {
  TempDir dir;
  const fs::path cfg = dir.path() / "bad.json";
  write_text(cfg, R"({"model": {"knee_damping": -1}})");
  EXPECT_NE(std::system(run_cli("gen-targets --config " + cfg.string() + " --out " + dir.path().string()).c_str()), 0);
  EXPECT_NE(std::system(run_cli("gen-targets --out " + dir.path().string()).c_str()), 0);
  EXPECT_NE(std::system(run_cli("teleport --config " + cfg.string()).c_str()), 0);
}
