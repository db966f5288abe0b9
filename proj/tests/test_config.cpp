#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "degenbeam/errors.hpp"

using namespace degenbeam;
using namespace degenbeam::app;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("degenbeam_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunConfig small_config(const std::string& regime) {
  RunConfig c;
  c.coefficient.alpha = 0.5;
  c.mesh.n_elements = 8;
  c.regime.kind = regime;
  if (regime == "feedback") {
    c.regime.beta = 1.0;
    c.regime.gamma = 1.0;
  }
  c.T = 2.0;
  c.options.n_probes = 2;
  return c;
}

}  // namespace

TEST(Config, RoundTripIsByteIdentical) {
  RunConfig c = small_config("feedback");
  c.dt = 0.01;
  c.mesh.grading = "power";
  c.mesh.grading_parameter = 4.0;
  c.initial.kind = "polynomial";
  c.initial.displacement = {0.0, 0.0, 1.0, -1.0};
  c.options.delta = 0.02;
  c.seed = 42;
  std::string once = serialize_config(c);
  std::string twice = serialize_config(parse_config(once));
  EXPECT_EQ(once, twice);
  EXPECT_EQ(once.back(), '\n');
}

TEST(Config, DefaultsFillMissingKeys) {
  RunConfig c = parse_config(R"({"coefficient": {"type": "power", "alpha": 0.5}})");
  EXPECT_EQ(c.mesh.n_elements, 64);
  EXPECT_EQ(c.regime.kind, "adjoint");
  EXPECT_DOUBLE_EQ(c.options.cg_tol, 1e-8);
  EXPECT_FALSE(c.dt.has_value());
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(parse_config(R"({"coefficient": {"type": "power"}, "colour": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"coefficient": {"type": "power", "alpha": "half"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"mesh": {"n_elements": 8}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"coefficient": {"type": "cubic"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"coefficient": {"type": "power"}, "dt": -1})"), ConfigError);
}

TEST(Config, ExpressionCoefficientClassifies) {
  std::string dir = std::string(DEGENBEAM_SOURCE_DIR) + "/configs/";
  RunConfig c = load_config(dir + "expression_wd.json");
  Coefficient a = make_coefficient(c.coefficient);
  DegeneracyClass cls = resolve_class(c, a);
  EXPECT_TRUE(cls.weak());
  EXPECT_NEAR(cls.K, 5.0 / 6.0, 1e-3);
}

TEST(Config, InitialStateIsConstrained) {
  RunConfig c = small_config("adjoint");
  c.initial.kind = "polynomial";
  c.initial.displacement = {1.0, 1.0, 1.0};  // violates y(0) = 0
  Coefficient a = make_coefficient(c.coefficient);
  SystemMatrices sys = assemble(a, resolve_class(c, a), make_mesh(c.mesh), make_regime(c.regime));
  BeamState s = make_initial_state(c.initial, sys);
  EXPECT_EQ(s.u[value_dof(0)], 0.0);
  EXPECT_EQ(s.u[slope_dof(0)], 0.0);
  EXPECT_DOUBLE_EQ(s.u[value_dof(4)], 1.0 + 0.5 + 0.25);
}

TEST(Commands, ExitCodes) {
  std::ostringstream err;
  fs::path d = scratch_dir("exit");
  EXPECT_EQ(run_command("classify", small_config("adjoint"), (d / "a").string(), err), kOk);
  EXPECT_TRUE(fs::exists(d / "a" / "report.json"));

  RunConfig sd = small_config("feedback");
  sd.coefficient.alpha = 1.5;
  sd.regime.gamma = 0.0;
  EXPECT_EQ(run_command("decay", sd, (d / "b").string(), err), kOutOfScope);
  Json rep = Json::parse(slurp(d / "b" / "report.json"));
  EXPECT_EQ(rep["status"], kOutOfScope);

  EXPECT_EQ(run_command("observability", small_config("feedback"), (d / "c").string(), err), kConfigError);
  RunConfig tooshort = small_config("adjoint");
  tooshort.coefficient.alpha = 0.5;
  EXPECT_EQ(run_command("constants", tooshort, (d / "d").string(), err), kOk);
}

TEST(Commands, ReportsAreDeterministic) {
  std::ostringstream err;
  fs::path d = scratch_dir("det");
  RunConfig c = small_config("adjoint");
  c.seed = 7;
  ASSERT_EQ(run_command("observability", c, (d / "1").string(), err), kOk);
  ASSERT_EQ(run_command("observability", c, (d / "2").string(), err), kOk);
  EXPECT_EQ(slurp(d / "1" / "report.json"), slurp(d / "2" / "report.json"));
  EXPECT_EQ(slurp(d / "1" / "probes.csv"), slurp(d / "2" / "probes.csv"));
  Json rep = Json::parse(slurp(d / "1" / "report.json"));
  EXPECT_EQ(rep["schema_version"], kSchemaVersion);
  EXPECT_EQ(rep["command"], "observability");
  EXPECT_EQ(serialize_config(config_from_json(rep["config"])), serialize_config(c));
}
