#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gpid/sim/rk4.hpp"
#include "gpid/sim/runner.hpp"

using namespace gpid;
using namespace gpid::sim;

namespace {

const std::string kDir = GPID_SCENARIO_DIR;

std::string scn(const std::string& name) { return kDir + "/" + name + ".scn"; }

std::vector<Override> ovr(std::initializer_list<const char*> items) {
  std::vector<Override> v;
  for (const char* s : items) v.push_back(parse_override(s));
  return v;
}

std::filesystem::path temp_dir() {
  auto d = std::filesystem::temp_directory_path() / ("gpid_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(d);
  return d;
}

std::size_t column(const RunResult& r, const std::string& name) {
  for (std::size_t i = 0; i < r.columns.size(); ++i) {
    if (r.columns[i] == name) return i;
  }
  ADD_FAILURE() << "no column " << name;
  return 0;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GPID_CLI) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST(Rk4, ExponentialGrowth) {
  VecX x = VecX::Ones(1);
  for (int k = 0; k < 1000; ++k) x = rk4_step([](double, const VecX& z) { return z; }, k * 1e-3, x, 1e-3);
  EXPECT_NEAR(x(0), std::exp(1.0), 1e-12 * std::exp(1.0));
}

TEST(Rk4, FourthOrderConvergence) {
  auto err = [](double h) {
    VecX x = VecX::Ones(1);
    const int n = static_cast<int>(std::lround(1.0 / h));
    for (int k = 0; k < n; ++k) x = rk4_step([](double t, const VecX& z) { return VecX(-t * z); }, k * h, x, h);
    return std::abs(x(0) - std::exp(-0.5));
  };
  const double ratio = err(0.1) / err(0.05);
  EXPECT_GT(ratio, 14.0);
  EXPECT_LT(ratio, 18.0);
}

TEST(Rk4, RotationFlowAndRenormalization) {
  VecX x(9);
  write_rotation(x, 0, Mat3::Identity());
  const Vec3 w = Vec3::UnitZ();
  const int n = 1000;
  const double h = (kPi / 2) / n;
  for (int k = 0; k < n; ++k) {
    x = rk4_step([&](double, const VecX& z) {
      VecX d(9);
      write_rotation(d, 0, read_rotation(z, 0) * hat(w));
      return d;
    }, k * h, x, h);
    renormalize(x, {0}, 1e-12);
  }
  EXPECT_LT((read_rotation(x, 0) * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-10);
  EXPECT_LT(orthonormality_error(read_rotation(x, 0)), 1e-12);
}

TEST(Rk4, RejectsBadInput) {
  EXPECT_THROW(rk4_step([](double, const VecX& z) { return z; }, 0.0, VecX::Ones(1), 0.0), InvalidArgumentError);
  EXPECT_THROW(rk4_step([](double, const VecX& z) { return VecX(z / 0.0); }, 0.0, VecX::Ones(1), 0.1),
               NonFiniteError);
}

TEST(Scenario, OverrideSyntax) {
  const Override a = parse_override("gains.kI=3");
  EXPECT_EQ(a.filter, "");
  EXPECT_EQ(a.key, "gains.kI");
  EXPECT_EQ(a.value, "3");
  const Override b = parse_override("hoop:incline.beta_true_deg=10");
  EXPECT_EQ(b.filter, "hoop");
  EXPECT_EQ(b.key, "incline.beta_true_deg");
  EXPECT_THROW(parse_override("gains.kI"), ScenarioError);
  EXPECT_THROW(parse_override("=3"), ScenarioError);
}

TEST(Scenario, OverridesApplyByFilter) {
  Scenario s1 = load_scenario(scn("pendulum_upright"), ovr({"sim.t_final_s=1.0", "hoop:sim.t_final_s=2.0"}));
  EXPECT_DOUBLE_EQ(s1.sim.t_final, 1.0);
  EXPECT_EQ(s1.sim.control_ticks, 50);
  EXPECT_EQ(s1.sim.steps_per_control, 20);
  Scenario s2 = load_scenario(scn("pendulum_upright"), ovr({"pendulum_upright:gains.kp=3"}));
  EXPECT_DOUBLE_EQ(make_model(s2)->gains().kp, 3.0);
}

TEST(Scenario, Errors) {
  EXPECT_THROW(load_scenario(kDir + "/does_not_exist.scn"), ScenarioError);
  EXPECT_THROW(load_scenario(scn("pendulum_upright"), ovr({"sim.h_control_s=0.0015"})), ScenarioError);
  EXPECT_THROW(load_scenario(scn("pendulum_upright"), ovr({"sim.t_final_s=0.01"})), ScenarioError);
  EXPECT_THROW(load_scenario(scn("pendulum_upright"), ovr({"gains.kq=1"})), ScenarioError);
  Scenario nosys = load_scenario(scn("pendulum_upright"), ovr({"system=rocket"}));
  EXPECT_THROW(make_model(nosys), ScenarioError);

  const auto dir = temp_dir();
  const auto bad = dir / "bad.scn";
  std::ofstream(bad) << "system: [unterminated\n";
  EXPECT_THROW(load_scenario(bad.string()), ScenarioError);

  // A key no parser consumes is rejected when the model is built.
  const auto extra = dir / "extra.scn";
  {
    std::ifstream in(scn("pendulum_upright"));
    std::ofstream out(extra);
    out << in.rdbuf() << "\nunexpected_section: {a: 1}\n";
  }
  Scenario typo = load_scenario(extra.string());
  EXPECT_THROW(make_model(typo), ScenarioError);
}

TEST(Scenario, AllBundledScenariosParse) {
  for (const char* name : {"quad_attitude", "quad_verified", "ipc_stabilize", "hoop_fixed", "hoop_linear",
                           "hoop_sinusoid", "sphere_fixed", "sphere_circle", "sphere_sinusoid", "pendulum_upright"}) {
    Scenario s = load_scenario(scn(name));
    EXPECT_NO_THROW(make_model(s)) << name;
  }
}

TEST(Runner, DeterministicTraces) {
  auto once = [] {
    Scenario s = load_scenario(scn("quad_attitude"), ovr({"sim.t_final_s=1.0"}));
    return run_scenario(s);
  };
  const RunResult a = once(), b = once();
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    for (std::size_t j = 0; j < a.rows[i].size(); ++j) {
      const double x = a.rows[i][j], y = b.rows[i][j];
      EXPECT_TRUE(x == y || (std::isnan(x) && std::isnan(y))) << "row " << i << " col " << j;
    }
  }
}

TEST(Runner, ControlIsHeldBetweenTicks) {
  Scenario s = load_scenario(scn("quad_attitude"), ovr({"sim.t_final_s=1.0"}));
  const RunResult r = run_scenario(s);
  const std::size_t tx = column(r, "tau_x");
  ASSERT_EQ(r.rows.size(), 1001u);
  for (std::size_t k = 0; k < 50; ++k) {
    for (std::size_t j = 1; j < 20; ++j) EXPECT_EQ(r.rows[20 * k + j][tx], r.rows[20 * k][tx]);
  }
  bool changes = false;
  for (std::size_t k = 1; k < 50; ++k) changes |= r.rows[20 * k][tx] != r.rows[20 * (k - 1)][tx];
  EXPECT_TRUE(changes);
}

TEST(Runner, TraceHeaderAndDecimation) {
  Scenario s = load_scenario(scn("pendulum_upright"), ovr({"sim.t_final_s=1.0"}));
  RunOptions opt;
  opt.decimate = 10;
  const RunResult r = run_scenario(s, opt);
  EXPECT_EQ(r.columns.front(), "t_s");
  EXPECT_EQ(r.rows.size(), 101u);
  for (const auto& row : r.rows) EXPECT_EQ(row.size(), r.columns.size());
  std::ostringstream os;
  write_csv(os, r.columns, r.rows);
  EXPECT_EQ(os.str().substr(0, 8), "t_s,V_y,");
  const auto j = report_json(r);
  EXPECT_EQ(j["scenario"], "pendulum_upright");
  EXPECT_TRUE(j.contains("monitors"));
}

TEST(Runner, StartAtReferenceStaysThere) {
  Scenario s = load_scenario(scn("pendulum_upright"),
                             ovr({"initial.rotvec_rad=[0, 0, 0]", "sim.t_final_s=5.0"}));
  const RunResult r = run_scenario(s);
  EXPECT_FALSE(r.failure.has_value());
  EXPECT_LT(r.terminal_error, 1e-10);

  Scenario q = load_scenario(scn("quad_attitude"),
                             ovr({"initial.rotvec_rad=[0, 0, 0]", "initial.omega_rad_s=[3.141592653589793, 0, 0]",
                                  "controller.actuators=ideal", "disturbance.com_offset_kgm=[0, 0, 0]",
                                  "sim.t_final_s=5.0"}));
  const RunResult rq = run_scenario(q);
  EXPECT_FALSE(rq.failure.has_value());
  EXPECT_LT(rq.terminal_error, 1e-10);
}

TEST(Runner, DivergenceBecomesMonitorFailure) {
  Scenario s = load_scenario(scn("quad_attitude"), ovr({"gains.kI=1e6", "sim.t_final_s=2.0"}));
  const RunResult r = run_scenario(s);
  EXPECT_FALSE(r.all_pass());
  EXPECT_EQ(r.exit_code(), 3);
}

TEST(Cli, ExitCodes) {
  const auto dir = temp_dir();
  EXPECT_EQ(run_cli("run " + kDir + "/does_not_exist.scn --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("run " + scn("quad_attitude") + " --override gains.kI=1e6 --override sim.t_final_s=2.0 --out " +
                    dir.string()),
            3);
  EXPECT_EQ(run_cli("run " + scn("pendulum_upright") + " --override gains.bogus=1 --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("run " + scn("pendulum_upright") + " --decimate 10 --out " + dir.string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "pendulum_upright.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "pendulum_upright.report.json"));
  EXPECT_EQ(run_cli("list-systems"), 0);
}
