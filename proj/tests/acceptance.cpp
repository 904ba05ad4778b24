// Acceptance checks: one PASS/FAIL line per criterion. Exit status is 1 when any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "gpid/sim/runner.hpp"
#include "gpid/systems/quadrotor.hpp"

using namespace gpid;
using namespace gpid::sim;

namespace {

const std::string kDir = GPID_SCENARIO_DIR;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail] ";
    }
    detail << what << "; ";
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

RunResult run(const std::string& name, const std::vector<std::string>& overrides = {}) {
  std::vector<Override> o;
  for (const auto& s : overrides) o.push_back(parse_override(s));
  Scenario sc = load_scenario(kDir + "/" + name + ".scn", o);
  return run_scenario(sc);
}

void describe_run(Verdict& v, const std::string& name, const RunResult& r) {
  std::ostringstream s;
  s << name << ":";
  for (const auto& m : r.monitors) s << " " << m.name << (m.pass ? "=ok" : "=FAIL(" + fmt(m.worst_margin) + ")");
  s << " terminal " << r.error_metric_name << "=" << fmt(r.terminal_error);
  v.require(r.all_pass(), s.str());
}

Vec3 random_vec(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), u(rng), u(rng)};
}

Verdict geometry_suite() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937 rng(2024);
  Mat3 im;
  im << 0.0040, 0.0003, -0.0001, 0.0003, 0.0045, 0.0002, -0.0001, 0.0002, 0.0070;
  double metricity = 0.0, torsion = 0.0, koszul = 0.0;
  for (auto [inv, ch] : {std::pair{Invariance::left, Chirality::left}, std::pair{Invariance::right, Chirality::right}}) {
    const auto metric = InertiaMetric::constant(im, inv);
    const double bs = ch == Chirality::left ? 1.0 : -1.0;
    for (int i = 0; i < 100; ++i) {
      const Vec3 x = random_vec(rng), y = random_vec(rng), z = random_vec(rng);
      auto al = [&](const Vec3& a) { return AlgebraElement::so3(a, ch); };
      const auto zero = al(Vec3::Zero());
      auto nabla = [&](const Vec3& a, const Vec3& b) { return connection_invariant(metric, al(a), al(b), zero).vec3(); };
      // Z<<X,Y>> = 0 for invariant fields of an invariant metric.
      metricity = std::max(metricity, std::abs(nabla(z, x).dot(im * y) + x.dot(im * nabla(z, y))));
      torsion = std::max(torsion, (nabla(x, y) - nabla(y, x) - bs * x.cross(y)).norm());
      const Rotation base = exp_so3(3.0 * random_vec(rng));
      const double k = koszul_numeric([&](const Rotation&) { return im; }, x, y, z, base, 1e-3, ch);
      koszul = std::max(koszul, std::abs(nabla(x, y).dot(im * z) - k));
    }
  }
  const double dt = seconds_since(t0);
  v.require(metricity < 1e-6, "metricity " + fmt(metricity));
  v.require(torsion < 1e-9, "torsion " + fmt(torsion));
  v.require(koszul < 1e-6, "koszul gap " + fmt(koszul));
  v.require(dt < 5.0, "runtime " + fmt(dt) + " s");
  return v;
}

Verdict linear_reduction() {
  Verdict v;
  Mat3 m;
  m << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0;
  const auto metric = InertiaMetric::constant(m, Invariance::bi);
  GainSet g;
  // Per axis s^3 + 7 s^2 + 12 s + 6, poles -1, -1.27, -4.73.
  g.kp = 12.0;
  g.kd = 7.0;
  g.kI = 6.0;
  auto ref = [](double t) {
    return std::array<Vec3, 3>{Vec3(std::sin(t), std::cos(2 * t), 0.5 * t),
                               Vec3(std::cos(t), -2 * std::sin(2 * t), 0.5),
                               Vec3(-std::sin(t), -4 * std::cos(2 * t), 0.0)};
  };
  // State (x, v, zeta_I) in R^9.
  auto geometric = [&](double t, const VecX& s) {
    const auto r = ref(t);
    const Vec3 x = s.head<3>(), vel = s.segment<3>(3), zi = s.tail<3>();
    ErrorState err = build_error(RnPoint{x}, RnPoint{r[0]}, AlgebraElement::rn(vel), AlgebraElement::rn(r[1]),
                                 Chirality::left);
    err.eta_E = AlgebraElement::rn(x - r[0]);
    const Covector fr = feedforward_fr(err, metric, AlgebraElement::rn(r[2]));
    const PidOutput out = pid_full_step(err, ControllerState{AlgebraElement::rn(zi)}, g, metric, fr);
    VecX d(9);
    d << vel, m.inverse() * out.control.f, out.dzeta_I.vector();
    return d;
  };
  auto textbook = [&](double t, const VecX& s) {
    const auto r = ref(t);
    const Vec3 e = s.head<3>() - r[0], ed = s.segment<3>(3) - r[1];
    const Vec3 u = m * (r[2] - g.kp * e - g.kd * ed - g.kI * s.tail<3>());
    VecX d(9);
    d << s.segment<3>(3), m.inverse() * u, e;
    return d;
  };
  VecX a(9);
  a << 1.0, -0.5, 0.2, 0.0, 0.3, -0.1, 0.0, 0.0, 0.0;
  VecX b = a;
  double gap = 0.0;
  const double h = 1e-3;
  for (int k = 0; k < 10000; ++k) {
    a = rk4_step(geometric, k * h, a, h);
    b = rk4_step(textbook, k * h, b, h);
    gap = std::max(gap, (a - b).cwiseAbs().maxCoeff());
  }
  v.require(gap < 1e-9, "max state gap over 10 s " + fmt(gap));
  const double track = (a.head<3>() - ref(10.0)[0]).norm();
  v.require(track < 1e-3, "tracking error at 10 s " + fmt(track));
  return v;
}

Verdict disturbance_equilibrium() {
  Verdict v;
  const auto t0 = Clock::now();
  quadrotor::Params p;
  p.M = 0.65;
  p.inertia = Vec3(0.004, 0.004, 0.006).asDiagonal();
  p.l_arm = 0.17;
  const Vec3 delta = quadrotor::com_offset_moment(Vec3(0.005, 0.003, 0.0), 9.81);
  GainSet g;
  // Linearized per axis (eta ~ 2 theta): s^3 + 8 s^2 + 20 s + 16, poles -2, -2, -4.
  g.kp = 10.0;
  g.kd = 8.0;
  g.kI = 8.0;
  const quadrotor::Reference ref{exp_so3(Vec3(0.2, -0.1, 0.3)).matrix(), Vec3::Zero(), Vec3::Zero()};
  // State: R (9), Omega (3), Omega_I (3). Controller evaluated continuously.
  auto rhs = [&](double, const VecX& s) {
    const Mat3 r = read_rotation(s, 0);
    const Vec3 om = s.segment<3>(9), oi = s.tail<3>();
    const auto c = quadrotor::controller(r, om, ref, oi, false, g, p, MorseWeighting::plain());
    const auto d = quadrotor::dynamics(r, om, c.tau_u, p.inertia.inverse() * delta, p);
    VecX ds(15);
    write_rotation(ds, 0, d.dR);
    ds.segment<3>(9) = d.dOmega;
    ds.tail<3>() = c.dOmega_I;
    return ds;
  };
  VecX s(15);
  write_rotation(s, 0, exp_so3(Vec3(1.0, 0.5, -0.5)).matrix());
  s.segment<3>(9) = Vec3(0.5, -0.2, 0.1);
  s.tail<3>().setZero();
  const double h = 1e-3;
  for (int k = 0; k < 30000; ++k) {
    s = rk4_step(rhs, k * h, s, h);
    renormalize(s, {0}, 1e-12);
  }
  const Vec3 expected = p.inertia.inverse() * delta / g.kI;
  const double gap = (s.tail<3>() - expected).norm();
  const double dt = seconds_since(t0);
  v.require(gap < 1e-6, "|Omega_I - I^-1 Delta / kI| = " + fmt(gap));
  v.require(dt < 10.0, "runtime " + fmt(dt) + " s");
  return v;
}

Verdict scenario_group(const std::vector<std::string>& names, double budget_s) {
  Verdict v;
  const auto t0 = Clock::now();
  for (const auto& n : names) describe_run(v, n, run(n));
  const double dt = seconds_since(t0);
  v.require(dt < budget_s, "runtime " + fmt(dt) + " s");
  return v;
}

Verdict hoop_suite() {
  Verdict v = scenario_group({"hoop_fixed", "hoop_linear", "hoop_sinusoid"}, 30.0);
  // Nominal hoop data: m_a = 3.28, l = 0.14, M = 4.28, r = 0.18.
  const double bmax = std::asin(3.28 * 0.14 / (4.28 * 0.18)) * 180.0 / kPi;
  v.require(std::abs(bmax - 36.0) < 1.0, "beta_max " + fmt(bmax) + " deg");
  return v;
}

Verdict lyapunov_suite() {
  Verdict v;
  const RunResult r = run("quad_verified");
  bool found = false;
  for (const auto& m : r.monitors) {
    if (m.name.rfind("lyapunov", 0) == 0) {
      found = true;
      v.require(m.pass, "quad_verified " + m.name + ": " + m.detail);
    }
  }
  v.require(found, "lyapunov monitor present");
  const GainSet& g = r.gains;
  v.require(g.verified && verify_gains(g).ok(), "quad_verified gains certified (mu " + fmt(g.mu) + ", lambda " +
                                                    fmt(g.lambda) + ", kappa " + fmt(g.kappa) + ")");
  const double q_ok = lyapunov_Q_min_eig(g);
  GainSet bad = g;
  bad.kI = 2.0 * verify_gains(g).bounds.kI_max;
  const double q_bad = lyapunov_Q_min_eig(bad);
  v.require(q_ok > 0.0, "lambda_min(Q) verified " + fmt(q_ok));
  v.require(q_bad <= 0.0, "lambda_min(Q) with kI = 2 kI_max " + fmt(q_bad));
  bool rejected = false;
  try {
    run("quad_verified", {"gains.kI=" + std::to_string(bad.kI), "sim.t_final_s=0.1"});
  } catch (const Error&) {
    rejected = true;
  }
  v.require(rejected, "verified flag rejects violated kI");
  return v;
}

Verdict integration_convergence() {
  Verdict v;
  for (const char* n : {"quad_attitude", "quad_verified", "ipc_stabilize", "hoop_fixed", "hoop_linear",
                        "hoop_sinusoid", "sphere_fixed", "sphere_circle", "sphere_sinusoid", "pendulum_upright"}) {
    Scenario base = load_scenario(kDir + "/" + n + ".scn");
    const double hp = base.sim.h_plant;
    RunOptions opt;
    opt.record_trace = false;
    const RunResult a = run_scenario(base, opt);
    Scenario fine = load_scenario(kDir + "/" + n + ".scn", {parse_override("sim.h_plant_s=" + std::to_string(hp / 2))});
    const RunResult b = run_scenario(fine, opt);
    const double d = std::abs(a.terminal_error - b.terminal_error);
    v.require(d < 1e-6, std::string(n) + " " + fmt(d));
  }
  return v;
}

}  // namespace

int main() {
  struct Item {
    const char* name;
    std::function<Verdict()> check;
  };
  const std::vector<Item> items = {
      {"geometry_identities", geometry_suite},
      {"linear_reduction", linear_reduction},
      {"disturbance_rejection_equilibrium", disturbance_equilibrium},
      {"quadrotor_attitude", [] { return scenario_group({"quad_attitude"}, 30.0); }},
      {"ipc_incline", [] { return scenario_group({"ipc_stabilize"}, 10.0); }},
      {"hoop_incline", hoop_suite},
      {"sphere_incline", [] { return scenario_group({"sphere_fixed", "sphere_circle", "sphere_sinusoid"}, 60.0); }},
      {"spherical_pendulum", [] { return scenario_group({"pendulum_upright"}, 30.0); }},
      {"lyapunov_monitor", lyapunov_suite},
      {"integration_convergence", integration_convergence},
  };
  int failed = 0;
  for (const auto& it : items) {
    Verdict v;
    try {
      v = it.check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    std::printf("%s %s  %s\n", v.pass ? "PASS" : "FAIL", it.name, v.detail.str().c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(items.size()) - failed, items.size());
  return failed == 0 ? 0 : 1;
}
