#include <gtest/gtest.h>

#include <random>

#include "gpid/sim/rk4.hpp"
#include "gpid/systems/hoop.hpp"
#include "gpid/systems/ipc.hpp"
#include "gpid/systems/pendulum.hpp"
#include "gpid/systems/quadrotor.hpp"
#include "gpid/systems/sphere.hpp"

using namespace gpid;

namespace {

quadrotor::Params quad_params() {
  quadrotor::Params p;
  p.M = 0.65;
  p.inertia = Vec3(0.004, 0.004, 0.006).asDiagonal();
  p.l_arm = 0.17;
  p.c_l = {5e-8, 5e-8, 5e-8, 5e-8};
  p.c_d = {1e-9, 1e-9, 1e-9, 1e-9};
  p.motor_min = 2000;
  p.motor_max = 15000;
  return p;
}

hoop::Params hoop_params(double beta) {
  hoop::Params p;
  p.m_h = 1.0;
  p.I_h = 0.021;
  p.r = 0.18;
  p.m_a = 3.28;
  p.I_a = 0.035;
  p.l = 0.14;
  p.beta = beta;
  return p;
}

ipc::Params ipc_params(double beta) {
  ipc::Params p;
  p.M_cart = 6.5;
  p.m_pend = 0.5;
  p.L = 0.3;
  p.I_p = 0.09;
  p.beta = beta;
  return p;
}

sphere::Params sphere_params(double beta) {
  sphere::Params p;
  p.m_b = 1.0;
  p.I_b = Vec3(0.0213, 0.0205, 0.0228).asDiagonal();
  p.r = 0.18;
  p.m_i = 3.28;
  p.I_i = Vec3(0.0353, 0.0378, 0.0368).asDiagonal();
  p.l = 0.1;
  p.beta = beta;
  return p;
}

// Energy written from the rigid-body description: shell, cart point mass and cart rotation.
double sphere_energy(const sphere::State& s, const sphere::Params& p) {
  const Vec3 e3 = Vec3::UnitZ(), eg = sphere::e_g(p.beta);
  const Vec3 vo = p.r * s.omega.cross(e3);
  const Vec3 vi = vo - p.l * s.omega_i.cross(s.R_i * e3);
  const double t = 0.5 * s.omega.dot(s.R * p.I_b * s.R.transpose() * s.omega) + 0.5 * p.m_b * vo.squaredNorm() +
                   0.5 * p.m_i * vi.squaredNorm() +
                   0.5 * s.omega_i.dot(s.R_i * p.I_i * s.R_i.transpose() * s.omega_i);
  const double u = p.m_b * p.g * s.o.dot(eg) + p.m_i * p.g * (s.o - p.l * s.R_i * e3).dot(eg);
  return t + u;
}

}  // namespace

TEST(Quadrotor, ZeroMomentGivesEqualSpeeds) {
  const auto p = quad_params();
  const auto a = quadrotor::allocate(12.753, Vec3::Zero(), p);
  EXPECT_FALSE(a.saturated);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(a.speeds(i), a.speeds(0), 1e-9);
}

TEST(Quadrotor, PropertyAllocationRoundTrip) {
  auto p = quad_params();
  p.c_l = {5.5e-8, 4.5e-8, 5.5e-8, 4.5e-8};
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const double f = 8.0 + 4.0 * u(rng);
    const Vec3 tau(0.2 * u(rng), 0.2 * u(rng), 0.01 * u(rng));
    const auto a = quadrotor::allocate(f, tau, p);
    if (a.saturated) continue;
    ++checked;
    const Eigen::Vector4d w = quadrotor::forward_map(a.speeds.array().square().matrix(), p);
    EXPECT_LT((w - Eigen::Vector4d(f, tau.x(), tau.y(), tau.z())).norm(), 1e-9);
  }
  EXPECT_GT(checked, 100);
}

TEST(Quadrotor, SaturationClampsSpeeds) {
  const auto p = quad_params();
  const auto a = quadrotor::allocate(200.0, Vec3::Zero(), p);
  EXPECT_TRUE(a.saturated);
  EXPECT_DOUBLE_EQ(a.speeds.maxCoeff(), p.motor_max);
  EXPECT_TRUE(quadrotor::allocate(0.0, Vec3::Zero(), p).saturated);
}

TEST(Quadrotor, TorqueFreeConservesEnergyAndMomentum) {
  quadrotor::Params p = quad_params();
  p.inertia = Vec3(0.0035, 0.0045, 0.007).asDiagonal();
  VecX x(12);
  sim::write_rotation(x, 0, exp_so3(Vec3(0.3, -0.1, 0.8)).matrix());
  x.tail<3>() = Vec3(2.0, -1.0, 3.0);
  auto f = [&](double, const VecX& z) {
    const auto d = quadrotor::dynamics(sim::read_rotation(z, 0), z.tail<3>(), Vec3::Zero(), Vec3::Zero(), p);
    VecX dz(12);
    sim::write_rotation(dz, 0, d.dR);
    dz.tail<3>() = d.dOmega;
    return dz;
  };
  auto energy = [&](const VecX& z) { return 0.5 * z.tail<3>().dot(p.inertia * z.tail<3>()); };
  auto momentum = [&](const VecX& z) { return Vec3(sim::read_rotation(z, 0) * p.inertia * z.tail<3>()); };
  const double e0 = energy(x);
  const Vec3 h0 = momentum(x);
  for (int k = 0; k < 5000; ++k) x = sim::rk4_step(f, k * 1e-3, x, 1e-3);
  EXPECT_NEAR(energy(x), e0, 1e-10);
  EXPECT_LT((momentum(x) - h0).norm(), 1e-9);
}

TEST(Quadrotor, ControllerAtReferenceIsFeedforwardOnly) {
  const auto p = quad_params();
  GainSet g;
  g.kp = 2;
  g.kd = 35;
  g.kI = 5;
  const Vec3 w(kPi, 0, 0);
  const quadrotor::Reference ref{exp_so3(Vec3(0.4, 0, 0)).matrix(), w, Vec3::Zero()};
  const auto out = quadrotor::controller(ref.R_r, w, ref, Vec3::Zero(), false, g, p, MorseWeighting::plain());
  // Rotation about a principal axis needs no moment.
  EXPECT_LT(out.tau_u.norm(), 1e-12);
  EXPECT_NEAR(out.V, 0.0, 1e-12);
}

TEST(Pendulum, ConstraintMomentAndGradient) {
  pendulum::Params p;
  p.M = p.l = p.g = 1.0;
  p.inertia = Vec3(1, 2, 3).asDiagonal();
  EXPECT_TRUE(pendulum::constraint_moment(Vec3(1, 1, 0), p).isApprox(Vec3(0, 0, 1)));
  for (double th : {0.2, 1.3, 2.9}) {
    const Mat3 r = exp_so3(Vec3(th, 0, 0)).matrix();
    EXPECT_LT((pendulum::morse_dV(r) - Vec3(std::sin(th), 0, 0)).norm(), 1e-14);
    EXPECT_NEAR(pendulum::morse_V(r), 1.0 - std::cos(th), 1e-14);
  }
}

TEST(Pendulum, EquilibriaAndConservation) {
  pendulum::Params p;
  p.M = 1.0;
  p.l = 1.0;
  p.g = 1.0;
  p.inertia = Vec3(1, 2, 3).asDiagonal();
  for (const Vec3& rv : {Vec3::Zero().eval(), Vec3(kPi, 0, 0)}) {
    const auto d = pendulum::dynamics(exp_so3(rv).matrix(), Vec3::Zero(), Vec3::Zero(), p);
    EXPECT_LT(d.dOmega.norm(), 1e-14);
  }
  EXPECT_THROW(pendulum::dynamics(Mat3::Identity(), Vec3(0, 0, 0.1), Vec3::Zero(), p), ConstraintViolationError);

  VecX x(12);
  sim::write_rotation(x, 0, exp_so3(Vec3(0.7, -0.4, 0)).matrix());
  x.tail<3>() = Vec3(0.3, -0.2, 0.0);
  auto f = [&](double, const VecX& z) {
    const auto d = pendulum::dynamics(sim::read_rotation(z, 0), z.tail<3>(), Vec3::Zero(), p);
    VecX dz(12);
    sim::write_rotation(dz, 0, d.dR);
    dz.tail<3>() = d.dOmega;
    return dz;
  };
  const double e0 = pendulum::energy(sim::read_rotation(x, 0), x.tail<3>(), p);
  for (int k = 0; k < 10000; ++k) x = sim::rk4_step(f, k * 1e-3, x, 1e-3);
  EXPECT_NEAR(pendulum::energy(sim::read_rotation(x, 0), x.tail<3>(), p), e0, 1e-9);
  EXPECT_EQ(x(11), 0.0);
}

TEST(Pendulum, ControlRespectsConstraint) {
  pendulum::Params p;
  p.M = p.l = p.g = 1.0;
  GainSet g;
  g.kp = 16;
  g.kd = 8;
  g.kI = 1;
  const auto out = pendulum::controller(exp_so3(Vec3(0.5, 0.2, 0)).matrix(), Vec3(0.1, 0.3, 0), Vec3(0.01, 0, 0),
                                        false, g, p);
  EXPECT_EQ(out.tau_u.z(), 0.0);
}

TEST(Ipc, UnforcedEnergyIsConstant) {
  const auto p = ipc_params(0.0);
  VecX x(4);
  x << 0.5, 1.0, 0.0, 0.3;
  auto f = [&](double, const VecX& z) {
    const auto d = ipc::dynamics(z(0), z(1), z(2), z(3), 0.0, p);
    VecX dz(4);
    dz << d.dtheta, d.domega, d.dx, d.dv;
    return dz;
  };
  const double e0 = ipc::energy(x(0), x(1), x(3), p);
  for (int k = 0; k < 10000; ++k) x = sim::rk4_step(f, k * 1e-3, x, 1e-3);
  EXPECT_NEAR(ipc::energy(x(0), x(1), x(3), p), e0, 1e-6);
}

TEST(Ipc, UprightOnInclineIsEquilibriumOfTilt) {
  const auto p = ipc_params(0.5);
  const auto d = ipc::dynamics(-0.5, 0.0, 0.0, 0.0, 0.0, p);
  EXPECT_NEAR(d.domega, 0.0, 1e-14);
  EXPECT_NEAR(d.dv, 0.0, 1e-14);
}

TEST(Ipc, InverseForceMapCancelsInputGain) {
  const auto p = ipc_params(0.0);
  GainSet g;
  g.kp = 10;
  g.kd = 6;
  g.kI = 2;
  const double th = 0.3;
  const auto c = ipc::controller(th, 0.2, 0.0, 0.05, false, g, p, ipc::ForceMap::inverse);
  const double i = p.inertia(th);
  EXPECT_NEAR(ipc::input_map(th, p) * c.f, -i * (g.kp * c.eta_e + g.kd * 0.2 + g.kI * 0.05), 1e-12);
  EXPECT_NEAR(c.eta_e * i, std::sin(th), 1e-15);
}

TEST(Hoop, UnforcedFlatEnergyIsConstant) {
  const auto p = hoop_params(0.0);
  VecX x(5);
  x << 0.0, 0.0, 0.5, 1.0, 2.0;
  auto f = [&](double, const VecX& z) {
    const auto d = hoop::dynamics({z(0), z(1), z(2), z(3), z(4)}, 0.0, p);
    VecX dz(5);
    dz << d.dtheta, d.dO, d.domega, d.dtheta_a, d.domega_a;
    return dz;
  };
  auto e = [&](const VecX& z) { return hoop::energy_flat({z(0), z(1), z(2), z(3), z(4)}, p); };
  const double e0 = e(x);
  for (int k = 0; k < 10000; ++k) x = sim::rk4_step(f, k * 1e-3, x, 1e-3);
  EXPECT_NEAR(e(x), e0, 1e-8);
}

TEST(Hoop, InclineLimitAndTrim) {
  EXPECT_NEAR(hoop::beta_max(hoop_params(0.0)) * 180.0 / kPi, 36.0, 1.0);
  for (double deg : {0.0, 10.0, 20.0, 30.0}) {
    const auto p = hoop_params(deg * kPi / 180.0);
    const auto trim = hoop::equilibrium(p);
    hoop::State s;
    s.theta_a = trim.theta_a;
    const auto d = hoop::dynamics(s, trim.tau_u, p);
    EXPECT_NEAR(d.domega, 0.0, 1e-12) << deg;
    EXPECT_NEAR(d.domega_a, 0.0, 1e-12) << deg;
  }
  EXPECT_THROW(hoop::equilibrium(hoop_params(40.0 * kPi / 180.0)), InvalidArgumentError);
}

TEST(Hoop, ChristoffelOfRollingMetric) {
  const auto p = hoop_params(0.0);
  const ChristoffelCircle gamma(p.metric());
  for (double t = -3.0; t < 3.0; t += 0.5) EXPECT_LT(gamma.finite_difference_gap(t), 1e-8);
}

TEST(Sphere, InclineLimit) {
  EXPECT_NEAR(sphere::beta_max(sphere_params(0.0)) * 180.0 / kPi, 25.2, 0.1);
}

TEST(Sphere, PropertyMassOperatorPositiveDefinite) {
  const auto p = sphere_params(0.0);
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int i = 0; i < 300; ++i) {
    const Mat3 r = exp_so3(Vec3(u(rng), u(rng), u(rng))).matrix();
    const Mat3 ri = exp_so3(Vec3(u(rng), u(rng), u(rng))).matrix();
    const Mat3 m = sphere::mass_operator(r, ri, p);
    EXPECT_LT((m - m.transpose()).norm(), 1e-12);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat3>(m).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Sphere, RestOnFlatIsEquilibrium) {
  const auto p = sphere_params(0.0);
  sphere::State s;
  s.o = Vec3(0, 0, p.r);
  const auto d = sphere::dynamics(s, Vec3::Zero(), Vec3::Zero(), p);
  EXPECT_LT(d.domega.norm(), 1e-12);
  EXPECT_LT(d.domega_i.norm(), 1e-12);
}

TEST(Sphere, UnforcedEnergyIsConstant) {
  for (double beta : {0.0, 0.2}) {
    const auto p = sphere_params(beta);
    sphere::State s;
    s.o = Vec3(0, 0, p.r);
    s.omega = Vec3(0.3, -0.2, 0.5);
    s.omega_i = Vec3(0.4, 0.1, -0.3);
    s.R_i = exp_so3(Vec3(0.3, 0.2, 0.1)).matrix();
    VecX x(27);
    sim::write_rotation(x, 0, s.R);
    x.segment<3>(9) = s.o;
    x.segment<3>(12) = s.omega;
    sim::write_rotation(x, 15, s.R_i);
    x.segment<3>(24) = s.omega_i;
    auto unpack = [](const VecX& z) {
      sphere::State y;
      y.R = sim::read_rotation(z, 0);
      y.o = z.segment<3>(9);
      y.omega = z.segment<3>(12);
      y.R_i = sim::read_rotation(z, 15);
      y.omega_i = z.segment<3>(24);
      return y;
    };
    auto f = [&](double, const VecX& z) {
      const auto d = sphere::dynamics(unpack(z), Vec3::Zero(), Vec3::Zero(), p);
      VecX dz(27);
      sim::write_rotation(dz, 0, d.dR);
      dz.segment<3>(9) = d.dO;
      dz.segment<3>(12) = d.domega;
      sim::write_rotation(dz, 15, d.dR_i);
      dz.segment<3>(24) = d.domega_i;
      return dz;
    };
    const double e0 = sphere_energy(unpack(x), p);
    for (int k = 0; k < 5000; ++k) x = sim::rk4_step(f, k * 1e-3, x, 1e-3);
    EXPECT_NEAR(sphere_energy(unpack(x), p), e0, 1e-7) << "beta = " << beta;
  }
}
