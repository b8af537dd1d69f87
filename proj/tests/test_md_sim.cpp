#include <gtest/gtest.h>

#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <random>

#include "itrap/chain_targets.hpp"
#include "itrap/md_sim.hpp"

using namespace itrap;

namespace {

constexpr double um = 1e-6;

IonSpecies barium() {
  IonSpecies ion;
  ion.mass = 138.0 * constants::atomic_mass;
  return ion;
}

// Trap with every electrode grounded: no external field at all.
SimConfig field_free(double duration, double gamma) {
  SimConfig c;
  c.species = barium();
  c.drive.V_rf = 0.0;
  c.gamma = gamma;
  c.duration = duration;
  c.schedule = VoltageSchedule::constant(std::vector<double>(10, 0.0));
  return c;
}

double coulomb_energy(const std::vector<Vec3>& p, double q) {
  double e = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) e += constants::coulomb_k * q * q / norm(p[i] - p[j]);
  return e;
}

}  // namespace

TEST(Ramp, EndpointsAndMidpoint) {
  const auto s = VoltageSchedule::ramp({0.0, 2.0}, {4.0, -2.0}, 10e-6, 50e-6, 4.0);
  EXPECT_EQ(ramp_voltage(0.0, s), s.V1);
  EXPECT_EQ(ramp_voltage(10e-6, s), s.V1);
  EXPECT_EQ(ramp_voltage(60e-6, s), s.V2);
  EXPECT_EQ(ramp_voltage(1.0, s), s.V2);
  const auto mid = ramp_voltage(35e-6, s);
  EXPECT_NEAR(mid[0], 2.0, 1e-12);
  EXPECT_NEAR(mid[1], 0.0, 1e-12);
  double prev = -1;
  for (double t = 10e-6; t <= 60e-6; t += 0.5e-6) {
    const double v = ramp_voltage(t, s)[0];
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Ramp, SteepnessControlsTheProfile) {
  const auto soft = VoltageSchedule::ramp({0.0}, {1.0}, 0, 1, 1.0);
  const auto hard = VoltageSchedule::ramp({0.0}, {1.0}, 0, 1, 20.0);
  // tanh(n_h (2u - 1)) / tanh(n_h), mapped onto [0, 1].
  const double u = 0.25;
  EXPECT_NEAR(ramp_voltage(u, soft)[0], 0.5 * (std::tanh(-0.5) / std::tanh(1.0) + 1), 1e-14);
  EXPECT_LT(ramp_voltage(u, hard)[0], 1e-3);
  EXPECT_THROW(VoltageSchedule::ramp({0.0}, {1.0}, 0, 1, 0.5).validate(), ConfigError);
  EXPECT_THROW(VoltageSchedule::ramp({0.0}, {1.0, 2.0}, 0, 1, 4).validate(), ConfigError);
  EXPECT_THROW(VoltageSchedule::ramp({0.0}, {1.0}, 0, 0, 4).validate(), ConfigError);
}

TEST(Coulomb, MatchesTargetFieldsTimesCharge) {
  const auto ion = barium();
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(-50 * um, 50 * um);
  std::vector<Vec3> p(12);
  for (auto& r : p) r = {u(g), u(g), 100 * um + u(g)};
  const auto f = coulomb_forces(p, ion.charge);
  const auto e = coulomb_fields(p, ion.charge);
  Vec3 total;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec3 d = f[i] - ion.charge * e[i];
    EXPECT_LT(norm(d), 1e-12 * norm(f[i]));
    total += f[i];
  }
  EXPECT_LT(norm(total), 1e-12 * norm(f[0]));
  // Two ions: |F| = k Q^2 / r^2 along the separation.
  const auto two = coulomb_forces(std::vector<Vec3>{{0, 0, 0}, {3 * um, 4 * um, 0}}, ion.charge);
  const double mag = constants::coulomb_k * ion.charge * ion.charge / (25 * um * um);
  EXPECT_NEAR(two[1].x, 0.6 * mag, 1e-12 * mag);
  EXPECT_NEAR(two[1].y, 0.8 * mag, 1e-12 * mag);
}

TEST(Coulomb, CollisionGuard) {
  const std::vector<Vec3> p{{0, 0, 100 * um}, {0.5e-9, 0, 100 * um}};
  EXPECT_THROW(coulomb_forces(p, constants::elementary_charge), NumericalError);
  const TrapGeometry geom;
  auto s = state_at_rest(p);
  EXPECT_THROW(run(geom, field_free(1e-8, 0), s), NumericalError);
}

TEST(Integrator, FreeParticleMovesInAStraightLine) {
  const TrapGeometry geom;
  auto s = state_at_rest(std::vector<Vec3>{{0, 0, 200 * um}});
  s.velocities[0] = {3.0, -1.0, 0.5};
  const auto r = run(geom, field_free(2e-6, 0.0), s);
  EXPECT_EQ(r.steps, 4000);
  EXPECT_NEAR(r.final.t, 2e-6, 1e-18);
  EXPECT_NEAR(r.final.positions[0].x, 6e-6, 1e-15);
  EXPECT_NEAR(r.final.positions[0].y, -2e-6, 1e-15);
  EXPECT_NEAR(r.final.positions[0].z, 201e-6, 1e-15);
  EXPECT_EQ(r.final.velocities[0], s.velocities[0]);
}

TEST(Integrator, FrictionDecaysExponentially) {
  const TrapGeometry geom;
  const double gamma = 2e-19;
  const auto ion = barium();
  auto s = state_at_rest(std::vector<Vec3>{{0, 0, 200 * um}});
  s.velocities[0] = {2.0, 0.0, 0.0};
  const double T = 5e-6;
  const auto r = run(geom, field_free(T, gamma), s);
  const double rate = gamma / ion.mass;
  EXPECT_NEAR(r.final.velocities[0].x, 2.0 * std::exp(-rate * T), 1e-6 * 2.0 * std::exp(-rate * T));
  const double travelled = 2.0 / rate * (1 - std::exp(-rate * T));
  EXPECT_NEAR(r.final.positions[0].x, travelled, 1e-6 * travelled);
}

TEST(Integrator, CoulombExchangeConservesMomentum) {
  const TrapGeometry geom;
  std::mt19937_64 g(4);
  std::normal_distribution<double> nv(0, 1.0);
  std::vector<Vec3> p;
  for (int i = 0; i < 6; ++i) p.push_back({i * 8 * um, (i % 2) * 3 * um, 150 * um + i * um});
  auto s = state_at_rest(p);
  Vec3 p0;
  double scale = 0;
  for (auto& v : s.velocities) {
    v = {nv(g), nv(g), nv(g)};
    p0 += v;
    scale += norm(v);
  }
  const auto r = run(geom, field_free(4e-6, 0.0), s);
  Vec3 p1;
  for (const auto& v : r.final.velocities) p1 += v;
  EXPECT_LT(norm(p1 - p0), 1e-12 * scale);
  // The ions did interact.
  EXPECT_GT(norm(r.final.velocities[0] - s.velocities[0]), 1e-3);
}

TEST(Integrator, FrictionNeverRaisesTheEnergy) {
  const TrapGeometry geom;
  const auto ion = barium();
  std::vector<Vec3> p{{-5 * um, 0, 150 * um}, {0, 1 * um, 150 * um}, {6 * um, 0, 151 * um}};
  auto s = state_at_rest(p);
  s.velocities[0] = {1.0, 0.0, 0.0};
  auto cfg = field_free(0.0, 2e-19);
  Simulator sim(geom, cfg);
  auto energy = [&](const SimState& st) {
    double e = coulomb_energy(st.positions, ion.charge);
    for (const auto& v : st.velocities) e += 0.5 * ion.mass * norm2(v);
    return e;
  };
  double prev = energy(s);
  for (int block = 0; block < 100; ++block) {
    for (int k = 0; k < 50; ++k) sim.step(s);
    const double e = energy(s);
    EXPECT_LE(e, prev * (1 + 1e-9)) << "block " << block;
    prev = e;
  }
}

TEST(Integrator, ZeroDurationReturnsTheInitialState) {
  const TrapGeometry geom;
  auto s = state_at_rest(std::vector<Vec3>{{1 * um, 0, 100 * um}, {12 * um, 0, 100 * um}});
  s.velocities[1] = {0.1, 0.2, 0.3};
  auto cfg = field_free(0.0, 2e-19);
  cfg.snapshot_stride = 10;
  const auto r = run(geom, cfg, s);
  EXPECT_EQ(r.steps, 0);
  EXPECT_EQ(r.final, s);
  ASSERT_EQ(r.snapshots.size(), 1u);
}

TEST(Integrator, DeterministicAndSnapshotsOnStride) {
  const TrapGeometry geom;
  SimConfig cfg;
  cfg.species = barium();
  cfg.duration = 5e-6;
  cfg.snapshot_stride = 1000;
  cfg.schedule = VoltageSchedule::constant(std::vector<double>{0.5, -1, 2, 0, 0, 1, 0, 0, 0, 3});
  const auto target = uniform_chain({8, 10 * um, 100 * um}, cfg.species);
  int calls = 0;
  const auto a = run(geom, cfg, state_at_rest(target.positions), [&](const SimState&, std::int64_t) { ++calls; });
  const auto b = run(geom, cfg, state_at_rest(target.positions));
  EXPECT_EQ(a.final, b.final);
  EXPECT_EQ(calls, 10000);
  ASSERT_EQ(a.snapshots.size(), 11u);
  EXPECT_NEAR(a.snapshots[3].t, 1.5e-6, 1e-15);
  EXPECT_EQ(a.snapshots.back(), a.final);
}

TEST(Integrator, RampWithEqualEndpointsMatchesStatic) {
  const TrapGeometry geom;
  SimConfig cfg;
  cfg.species = barium();
  cfg.duration = 2e-6;
  const std::vector<double> v{1, 0, 0, 2, 0, 0, 0, 0, -1, 0};
  cfg.schedule = VoltageSchedule::constant(v);
  const auto start = state_at_rest(uniform_chain({4, 10 * um, 100 * um}, cfg.species).positions);
  const auto a = run(geom, cfg, start);
  cfg.schedule = VoltageSchedule::ramp(v, v, 0.5e-6, 1e-6, 4);
  const auto b = run(geom, cfg, start);
  EXPECT_EQ(a.final, b.final);
}

TEST(Integrator, AxialOscillationMatchesStaticCurvature) {
  const TrapGeometry geom;
  const FieldKernel kernel(geom);
  SimConfig cfg;
  cfg.species = barium();
  cfg.gamma = 0;
  std::vector<double> v(10, 0.0);
  v[3] = v[4] = 2.0;
  cfg.schedule = VoltageSchedule::constant(v);
  DriveConfig statics = cfg.drive;
  statics.V_rf = 0.0;
  const double q = cfg.species.charge;

  // Time-averaged vertical balance on the axis.
  auto fz = [&](double z) {
    const Vec3 r{0, 0, z};
    return q * total_field(kernel, statics, v, 0.0, r).z + pseudo_force(kernel, cfg.drive, cfg.species, r).z;
  };
  std::uintmax_t it = 200;
  const auto [zl, zh] =
      boost::math::tools::toms748_solve(fz, 60 * um, 140 * um, boost::math::tools::eps_tolerance<double>(50), it);
  const double z0 = 0.5 * (zl + zh);

  // Axial spring constant from finite differences of the two potentials.
  const double hx = 2 * um;
  auto U = [&](double x) {
    const Vec3 r{x, 0, z0};
    return q * static_potential(kernel, 0.0, v, r) + pseudo_potential(kernel, cfg.drive, cfg.species, r);
  };
  const double k = (U(hx) - 2 * U(0) + U(-hx)) / (hx * hx);
  ASSERT_GT(k, 0);
  const double omega = std::sqrt(k / cfg.species.mass);
  const double period = 2 * constants::pi / omega;
  ASSERT_GT(period, 1e-6);
  ASSERT_LT(period, 50e-6);

  cfg.duration = 6.2 * period;
  std::vector<double> ups;
  double xprev = 0, tprev = 0;
  const auto r = run(geom, cfg, state_at_rest(std::vector<Vec3>{{1 * um, 0, z0}}),
                     [&](const SimState& s, std::int64_t) {
                       const double x = s.positions[0].x;
                       if (xprev < 0 && x >= 0) ups.push_back(tprev + (s.t - tprev) * (-xprev) / (x - xprev));
                       xprev = x;
                       tprev = s.t;
                     });
  ASSERT_GE(ups.size(), 5u);
  const double measured = (ups.back() - ups.front()) / static_cast<double>(ups.size() - 1);
  EXPECT_NEAR(measured, period, 1e-3 * period);
  EXPECT_LT(std::abs(r.final.positions[0].y), 1e-9);
}

TEST(SimConfig, Validation) {
  const TrapGeometry geom;
  auto cfg = field_free(1e-6, 0);
  cfg.dt = 1e-8;  // above T_rf / 10 for 20 MHz
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = field_free(1e-6, -1);
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = field_free(-1, 0);
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = field_free(1e-6, 0);
  cfg.schedule.V1.resize(4);
  EXPECT_THROW(Simulator(geom, cfg), ConfigError);
  cfg = field_free(1e-6, 0);
  SimState bad = state_at_rest(std::vector<Vec3>{{0, 0, 1e-4}});
  bad.velocities.clear();
  EXPECT_THROW(run(geom, cfg, bad), std::invalid_argument);
  EXPECT_EQ(field_free(1e-6, 0).num_steps(), 2000);
  EXPECT_EQ(field_free(1.0000001e-6, 0).num_steps(), 2001);
}
