#include <gtest/gtest.h>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <random>

#include "itrap/chain_targets.hpp"

using namespace itrap;

namespace {

constexpr double um = 1e-6;

double chain_energy(const std::vector<Vec3>& p, double omega, const IonSpecies& ion) {
  double e = 0;
  const double kq2 = constants::coulomb_k * ion.charge * ion.charge;
  for (std::size_t i = 0; i < p.size(); ++i) {
    e += 0.5 * ion.mass * omega * omega * p[i].x * p[i].x;
    for (std::size_t j = i + 1; j < p.size(); ++j) e += kq2 / std::abs(p[i].x - p[j].x);
  }
  return e;
}

}  // namespace

TEST(UniformChain, TwoIons) {
  const IonSpecies ion;
  const auto t = uniform_chain({2, 10 * um, 100 * um}, ion);
  EXPECT_DOUBLE_EQ(t.positions[0].x, -5 * um);
  EXPECT_DOUBLE_EQ(t.positions[1].x, 5 * um);
  const double e = constants::coulomb_k * ion.charge / (100 * um * um);
  EXPECT_NEAR(t.coulomb_field[0].x, -e, 1e-12 * e);
  EXPECT_NEAR(t.coulomb_field[1].x, e, 1e-12 * e);
  EXPECT_EQ(t.coulomb_field[0].y, 0);
  EXPECT_EQ(t.coulomb_field[0].z, 0);
}

TEST(UniformChain, FieldsSumToZeroAndAreAxial) {
  const IonSpecies ion;
  for (int n : {3, 7, 64}) {
    const auto t = uniform_chain({n, 10 * um, 100 * um}, ion);
    Vec3 s;
    double scale = 0;
    for (const auto& e : t.coulomb_field) {
      s += e;
      scale = std::max(scale, norm(e));
      EXPECT_EQ(e.y, 0);
      EXPECT_EQ(e.z, 0);
    }
    EXPECT_NEAR(s.x, 0, 1e-12 * scale);
    for (int i = 0; i < n; ++i)
      EXPECT_NEAR(t.coulomb_field[static_cast<std::size_t>(i)].x,
                  -t.coulomb_field[static_cast<std::size_t>(n - 1 - i)].x, 1e-12 * scale);
  }
}

TEST(UniformChain, CentreAndEdgeOfLongChain) {
  const IonSpecies ion;
  const auto t = uniform_chain({64, 10 * um, 100 * um}, ion);
  // Edge ion: all 63 neighbours on one side, d * j away.
  double edge = 0;
  for (int j = 1; j < 64; ++j) edge += 1.0 / (j * j * 100e-12);
  edge *= constants::coulomb_k * ion.charge;
  EXPECT_NEAR(std::abs(t.coulomb_field[0].x), edge, 1e-12 * edge);
  // With an even count the two middle ions feel the single extra neighbour
  // on the longer side; the central pair's mean field cancels exactly.
  EXPECT_LT(std::abs(t.coulomb_field[31].x + t.coulomb_field[32].x), 1e-10 * edge);
  const auto odd = uniform_chain({65, 10 * um, 100 * um}, ion);
  EXPECT_LT(std::abs(odd.coulomb_field[32].x), 1e-10 * std::abs(odd.coulomb_field[0].x));
}

TEST(UniformChain, RejectsInvalidInput) {
  EXPECT_THROW(uniform_chain({1, 1e-5, 1e-4}, IonSpecies{}), ConfigError);
  EXPECT_THROW(uniform_chain({4, 0, 1e-4}, IonSpecies{}), ConfigError);
}

TEST(ExcludeEdges, MarksBothEnds) {
  auto t = uniform_chain({6, 10 * um, 100 * um}, IonSpecies{});
  exclude_edges(t, 2);
  EXPECT_EQ(t.excluded, (std::vector<int>{0, 1, 4, 5}));
  EXPECT_TRUE(t.is_excluded(4));
  EXPECT_FALSE(t.is_excluded(2));
  EXPECT_THROW(exclude_edges(t, 3), ConfigError);
}

TEST(HarmonicEquilibrium, TwoIonsClosedForm) {
  const IonSpecies ion;
  const double w = 2 * constants::pi * 1e6;
  const auto t = harmonic_equilibrium(2, w, ion, 100 * um);
  // m w^2 (s/2) = k Q^2 / s^2.
  const double s = std::cbrt(2 * constants::coulomb_k * ion.charge * ion.charge / (ion.mass * w * w));
  EXPECT_NEAR(t.positions[1].x - t.positions[0].x, s, 1e-12 * s);
}

TEST(HarmonicEquilibrium, ThreeIonsMatchDirectMinimisation) {
  const IonSpecies ion;
  const double w = 2 * constants::pi * 500e3;
  const auto t = harmonic_equilibrium(3, w, ion, 100 * um);
  const double ell = harmonic_length_scale(w, ion);
  EXPECT_NEAR(t.positions[2].x, std::cbrt(5.0 / 4.0) * ell, 1e-12 * ell);
  EXPECT_EQ(t.positions[1].x, 0.0);
  // Independent 1-D minimisation of the symmetric configuration (-u, 0, u).
  // Brent locates the minimum only to ~sqrt(eps); the root of a central
  // difference of the same energy pins it much tighter.
  auto energy = [&](double u) { return chain_energy({{-u, 0, 0}, {0, 0, 0}, {u, 0, 0}}, w, ion); };
  const auto [u0, e] = boost::math::tools::brent_find_minima(energy, 0.1 * ell, 5 * ell, 52);
  EXPECT_NEAR(t.positions[2].x, u0, 1e-3 * ell);
  auto slope = [&](double u) {
    const double h = 1e-4 * ell;
    return (energy(u + h) - energy(u - h)) / (2 * h);
  };
  std::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(slope, 0.5 * ell, 2 * ell,
                                                          boost::math::tools::eps_tolerance<double>(40), iters);
  EXPECT_NEAR(t.positions[2].x, 0.5 * (lo + hi), 1e-6 * ell);
}

TEST(HarmonicEquilibrium, AntisymmetricAndConverged) {
  const IonSpecies ion;
  HarmonicSolveReport rep;
  const auto t = harmonic_equilibrium(64, 2 * constants::pi * 212e3, ion, 100 * um, &rep);
  EXPECT_LT(rep.max_residual_force, 1e-20);
  for (std::size_t i = 0; i < 64; ++i) {
    EXPECT_EQ(t.positions[i].x, -t.positions[63 - i].x);
    EXPECT_EQ(t.positions[i].z, 100 * um);
    if (i > 0) EXPECT_GT(t.positions[i].x, t.positions[i - 1].x);
  }
}

TEST(HarmonicEquilibrium, PerturbationsNeverLowerEnergy) {
  const IonSpecies ion;
  const double w = 2 * constants::pi * 212e3;
  const auto t = harmonic_equilibrium(20, w, ion, 100 * um);
  const double e0 = chain_energy(t.positions, w, ion);
  std::mt19937_64 g(1);
  std::normal_distribution<double> n(0, 1e-9);
  for (int k = 0; k < 200; ++k) {
    auto p = t.positions;
    for (auto& v : p) v.x += n(g);
    EXPECT_GE(chain_energy(p, w, ion), e0 * (1 - 1e-15));
  }
}

TEST(HarmonicEquilibrium, ExtentScalesAsOmegaToMinusTwoThirds) {
  const IonSpecies ion;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (double f = 100e3; f <= 1000e3 * 1.0001; f *= std::pow(10.0, 0.25)) {
    const double w = 2 * constants::pi * f;
    const double L = harmonic_equilibrium(64, w, ion, 100 * um).positions.back().x;
    const double lx = std::log(w), ly = std::log(L);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
    EXPECT_GT(chain_half_length(64, w, ion), 0);
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  EXPECT_NEAR(slope, -2.0 / 3.0, 0.02);
}

TEST(ChainHalfLength, ScalingAndMonotonicity) {
  const IonSpecies ion;
  const double w = 2 * constants::pi * 212e3;
  for (int n = 40; n <= 320; n *= 2) EXPECT_GT(chain_half_length(2 * n, w, ion), chain_half_length(n, w, ion));
  IonSpecies heavy = ion;
  heavy.mass *= 4;
  EXPECT_NEAR(chain_half_length(64, w, heavy), chain_half_length(64, w, ion) / std::cbrt(4.0), 1e-18);
}

TEST(ChainHalfLength, ComparableToEquilibriumExtent) {
  const IonSpecies ion;
  const double w = 2 * constants::pi * 212e3;
  const double L = chain_half_length(64, w, ion);
  const double x = harmonic_equilibrium(64, w, ion, 100 * um).positions.back().x;
  EXPECT_NEAR(L, x, 0.25 * x);
}

TEST(ChainHalfLength, RejectsInvalidCorrection) {
  const IonSpecies ion;
  EXPECT_THROW(chain_half_length(10, 1e6, ion), std::domain_error);  // ln 10 + gamma - 3.5 < 0
  EXPECT_THROW(chain_half_length(1, 1e6, ion), std::invalid_argument);
  EXPECT_GT(chain_half_length(10, 1e6, ion, [](int) { return 1.0; }), 0);
}
