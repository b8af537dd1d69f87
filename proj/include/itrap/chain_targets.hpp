#pragma once

// Target ion configurations for the voltage fit: straight uniform chains and
// the equilibrium of a chain in a harmonic axial well.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "itrap/constants.hpp"
#include "itrap/errors.hpp"
#include "itrap/gl_fields.hpp"
#include "itrap/linalg.hpp"
#include "itrap/vec3.hpp"

namespace itrap {

struct ChainSpec {
  int N = 64;
  double d = 10e-6;
  double h = 100e-6;

  void validate() const {
    if (N < 2) throw ConfigError("chain: N must be >= 2");
    if (!(d > 0)) throw ConfigError("chain: d must be positive");
    if (!(h > 0)) throw ConfigError("chain: h must be positive");
  }
  friend bool operator==(const ChainSpec&, const ChainSpec&) = default;
};

struct TargetConfiguration {
  std::vector<Vec3> positions;      // sorted by x
  std::vector<Vec3> coulomb_field;  // field of the other ions at each ion (V/m)
  std::vector<int> excluded;        // ions without residual rows

  std::size_t size() const { return positions.size(); }
  bool is_excluded(int i) const { return std::binary_search(excluded.begin(), excluded.end(), i); }
};

/// Field at each ion produced by all other ions, k_c Q sum_j r_ij / |r_ij|^3.
inline std::vector<Vec3> coulomb_fields(std::span<const Vec3> pos, double charge) {
  const std::size_t n = pos.size();
  std::vector<Vec3> e(n);
  const double kq = constants::coulomb_k * charge;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec3 d = pos[i] - pos[j];
      const double r2 = norm2(d);
      const Vec3 f = d * (kq / (r2 * std::sqrt(r2)));
      e[i] += f;
      e[j] -= f;
    }
  }
  return e;
}

/// Marks `per_side` ions at each end of the chain as excluded.
inline void exclude_edges(TargetConfiguration& t, int per_side) {
  const int n = static_cast<int>(t.size());
  if (per_side < 0 || 2 * per_side >= n)
    throw ConfigError("exclude_per_side must leave at least one ion");
  t.excluded.clear();
  for (int i = 0; i < per_side; ++i) t.excluded.push_back(i);
  for (int i = n - per_side; i < n; ++i) t.excluded.push_back(i);
  std::sort(t.excluded.begin(), t.excluded.end());
}

/// Straight chain on the trap axis, centred at x = 0.
inline TargetConfiguration uniform_chain(const ChainSpec& spec, const IonSpecies& ion) {
  spec.validate();
  TargetConfiguration t;
  t.positions.resize(static_cast<std::size_t>(spec.N));
  for (int i = 0; i < spec.N; ++i)
    t.positions[static_cast<std::size_t>(i)] = {(i - 0.5 * (spec.N - 1)) * spec.d, 0.0, spec.h};
  t.coulomb_field = coulomb_fields(t.positions, ion.charge);
  return t;
}

/// Length scale (Q^2 k_c / (m w^2))^(1/3) of a Coulomb chain in a harmonic well.
inline double harmonic_length_scale(double omega, const IonSpecies& ion) {
  return std::cbrt(ion.charge * ion.charge * constants::coulomb_k / (ion.mass * omega * omega));
}

struct HarmonicSolveReport {
  int iterations = 0;
  double max_residual_force = 0.0;  // N
};

/// Axial equilibrium of N ions in m w^2 x^2 / 2, solved by damped Newton in
/// units of harmonic_length_scale. Positions lie at height h on y = 0.
inline TargetConfiguration harmonic_equilibrium(int N, double omega, const IonSpecies& ion,
                                                double h, HarmonicSolveReport* report = nullptr) {
  if (N < 1) throw ConfigError("harmonic_equilibrium: N must be >= 1");
  if (!(omega > 0)) throw ConfigError("harmonic_equilibrium: omega must be positive");
  const auto n = static_cast<std::size_t>(N);
  // Start from a uniform spread over the large-N half length.
  const double half = N > 1 ? std::cbrt(3.0 * N * std::max(1.0, std::log(N) - 0.5)) * 0.5 : 0.0;
  linalg::Vector u(n);
  for (std::size_t i = 0; i < n; ++i)
    u[i] = N > 1 ? -half + 2.0 * half * static_cast<double>(i) / (N - 1) : 0.0;

  auto residual = [&](const linalg::Vector& x) {
    linalg::Vector f(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = -x[i];
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d = x[i] - x[j];
        s += (d > 0 ? 1.0 : -1.0) / (d * d);
      }
      f[i] = s;
    }
    return f;
  };
  auto ordered = [&](const linalg::Vector& x) {
    for (std::size_t i = 1; i < n; ++i)
      if (!(x[i] > x[i - 1])) return false;
    return true;
  };

  linalg::Vector f = residual(u);
  double fn = linalg::norm2(f);
  int it = 0;
  for (; it < 200 && fn > 1e-13; ++it) {
    linalg::Matrix J(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double diag = -1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d = std::abs(u[i] - u[j]);
        const double k = 2.0 / (d * d * d);
        diag -= k;
        J(i, j) = k;
      }
      J(i, i) = diag;
    }
    linalg::Vector rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -f[i];
    const auto step = linalg::lstsq(J, rhs);
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, lambda *= 0.5) {
      linalg::Vector trial(n);
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + lambda * step[i];
      if (!ordered(trial)) continue;
      auto ft = residual(trial);
      const double tn = linalg::norm2(ft);
      if (tn < fn) {
        u = std::move(trial);
        f = std::move(ft);
        fn = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  // Enforce exact antisymmetry, which Newton only reaches to rounding.
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double s = 0.5 * (u[n - 1 - i] - u[i]);
    u[i] = -s;
    u[n - 1 - i] = s;
  }
  if (n % 2 == 1) u[n / 2] = 0.0;

  const double ell = harmonic_length_scale(omega, ion);
  const double force_scale = ion.mass * omega * omega * ell;
  f = residual(u);
  double worst = 0.0;
  for (double v : f) worst = std::max(worst, std::abs(v) * force_scale);
  if (report) *report = {it, worst};
  if (worst > 1e-20)
    throw NumericalError("harmonic_equilibrium did not converge (max residual force " +
                         std::to_string(worst) + " N)");

  TargetConfiguration t;
  t.positions.resize(n);
  for (std::size_t i = 0; i < n; ++i) t.positions[i] = {u[i] * ell, 0.0, h};
  t.coulomb_field = coulomb_fields(t.positions, ion.charge);
  return t;
}

/// Correction factor in the large-N chain-length estimate.
using LengthCorrection = std::function<double(int)>;

inline double default_length_correction(int N) {
  return std::log(static_cast<double>(N)) + constants::euler_gamma - 3.5;
}

/// Half-length estimate L^3 = 3 N Q^2 k_c / (m w^2) * corr(N).
inline double chain_half_length(int N, double omega, const IonSpecies& ion,
                                const LengthCorrection& corr = default_length_correction) {
  if (N < 2) throw std::invalid_argument("chain_half_length requires N >= 2");
  const double c = corr(N);
  if (!(c > 0))
    throw std::domain_error("chain_half_length: correction factor is not positive for N = " +
                            std::to_string(N));
  return std::cbrt(3.0 * N * ion.charge * ion.charge * constants::coulomb_k /
                   (ion.mass * omega * omega) * c);
}

}  // namespace itrap
