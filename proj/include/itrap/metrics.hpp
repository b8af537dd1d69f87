#pragma once

// Chain quality measures: spacing inhomogeneity and the axial confinement
// depth of the total (pseudo + static) potential.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "itrap/constants.hpp"
#include "itrap/errors.hpp"
#include "itrap/gl_fields.hpp"
#include "itrap/vec3.hpp"

namespace itrap {

struct ChainMetrics {
  double xi = 0.0;
  std::vector<double> spacings;
  double mean_spacing = 0.0;
  int excluded_edges = 0;
  double apd = 0.0;  // J
  double apd_meV() const { return constants::to_meV(apd); }
};

/// Spacing statistics after sorting by x and dropping `exclude_per_side`
/// ions at each end. xi is the population standard deviation of the spacings
/// over their mean.
inline ChainMetrics chain_metrics(std::span<const Vec3> positions, int exclude_per_side = 0) {
  if (exclude_per_side < 0) throw std::invalid_argument("exclude_per_side must be >= 0");
  std::vector<double> x;
  x.reserve(positions.size());
  for (const auto& p : positions) x.push_back(p.x);
  std::sort(x.begin(), x.end());
  const auto drop = static_cast<std::size_t>(exclude_per_side);
  if (x.size() < 2 * drop + 3)
    throw std::invalid_argument("inhomogeneity needs at least 3 ions after exclusion");

  ChainMetrics m;
  m.excluded_edges = exclude_per_side;
  for (std::size_t i = drop + 1; i < x.size() - drop; ++i) m.spacings.push_back(x[i] - x[i - 1]);
  double sum = 0.0;
  for (double s : m.spacings) sum += s;
  m.mean_spacing = sum / static_cast<double>(m.spacings.size());
  double var = 0.0;
  for (double s : m.spacings) var += (s - m.mean_spacing) * (s - m.mean_spacing);
  var /= static_cast<double>(m.spacings.size());
  m.xi = std::sqrt(var) / m.mean_spacing;
  return m;
}

inline double inhomogeneity(std::span<const Vec3> positions, int exclude_per_side = 0) {
  return chain_metrics(positions, exclude_per_side).xi;
}

struct ProfileSample {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double energy = 0.0;  // J
  bool lost = false;    // no transverse minimum found near the previous one
};

struct AxialProfile {
  std::vector<ProfileSample> samples;
  bool tracked = false;
  bool any_lost() const {
    return std::any_of(samples.begin(), samples.end(), [](const auto& s) { return s.lost; });
  }
};

struct AxialRange {
  double x_min = 0.0;
  double x_max = 0.0;
  int samples = 401;
};

namespace detail {

/// Pseudopotential plus static potential energy of one ion, and its gradient.
struct TotalPotential {
  const FieldKernel& kernel;
  double kappa;  // pseudo prefactor
  double charge;
  std::vector<double> w_rf;
  std::vector<double> w_static;

  double energy(const Vec3& r) const {
    return kappa * norm2(kernel.field(r, w_rf)) + charge * kernel.potential(r, w_static);
  }
  Vec3 gradient(const Vec3& r) const {
    const Vec3 e = kernel.field(r, w_rf);
    const Sym3 h = kernel.hessian(r, w_rf);
    return -2.0 * kappa * (h * e) - charge * kernel.field(r, w_static);
  }
};

/// Newton search for the minimum in the (y, z) plane at fixed x. The
/// transverse Hessian comes from central differences of the analytic gradient.
inline bool transverse_minimum(const TotalPotential& u, Vec3& r, double h_scale) {
  const double step = 1e-4 * h_scale;
  for (int it = 0; it < 50; ++it) {
    const Vec3 g = u.gradient(r);
    auto grad_at = [&](double dy, double dz) { return u.gradient({r.x, r.y + dy, r.z + dz}); };
    const Vec3 gyp = grad_at(step, 0), gym = grad_at(-step, 0);
    const Vec3 gzp = grad_at(0, step), gzm = grad_at(0, -step);
    const double hyy = (gyp.y - gym.y) / (2 * step);
    const double hzz = (gzp.z - gzm.z) / (2 * step);
    const double hyz = 0.5 * ((gyp.z - gym.z) + (gzp.y - gzm.y)) / (2 * step);
    const double det = hyy * hzz - hyz * hyz;
    if (!(hyy > 0) || !(det > 0)) return false;
    double dy = -(hzz * g.y - hyz * g.z) / det;
    double dz = -(hyy * g.z - hyz * g.y) / det;
    const double len = std::hypot(dy, dz);
    const double cap = 0.1 * h_scale;
    if (len > cap) {
      dy *= cap / len;
      dz *= cap / len;
    }
    r.y += dy;
    r.z += dz;
    if (!(r.z > 0.05 * h_scale) || std::abs(r.y) > 5 * h_scale) return false;
    if (std::hypot(dy, dz) < 1e-12 * h_scale) return true;
  }
  return false;
}

}  // namespace detail

/// Total potential energy along the trap axis. With `track_transverse_min`
/// each sample sits at the (y, z) minimum, continued from the previous
/// sample; otherwise samples sit at (y = 0, z = h).
inline AxialProfile axial_profile(const FieldKernel& kernel, const DriveConfig& drive,
                                  const IonSpecies& ion, std::span<const double> voltages,
                                  const AxialRange& range, double h, bool track_transverse_min = true) {
  detail::require(static_cast<int>(voltages.size()) == kernel.num_voltages(),
                  "voltage vector length does not match the number of control channels");
  detail::require(range.samples >= 2 && range.x_max > range.x_min, "axial range is empty");
  detail::require(h > 0, "profile height must be positive");
  const auto rf = kernel.channel(FieldKernel::kRF);
  const detail::TotalPotential u{kernel, pseudo_prefactor(drive, ion), ion.charge,
                                 std::vector<double>(rf.begin(), rf.end()),
                                 kernel.mix(0.0, drive.V_dc, voltages)};

  AxialProfile p;
  p.tracked = track_transverse_min;
  p.samples.resize(static_cast<std::size_t>(range.samples));
  const double dx = (range.x_max - range.x_min) / (range.samples - 1);
  // Tracking starts at the centre sample and walks outwards in both
  // directions, so symmetric voltages give a mirror-symmetric profile.
  const int mid = (range.samples - 1) / 2;
  auto eval = [&](int i, Vec3& seed) {
    auto& s = p.samples[static_cast<std::size_t>(i)];
    s.x = range.x_min + dx * i;
    Vec3 r{s.x, 0.0, h};
    if (track_transverse_min) {
      Vec3 trial{s.x, seed.y, seed.z};
      if (detail::transverse_minimum(u, trial, h)) {
        r = trial;
        seed = trial;
      } else {
        s.lost = true;
      }
    }
    s.y = r.y;
    s.z = r.z;
    s.energy = u.energy(r);
  };
  Vec3 seed{0.0, 0.0, h};
  for (int i = mid; i >= 0; --i) eval(i, seed);
  seed = {p.samples[static_cast<std::size_t>(mid)].x, p.samples[static_cast<std::size_t>(mid)].y,
          p.samples[static_cast<std::size_t>(mid)].z};
  for (int i = mid + 1; i < range.samples; ++i) eval(i, seed);
  return p;
}

inline AxialProfile axial_profile(const TrapGeometry& geom, const DriveConfig& drive,
                                  const IonSpecies& ion, std::span<const double> voltages,
                                  const AxialRange& range, bool track_transverse_min = true) {
  geom.validate();
  return axial_profile(FieldKernel(geom), drive, ion, voltages, range, ion_height(geom.a, geom.b),
                       track_transverse_min);
}

/// Axial range covering the control bank with a margin of `margin` times its
/// half length. The default reaches far enough that the profile has
/// flattened towards its value at infinity.
inline AxialRange default_axial_range(const TrapGeometry& geom, double margin = 3.0, int samples = 2001) {
  const double half = geom.bank_half_length() * (1.0 + margin);
  return {-half, half, samples};
}

struct DepthResult {
  double depth = 0.0;  // J
  bool unconfined = false;
  double x_min = 0.0;
};

/// Depth of the global interior minimum below the lower of the two barrier
/// maxima on either side of it. Zero and flagged when either side has no
/// barrier above the minimum.
inline DepthResult axial_potential_depth(std::span<const double> energy, std::span<const double> x = {}) {
  DepthResult r;
  const std::size_t n = energy.size();
  if (n < 3) {
    r.unconfined = true;
    return r;
  }
  const auto it = std::min_element(energy.begin() + 1, energy.end() - 1);
  const auto k = static_cast<std::size_t>(it - energy.begin());
  if (!x.empty()) r.x_min = x[k];
  const double left = *std::max_element(energy.begin(), energy.begin() + static_cast<std::ptrdiff_t>(k));
  const double right = *std::max_element(energy.begin() + static_cast<std::ptrdiff_t>(k) + 1, energy.end());
  const double barrier = std::min(left, right);
  if (!(barrier > *it)) {
    r.unconfined = true;
    return r;
  }
  r.depth = barrier - *it;
  return r;
}

inline DepthResult axial_potential_depth(const AxialProfile& p) {
  std::vector<double> e, x;
  e.reserve(p.samples.size());
  x.reserve(p.samples.size());
  for (const auto& s : p.samples) {
    e.push_back(s.energy);
    x.push_back(s.x);
  }
  return axial_potential_depth(e, x);
}

}  // namespace itrap
