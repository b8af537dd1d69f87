#pragma once

// Molecular dynamics of a trapped-ion chain under the full time-dependent
// trap field, pairwise Coulomb repulsion and linear laser-cooling friction.
//
// Integration is velocity Verlet with the friction split off and solved
// exactly: each half kick first damps the velocity by exp(-Gamma dt / 2m).

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "itrap/constants.hpp"
#include "itrap/errors.hpp"
#include "itrap/gl_fields.hpp"
#include "itrap/linalg.hpp"
#include "itrap/vec3.hpp"

namespace itrap {

/// Control-voltage program: constant V1, or a tanh transition V1 -> V2
/// starting at t_start and lasting t_g. n_h near 1 is close to linear, large
/// n_h approaches a step.
struct VoltageSchedule {
  enum class Mode { Static, TanhRamp };

  Mode mode = Mode::Static;
  std::vector<double> V1;
  std::vector<double> V2;
  double t_start = 0.0;
  double t_g = 0.0;
  double n_h = 4.0;

  static VoltageSchedule constant(std::vector<double> v) {
    VoltageSchedule s;
    s.V1 = std::move(v);
    return s;
  }
  static VoltageSchedule ramp(std::vector<double> v1, std::vector<double> v2, double t_start,
                              double t_g, double n_h) {
    VoltageSchedule s;
    s.mode = Mode::TanhRamp;
    s.V1 = std::move(v1);
    s.V2 = std::move(v2);
    s.t_start = t_start;
    s.t_g = t_g;
    s.n_h = n_h;
    return s;
  }

  void validate() const {
    if (mode == Mode::TanhRamp) {
      if (V1.size() != V2.size()) throw ConfigError("schedule: V1 and V2 differ in length");
      if (!(t_g > 0)) throw ConfigError("schedule: t_g must be positive");
      if (!(n_h >= 1)) throw ConfigError("schedule: n_h must be >= 1");
    }
  }

};

inline std::vector<double> ramp_voltage(double t, const VoltageSchedule& s) {
  if (s.mode == VoltageSchedule::Mode::Static || t <= s.t_start) return s.V1;
  const double tau = t - s.t_start;
  if (tau >= s.t_g) return s.V2;
  const double frac = 0.5 * (std::tanh(s.n_h * (2.0 * tau / s.t_g - 1.0)) / std::tanh(s.n_h) + 1.0);
  std::vector<double> v(s.V1.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = s.V1[k] + (s.V2[k] - s.V1[k]) * frac;
  return v;
}

struct SimConfig {
  double dt = 0.5e-9;
  double duration = 1e-3;
  double gamma = 2e-19;  // kg/s
  IonSpecies species;
  DriveConfig drive;
  VoltageSchedule schedule;
  double rf_phase0 = 0.0;
  std::int64_t snapshot_stride = 0;  // steps between snapshots; 0 keeps only the final state

  void validate() const {
    species.validate();
    drive.validate();
    schedule.validate();
    const double t_rf = 2.0 * constants::pi / drive.omega;
    if (!(dt > 0) || !(dt < t_rf / 10.0)) throw ConfigError("sim: dt must satisfy 0 < dt < T_rf/10");
    if (!(duration >= 0)) throw ConfigError("sim: duration must be >= 0");
    if (!(gamma >= 0)) throw ConfigError("sim: Gamma must be >= 0");
    if (snapshot_stride < 0) throw ConfigError("sim: snapshot stride must be >= 0");
  }

  std::int64_t num_steps() const {
    if (duration <= 0) return 0;
    return static_cast<std::int64_t>(std::ceil(duration / dt - 1e-9));
  }
};

struct SimState {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  double t = 0.0;

  std::size_t size() const { return positions.size(); }
  friend bool operator==(const SimState&, const SimState&) = default;
};

inline constexpr double kCollisionDistance = 1e-9;

/// Pairwise Coulomb forces Q^2 k_c (r_i - r_j)/|r_i - r_j|^3, accumulated in
/// a fixed order.
inline void coulomb_forces(std::span<const Vec3> pos, double charge, std::span<Vec3> out) {
  const std::size_t n = pos.size();
  for (auto& f : out) f = {};
  const double kq2 = constants::coulomb_k * charge * charge;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 pi = pos[i];
    Vec3 fi = out[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = pi.x - pos[j].x, dy = pi.y - pos[j].y, dz = pi.z - pos[j].z;
      const double r2 = dx * dx + dy * dy + dz * dz;
      if (r2 < kCollisionDistance * kCollisionDistance)
        throw NumericalError("ions " + std::to_string(i) + " and " + std::to_string(j) +
                             " closer than 1 nm");
      const double s = kq2 / (r2 * std::sqrt(r2));
      fi.x += s * dx;
      fi.y += s * dy;
      fi.z += s * dz;
      out[j].x -= s * dx;
      out[j].y -= s * dy;
      out[j].z -= s * dz;
    }
    out[i] = fi;
  }
}

inline std::vector<Vec3> coulomb_forces(std::span<const Vec3> pos, double charge) {
  std::vector<Vec3> f(pos.size());
  coulomb_forces(pos, charge, f);
  return f;
}

struct RunResult {
  SimState final;
  std::vector<SimState> snapshots;
  std::int64_t steps = 0;
};

/// Integrator bound to one trap. Holds the field kernel and scratch buffers;
/// one instance per concurrent run.
class Simulator {
 public:
  Simulator(const TrapGeometry& geom, SimConfig config)
      : kernel_(geom), cfg_(std::move(config)) {
    cfg_.validate();
    if (static_cast<int>(cfg_.schedule.V1.size()) != kernel_.num_voltages())
      throw ConfigError("sim: schedule has " + std::to_string(cfg_.schedule.V1.size()) +
                        " voltages, trap has " + std::to_string(kernel_.num_voltages()));
    w_rf_.assign(kernel_.channel(FieldKernel::kRF).begin(), kernel_.channel(FieldKernel::kRF).end());
    const double depth = trap_depth(geom, cfg_.drive, cfg_.species);
    blowup_energy_ = depth > 0 ? 1e6 * depth : std::numeric_limits<double>::infinity();
  }

  const SimConfig& config() const { return cfg_; }
  const FieldKernel& kernel() const { return kernel_; }

  /// Total force on every ion at time t.
  void forces(std::span<const Vec3> pos, double t, std::span<Vec3> out) {
    coulomb_forces(pos, cfg_.species.charge, out);
    update_static(t);
    const double rf = cfg_.drive.V_rf * std::cos(cfg_.drive.omega * t + cfg_.rf_phase0);
    const double q = cfg_.species.charge;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      Vec3 es, erf;
      kernel_.field_pair(pos[i], w_static_, w_rf_, es, erf);
      const Vec3 e = es + rf * erf;
      out[i] += q * e;
      if (!is_finite(out[i])) throw NumericalError("non-finite force on ion " + std::to_string(i));
    }
  }

  /// One velocity-Verlet step with exact friction decay at each half kick.
  void step(SimState& s) {
    const std::size_t n = s.size();
    if (force_t_ != s.t || force_.size() != n) {
      force_.resize(n);
      forces(s.positions, s.t, force_);
      force_t_ = s.t;
    }
    const double m = cfg_.species.mass;
    const double decay = std::exp(-cfg_.gamma * cfg_.dt / (2.0 * m));
    const double kick = cfg_.dt / (2.0 * m);
    for (std::size_t i = 0; i < n; ++i) {
      s.velocities[i] = decay * s.velocities[i] + kick * force_[i];
      s.positions[i] += cfg_.dt * s.velocities[i];
    }
    s.t += cfg_.dt;
    forces(s.positions, s.t, force_);
    force_t_ = s.t;
    for (std::size_t i = 0; i < n; ++i) s.velocities[i] = decay * s.velocities[i] + kick * force_[i];
  }

  /// Called after every step with the updated state and the step count.
  using Observer = std::function<void(const SimState&, std::int64_t)>;

  RunResult run(SimState state, const Observer& observe = {}) {
    if (state.velocities.size() != state.positions.size())
      throw std::invalid_argument("sim: positions and velocities differ in length");
    RunResult out;
    const std::int64_t steps = cfg_.num_steps();
    const double m = cfg_.species.mass;
    if (cfg_.snapshot_stride > 0) out.snapshots.push_back(state);
    for (std::int64_t k = 0; k < steps; ++k) {
      step(state);
      if ((k & 1023) == 0 || k + 1 == steps) {
        double ke = 0.0;
        for (const auto& v : state.velocities) ke += 0.5 * m * norm2(v);
        if (!(ke <= blowup_energy_))
          throw NumericalError("kinetic energy blow-up at t = " + std::to_string(state.t) + " s");
      }
      if (observe) observe(state, k + 1);
      if (cfg_.snapshot_stride > 0 && (k + 1) % cfg_.snapshot_stride == 0)
        out.snapshots.push_back(state);
    }
    out.steps = steps;
    out.final = std::move(state);
    return out;
  }

 private:
  // Static weights are cached before and after a ramp and rebuilt every
  // evaluation during it.
  void update_static(double t) {
    const auto& s = cfg_.schedule;
    int phase = 1;
    if (s.mode == VoltageSchedule::Mode::Static || t <= s.t_start) phase = 0;
    else if (t >= s.t_start + s.t_g) phase = 2;
    if (phase != 1 && phase == cached_phase_) return;
    w_static_ = kernel_.mix(0.0, cfg_.drive.V_dc, ramp_voltage(t, s));
    cached_phase_ = phase;
  }

  FieldKernel kernel_;
  SimConfig cfg_;
  std::vector<double> w_rf_, w_static_;
  int cached_phase_ = -1;
  std::vector<Vec3> force_;
  double force_t_ = std::numeric_limits<double>::quiet_NaN();
  double blowup_energy_ = 0.0;
};

/// Ions at rest at the given positions.
inline SimState state_at_rest(std::span<const Vec3> positions) {
  SimState s;
  s.positions.assign(positions.begin(), positions.end());
  s.velocities.assign(positions.size(), Vec3{});
  return s;
}

inline RunResult run(const TrapGeometry& geom, const SimConfig& config, SimState initial,
                     const Simulator::Observer& observe = {}) {
  Simulator sim(geom, config);
  return sim.run(std::move(initial), observe);
}

}  // namespace itrap
