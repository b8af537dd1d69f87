#pragma once

// End-to-end steps shared by the CLI, the sweep engine and the acceptance
// runner: target -> design system -> voltages -> MD -> metrics.

#include <cmath>
#include <string>
#include <vector>

#include "itrap/chain_targets.hpp"
#include "itrap/config.hpp"
#include "itrap/md_sim.hpp"
#include "itrap/metrics.hpp"
#include "itrap/voltage_solver.hpp"

namespace itrap {

struct SolveResult {
  TargetConfiguration target;
  DesignSystem system;
  VoltageSolution solution;
  double condition = 0.0;
};

/// Best bounded fit for an arbitrary target, with the config's exclusion
/// and voltage limit.
inline SolveResult solve_target(const Config& cfg, const FieldKernel& kernel, TargetConfiguration target) {
  SolveResult r;
  if (cfg.solver.exclude_per_side > 0) exclude_edges(target, cfg.solver.exclude_per_side);
  r.system = assemble(kernel, cfg.drive, cfg.ion(), target, cfg.solver.V_max);
  r.solution = solve_best(r.system);
  r.condition = r.system.cols() > 0 ? condition_number(r.system.A) : 0.0;
  r.target = std::move(target);
  return r;
}

/// Best fit for the uniform chain described by the config.
inline SolveResult solve_uniform(const Config& cfg) {
  cfg.validate();
  const FieldKernel kernel(cfg.geometry);
  return solve_target(cfg, kernel, uniform_chain(cfg.chain, cfg.ion()));
}

/// Static-voltage MD run from ions at rest at `start`.
inline RunResult settle(const Config& cfg, const std::vector<double>& voltages,
                        std::span<const Vec3> start, double duration,
                        const Simulator::Observer& observe = {}) {
  auto sc = cfg.sim_config(voltages);
  sc.duration = duration;
  return run(cfg.geometry, sc, state_at_rest(start), observe);
}

inline bool ordered_in_x(std::span<const Vec3> pos) {
  for (std::size_t i = 1; i < pos.size(); ++i)
    if (!(pos[i].x > pos[i - 1].x)) return false;
  return true;
}

struct RampResult {
  TargetConfiguration harmonic;
  std::vector<double> V1;  // harmonic well
  std::vector<double> V2;  // homogeneous target
  double chi2_harmonic = 0.0;
  RunResult run;
  bool ordering_preserved = true;
  std::int64_t first_crossing_step = -1;
};

/// Harmonic-to-homogeneous transfer: ions start at rest in the equilibrium of
/// a harmonic well reproduced by the electrodes, hold, ramp the voltages to
/// `v_homogeneous` with a tanh profile, and hold again. Ordering along x is
/// checked after every step.
inline RampResult run_ramp(const Config& cfg, const std::vector<double>& v_homogeneous) {
  cfg.validate();
  const FieldKernel kernel(cfg.geometry);
  const auto ion = cfg.ion();
  RampResult r;
  auto fit = solve_target(cfg, kernel,
                          harmonic_equilibrium(cfg.chain.N, cfg.sim.harmonic_omega, ion, cfg.chain.h));
  r.harmonic = std::move(fit.target);
  r.V1 = fit.solution.v;
  r.chi2_harmonic = fit.solution.chi2;
  r.V2 = v_homogeneous;

  auto sc = cfg.sim_config({});
  sc.schedule = VoltageSchedule::ramp(r.V1, r.V2, cfg.sim.hold, cfg.sim.t_g, cfg.sim.n_h);
  sc.duration = 2.0 * cfg.sim.hold + cfg.sim.t_g;
  r.run = run(cfg.geometry, sc, state_at_rest(r.harmonic.positions),
              [&](const SimState& s, std::int64_t step) {
                if (r.ordering_preserved && !ordered_in_x(s.positions)) {
                  r.ordering_preserved = false;
                  r.first_crossing_step = step;
                }
              });
  return r;
}

struct ChainReport {
  ChainMetrics all;        // no ions dropped
  ChainMetrics excluded;   // edge ions dropped
  int exclude_per_side = 1;
};

inline ChainReport chain_report(std::span<const Vec3> pos, int exclude_per_side = 1) {
  return {chain_metrics(pos, 0), chain_metrics(pos, exclude_per_side), exclude_per_side};
}

/// Axial potential depth of a voltage set over the default axial range.
inline DepthResult voltage_apd(const Config& cfg, std::span<const double> voltages) {
  const FieldKernel kernel(cfg.geometry);
  const auto p = axial_profile(kernel, cfg.drive, cfg.ion(), voltages, default_axial_range(cfg.geometry),
                               cfg.chain.h, true);
  return axial_potential_depth(p);
}

}  // namespace itrap
