#pragma once

// Two-axis parameter sweeps over the solve (and optionally MD) pipeline.
// Grid points are independent; a pool of worker threads pulls them from a
// shared counter and writes each record into its own slot, so the result
// does not depend on the thread count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "itrap/config.hpp"
#include "itrap/errors.hpp"
#include "itrap/pipeline.hpp"

namespace itrap {

enum class Param { V_max, c, n, d, N, V_RF, Omega, h };

inline const char* to_string(Param p) {
  switch (p) {
    case Param::V_max: return "V_max";
    case Param::c: return "c";
    case Param::n: return "n";
    case Param::d: return "d";
    case Param::N: return "N";
    case Param::V_RF: return "V_RF";
    case Param::Omega: return "Omega";
    case Param::h: return "h";
  }
  return "?";
}

inline Param param_from_string(const std::string& s) {
  for (auto p : {Param::V_max, Param::c, Param::n, Param::d, Param::N, Param::V_RF, Param::Omega, Param::h})
    if (s == to_string(p)) return p;
  throw ConfigError("unknown sweep parameter '" + s + "'");
}

inline bool is_integer_param(Param p) { return p == Param::n || p == Param::N; }

/// Writes one parameter into a config. Lengths are in metres, Omega in rad/s.
inline void apply_param(Config& c, Param p, double value) {
  auto as_int = [&](const char* what) {
    if (value != std::round(value)) throw ConfigError(std::string(what) + " must be an integer");
    return static_cast<int>(value);
  };
  switch (p) {
    case Param::V_max: c.solver.V_max = value; break;
    case Param::c: c.geometry.c = value; break;
    case Param::n: c.geometry.n = as_int("n"); break;
    case Param::d: c.chain.d = value; break;
    case Param::N: c.chain.N = as_int("N"); break;
    case Param::V_RF: c.drive.V_rf = value; break;
    case Param::Omega: c.drive.omega = value; break;
    case Param::h: c.chain.h = value; break;
  }
}

struct Axis {
  Param param = Param::V_max;
  std::vector<double> values;
  friend bool operator==(const Axis&, const Axis&) = default;
};

/// `count` evenly spaced values from `lo` to `hi` inclusive.
inline std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw ConfigError("axis needs at least one value");
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return v;
}

struct SweepSpec {
  Axis axis1;
  Axis axis2;
  Config base;
  bool evaluate_md = false;
  bool evaluate_apd = false;
  int exclude_per_side = 0;  // edge ions left out of the objective
  int xi_exclude = 0;        // edge ions dropped when computing xi
  double settle = 200e-6;    // MD duration per point

  void validate() const {
    if (axis1.values.empty() || axis2.values.empty()) throw ConfigError("sweep: axes must be non-empty");
    if (!(settle > 0)) throw ConfigError("sweep: settle must be positive");
    if (exclude_per_side < 0 || xi_exclude < 0) throw ConfigError("sweep: exclusion counts must be >= 0");
  }
};

struct SweepRecord {
  std::size_t i1 = 0, i2 = 0;
  double axis1 = 0.0, axis2 = 0.0;
  double chi2 = std::numeric_limits<double>::quiet_NaN();
  double log10_chi2 = std::numeric_limits<double>::quiet_NaN();
  double condition_number = std::numeric_limits<double>::quiet_NaN();
  SolverTag solver = SolverTag::BVLS;
  bool converged = false;
  std::vector<double> voltages;
  std::optional<double> xi;
  std::optional<double> apd;  // J
  double runtime = 0.0;       // s
  bool failed = false;
  std::string error;

  /// Equality ignoring the wall-clock runtime.
  bool same_result(const SweepRecord& o) const {
    auto eq = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
    return i1 == o.i1 && i2 == o.i2 && eq(axis1, o.axis1) && eq(axis2, o.axis2) && eq(chi2, o.chi2) &&
           eq(log10_chi2, o.log10_chi2) && eq(condition_number, o.condition_number) &&
           solver == o.solver && converged == o.converged && voltages == o.voltages && xi == o.xi &&
           apd == o.apd && failed == o.failed && error == o.error;
  }
};

struct SweepGrid {
  Axis axis1;
  Axis axis2;
  std::vector<SweepRecord> records;  // row-major: index i1 * size2 + i2

  std::size_t size1() const { return axis1.values.size(); }
  std::size_t size2() const { return axis2.values.size(); }
  const SweepRecord& at(std::size_t i1, std::size_t i2) const { return records[i1 * size2() + i2]; }
};

/// Config for one grid point.
inline Config point_config(const SweepSpec& spec, std::size_t i1, std::size_t i2) {
  Config c = spec.base;
  apply_param(c, spec.axis1.param, spec.axis1.values[i1]);
  apply_param(c, spec.axis2.param, spec.axis2.values[i2]);
  c.solver.exclude_per_side = spec.exclude_per_side;
  return c;
}

/// Full pipeline for one grid point. Failures are captured in the record.
inline SweepRecord evaluate_point(const SweepSpec& spec, std::size_t i1, std::size_t i2) {
  SweepRecord rec;
  rec.i1 = i1;
  rec.i2 = i2;
  rec.axis1 = spec.axis1.values[i1];
  rec.axis2 = spec.axis2.values[i2];
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Config cfg = point_config(spec, i1, i2);
    const auto s = solve_uniform(cfg);
    rec.chi2 = s.solution.chi2;
    rec.log10_chi2 = std::log10(s.solution.chi2);
    rec.condition_number = s.condition;
    rec.solver = s.solution.solver;
    rec.converged = s.solution.converged;
    rec.voltages = s.solution.v;
    if (spec.evaluate_apd) rec.apd = voltage_apd(cfg, s.solution.v).depth;
    if (spec.evaluate_md) {
      const auto r = settle(cfg, s.solution.v, s.target.positions, spec.settle);
      rec.xi = inhomogeneity(r.final.positions, spec.xi_exclude);
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  rec.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

/// Evaluates every grid point with `threads` workers (0 = hardware
/// concurrency).
inline SweepGrid run_sweep(const SweepSpec& spec, unsigned threads = 1) {
  spec.validate();
  SweepGrid grid{spec.axis1, spec.axis2, {}};
  const std::size_t n2 = grid.size2();
  const std::size_t total = grid.size1() * n2;
  grid.records.resize(total);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) grid.records[k] = evaluate_point(spec, k / n2, k % n2);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return grid;
}

/// Fraction of successful grid points whose xi is below `threshold`.
inline double area_below(const SweepGrid& g, double threshold) {
  std::size_t hit = 0;
  for (const auto& r : g.records)
    if (!r.failed && r.xi && *r.xi < threshold) ++hit;
  return g.records.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(g.records.size());
}

}  // namespace itrap
