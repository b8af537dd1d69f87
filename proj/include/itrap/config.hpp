#pragma once

// Single-file JSON run configuration.
//
//   {
//     "geometry": {"a_m", "b_m", "n", "c_m", "outer_factor", "rail_length_m",
//                  "control_extent_m", "fold_axial"},
//     "drive":    {"V_RF", "Omega_rad_s", "V_DC"},
//     "species":  {"mass_u", "charge_e"},
//     "chain":    {"N", "d_m", "h_m"},
//     "solver":   {"V_max", "exclude_per_side"},
//     "sim":      {"dt_s", "duration_s", "Gamma_kg_s", "n_h", "t_g_s", "hold_s",
//                  "harmonic_omega_rad_s", "rf_phase0", "settle_s", "snapshot_stride"}
//   }
//
// Every key is optional and falls back to the defaults below. Unknown keys
// and wrongly typed values are rejected.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>

#include "json.hpp"

#include "itrap/chain_targets.hpp"
#include "itrap/constants.hpp"
#include "itrap/errors.hpp"
#include "itrap/gl_fields.hpp"
#include "itrap/md_sim.hpp"

namespace itrap {

using json = nlohmann::json;

struct SpeciesSettings {
  double mass_u = 40.0;
  double charge_e = 1.0;

  IonSpecies species() const {
    return {charge_e * constants::elementary_charge, mass_u * constants::atomic_mass};
  }
  friend bool operator==(const SpeciesSettings&, const SpeciesSettings&) = default;
};

struct SolverSettings {
  double V_max = 10.0;
  int exclude_per_side = 0;
  friend bool operator==(const SolverSettings&, const SolverSettings&) = default;
};

struct SimSettings {
  double dt = 0.5e-9;
  double duration = 1e-3;
  double gamma = 2e-19;
  double n_h = 4.0;
  double t_g = 50e-6;
  double hold = 50e-6;                                // before and after a ramp
  double harmonic_omega = 2.0 * constants::pi * 212e3;  // initial well of a ramp
  double rf_phase0 = 0.0;
  double settle = 200e-6;  // MD duration inside sweeps
  std::int64_t snapshot_stride = 0;
  friend bool operator==(const SimSettings&, const SimSettings&) = default;
};

struct Config {
  TrapGeometry geometry;
  DriveConfig drive;
  SpeciesSettings species;
  ChainSpec chain;
  SolverSettings solver;
  SimSettings sim;

  IonSpecies ion() const { return species.species(); }

  void validate() const {
    geometry.validate();
    drive.validate();
    ion().validate();
    chain.validate();
    if (!(solver.V_max > 0)) throw ConfigError("solver: V_max must be positive");
    if (solver.exclude_per_side < 0 || 2 * solver.exclude_per_side >= chain.N)
      throw ConfigError("solver: exclude_per_side must leave at least one ion");
    if (!(sim.settle > 0)) throw ConfigError("sim: settle_s must be positive");
    if (!(sim.hold >= 0)) throw ConfigError("sim: hold_s must be >= 0");
    if (!(sim.harmonic_omega > 0)) throw ConfigError("sim: harmonic_omega_rad_s must be positive");
    sim_config({}).validate();
  }

  /// MD settings for a static run with the given voltages.
  SimConfig sim_config(std::vector<double> voltages) const {
    SimConfig c;
    c.dt = sim.dt;
    c.duration = sim.duration;
    c.gamma = sim.gamma;
    c.species = ion();
    c.drive = drive;
    c.rf_phase0 = sim.rf_phase0;
    c.snapshot_stride = sim.snapshot_stride;
    c.schedule = VoltageSchedule::constant(std::move(voltages));
    return c;
  }

  friend bool operator==(const Config&, const Config&) = default;
};

namespace detail {

class Reader {
 public:
  Reader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j_.is_object()) throw ConfigError(section_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) fail(key, "a boolean");
      out = it->template get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) fail(key, "an integer");
      out = it->template get<T>();
    } else {
      if (!it->is_number()) fail(key, "a number");
      out = it->template get<T>();
    }
  }

  void mark(const char* key) { seen_.insert(key); }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(section_ + ": unknown key '" + k + "'");
  }

 private:
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ConfigError(section_ + "." + key + " must be " + what);
  }
  const json& j_;
  std::string section_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline json to_json(const Config& c) {
  const auto& g = c.geometry;
  return json{
      {"geometry",
       {{"a_m", g.a},
        {"b_m", g.b},
        {"n", g.n},
        {"c_m", g.c},
        {"outer_factor", g.outer_factor},
        {"rail_length_m", g.rail_length},
        {"control_extent_m", g.control_extent},
        {"fold_axial", g.fold_axial}}},
      {"drive", {{"V_RF", c.drive.V_rf}, {"Omega_rad_s", c.drive.omega}, {"V_DC", c.drive.V_dc}}},
      {"species", {{"mass_u", c.species.mass_u}, {"charge_e", c.species.charge_e}}},
      {"chain", {{"N", c.chain.N}, {"d_m", c.chain.d}, {"h_m", c.chain.h}}},
      {"solver", {{"V_max", c.solver.V_max}, {"exclude_per_side", c.solver.exclude_per_side}}},
      {"sim",
       {{"dt_s", c.sim.dt},
        {"duration_s", c.sim.duration},
        {"Gamma_kg_s", c.sim.gamma},
        {"n_h", c.sim.n_h},
        {"t_g_s", c.sim.t_g},
        {"hold_s", c.sim.hold},
        {"harmonic_omega_rad_s", c.sim.harmonic_omega},
        {"rf_phase0", c.sim.rf_phase0},
        {"settle_s", c.sim.settle},
        {"snapshot_stride", c.sim.snapshot_stride}}},
  };
}

/// Parses and validates a configuration document.
inline Config config_from_json(const json& j) {
  Config c;
  detail::Reader top(j, "config");
  auto section = [&](const char* name, auto&& fill) {
    json empty = json::object();
    const auto it = j.find(name);
    const json& sj = (it == j.end() || it->is_null()) ? empty : *it;
    top.mark(name);
    detail::Reader r(sj, name);
    fill(r);
    r.finish();
  };
  section("geometry", [&](detail::Reader& r) {
    r.get("a_m", c.geometry.a);
    r.get("b_m", c.geometry.b);
    r.get("n", c.geometry.n);
    r.get("c_m", c.geometry.c);
    r.get("outer_factor", c.geometry.outer_factor);
    r.get("rail_length_m", c.geometry.rail_length);
    r.get("control_extent_m", c.geometry.control_extent);
    r.get("fold_axial", c.geometry.fold_axial);
  });
  section("drive", [&](detail::Reader& r) {
    r.get("V_RF", c.drive.V_rf);
    r.get("Omega_rad_s", c.drive.omega);
    r.get("V_DC", c.drive.V_dc);
  });
  section("species", [&](detail::Reader& r) {
    r.get("mass_u", c.species.mass_u);
    r.get("charge_e", c.species.charge_e);
  });
  section("chain", [&](detail::Reader& r) {
    r.get("N", c.chain.N);
    r.get("d_m", c.chain.d);
    r.get("h_m", c.chain.h);
  });
  section("solver", [&](detail::Reader& r) {
    r.get("V_max", c.solver.V_max);
    r.get("exclude_per_side", c.solver.exclude_per_side);
  });
  section("sim", [&](detail::Reader& r) {
    r.get("dt_s", c.sim.dt);
    r.get("duration_s", c.sim.duration);
    r.get("Gamma_kg_s", c.sim.gamma);
    r.get("n_h", c.sim.n_h);
    r.get("t_g_s", c.sim.t_g);
    r.get("hold_s", c.sim.hold);
    r.get("harmonic_omega_rad_s", c.sim.harmonic_omega);
    r.get("rf_phase0", c.sim.rf_phase0);
    r.get("settle_s", c.sim.settle);
    r.get("snapshot_stride", c.sim.snapshot_stride);
  });
  top.finish();
  c.validate();
  return c;
}

inline Config parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline void save_config(const Config& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file '" + path + "'");
  out << to_json(c).dump(2) << '\n';
}

}  // namespace itrap
