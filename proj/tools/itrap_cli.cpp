// itrap: command-line front end.
//
//   itrap geom     [--config f]                    layout, ion height, trap depth
//   itrap solve    [--config f] [--out d]          voltages for the configured chain
//   itrap simulate [--config f] [--voltages s] [--state p] [--out d]
//   itrap ramp     [--config f] [--voltages s] [--out d]
//   itrap sweep    --sweep s [--config f] [--out d] [--threads k] [--full-settle]
//   itrap metrics  --positions p [--exclude k] [--voltages s] [--config f]
//
// Exit status: 0 success, 1 configuration error, 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "itrap/config.hpp"
#include "itrap/emit.hpp"
#include "itrap/metrics.hpp"
#include "itrap/pipeline.hpp"
#include "itrap/sweep.hpp"
#include "itrap/trajectory.hpp"

namespace fs = std::filesystem;
using namespace itrap;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  unsigned threads = 1;
  std::uint64_t seed = 0;  // reserved: every run is deterministic
  bool full_settle = false;
  std::string voltages;
  std::string state;
  std::string positions;
  std::string sweep;
  std::string traj_format = "csv";
  int exclude = 0;
};

Config load(const Options& o) { return o.config.empty() ? Config{} : load_config(o.config); }

fs::path out_dir(const Options& o) {
  fs::path p(o.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory '" + o.out + "'");
  return p;
}

json solution_json(const VoltageSolution& s, double cond) {
  return {{"voltages", s.v},   {"chi2", s.chi2},           {"solver", to_string(s.solver)},
          {"converged", s.converged}, {"iterations", s.iterations}, {"active_bounds", s.active_bounds},
          {"condition_number", std::isfinite(cond) ? json(cond) : json(nullptr)}};
}

std::vector<double> load_voltages(const std::string& path, const Config& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open voltage file '" + path + "'");
  std::vector<double> v;
  try {
    const json j = json::parse(in);
    v = (j.is_object() ? j.at("voltages") : j).get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError("voltage file '" + path + "': " + e.what());
  }
  if (static_cast<int>(v.size()) != cfg.geometry.num_voltages())
    throw ConfigError("voltage file has " + std::to_string(v.size()) + " entries, trap needs " +
                      std::to_string(cfg.geometry.num_voltages()));
  return v;
}

void write_positions(const fs::path& path, std::span<const Vec3> pos) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << "ion_index,x,y,z\n";
  char buf[128];
  for (std::size_t i = 0; i < pos.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, pos[i].x, pos[i].y, pos[i].z);
    out << buf;
  }
}

void print_chain(std::span<const Vec3> pos) {
  const auto rep = chain_report(pos, 1);
  std::printf("xi = %.4f %%  (edge ions dropped: %.4f %%)\n", 100 * rep.all.xi, 100 * rep.excluded.xi);
  std::printf("mean spacing = %.4f um\n", rep.all.mean_spacing * 1e6);
}

int cmd_geom(const Options& o) {
  const Config cfg = load(o);
  const auto& g = cfg.geometry;
  const FieldKernel kernel(g);
  std::printf("a = %.3f um  b = %.3f um  n = %d  c = %.3f um  outer = %.3f um\n", g.a * 1e6, g.b * 1e6, g.n,
              g.c * 1e6, g.outer_factor * g.c * 1e6);
  std::printf("rails and DC strip span |x| < %.3f mm; control bank |x| < %.3f um\n", g.rail_half_length() * 1e3,
              g.bank_half_length() * 1e6);
  std::printf("%-4s %6s %5s %14s %14s %14s %14s\n", "role", "index", "side", "x1 (um)", "x2 (um)", "y1 (um)",
              "y2 (um)");
  for (const auto& e : g.electrodes())
    std::printf("%-4s %6d %5d %14.3f %14.3f %14.3f %14.3f\n", to_string(e.role), e.index, e.side, e.rect.x1 * 1e6,
                e.rect.x2 * 1e6, e.rect.y1 * 1e6, e.rect.y2 * 1e6);
  const double h = ion_height(g.a, g.b);
  const double dep = trap_depth(g, cfg.drive, cfg.ion());
  std::printf("h = %.6g um\n", h * 1e6);
  std::printf("RF null (numerical) = %.6g um\n", rf_null_height(kernel, 0.2 * h, 3.0 * h) * 1e6);
  std::printf("trap depth = %.6g J = %.6g meV\n", dep, constants::to_meV(dep));
  return 0;
}

int cmd_solve(const Options& o) {
  const Config cfg = load(o);
  const auto r = solve_uniform(cfg);
  std::printf("solver %s  chi2 = %.6g (V/m)^2  cond = %.6g  converged = %d\n", to_string(r.solution.solver),
              r.solution.chi2, r.condition, r.solution.converged ? 1 : 0);
  for (std::size_t k = 0; k < r.solution.v.size(); ++k) std::printf("V[%zu] = %+.6f V\n", k + 1, r.solution.v[k]);
  const auto path = out_dir(o) / "solution.json";
  detail::write_text(path.string(), solution_json(r.solution, r.condition).dump(2) + "\n");
  std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

void write_trajectory(const Options& o, const fs::path& dir, const Config& cfg, const RunResult& r) {
  if (r.snapshots.empty()) return;
  if (o.traj_format == "csv") {
    write_trajectory_csv((dir / "trajectory.csv").string(), r.snapshots);
  } else if (o.traj_format == "bin") {
    write_trajectory_binary((dir / "trajectory.itfj").string(), r.snapshots,
                            static_cast<std::uint32_t>(cfg.sim.snapshot_stride));
  } else {
    throw ConfigError("unknown trajectory format '" + o.traj_format + "' (csv or bin)");
  }
}

int cmd_simulate(const Options& o) {
  const Config cfg = load(o);
  std::vector<double> v;
  std::vector<Vec3> start;
  if (o.voltages.empty()) {
    const auto s = solve_uniform(cfg);
    v = s.solution.v;
    start = s.target.positions;
  } else {
    v = load_voltages(o.voltages, cfg);
    start = uniform_chain(cfg.chain, cfg.ion()).positions;
  }
  if (!o.state.empty()) start = read_positions_csv(o.state);
  const auto r = settle(cfg, v, start, cfg.sim.duration);
  std::printf("steps = %lld  t = %.6g s\n", static_cast<long long>(r.steps), r.final.t);
  print_chain(r.final.positions);
  const auto dir = out_dir(o);
  write_positions(dir / "final_positions.csv", r.final.positions);
  write_trajectory(o, dir, cfg, r);
  return 0;
}

int cmd_ramp(const Options& o) {
  const Config cfg = load(o);
  const auto v2 = o.voltages.empty() ? solve_uniform(cfg).solution.v : load_voltages(o.voltages, cfg);
  const auto r = run_ramp(cfg, v2);
  std::printf("harmonic target: chi2 = %.6g  half length = %.4f um\n", r.chi2_harmonic,
              r.harmonic.positions.back().x * 1e6);
  std::printf("ordering preserved: %s\n", r.ordering_preserved ? "yes" : "no");
  print_chain(r.run.final.positions);
  const auto dir = out_dir(o);
  write_positions(dir / "ramp_final_positions.csv", r.run.final.positions);
  write_trajectory(o, dir, cfg, r.run);
  return r.ordering_preserved ? 0 : 2;
}

int cmd_sweep(const Options& o) {
  const Config cfg = load(o);
  if (o.sweep.empty()) throw ConfigError("sweep needs --sweep <file>");
  std::ifstream in(o.sweep);
  if (!in) throw ConfigError("cannot open sweep file '" + o.sweep + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("sweep file is not valid JSON: ") + e.what());
  }
  auto spec = sweep_from_json(j, cfg);
  if (o.full_settle) spec.settle = cfg.sim.duration;
  const auto grid = run_sweep(spec, o.threads);
  const auto dir = out_dir(o);
  emit(grid, EmitFormat::Csv, (dir / "sweep.csv").string());
  emit(grid, EmitFormat::Json, (dir / "sweep.json").string());
  emit(grid, EmitFormat::SvgScatter, (dir / "sweep_chi2.svg").string());
  if (spec.evaluate_md) emit(grid, EmitFormat::SvgHeatmap, (dir / "sweep_xi.svg").string());
  std::size_t failed = 0;
  for (const auto& r : grid.records) failed += r.failed ? 1 : 0;
  std::printf("%zu points (%zu failed) written to %s\n", grid.records.size(), failed, dir.string().c_str());
  return 0;
}

int cmd_metrics(const Options& o) {
  if (o.positions.empty()) throw ConfigError("metrics needs --positions <file>");
  const auto pos = read_positions_csv(o.positions);
  const auto m = chain_metrics(pos, o.exclude);
  std::printf("ions = %zu  exclude per side = %d\n", pos.size(), o.exclude);
  std::printf("xi = %.6g %%\nmean spacing = %.6g um\n", 100 * m.xi, m.mean_spacing * 1e6);
  if (!o.voltages.empty()) {
    const Config cfg = load(o);
    const auto d = voltage_apd(cfg, load_voltages(o.voltages, cfg));
    std::printf("APD = %.6g meV%s\n", constants::to_meV(d.depth), d.unconfined ? " (unconfined)" : "");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surface-trap chain design: fields, voltage fits, MD and sweeps"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    sub->add_option("--seed", o.seed, "reserved; runs are deterministic");
    sub->add_flag("--full-settle", o.full_settle, "MD in sweeps runs for sim.duration_s");
  };
  auto* geom = app.add_subcommand("geom", "print layout, ion height and trap depth");
  auto* solve = app.add_subcommand("solve", "fit control voltages to the configured chain");
  auto* simulate = app.add_subcommand("simulate", "MD with static voltages");
  auto* ramp = app.add_subcommand("ramp", "harmonic to homogeneous transfer");
  auto* sweep = app.add_subcommand("sweep", "two-axis parameter sweep");
  auto* metrics = app.add_subcommand("metrics", "xi and APD for a positions file");
  for (auto* s : {geom, solve, simulate, ramp, sweep, metrics}) common(s);
  for (auto* s : {simulate, ramp, metrics}) s->add_option("--voltages", o.voltages, "solution JSON or voltage array");
  for (auto* s : {simulate, ramp}) s->add_option("--traj-format", o.traj_format, "csv or bin");
  simulate->add_option("--state", o.state, "initial positions CSV");
  sweep->add_option("--sweep", o.sweep, "sweep description JSON")->required();
  metrics->add_option("--positions", o.positions, "positions CSV")->required();
  metrics->add_option("--exclude", o.exclude, "ions dropped at each end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*geom) return cmd_geom(o);
    if (*solve) return cmd_solve(o);
    if (*simulate) return cmd_simulate(o);
    if (*ramp) return cmd_ramp(o);
    if (*sweep) return cmd_sweep(o);
    if (*metrics) return cmd_metrics(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
