#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "itrap/emit.hpp"
#include "itrap/pipeline.hpp"
#include "itrap/sweep.hpp"
#include "itrap/trajectory.hpp"

using namespace itrap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("itrap_harness_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int exit_code(int status) {
#ifdef WEXITSTATUS
  return WEXITSTATUS(status);
#else
  return status;
#endif
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(ITRAP_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  return exit_code(std::system(cmd.c_str()));
}

Config small_config() {
  Config c;
  c.species.mass_u = 138;
  c.chain.N = 16;
  return c;
}

SweepSpec small_sweep() {
  SweepSpec s;
  s.base = small_config();
  s.axis1 = {Param::V_max, {5.0, 10.0, 20.0}};
  s.axis2 = {Param::c, {40e-6, 60e-6, 80e-6}};
  return s;
}

}  // namespace

// --- configuration ---------------------------------------------------------

TEST(Config, JsonRoundTrip) {
  Config c = small_config();
  c.geometry.fold_axial = false;
  c.drive.V_dc = 0.25;
  c.sim.snapshot_stride = 17;
  c.solver.exclude_per_side = 2;
  EXPECT_EQ(config_from_json(to_json(c)), c);
  const auto path = scratch("cfg.json");
  save_config(c, path.string());
  EXPECT_EQ(load_config(path.string()), c);
}

TEST(Config, MissingKeysTakeDefaults) {
  const auto c = parse_config(R"({"chain": {"N": 20}, "species": {"mass_u": 138}})");
  EXPECT_EQ(c.chain.N, 20);
  EXPECT_EQ(c.geometry, TrapGeometry{});
  EXPECT_NEAR(c.ion().mass, 138 * constants::atomic_mass, 1e-40);
  EXPECT_EQ(parse_config("{}"), Config{});
}

TEST(Config, RejectsBadDocuments) {
  EXPECT_THROW(parse_config(R"({"geometry": {"a_um": 50}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"extras": {}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"chain": {"N": 2.5}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"geometry": {"fold_axial": 1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"drive": {"V_RF": "high"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"chain": {"N": 1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"sim": {"dt_s": 1e-6}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"solver": {"exclude_per_side": 40}})"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/cfg.json"), ConfigError);
}

TEST(Config, ShippedConfigsLoad) {
  const auto c = load_config(std::string(ITRAP_CONFIG_DIR) + "/reference.json");
  EXPECT_EQ(c.chain.N, 64);
  EXPECT_EQ(c.geometry.n, 10);
  EXPECT_DOUBLE_EQ(c.solver.V_max, 10.0);
  for (const char* name : {"sweep_vmax_c.json", "sweep_n_c.json", "sweep_xi.json", "sweep_xi_excluded.json"}) {
    std::ifstream in(std::string(ITRAP_CONFIG_DIR) + "/" + name);
    ASSERT_TRUE(in) << name;
    EXPECT_NO_THROW(sweep_from_json(json::parse(in), c)) << name;
  }
}

// --- sweeps ----------------------------------------------------------------

TEST(Sweep, ParamsApplyAndValidate) {
  Config c;
  apply_param(c, Param::n, 4);
  apply_param(c, Param::c, 70e-6);
  apply_param(c, Param::Omega, 1e8);
  EXPECT_EQ(c.geometry.n, 4);
  EXPECT_EQ(c.geometry.c, 70e-6);
  EXPECT_EQ(c.drive.omega, 1e8);
  EXPECT_THROW(apply_param(c, Param::N, 10.5), ConfigError);
  for (auto p : {Param::V_max, Param::c, Param::n, Param::d, Param::N, Param::V_RF, Param::Omega, Param::h})
    EXPECT_EQ(param_from_string(to_string(p)), p);
  EXPECT_THROW(param_from_string("voltage"), ConfigError);
  const auto v = linspace(20e-6, 120e-6, 6);
  ASSERT_EQ(v.size(), 6u);
  EXPECT_DOUBLE_EQ(v.front(), 20e-6);
  EXPECT_DOUBLE_EQ(v.back(), 120e-6);
  EXPECT_NEAR(v[1], 40e-6, 1e-18);
}

TEST(Sweep, SinglePointEqualsDirectPipeline) {
  SweepSpec s = small_sweep();
  s.axis1.values = {10.0};
  s.axis2.values = {60e-6};
  s.evaluate_apd = true;
  const auto grid = run_sweep(s, 1);
  ASSERT_EQ(grid.records.size(), 1u);
  const auto& r = grid.records[0];
  EXPECT_FALSE(r.failed) << r.error;
  Config c = small_config();
  c.solver.V_max = 10.0;
  c.geometry.c = 60e-6;
  const auto direct = solve_uniform(c);
  EXPECT_EQ(r.chi2, direct.solution.chi2);
  EXPECT_EQ(r.voltages, direct.solution.v);
  EXPECT_EQ(r.condition_number, direct.condition);
  ASSERT_TRUE(r.apd.has_value());
  EXPECT_EQ(*r.apd, voltage_apd(c, direct.solution.v).depth);
  EXPECT_FALSE(r.xi.has_value());
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  const auto s = small_sweep();
  const auto one = run_sweep(s, 1);
  const auto many = run_sweep(s, 4);
  ASSERT_EQ(one.records.size(), 9u);
  ASSERT_EQ(many.records.size(), 9u);
  for (std::size_t i1 = 0; i1 < 3; ++i1)
    for (std::size_t i2 = 0; i2 < 3; ++i2) {
      const auto& r = many.at(i1, i2);
      EXPECT_EQ(r.i1, i1);
      EXPECT_EQ(r.i2, i2);
      EXPECT_EQ(r.axis1, s.axis1.values[i1]);
      EXPECT_EQ(r.axis2, s.axis2.values[i2]);
      EXPECT_TRUE(r.same_result(one.at(i1, i2)));
      EXPECT_FALSE(r.failed);
    }
  // Larger voltage limits never fit worse.
  for (std::size_t i2 = 0; i2 < 3; ++i2) {
    EXPECT_LE(one.at(1, i2).chi2, one.at(0, i2).chi2 * (1 + 1e-9));
    EXPECT_LE(one.at(2, i2).chi2, one.at(1, i2).chi2 * (1 + 1e-9));
  }
}

TEST(Sweep, FailuresAreRecordedNotThrown) {
  SweepSpec s = small_sweep();
  s.axis1 = {Param::n, {2.0, 2.5}};
  s.axis2.values = {50e-6};
  const auto g = run_sweep(s, 2);
  EXPECT_FALSE(g.at(0, 0).failed);
  EXPECT_TRUE(g.at(1, 0).failed);
  EXPECT_NE(g.at(1, 0).error.find("integer"), std::string::npos);
  EXPECT_TRUE(std::isnan(g.at(1, 0).chi2));
  SweepSpec empty = s;
  empty.axis2.values.clear();
  EXPECT_THROW(run_sweep(empty), ConfigError);
}

TEST(Sweep, MdPointsCarryXi) {
  SweepSpec s = small_sweep();
  s.axis1.values = {20.0};
  s.axis2.values = {60e-6};
  s.evaluate_md = true;
  s.settle = 2e-6;
  s.xi_exclude = 1;
  const auto r = run_sweep(s).records.at(0);
  ASSERT_TRUE(r.xi.has_value()) << r.error;
  Config c = point_config(s, 0, 0);
  const auto sol = solve_uniform(c);
  const auto run = settle(c, sol.solution.v, sol.target.positions, 2e-6);
  EXPECT_EQ(*r.xi, inhomogeneity(run.final.positions, 1));
}

TEST(Sweep, AreaBelowCountsSuccessfulPoints) {
  SweepGrid g{{Param::V_max, {1, 2}}, {Param::c, {1, 2}}, {}};
  g.records.resize(4);
  g.records[0].xi = 0.01;
  g.records[1].xi = 0.03;
  g.records[2].xi = 0.015;
  g.records[2].failed = true;
  EXPECT_DOUBLE_EQ(area_below(g, 0.02), 0.25);
  EXPECT_DOUBLE_EQ(area_below(g, 0.05), 0.5);
  EXPECT_EQ(area_below(SweepGrid{}, 0.02), 0.0);
}

TEST(Sweep, DescriptionParsing) {
  const Config base = small_config();
  const auto s = sweep_from_json(json::parse(R"({
    "axis1": {"param": "V_max", "from": 10, "to": 100, "count": 4},
    "axis2": {"param": "c", "values": [2e-5, 4e-5]},
    "evaluate_md": true, "xi_exclude": 1, "settle_s": 1e-4})"),
                                 base);
  EXPECT_EQ(s.axis1.values, (std::vector<double>{10, 40, 70, 100}));
  EXPECT_EQ(s.axis2.param, Param::c);
  EXPECT_TRUE(s.evaluate_md);
  EXPECT_EQ(s.xi_exclude, 1);
  EXPECT_EQ(s.settle, 1e-4);
  EXPECT_THROW(sweep_from_json(json::parse(R"({"axis1": {"param": "V_max"}, "axis2": {"param": "c", "values": [1]}})"),
                               base),
               ConfigError);
  EXPECT_THROW(sweep_from_json(json::parse(R"({"axis1": {"param": "V_max", "values": [1]},
      "axis2": {"param": "c", "values": [1]}, "colour": 1})"),
                               base),
               ConfigError);
}

// --- output ----------------------------------------------------------------

TEST(Emit, CsvHeaderAndEmptyCells) {
  SweepGrid g{{Param::V_max, {10}}, {Param::c, {4e-5, 6e-5}}, {}};
  g.records.resize(2);
  g.records[0] = {0, 0, 10, 4e-5, 2.5, std::log10(2.5), 40.0, SolverTag::TRF, true, {1, 2}, 0.012, std::nullopt, 0.1};
  g.records[1].i2 = 1;
  g.records[1].axis1 = 10;
  g.records[1].axis2 = 6e-5;
  g.records[1].failed = true;
  const auto csv = grid_csv(g);
  std::istringstream in(csv);
  std::string header, a, b, extra;
  std::getline(in, header);
  std::getline(in, a);
  std::getline(in, b);
  EXPECT_EQ(header, "axis1,axis2,chi2,cond,xi,apd,solver,runtime");
  auto cells = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) out.push_back(c);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };
  const auto ca = cells(a), cb = cells(b);
  ASSERT_EQ(ca.size(), 8u);
  ASSERT_EQ(cb.size(), 8u);
  EXPECT_EQ(std::stod(ca[0]), 10.0);
  EXPECT_EQ(std::stod(ca[1]), 4e-5);  // written with round-trip precision
  EXPECT_EQ(std::stod(ca[2]), 2.5);
  EXPECT_EQ(std::stod(ca[3]), 40.0);
  EXPECT_EQ(std::stod(ca[4]), 0.012);
  EXPECT_EQ(ca[5], "");
  EXPECT_EQ(ca[6], "TRF");
  EXPECT_EQ(std::stod(ca[7]), 0.1);
  EXPECT_EQ(std::stod(cb[1]), 6e-5);
  for (int k = 2; k <= 6; ++k) EXPECT_EQ(cb[static_cast<std::size_t>(k)], "") << k;
  EXPECT_FALSE(std::getline(in, extra));
}

TEST(Emit, JsonRoundTripKeepsMissingValues) {
  auto g = run_sweep(small_sweep(), 2);
  g.records[4].xi = 0.013;
  g.records[5].apd = 1.5e-21;
  g.records[6].failed = true;
  g.records[6].error = "boom";
  g.records[6].chi2 = std::numeric_limits<double>::quiet_NaN();
  const auto j = to_json(g);
  EXPECT_TRUE(j.at("records").at(6).at("chi2").is_null());
  const auto back = grid_from_json(json::parse(j.dump()));
  ASSERT_EQ(back.records.size(), g.records.size());
  EXPECT_EQ(back.axis1, g.axis1);
  for (std::size_t k = 0; k < g.records.size(); ++k) EXPECT_TRUE(back.records[k].same_result(g.records[k])) << k;
  const auto path = scratch("grid.json");
  emit(g, EmitFormat::Json, path.string());
  const auto loaded = load_grid(path.string());
  EXPECT_TRUE(loaded.records[5].same_result(g.records[5]));
  EXPECT_THROW(emit(SweepGrid{}, EmitFormat::Csv, path.string()), ConfigError);
  EXPECT_THROW(format_from_string("png"), ConfigError);
}

TEST(Emit, ContoursFollowTheThreshold) {
  // xi grows along axis 1 and crosses 2 % between the second and third column.
  std::vector<std::vector<double>> v{{0.01, 0.01, 0.01}, {0.015, 0.015, 0.015}, {0.03, 0.03, 0.03}};
  const auto segs = detail::iso_segments(v, 0.02);
  ASSERT_EQ(segs.size(), 2u);
  for (const auto& s : segs) {
    EXPECT_NEAR(s.x0, 1 + 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(s.x1, 1 + 1.0 / 3.0, 1e-12);
  }
  v[0][0] = std::nan("");
  EXPECT_EQ(detail::iso_segments(v, 0.012).size(), 1u);

  SweepGrid g{{Param::V_max, {1, 2, 3}}, {Param::c, {1, 2, 3}}, {}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      SweepRecord r;
      r.i1 = i;
      r.i2 = j;
      r.axis1 = static_cast<double>(i + 1);
      r.axis2 = static_cast<double>(j + 1);
      r.chi2 = 1.0 + static_cast<double>(i);
      r.log10_chi2 = std::log10(r.chi2);
      r.xi = v[i][j] > 0 ? v[i][j] : 0.01;
      g.records.push_back(r);
    }
  const auto svg = grid_svg_heatmap(g);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("data-xi=\"0.02\""), std::string::npos);
  EXPECT_NE(svg.find("data-xi=\"0.0175\""), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(grid_svg_scatter(g).find("<circle"), std::string::npos);
}

// --- trajectories ----------------------------------------------------------

TEST(Trajectory, CsvAndBinaryRoundTrip) {
  Config c = small_config();
  c.chain.N = 4;
  c.sim.duration = 1e-7;
  c.sim.snapshot_stride = 50;
  const auto sol = solve_uniform(c);
  const auto run = settle(c, sol.solution.v, sol.target.positions, c.sim.duration);
  ASSERT_EQ(run.snapshots.size(), 5u);

  const auto csv = trajectory_csv(run.snapshots);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,ion_index,x,y,z,vx,vy,vz");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 5 * 4);

  const auto bin = scratch("traj.itfj");
  write_trajectory_binary(bin.string(), run.snapshots, 50);
  EXPECT_EQ(fs::file_size(bin), 16u + 5 * 4 * 8 * 8);
  const auto back = read_trajectory_binary(bin.string());
  EXPECT_EQ(back.version, 1u);
  EXPECT_EQ(back.stride, 50u);
  ASSERT_EQ(back.frames.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(back.frames[k], run.snapshots[k]);

  const auto bad = scratch("bad.itfj");
  std::ofstream(bad) << "NOPE and some more bytes";
  EXPECT_THROW(read_trajectory_binary(bad.string()), ConfigError);

  const auto pcsv = scratch("traj.csv");
  write_trajectory_csv(pcsv.string(), std::span(run.snapshots).first(1));
  const auto pos = read_positions_csv(pcsv.string());
  ASSERT_EQ(pos.size(), 4u);
  EXPECT_EQ(pos[2], run.snapshots[0].positions[2]);
}

TEST(Trajectory, PositionsWithoutHeader) {
  const auto p = scratch("plain.csv");
  std::ofstream(p) << "1e-6,0,1e-4\n2e-6,0,1e-4\n\n4e-6,1e-7,1e-4\n";
  const auto pos = read_positions_csv(p.string());
  ASSERT_EQ(pos.size(), 3u);
  EXPECT_EQ(pos[2].y, 1e-7);
  std::ofstream(p) << "1e-6,zero,1e-4\n";
  EXPECT_THROW(read_positions_csv(p.string()), ConfigError);
}

// --- command line ----------------------------------------------------------

TEST(Cli, ExitCodes) {
  const auto log = scratch("cli.log");
  const std::string ref = std::string(ITRAP_CONFIG_DIR) + "/reference.json";
  EXPECT_EQ(cli("", log), 1);
  EXPECT_EQ(cli("--help", log), 0);
  EXPECT_EQ(cli("geom --config /nonexistent.json", log), 1);
  EXPECT_NE(slurp(log).find("cannot open"), std::string::npos);
  EXPECT_EQ(cli("solve --config " + ref + " --bogus", log), 1);
  EXPECT_EQ(cli("sweep --config " + ref, log), 1);  // --sweep is required
  EXPECT_EQ(cli("geom --config " + ref, log), 0);
  EXPECT_NE(slurp(log).find("h = 100 um"), std::string::npos);
}

TEST(Cli, SolveAndMetrics) {
  const auto log = scratch("cli_solve.log");
  const auto out = scratch("cli_out");
  const std::string ref = std::string(ITRAP_CONFIG_DIR) + "/reference.json";
  ASSERT_EQ(cli("solve --config " + ref + " --out " + out.string(), log), 0);
  std::ifstream in(out / "solution.json");
  ASSERT_TRUE(in);
  const auto j = json::parse(in);
  const auto v = j.at("voltages").get<std::vector<double>>();
  ASSERT_EQ(v.size(), 10u);
  for (double x : v) EXPECT_LE(std::abs(x), 10.0);

  const auto pos = scratch("chain.csv");
  std::ofstream(pos) << "x,y,z\n0,0,1e-4\n9e-6,0,1e-4\n20e-6,0,1e-4\n";
  ASSERT_EQ(cli("metrics --positions " + pos.string(), log), 0);
  EXPECT_NE(slurp(log).find("xi = 10 %"), std::string::npos) << slurp(log);
  EXPECT_EQ(cli("metrics --positions " + pos.string() + " --exclude 1", log), 1);
}
