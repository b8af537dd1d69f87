#pragma once

// Trajectory files.
//
// CSV: header "t,ion_index,x,y,z,vx,vy,vz", one row per ion per snapshot.
//
// Binary (little endian):
//   char[4]  magic "ITFJ"
//   uint32   version (1)
//   uint32   N, ions per frame
//   uint32   stride, integration steps between frames
//   then frames of N rows, each row 8 float64: t, ion_index, x, y, z, vx, vy, vz.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "itrap/errors.hpp"
#include "itrap/md_sim.hpp"

namespace itrap {

inline constexpr char kTrajectoryMagic[4] = {'I', 'T', 'F', 'J'};
inline constexpr std::uint32_t kTrajectoryVersion = 1;

inline std::string trajectory_csv(std::span<const SimState> frames) {
  std::ostringstream os;
  os << "t,ion_index,x,y,z,vx,vy,vz\n";
  char buf[256];
  for (const auto& s : frames) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Vec3& p = s.positions[i];
      const Vec3& v = s.velocities[i];
      std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, i, p.x, p.y, p.z, v.x,
                    v.y, v.z);
      os << buf;
    }
  }
  return os.str();
}

inline void write_trajectory_csv(const std::string& path, std::span<const SimState> frames) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << trajectory_csv(frames);
}

inline void write_trajectory_binary(const std::string& path, std::span<const SimState> frames,
                                    std::uint32_t stride) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  const std::uint32_t n = frames.empty() ? 0 : static_cast<std::uint32_t>(frames.front().size());
  out.write(kTrajectoryMagic, 4);
  out.write(reinterpret_cast<const char*>(&kTrajectoryVersion), 4);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&stride), 4);
  for (const auto& s : frames) {
    if (s.size() != n) throw std::invalid_argument("trajectory frames differ in ion count");
    for (std::size_t i = 0; i < n; ++i) {
      const double row[8] = {s.t,
                             static_cast<double>(i),
                             s.positions[i].x,
                             s.positions[i].y,
                             s.positions[i].z,
                             s.velocities[i].x,
                             s.velocities[i].y,
                             s.velocities[i].z};
      out.write(reinterpret_cast<const char*>(row), sizeof row);
    }
  }
}

struct BinaryTrajectory {
  std::uint32_t version = 0;
  std::uint32_t stride = 0;
  std::vector<SimState> frames;
};

inline BinaryTrajectory read_trajectory_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  char magic[4];
  std::uint32_t n = 0;
  BinaryTrajectory t;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&t.version), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&t.stride), 4);
  if (!in || std::memcmp(magic, kTrajectoryMagic, 4) != 0) throw ConfigError("'" + path + "' is not a trajectory file");
  if (t.version != kTrajectoryVersion) throw ConfigError("unsupported trajectory version");
  double row[8];
  while (n > 0 && in.read(reinterpret_cast<char*>(row), sizeof row)) {
    SimState s;
    s.t = row[0];
    s.positions.resize(n);
    s.velocities.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      if (i > 0 && !in.read(reinterpret_cast<char*>(row), sizeof row))
        throw ConfigError("truncated trajectory file");
      s.positions[i] = {row[2], row[3], row[4]};
      s.velocities[i] = {row[5], row[6], row[7]};
    }
    t.frames.push_back(std::move(s));
  }
  return t;
}

/// Positions from a CSV with columns x,y,z (header optional, extra leading
/// columns allowed when the header names them). Used for metrics input.
inline std::vector<Vec3> read_positions_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  std::vector<Vec3> out;
  int ix = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (first) {
      first = false;
      bool header = false;
      for (std::size_t k = 0; k < cells.size(); ++k)
        if (cells[k] == "x") {
          ix = static_cast<int>(k);
          header = true;
        }
      if (header) continue;
    }
    if (cells.size() < static_cast<std::size_t>(ix) + 3) throw ConfigError("positions file: short row");
    try {
      out.push_back({std::stod(cells[ix]), std::stod(cells[ix + 1]), std::stod(cells[ix + 2])});
    } catch (const std::exception&) {
      throw ConfigError("positions file: bad number in '" + line + "'");
    }
  }
  return out;
}

}  // namespace itrap
