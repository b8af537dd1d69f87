#pragma once

// Gapless-plane electrostatics of rectangular surface electrodes.
//
// Every electrode is an axis-aligned rectangle in the z = 0 plane held at a
// fixed voltage, with the rest of the plane grounded. For such a patch the
// Dirichlet integral over the half space has a closed form built from one
// term per rectangle corner,
//
//   Phi(x, y, z) = 1/(2 pi) * sum_c s_c * atan(X Y / (|z| R)),
//   X = x_c - x,  Y = y_c - y,  R = sqrt(X^2 + Y^2 + z^2),
//
// with s_c = +1 on the (x2, y2) and (x1, y1) corners and -1 otherwise.
// Fields and Hessians follow from differentiating the corner function.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "itrap/constants.hpp"
#include "itrap/errors.hpp"
#include "itrap/vec3.hpp"

namespace itrap {

/// Electrode patch [x1, x2] x [y1, y2] in the z = 0 plane (metres).
struct Rect {
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;

  bool valid() const {
    return std::isfinite(x1) && std::isfinite(x2) && std::isfinite(y1) && std::isfinite(y2) &&
           x1 < x2 && y1 < y2;
  }
  double area() const { return (x2 - x1) * (y2 - y1); }
  bool overlaps(const Rect& o) const {
    return x1 < o.x2 && o.x1 < x2 && y1 < o.y2 && o.y1 < y2;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

namespace detail {

inline constexpr double inv_2pi = 1.0 / (2.0 * constants::pi);

// Partial derivatives of the corner function atan(XY/(zR)) for z > 0.
struct CornerGrad {
  double fx, fy, fz;
};

inline CornerGrad corner_grad(double X, double Y, double z) {
  const double ax = X * X + z * z;
  const double ay = Y * Y + z * z;
  const double r2 = X * X + Y * Y + z * z;
  const double inv_r = 1.0 / std::sqrt(r2);
  return {z * Y * inv_r / ax, z * X * inv_r / ay, -X * Y * (r2 + z * z) * inv_r / (ax * ay)};
}

struct CornerHess {
  double fxx, fyy, fxy, fxz, fyz;
};

inline CornerHess corner_hess(double X, double Y, double z) {
  const double z2 = z * z;
  const double ax = X * X + z2;
  const double ay = Y * Y + z2;
  const double r2 = X * X + Y * Y + z2;
  const double inv_r = 1.0 / std::sqrt(r2);
  const double inv_r3 = inv_r * inv_r * inv_r;
  return {-z * X * Y * (2.0 * r2 + ax) * inv_r3 / (ax * ax),
          -z * X * Y * (2.0 * r2 + ay) * inv_r3 / (ay * ay), z * inv_r3,
          Y * ((X * X - z2) * r2 - z2 * ax) * inv_r3 / (ax * ax),
          X * ((Y * Y - z2) * r2 - z2 * ay) * inv_r3 / (ay * ay)};
}

inline void check_point(const Vec3& r) {
  if (!is_finite(r)) throw std::invalid_argument("evaluation point is not finite");
}

}  // namespace detail

/// Potential (per applied volt) of `rect` at `r`. On the plane itself the
/// boundary value is returned; points exactly on a patch edge are rejected.
inline double rect_potential(const Rect& rect, const Vec3& r) {
  detail::check_point(r);
  detail::require(rect.valid(), "invalid rectangle");
  if (r.z == 0.0) {
    const bool on_x_edge = (r.x == rect.x1 || r.x == rect.x2) && r.y >= rect.y1 && r.y <= rect.y2;
    const bool on_y_edge = (r.y == rect.y1 || r.y == rect.y2) && r.x >= rect.x1 && r.x <= rect.x2;
    if (on_x_edge || on_y_edge)
      throw std::invalid_argument("potential is discontinuous on a patch edge at z = 0");
    return (r.x > rect.x1 && r.x < rect.x2 && r.y > rect.y1 && r.y < rect.y2) ? 1.0 : 0.0;
  }
  const double z = std::abs(r.z);
  auto f = [&](double xc, double yc) {
    const double X = xc - r.x;
    const double Y = yc - r.y;
    const double R = std::sqrt(X * X + Y * Y + z * z);
    return std::atan(X * Y / (z * R));
  };
  return detail::inv_2pi * (f(rect.x2, rect.y2) - f(rect.x1, rect.y2) - f(rect.x2, rect.y1) +
                            f(rect.x1, rect.y1));
}

/// Electric field E = -grad(Phi) per applied volt (1/m). Requires z != 0.
inline Vec3 rect_field(const Rect& rect, const Vec3& r) {
  detail::check_point(r);
  detail::require(rect.valid(), "invalid rectangle");
  detail::require(r.z != 0.0, "field is undefined on the electrode plane");
  const double z = std::abs(r.z);
  const double sz = r.z > 0 ? 1.0 : -1.0;
  Vec3 e;
  auto add = [&](double xc, double yc, double s) {
    const auto g = detail::corner_grad(xc - r.x, yc - r.y, z);
    e.x += s * g.fx;
    e.y += s * g.fy;
    e.z -= s * g.fz;
  };
  add(rect.x2, rect.y2, 1.0);
  add(rect.x1, rect.y2, -1.0);
  add(rect.x2, rect.y1, -1.0);
  add(rect.x1, rect.y1, 1.0);
  e *= detail::inv_2pi;
  e.z *= sz;
  return e;
}

/// Hessian of the potential per applied volt (1/m^2). Requires z != 0.
inline Sym3 rect_hessian(const Rect& rect, const Vec3& r) {
  detail::check_point(r);
  detail::require(rect.valid(), "invalid rectangle");
  detail::require(r.z != 0.0, "Hessian is undefined on the electrode plane");
  const double z = std::abs(r.z);
  const double sz = r.z > 0 ? 1.0 : -1.0;
  Sym3 h;
  auto add = [&](double xc, double yc, double s) {
    const auto c = detail::corner_hess(xc - r.x, yc - r.y, z);
    h.xx += s * c.fxx;
    h.yy += s * c.fyy;
    h.xy += s * c.fxy;
    h.xz -= s * c.fxz;
    h.yz -= s * c.fyz;
  };
  add(rect.x2, rect.y2, 1.0);
  add(rect.x1, rect.y2, -1.0);
  add(rect.x2, rect.y1, -1.0);
  add(rect.x1, rect.y1, 1.0);
  h *= detail::inv_2pi;
  h.xz *= sz;
  h.yz *= sz;
  h.zz = -(h.xx + h.yy);
  return h;
}

// ---------------------------------------------------------------------------
// Trap layout
// ---------------------------------------------------------------------------

enum class ElectrodeRole { RF, DC, Control };

inline const char* to_string(ElectrodeRole role) {
  switch (role) {
    case ElectrodeRole::RF: return "RF";
    case ElectrodeRole::DC: return "DC";
    case ElectrodeRole::Control: return "CC";
  }
  return "?";
}

/// One physical electrode. For control electrodes `index` is the signed
/// axial position label (+k for x > 0, -k for its mirror, k = 1..n); `side`
/// is the sign of y on which the patch lies (0 for the central strip).
struct Electrode {
  Rect rect;
  ElectrodeRole role = ElectrodeRole::Control;
  int index = 0;
  int side = 0;
};

/// Five-wire surface trap: central DC strip |y| < a, RF rails
/// a < |y| < a + b, and a bank of control electrodes on both flanks
/// a + b < |y| < a + b + control_extent.
///
/// Along x each flank carries electrodes +1..+n on x > 0 and their mirrors
/// -1..-n on x < 0, all of width c except the outermost pair (outer_factor*c).
/// With `fold_axial` set the voltage on -k equals that on +k, so there are n
/// independent voltages each driving four patches; otherwise 2n voltages each
/// driving the two patches at the same x.
struct TrapGeometry {
  static constexpr double kDefaultRailHalfLength = 10e-3;

  double a = 50e-6;
  double b = 150e-6;
  int n = 10;
  double c = 45e-6;
  double outer_factor = 4.0;
  double rail_length = 0.0;  // 0 selects max(control bank, 20 mm)
  double control_extent = 1e-3;
  bool fold_axial = true;

  void validate() const {
    auto bad = [](const std::string& what) { throw ConfigError("geometry: " + what); };
    if (!(a > 0) || !std::isfinite(a)) bad("a must be positive");
    if (!(b >= 0) || !std::isfinite(b)) bad("b must be non-negative");
    if (n < 0) bad("n must be non-negative");
    if (!(c > 0) || !std::isfinite(c)) bad("c must be positive");
    if (!(outer_factor > 0)) bad("outer_factor must be positive");
    if (!(rail_length >= 0)) bad("rail_length must be non-negative");
    if (!(control_extent > 0)) bad("control_extent must be positive");
  }

  /// Axial half-extent of the control bank.
  double bank_half_length() const {
    return n > 0 ? ((n - 1) + outer_factor) * c : outer_factor * c;
  }
  double rail_half_length() const {
    return rail_length > 0 ? 0.5 * rail_length : std::max(bank_half_length(), kDefaultRailHalfLength);
  }

  int num_voltages() const { return fold_axial ? n : 2 * n; }

  /// Voltage channel driving a control electrode with signed index k.
  int channel_of(int index) const {
    if (fold_axial) return std::abs(index) - 1;
    return index < 0 ? index + n : n + index - 1;
  }

  /// Signed axial interval of control electrode +k (k >= 1).
  std::pair<double, double> control_span(int k) const {
    const double lo = (k - 1) * c;
    const double hi = k < n ? k * c : (n - 1 + outer_factor) * c;
    return {lo, hi};
  }

  std::vector<Electrode> electrodes() const {
    validate();
    std::vector<Electrode> out;
    const double L = rail_half_length();
    out.push_back({{-L, L, -a, a}, ElectrodeRole::DC, 0, 0});
    if (b > 0) {
      out.push_back({{-L, L, a, a + b}, ElectrodeRole::RF, 0, +1});
      out.push_back({{-L, L, -(a + b), -a}, ElectrodeRole::RF, 0, -1});
    }
    const double y_in = a + b;
    const double y_out = a + b + control_extent;
    for (int side : {+1, -1}) {
      const double ylo = side > 0 ? y_in : -y_out;
      const double yhi = side > 0 ? y_out : -y_in;
      for (int k = 1; k <= n; ++k) {
        const auto [lo, hi] = control_span(k);
        out.push_back({{lo, hi, ylo, yhi}, ElectrodeRole::Control, +k, side});
        out.push_back({{-hi, -lo, ylo, yhi}, ElectrodeRole::Control, -k, side});
      }
    }
    return out;
  }

  friend bool operator==(const TrapGeometry&, const TrapGeometry&) = default;
};

struct DriveConfig {
  double V_rf = 200.0;
  double omega = 2.0 * constants::pi * 20e6;  // rad/s
  double V_dc = 0.0;

  void validate() const {
    if (!(omega > 0) || !std::isfinite(omega)) throw ConfigError("drive: Omega must be positive");
    if (!(V_rf >= 0) || !std::isfinite(V_rf)) throw ConfigError("drive: V_RF must be >= 0");
    if (!std::isfinite(V_dc)) throw ConfigError("drive: V_DC must be finite");
  }
  friend bool operator==(const DriveConfig&, const DriveConfig&) = default;
};

struct IonSpecies {
  double charge = constants::elementary_charge;
  double mass = 40.0 * constants::atomic_mass;

  static IonSpecies calcium40() { return {}; }

  void validate() const {
    if (charge == 0 || !std::isfinite(charge)) throw ConfigError("species: charge must be non-zero");
    if (!(mass > 0) || !std::isfinite(mass)) throw ConfigError("species: mass must be positive");
  }
  friend bool operator==(const IonSpecies&, const IonSpecies&) = default;
};

// ---------------------------------------------------------------------------
// Corner-grid kernel
// ---------------------------------------------------------------------------

/// Fused evaluator for an arbitrary linear combination of the trap's
/// electrode channels. The layout's corners are collected onto a grid of
/// distinct x and y edges; a voltage assignment is reduced to one weight per
/// grid corner, so a field evaluation costs one square root per corner no
/// matter how many electrodes share it.
///
/// Channels: 0 = RF rails, 1 = DC strip, 2 + j = control voltage j.
class FieldKernel {
 public:
  static constexpr int kRF = 0;
  static constexpr int kDC = 1;
  static constexpr double kMinHeight = 1e-9;

  explicit FieldKernel(const TrapGeometry& geom) : num_voltages_(geom.num_voltages()) {
    const auto elec = geom.electrodes();
    for (const auto& e : elec) {
      xe_.push_back(e.rect.x1);
      xe_.push_back(e.rect.x2);
      ye_.push_back(e.rect.y1);
      ye_.push_back(e.rect.y2);
    }
    auto uniq = [](std::vector<double>& v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(xe_);
    uniq(ye_);
    const auto corners = xe_.size() * ye_.size();
    channels_.assign(static_cast<std::size_t>(num_channels()), std::vector<double>(corners, 0.0));
    for (const auto& e : elec) {
      int ch = kDC;
      if (e.role == ElectrodeRole::RF) ch = kRF;
      if (e.role == ElectrodeRole::Control) ch = 2 + geom.channel_of(e.index);
      auto& w = channels_[static_cast<std::size_t>(ch)];
      const auto ix1 = index_of(xe_, e.rect.x1), ix2 = index_of(xe_, e.rect.x2);
      const auto iy1 = index_of(ye_, e.rect.y1), iy2 = index_of(ye_, e.rect.y2);
      w[iy2 * xe_.size() + ix2] += detail::inv_2pi;
      w[iy2 * xe_.size() + ix1] -= detail::inv_2pi;
      w[iy1 * xe_.size() + ix2] -= detail::inv_2pi;
      w[iy1 * xe_.size() + ix1] += detail::inv_2pi;
    }
    // Corners where every channel vanishes are skipped by the field loop.
    row_cols_.resize(ye_.size());
    for (std::size_t iy = 0; iy < ye_.size(); ++iy)
      for (std::size_t ix = 0; ix < xe_.size(); ++ix)
        for (const auto& w : channels_)
          if (w[iy * xe_.size() + ix] != 0.0) {
            row_cols_[iy].push_back(static_cast<std::uint32_t>(ix));
            break;
          }
  }

  int num_channels() const { return 2 + num_voltages_; }
  int num_voltages() const { return num_voltages_; }
  std::size_t num_corners() const { return xe_.size() * ye_.size(); }

  /// Corner weights of a single channel at unit voltage.
  std::span<const double> channel(int ch) const { return channels_.at(static_cast<std::size_t>(ch)); }

  /// Corner weights for V_rf on the rails, V_dc on the strip and
  /// `controls` on the control channels.
  std::vector<double> mix(double v_rf, double v_dc, std::span<const double> controls) const {
    detail::require(static_cast<int>(controls.size()) == num_voltages_,
                    "voltage vector length does not match the number of control channels");
    std::vector<double> w(num_corners(), 0.0);
    auto axpy = [&](double s, int ch) {
      if (s == 0.0) return;
      const auto& src = channels_[static_cast<std::size_t>(ch)];
      for (std::size_t i = 0; i < w.size(); ++i) w[i] += s * src[i];
    };
    axpy(v_rf, kRF);
    axpy(v_dc, kDC);
    for (int j = 0; j < num_voltages_; ++j) axpy(controls[static_cast<std::size_t>(j)], 2 + j);
    return w;
  }

  double potential(const Vec3& r, std::span<const double> w) const {
    guard(r);
    const double z = std::abs(r.z);
    double acc = 0.0;
    const std::size_t nx = xe_.size();
    for (std::size_t iy = 0; iy < ye_.size(); ++iy) {
      const double Y = ye_[iy] - r.y;
      const double* wr = w.data() + iy * nx;
      for (std::size_t ix = 0; ix < nx; ++ix) {
        if (wr[ix] == 0.0) continue;
        const double X = xe_[ix] - r.x;
        const double R = std::sqrt(X * X + Y * Y + z * z);
        acc += wr[ix] * std::atan(X * Y / (z * R));
      }
    }
    return acc;
  }

  Vec3 field(const Vec3& r, std::span<const double> w) const {
    Vec3 e, unused;
    field_pair(r, w, {}, e, unused);
    return e;
  }

  /// Evaluates two weightings at once (typically static and RF). `wb` may be
  /// empty, in which case `eb` is left untouched.
  void field_pair(const Vec3& r, std::span<const double> wa, std::span<const double> wb, Vec3& ea,
                  Vec3& eb) const {
    guard(r);
    const double z = std::abs(r.z);
    const double z2 = z * z;
    const std::size_t nx = xe_.size();
    // Per-edge factors are shared along rows and columns of the grid.
    thread_local std::vector<double> X, inv_ax;
    X.resize(nx);
    inv_ax.resize(nx);
    for (std::size_t ix = 0; ix < nx; ++ix) {
      X[ix] = xe_[ix] - r.x;
      inv_ax[ix] = 1.0 / (X[ix] * X[ix] + z2);
    }
    const bool two = !wb.empty();
    double ax_ = 0, ay_ = 0, az_ = 0, bx_ = 0, by_ = 0, bz_ = 0;
    for (std::size_t iy = 0; iy < ye_.size(); ++iy) {
      const double Y = ye_[iy] - r.y;
      const double ay2 = Y * Y + z2;
      const double inv_ay = 1.0 / ay2;
      const double* wa_row = wa.data() + iy * nx;
      const double* wb_row = two ? wb.data() + iy * nx : nullptr;
      double sx = 0, sy = 0, sz = 0, tx = 0, ty = 0, tz = 0;
      for (const auto ix : row_cols_[iy]) {
        const double r2 = X[ix] * X[ix] + ay2;
        const double inv_r = 1.0 / std::sqrt(r2);
        const double gx = Y * inv_r * inv_ax[ix];
        const double gy = X[ix] * inv_r;
        const double gz = X[ix] * Y * (r2 + z2) * inv_r * inv_ax[ix];
        sx += wa_row[ix] * gx;
        sy += wa_row[ix] * gy;
        sz += wa_row[ix] * gz;
        if (two) {
          tx += wb_row[ix] * gx;
          ty += wb_row[ix] * gy;
          tz += wb_row[ix] * gz;
        }
      }
      ax_ += sx;
      ay_ += sy * inv_ay;
      az_ += sz * inv_ay;
      bx_ += tx;
      by_ += ty * inv_ay;
      bz_ += tz * inv_ay;
    }
    const double sgn = r.z > 0 ? 1.0 : -1.0;
    ea = {z * ax_, z * ay_, sgn * az_};
    if (two) eb = {z * bx_, z * by_, sgn * bz_};
  }

  Sym3 hessian(const Vec3& r, std::span<const double> w) const {
    guard(r);
    const double z = std::abs(r.z);
    const double sgn = r.z > 0 ? 1.0 : -1.0;
    const std::size_t nx = xe_.size();
    Sym3 h;
    for (std::size_t iy = 0; iy < ye_.size(); ++iy) {
      const double Y = ye_[iy] - r.y;
      const double* wr = w.data() + iy * nx;
      for (std::size_t ix = 0; ix < nx; ++ix) {
        if (wr[ix] == 0.0) continue;
        const auto c = detail::corner_hess(xe_[ix] - r.x, Y, z);
        h.xx += wr[ix] * c.fxx;
        h.yy += wr[ix] * c.fyy;
        h.xy += wr[ix] * c.fxy;
        h.xz -= wr[ix] * c.fxz;
        h.yz -= wr[ix] * c.fyz;
      }
    }
    h.xz *= sgn;
    h.yz *= sgn;
    h.zz = -(h.xx + h.yy);
    return h;
  }

 private:
  static std::size_t index_of(const std::vector<double>& v, double x) {
    return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
  }
  static void guard(const Vec3& r) {
    detail::check_point(r);
    if (std::abs(r.z) < kMinHeight)
      throw NumericalError("evaluation point within 1 nm of the electrode plane");
  }

  int num_voltages_;
  std::vector<double> xe_, ye_;
  std::vector<std::vector<double>> channels_;
  std::vector<std::vector<std::uint32_t>> row_cols_;
};

// ---------------------------------------------------------------------------
// Trap-level quantities
// ---------------------------------------------------------------------------

/// Unit-voltage fields of every electrode group at one point.
struct BasisFields {
  Vec3 rf;
  Vec3 dc;
  std::vector<Vec3> control;
};

inline BasisFields basis_fields(const FieldKernel& kernel, const Vec3& r) {
  BasisFields out;
  out.rf = kernel.field(r, kernel.channel(FieldKernel::kRF));
  out.dc = kernel.field(r, kernel.channel(FieldKernel::kDC));
  out.control.reserve(static_cast<std::size_t>(kernel.num_voltages()));
  for (int j = 0; j < kernel.num_voltages(); ++j)
    out.control.push_back(kernel.field(r, kernel.channel(2 + j)));
  return out;
}

inline BasisFields basis_fields(const TrapGeometry& geom, const Vec3& r) {
  return basis_fields(FieldKernel(geom), r);
}

/// h = sqrt(ab + a^2): height of the RF null above a symmetric five-wire
/// trap with central half-gap a and rail width b.
inline double ion_height(double a, double b) {
  if (!(a > 0) || !(b >= 0)) throw std::invalid_argument("ion_height requires a > 0 and b >= 0");
  return std::sqrt(a * b + a * a);
}

/// Prefactor Q^2 V_rf^2 / (4 m Omega^2) multiplying |E_rf_unit|^2.
inline double pseudo_prefactor(const DriveConfig& drive, const IonSpecies& ion) {
  return ion.charge * ion.charge * drive.V_rf * drive.V_rf /
         (4.0 * ion.mass * drive.omega * drive.omega);
}

inline double pseudo_potential(const FieldKernel& kernel, const DriveConfig& drive,
                               const IonSpecies& ion, const Vec3& r) {
  const Vec3 e = kernel.field(r, kernel.channel(FieldKernel::kRF));
  return pseudo_prefactor(drive, ion) * norm2(e);
}

inline double pseudo_potential(const TrapGeometry& geom, const DriveConfig& drive,
                               const IonSpecies& ion, const Vec3& r) {
  return pseudo_potential(FieldKernel(geom), drive, ion, r);
}

/// Time-averaged ponderomotive force -grad(V_ps) in newtons.
inline Vec3 pseudo_force(const FieldKernel& kernel, const DriveConfig& drive, const IonSpecies& ion,
                         const Vec3& r) {
  const auto w = kernel.channel(FieldKernel::kRF);
  const Vec3 e = kernel.field(r, w);
  const Sym3 h = kernel.hessian(r, w);
  // grad|E|^2 = 2 J^T E with J = -H.
  return 2.0 * pseudo_prefactor(drive, ion) * (h * e);
}

/// Pseudopotential trap depth of the symmetric five-wire trap.
inline double trap_depth(const TrapGeometry& geom, const DriveConfig& drive, const IonSpecies& ion) {
  // The closed form is written for the full central gap width.
  const double a = 2.0 * geom.a, b = geom.b;
  const double s = b / ((a + b) * (a + b) + (a + b) * std::sqrt(2.0 * a * b + a * a));
  const double q = ion.charge * drive.V_rf / drive.omega;
  return q * q / (constants::pi * constants::pi * ion.mass) * s * s;
}

/// Instantaneous trap field in V/m.
inline Vec3 total_field(const FieldKernel& kernel, const DriveConfig& drive,
                        std::span<const double> voltages, double t, const Vec3& r) {
  const auto w = kernel.mix(drive.V_rf * std::cos(drive.omega * t), drive.V_dc, voltages);
  return kernel.field(r, w);
}

inline Vec3 total_field(const TrapGeometry& geom, const DriveConfig& drive,
                        std::span<const double> voltages, double t, const Vec3& r) {
  detail::require(static_cast<int>(voltages.size()) == geom.num_voltages(),
                  "voltage vector length does not match the number of control channels");
  return total_field(FieldKernel(geom), drive, voltages, t, r);
}

/// Static electric potential (V) of DC strip and control electrodes.
inline double static_potential(const FieldKernel& kernel, double v_dc, std::span<const double> voltages,
                               const Vec3& r) {
  return kernel.potential(r, kernel.mix(0.0, v_dc, voltages));
}

}  // namespace itrap

namespace itrap {

/// Height of the RF field null above (x, y), bracketed in [z_lo, z_hi], by
/// golden-section search on |E_rf|^2.
inline double rf_null_height(const FieldKernel& kernel, double z_lo, double z_hi, double x = 0.0,
                             double y = 0.0) {
  detail::require(z_lo > 0 && z_hi > z_lo, "rf_null_height needs 0 < z_lo < z_hi");
  const auto w = kernel.channel(FieldKernel::kRF);
  auto f = [&](double z) { return norm2(kernel.field({x, y, z}, w)); };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = z_lo, b = z_hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-13 * b; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace itrap
