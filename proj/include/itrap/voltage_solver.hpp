#pragma once

// Force-balance design system for the control voltages and two bounded
// linear least-squares solvers for it: an active-set bounded-variable method
// (free variables solved unconstrained, bound variables held fixed) and an
// interior trust-region reflective method with Coleman-Li scaling.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "itrap/chain_targets.hpp"
#include "itrap/errors.hpp"
#include "itrap/gl_fields.hpp"
#include "itrap/linalg.hpp"

namespace itrap {

using linalg::Matrix;
using linalg::Vector;

struct DesignSystem {
  Matrix A;   // rows: (x, y, z) per included ion; cols: control voltages
  Vector b;   // V/m
  Vector lo;  // V
  Vector hi;  // V
  std::vector<int> row_ion;  // ion index of each row

  std::size_t rows() const { return A.rows(); }
  std::size_t cols() const { return A.cols(); }

  void set_bounds(double v_max) {
    lo.assign(cols(), -v_max);
    hi.assign(cols(), v_max);
  }

  Vector residual(std::span<const double> v) const {
    Vector r = linalg::matvec(A, v);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
  }

  double chi2(std::span<const double> v) const {
    if (cols() == 0) return linalg::dot(b, b);
    const auto r = residual(v);
    return linalg::dot(r, r);
  }

  void validate() const {
    if (b.size() != A.rows()) throw std::invalid_argument("design system: b has wrong length");
    if (lo.size() != A.cols() || hi.size() != A.cols())
      throw std::invalid_argument("design system: bounds have wrong length");
    for (std::size_t j = 0; j < lo.size(); ++j)
      if (!(lo[j] <= hi[j])) throw std::invalid_argument("design system: lo > hi");
    for (double v : A.data())
      if (!std::isfinite(v)) throw NumericalError("design system: non-finite matrix entry");
    for (double v : b)
      if (!std::isfinite(v)) throw NumericalError("design system: non-finite target entry");
  }
};

enum class SolverTag { BVLS, TRF };

inline const char* to_string(SolverTag s) { return s == SolverTag::BVLS ? "BVLS" : "TRF"; }

struct VoltageSolution {
  Vector v;
  double chi2 = 0.0;
  SolverTag solver = SolverTag::BVLS;
  int iterations = 0;
  bool converged = true;
  std::vector<int> active_bounds;
};

/// Projected gradient of ||Av - b||^2 / 2: zero at a KKT point.
inline Vector projected_gradient(const DesignSystem& sys, std::span<const double> v) {
  const auto g = linalg::matvec_t(sys.A, sys.residual(v));
  Vector pg(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    double gj = g[j];
    if (v[j] <= sys.lo[j]) gj = std::min(gj, 0.0);
    if (v[j] >= sys.hi[j]) gj = std::max(gj, 0.0);
    pg[j] = gj;
  }
  return pg;
}

inline std::vector<int> active_set(const DesignSystem& sys, std::span<const double> v) {
  std::vector<int> out;
  for (std::size_t j = 0; j < v.size(); ++j)
    if (v[j] <= sys.lo[j] || v[j] >= sys.hi[j]) out.push_back(static_cast<int>(j));
  return out;
}

/// Assembles the per-ion force balance
///   sum_k V_k E_k(r_i) = -F_ps(r_i)/Q - V_dc E_dc(r_i) - C_i
/// where F_ps is the time-averaged RF (ponderomotive) force and C_i the field
/// of the other ions. Excluded ions still contribute to C_i of the others.
inline DesignSystem assemble(const FieldKernel& kernel, const DriveConfig& drive,
                             const IonSpecies& ion, const TargetConfiguration& target,
                             double v_max = std::numeric_limits<double>::infinity()) {
  drive.validate();
  ion.validate();
  if (target.coulomb_field.size() != target.positions.size())
    throw std::invalid_argument("target: coulomb_field and positions differ in length");
  for (int e : target.excluded)
    if (e < 0 || e >= static_cast<int>(target.size()))
      throw std::invalid_argument("target: excluded index out of range");
  const std::size_t ncol = static_cast<std::size_t>(kernel.num_voltages());
  std::vector<int> ions;
  for (int i = 0; i < static_cast<int>(target.size()); ++i)
    if (!target.is_excluded(i)) ions.push_back(i);

  DesignSystem sys;
  sys.A = Matrix(3 * ions.size(), ncol);
  sys.b.assign(3 * ions.size(), 0.0);
  std::size_t row = 0;
  for (int i : ions) {
    const Vec3& r = target.positions[static_cast<std::size_t>(i)];
    if (!(r.z > 0)) throw ConfigError("target ion below the electrode plane");
    const auto basis = basis_fields(kernel, r);
    const Vec3 fps = drive.V_rf != 0.0 ? pseudo_force(kernel, drive, ion, r) : Vec3{};
    const Vec3 rhs =
        -(fps / ion.charge) - drive.V_dc * basis.dc - target.coulomb_field[static_cast<std::size_t>(i)];
    for (int c = 0; c < 3; ++c) {
      for (std::size_t k = 0; k < ncol; ++k) sys.A(row, k) = basis.control[k][c];
      sys.b[row] = rhs[c];
      sys.row_ion.push_back(i);
      ++row;
    }
  }
  sys.set_bounds(v_max);
  sys.validate();
  return sys;
}

inline DesignSystem assemble(const TrapGeometry& geom, const DriveConfig& drive, const IonSpecies& ion,
                             const TargetConfiguration& target,
                             double v_max = std::numeric_limits<double>::infinity()) {
  geom.validate();
  return assemble(FieldKernel(geom), drive, ion, target, v_max);
}

namespace detail {

inline int iteration_cap(std::size_t n) { return static_cast<int>(std::max<std::size_t>(10 * n * n, 10)); }

inline VoltageSolution empty_solution(const DesignSystem& sys, SolverTag tag) {
  VoltageSolution s;
  s.chi2 = sys.chi2(s.v);
  s.solver = tag;
  return s;
}

inline void finish(const DesignSystem& sys, VoltageSolution& s) {
  for (std::size_t j = 0; j < s.v.size(); ++j) s.v[j] = std::clamp(s.v[j], sys.lo[j], sys.hi[j]);
  s.chi2 = sys.chi2(s.v);
  s.active_bounds = active_set(sys, s.v);
}

/// Least squares on the free columns with the others held at their values.
inline Vector solve_free(const DesignSystem& sys, const std::vector<std::size_t>& free,
                         std::span<const double> x) {
  Vector rhs = sys.b;
  for (std::size_t j = 0; j < sys.cols(); ++j) {
    if (std::find(free.begin(), free.end(), j) != free.end() || x[j] == 0.0) continue;
    for (std::size_t i = 0; i < sys.rows(); ++i) rhs[i] -= sys.A(i, j) * x[j];
  }
  return linalg::lstsq(sys.A.select_columns(free), rhs);
}

}  // namespace detail

/// Bounded-variable least squares (active-set).
inline VoltageSolution solve_bvls(const DesignSystem& sys) {
  sys.validate();
  const std::size_t n = sys.cols();
  if (n == 0) return detail::empty_solution(sys, SolverTag::BVLS);
  if (sys.rows() == 0) throw std::invalid_argument("solve_bvls: system has no rows");

  enum State { Free, Lower, Upper };
  std::vector<State> state(n, Free);
  Vector x = linalg::lstsq(sys.A, sys.b);
  for (std::size_t j = 0; j < n; ++j) {
    if (x[j] <= sys.lo[j]) {
      x[j] = sys.lo[j];
      state[j] = Lower;
    } else if (x[j] >= sys.hi[j]) {
      x[j] = sys.hi[j];
      state[j] = Upper;
    }
    if (sys.lo[j] == sys.hi[j]) state[j] = Lower;
  }

  std::vector<double> col_norm(n);
  for (std::size_t j = 0; j < n; ++j) col_norm[j] = linalg::norm2(sys.A.column(j));
  const double bnorm = linalg::norm2(sys.b);

  const int cap = detail::iteration_cap(n);
  int iter = 0;
  bool converged = false;
  std::vector<bool> blocked(n, false);

  // Solves the free set and walks back to feasibility, pushing variables that
  // hit a bound into the bound set. Returns false if the cap was exhausted.
  auto settle = [&]() {
    while (iter < cap) {
      std::vector<std::size_t> free;
      for (std::size_t j = 0; j < n; ++j)
        if (state[j] == Free) free.push_back(j);
      if (free.empty()) return true;
      ++iter;
      const Vector z = detail::solve_free(sys, free, x);
      double alpha = 1.0;
      std::size_t limiting = n;
      for (std::size_t k = 0; k < free.size(); ++k) {
        const std::size_t j = free[k];
        double t;
        if (z[k] < sys.lo[j]) t = (sys.lo[j] - x[j]) / (z[k] - x[j]);
        else if (z[k] > sys.hi[j]) t = (sys.hi[j] - x[j]) / (z[k] - x[j]);
        else continue;
        t = std::clamp(t, 0.0, 1.0);
        if (limiting == n || t < alpha) {
          alpha = t;
          limiting = j;
        }
      }
      if (limiting == n) {
        for (std::size_t k = 0; k < free.size(); ++k) x[free[k]] = z[k];
        return true;
      }
      for (std::size_t k = 0; k < free.size(); ++k) {
        const std::size_t j = free[k];
        x[j] += alpha * (z[k] - x[j]);
        const bool at_lo = x[j] <= sys.lo[j] || (j == limiting && z[k] < sys.lo[j]);
        const bool at_hi = x[j] >= sys.hi[j] || (j == limiting && z[k] > sys.hi[j]);
        if (at_lo) {
          x[j] = sys.lo[j];
          state[j] = Lower;
        } else if (at_hi) {
          x[j] = sys.hi[j];
          state[j] = Upper;
        }
      }
    }
    return false;
  };

  settle();
  while (iter < cap) {
    const auto g = linalg::matvec_t(sys.A, sys.residual(x));  // gradient / 2
    std::size_t pick = n;
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (state[j] == Free || blocked[j] || sys.lo[j] == sys.hi[j] || col_norm[j] == 0.0) continue;
      const double tol = 1e-13 * col_norm[j] * bnorm;
      // Moving off the bound lowers chi2 when -g points into the box.
      const double viol = state[j] == Lower ? -g[j] : g[j];
      if (viol > tol && viol / col_norm[j] > best) {
        best = viol / col_norm[j];
        pick = j;
      }
    }
    if (pick == n) {
      converged = true;
      break;
    }
    const State from = state[pick];
    state[pick] = Free;
    // Guard against immediately re-binding on the same side (rounding).
    {
      std::vector<std::size_t> free;
      for (std::size_t j = 0; j < n; ++j)
        if (state[j] == Free) free.push_back(j);
      const Vector z = detail::solve_free(sys, free, x);
      const auto k = static_cast<std::size_t>(std::find(free.begin(), free.end(), pick) - free.begin());
      const bool wrong = (from == Lower && z[k] <= sys.lo[pick]) || (from == Upper && z[k] >= sys.hi[pick]);
      if (wrong) {
        state[pick] = from;
        blocked[pick] = true;
        ++iter;
        continue;
      }
    }
    std::fill(blocked.begin(), blocked.end(), false);
    if (!settle()) break;
  }

  VoltageSolution s;
  s.v = std::move(x);
  s.solver = SolverTag::BVLS;
  s.iterations = iter;
  s.converged = converged;
  detail::finish(sys, s);
  return s;
}

namespace detail {

// Coleman-Li scaling vector and its derivative sign.
inline void cl_scaling(std::span<const double> x, std::span<const double> g, const DesignSystem& sys,
                       Vector& v, Vector& dv) {
  const std::size_t n = x.size();
  v.assign(n, 1.0);
  dv.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (g[j] < 0 && std::isfinite(sys.hi[j])) {
      v[j] = sys.hi[j] - x[j];
      dv[j] = -1.0;
    } else if (g[j] > 0 && std::isfinite(sys.lo[j])) {
      v[j] = x[j] - sys.lo[j];
      dv[j] = 1.0;
    }
  }
}

inline bool strictly_inside(std::span<const double> x, const DesignSystem& sys) {
  for (std::size_t j = 0; j < x.size(); ++j)
    if (!(x[j] > sys.lo[j] && x[j] < sys.hi[j])) return false;
  return true;
}

// Largest t with x + t s inside the box, and the components that hit first.
inline double step_to_bound(std::span<const double> x, std::span<const double> s, const DesignSystem& sys,
                            std::vector<int>* hits = nullptr) {
  double t = std::numeric_limits<double>::infinity();
  std::vector<double> per(x.size(), t);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (s[j] > 0) per[j] = (sys.hi[j] - x[j]) / s[j];
    else if (s[j] < 0) per[j] = (sys.lo[j] - x[j]) / s[j];
    t = std::min(t, per[j]);
  }
  if (hits) {
    hits->assign(x.size(), 0);
    for (std::size_t j = 0; j < x.size(); ++j)
      if (per[j] == t) (*hits)[j] = s[j] > 0 ? 1 : -1;
  }
  return std::max(t, 0.0);
}

inline Vector strictly_feasible(Vector x, const DesignSystem& sys, double rstep) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double lo = sys.lo[j], hi = sys.hi[j];
    if (lo == hi) {
      x[j] = lo;
      continue;
    }
    if (x[j] <= lo) {
      x[j] = rstep == 0 ? std::nextafter(lo, hi) : lo + rstep * std::max(1.0, std::abs(lo));
    } else if (x[j] >= hi) {
      x[j] = rstep == 0 ? std::nextafter(hi, lo) : hi - rstep * std::max(1.0, std::abs(hi));
    }
    if (!(x[j] > lo && x[j] < hi)) x[j] = 0.5 * (lo + hi);
  }
  return x;
}

// q(s) = 0.5 ||A_h s||^2 + 0.5 s^T diag s + g.s
struct ScaledModel {
  const Matrix& A;      // original matrix
  const Vector& d;      // column scaling
  const Vector& g_h;    // scaled gradient
  const Vector& diag;   // c_h

  Vector apply(std::span<const double> s) const {
    Vector t(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) t[j] = d[j] * s[j];
    return linalg::matvec(A, t);
  }
  double value(std::span<const double> s) const {
    const auto as = apply(s);
    double q = 0.5 * linalg::dot(as, as) + linalg::dot(g_h, s);
    for (std::size_t j = 0; j < s.size(); ++j) q += 0.5 * diag[j] * s[j] * s[j];
    return q;
  }
  // Coefficients of q(s0 + t s) = a t^2 + b t + c.
  void quadratic_1d(std::span<const double> s, std::span<const double> s0, double& a, double& b,
                    double& c) const {
    const auto as = apply(s);
    const auto as0 = apply(s0);
    a = 0.5 * linalg::dot(as, as);
    b = linalg::dot(as, as0) + linalg::dot(g_h, s);
    c = 0.5 * linalg::dot(as0, as0) + linalg::dot(g_h, s0);
    for (std::size_t j = 0; j < s.size(); ++j) {
      a += 0.5 * diag[j] * s[j] * s[j];
      b += diag[j] * s0[j] * s[j];
      c += 0.5 * diag[j] * s0[j] * s0[j];
    }
  }
};

inline std::pair<double, double> minimize_1d(double a, double b, double c, double lo, double hi) {
  auto f = [&](double t) { return (a * t + b) * t + c; };
  double bt = lo, bv = f(lo);
  if (f(hi) < bv) {
    bt = hi;
    bv = f(hi);
  }
  if (a > 0) {
    const double t = -b / (2 * a);
    if (t > lo && t < hi && f(t) < bv) {
      bt = t;
      bv = f(t);
    }
  }
  return {bt, bv};
}

// Exact active-set cleanup of an interior-point estimate: variables that sit
// within `rel` of a bound they are pressed against are pinned, the rest
// re-solved. Returns true if a feasible KKT point with lower chi2 was found.
inline bool polish(const DesignSystem& sys, Vector& x, double& chi2, double rel) {
  const std::size_t n = sys.cols();
  const auto g = linalg::matvec_t(sys.A, sys.residual(x));
  Vector y = x;
  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = std::max(sys.hi[j] - sys.lo[j], 1e-300);
    if (sys.lo[j] == sys.hi[j]) y[j] = sys.lo[j];
    else if (g[j] > 0 && (x[j] - sys.lo[j]) <= rel * w) y[j] = sys.lo[j];
    else if (g[j] < 0 && (sys.hi[j] - x[j]) <= rel * w) y[j] = sys.hi[j];
    else free.push_back(j);
  }
  if (!free.empty()) {
    const auto z = solve_free(sys, free, y);
    for (std::size_t k = 0; k < free.size(); ++k) {
      const std::size_t j = free[k];
      if (z[k] < sys.lo[j] || z[k] > sys.hi[j]) return false;
      y[free[k]] = z[k];
    }
  }
  const double c = sys.chi2(y);
  if (c <= chi2) {
    x = std::move(y);
    chi2 = c;
    return true;
  }
  return false;
}

}  // namespace detail

/// Trust-region reflective bounded least squares. Each iteration builds the
/// Coleman-Li scaled Gauss-Newton step; steps leaving the box are reflected
/// off the first bound hit, and the best of {truncated, reflected,
/// anti-gradient} by the scaled quadratic model is taken. Iterates stay
/// strictly interior; a final active-set cleanup pins variables the
/// iterates converge onto.
inline VoltageSolution solve_trf(const DesignSystem& sys) {
  sys.validate();
  const std::size_t n = sys.cols();
  const std::size_t m = sys.rows();
  if (n == 0) return detail::empty_solution(sys, SolverTag::TRF);
  if (m == 0) throw std::invalid_argument("solve_trf: system has no rows");

  Vector x = detail::strictly_feasible(linalg::lstsq(sys.A, sys.b), sys, 0.1);
  Vector r = sys.residual(x);
  double cost = 0.5 * linalg::dot(r, r);
  Vector g = linalg::matvec_t(sys.A, r);

  const double scale = linalg::frobenius(sys.A) * std::max(linalg::norm2(sys.b), 1e-300);
  const int cap = detail::iteration_cap(n);
  int iter = 0, stalls = 0;
  bool converged = false;
  Vector v, dv;
  for (; iter < cap; ++iter) {
    detail::cl_scaling(x, g, sys, v, dv);
    double g_norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) g_norm = std::max(g_norm, std::abs(g[j] * v[j]));
    if (g_norm <= 1e-15 * scale * std::max(1.0, linalg::norm2(x))) {
      converged = true;
      break;
    }
    Vector d(n), diag_h(n), g_h(n);
    for (std::size_t j = 0; j < n; ++j) {
      d[j] = std::sqrt(std::abs(v[j]));
      diag_h[j] = g[j] * dv[j];
      g_h[j] = d[j] * g[j];
    }
    // Scaled Gauss-Newton step: min || [A D; diag_h^(1/2)] p_h + [r; 0] ||.
    Matrix aug(m + n, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) aug(i, j) = sys.A(i, j) * d[j];
    for (std::size_t j = 0; j < n; ++j) aug(m + j, j) = std::sqrt(std::max(diag_h[j], 0.0));
    Vector rhs(m + n, 0.0);
    for (std::size_t i = 0; i < m; ++i) rhs[i] = -r[i];
    Vector p_h = linalg::lstsq(aug, rhs);
    Vector p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = d[j] * p_h[j];
    const double theta = 1.0 - std::min(0.005, g_norm / scale);

    const detail::ScaledModel model{sys.A, d, g_h, diag_h};
    Vector step;
    {
      Vector xt(n);
      for (std::size_t j = 0; j < n; ++j) xt[j] = x[j] + p[j];
      if (detail::strictly_inside(xt, sys)) {
        step = p;
      } else {
        std::vector<int> hits;
        const double stride = detail::step_to_bound(x, p, sys, &hits);
        Vector rh = p_h;
        for (std::size_t j = 0; j < n; ++j)
          if (hits[j] != 0) rh[j] = -rh[j];
        Vector rr(n), ph_b(n), x_on(n);
        for (std::size_t j = 0; j < n; ++j) {
          rr[j] = d[j] * rh[j];
          ph_b[j] = p_h[j] * stride;
          x_on[j] = x[j] + p[j] * stride;
        }
        // Reflected candidate.
        double r_value = std::numeric_limits<double>::infinity();
        Vector r_step;
        double ru = detail::step_to_bound(x_on, rr, sys);
        const double rl = (1 - theta) * ru;
        ru *= theta;
        if (ru > 0 && std::isfinite(ru)) {
          double a, bq, c;
          model.quadratic_1d(rh, ph_b, a, bq, c);
          const auto [t, val] = detail::minimize_1d(a, bq, c, rl, ru);
          r_value = val;
          r_step.resize(n);
          for (std::size_t j = 0; j < n; ++j) r_step[j] = d[j] * (ph_b[j] + rh[j] * t);
        }
        // Truncated candidate.
        Vector ph_t(n), p_t(n);
        for (std::size_t j = 0; j < n; ++j) {
          ph_t[j] = ph_b[j] * theta;
          p_t[j] = d[j] * ph_t[j];
        }
        const double p_value = model.value(ph_t);
        // Anti-gradient candidate.
        Vector ag_h(n), ag(n);
        for (std::size_t j = 0; j < n; ++j) {
          ag_h[j] = -g_h[j];
          ag[j] = d[j] * ag_h[j];
        }
        double agu = detail::step_to_bound(x, ag, sys) * theta;
        if (!std::isfinite(agu)) agu = 1.0;
        double a, bq, c;
        const Vector zero(n, 0.0);
        model.quadratic_1d(ag_h, zero, a, bq, c);
        const auto [ta, ag_value] = detail::minimize_1d(a, bq, c, 0.0, agu);
        for (auto& e : ag) e *= ta;

        if (p_value < r_value && p_value < ag_value) step = p_t;
        else if (r_value < p_value && r_value < ag_value) step = r_step;
        else step = ag;
      }
    }
    // Exact change of the objective for a linear model.
    auto cost_change_of = [&](const Vector& s) {
      const auto as = linalg::matvec(sys.A, s);
      return -(0.5 * linalg::dot(as, as) + linalg::dot(g, s));
    };
    double change = cost_change_of(step);
    if (!(change > 0)) {
      // Backtrack along p inside the box.
      double alpha = theta * std::min(1.0, detail::step_to_bound(x, p, sys));
      bool ok = false;
      for (int k = 0; k < 60; ++k, alpha *= 0.5) {
        Vector s(n);
        for (std::size_t j = 0; j < n; ++j) s[j] = alpha * p[j];
        const double ch = cost_change_of(s);
        if (ch > 0) {
          step = std::move(s);
          change = ch;
          ok = true;
          break;
        }
      }
      if (!ok) {
        converged = true;
        break;
      }
    }
    Vector xn(n);
    for (std::size_t j = 0; j < n; ++j) xn[j] = x[j] + step[j];
    x = detail::strictly_feasible(std::move(xn), sys, 0.0);
    r = sys.residual(x);
    const double new_cost = 0.5 * linalg::dot(r, r);
    g = linalg::matvec_t(sys.A, r);
    if (cost - new_cost <= 1e-15 * cost) {
      if (++stalls >= 3) {
        cost = new_cost;
        converged = true;
        break;
      }
    } else {
      stalls = 0;
    }
    cost = new_cost;
  }

  double chi2 = sys.chi2(x);
  for (double rel : {1e-12, 1e-9, 1e-6, 1e-3}) detail::polish(sys, x, chi2, rel);

  VoltageSolution s;
  s.v = std::move(x);
  s.solver = SolverTag::TRF;
  s.iterations = iter;
  s.converged = converged;
  detail::finish(sys, s);
  return s;
}

/// Runs both solvers and keeps the lower chi2 (BVLS on ties).
inline VoltageSolution solve_best(const DesignSystem& sys) {
  auto a = solve_bvls(sys);
  auto b = solve_trf(sys);
  return b.chi2 < a.chi2 ? b : a;
}

/// sigma_max / sigma_min of A; infinity when the smallest singular value
/// vanishes relative to the largest.
inline double condition_number(const Matrix& A) {
  if (A.rows() == 0 || A.cols() == 0) throw std::invalid_argument("condition_number: empty matrix");
  const auto s = linalg::singular_values(A);
  if (s.front() == 0.0) throw std::invalid_argument("condition_number: zero matrix");
  const double smin = s.back();
  if (smin <= s.front() * std::numeric_limits<double>::min() || smin == 0.0)
    return std::numeric_limits<double>::infinity();
  return s.front() / smin;
}

}  // namespace itrap
