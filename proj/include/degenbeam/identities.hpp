#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "degenbeam/coeff.hpp"
#include "degenbeam/dynamics.hpp"
#include "degenbeam/errors.hpp"
#include "degenbeam/femdisc.hpp"
#include "degenbeam/quadrature.hpp"

namespace degenbeam {

struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> energies;
  RegimeKind regime = RegimeKind::Adjoint;
};

struct IdentityResidual {
  std::string identity;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double h = 0.0;
  double dt = 0.0;
};

inline double relative_residual(double lhs, double rhs) {
  return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

inline IdentityResidual make_residual(std::string name, double lhs, double rhs, double h, double dt) {
  return {std::move(name), lhs, rhs, relative_residual(lhs, rhs), h, dt};
}

inline EnergyTrace energy_trace(const Trajectory& traj, const SystemMatrices& sys) {
  EnergyTrace out;
  out.regime = sys.regime.kind;
  for (const auto& s : traj.states) {
    out.times.push_back(s.t);
    out.energies.push_back(energy(s, sys));
  }
  return out;
}

inline double conservation_drift(const Trajectory& traj, const SystemMatrices& sys) {
  if (traj.regime != RegimeKind::Adjoint || sys.regime.kind != RegimeKind::Adjoint) {
    throw WrongRegimeError("conservation drift needs an adjoint-regime trajectory");
  }
  if (traj.states.empty()) return 0.0;
  double e0 = energy(traj.states.front(), sys);
  if (e0 == 0.0) return 0.0;
  double drift = 0.0;
  for (const auto& s : traj.states) drift = std::max(drift, std::abs(energy(s, sys) - e0) / e0);
  return drift;
}

enum class DissipationQuadrature { MidpointAverage, Trapezoid };

// Largest per-step residual of E(t+dt) - E(t) = -(boundary velocity power)
// integrated over the step.
inline IdentityResidual dissipation_residual(
    const Trajectory& traj, const SystemMatrices& sys,
    DissipationQuadrature rule = DissipationQuadrature::MidpointAverage) {
  if (traj.regime != RegimeKind::Feedback || sys.regime.kind != RegimeKind::Feedback) {
    throw WrongRegimeError("dissipation identity needs a feedback-regime trajectory");
  }
  IdentityResidual worst = make_residual("dissipation", 0.0, 0.0, sys.mesh.max_width(), traj.dt);
  const int iv = sys.trace_value, ir = sys.trace_rotation;
  for (int n = 0; n + 1 < static_cast<int>(traj.states.size()); ++n) {
    const BeamState& a = traj.states[n];
    const BeamState& b = traj.states[n + 1];
    double lhs = energy(b, sys) - energy(a, sys);
    double power;
    if (rule == DissipationQuadrature::MidpointAverage) {
      double yt = 0.5 * (a.v[iv] + b.v[iv]), ytx = 0.5 * (a.v[ir] + b.v[ir]);
      power = yt * yt + ytx * ytx;
    } else {
      power = 0.5 * (a.v[iv] * a.v[iv] + a.v[ir] * a.v[ir] + b.v[iv] * b.v[iv] + b.v[ir] * b.v[ir]);
    }
    double rhs = -traj.dt * power;
    IdentityResidual r = make_residual("dissipation", lhs, rhs, worst.h, traj.dt);
    if (r.residual > worst.residual || n == 0) worst = r;
  }
  return worst;
}

// Quadrature points over the mesh with precomputed Hermite basis values.
// The first element is refined dyadically toward 0 where a' may blow up.
class FieldQuadrature {
 public:
  struct Point {
    int element;
    double x, weight;
    HermiteBasis basis;
  };

  explicit FieldQuadrature(const BeamMesh& mesh, int gauss_points = 6, int levels = 40) {
    GaussRule rule = gauss_legendre(gauss_points);
    for (int e = 0; e < mesh.elements(); ++e) {
      double x0 = mesh.nodes[e], h = mesh.width(e);
      std::vector<std::pair<double, double>> cells;
      if (e == 0) {
        double right = 1.0;
        for (int k = 0; k < levels; ++k) {
          cells.emplace_back(0.5 * right, right);
          right *= 0.5;
        }
      } else {
        cells.emplace_back(0.0, 1.0);
      }
      for (auto [lo, hi] : cells) {
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          double xi = lo + (hi - lo) * rule.nodes[q];
          points_.push_back({e, x0 + h * xi, rule.weights[q] * (hi - lo) * h, hermite_basis(xi, h)});
        }
      }
    }
  }

  const std::vector<Point>& points() const { return points_; }

  // sum_q w_q F(x, y, y_x, y_xx, y_t) for displacement u and velocity v.
  template <class F>
  double integrate(const Vec& u, const Vec& v, F&& integrand) const {
    double sum = 0.0;
    for (const auto& p : points_) {
      const int base = 2 * p.element;
      double y = 0, yx = 0, yxx = 0, yt = 0;
      for (int i = 0; i < 4; ++i) {
        y += u[base + i] * p.basis.v[i];
        yx += u[base + i] * p.basis.d1[i];
        yxx += u[base + i] * p.basis.d2[i];
        yt += v[base + i] * p.basis.v[i];
      }
      sum += p.weight * integrand(p.x, y, yx, yxx, yt);
    }
    return sum;
  }

 private:
  std::vector<Point> points_;
};

inline double trapezoid(const std::vector<double>& values, double dt) {
  if (values.size() < 2) return 0.0;
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
  return s * dt;
}

namespace detail {

inline void require_adjoint_traces(const Trajectory& traj) {
  if (traj.regime != RegimeKind::Adjoint) {
    throw WrongRegimeError("multiplier identities need an adjoint-regime trajectory");
  }
  if (traj.traces.size() != traj.states.size() || traj.states.empty()) {
    throw InvalidArgumentError("trajectory is missing boundary traces");
  }
}

inline double boundary_term(const Trajectory& traj, double a1) {
  std::vector<double> sq;
  sq.reserve(traj.traces.size());
  for (const auto& tr : traj.traces) sq.push_back(tr.y_xx * tr.y_xx);
  return 0.5 * a1 * trapezoid(sq, traj.dt);
}

}  // namespace detail

// Identity from the multiplier x^2 y_x:
//   1/2 a(1) int_0^T y_xx(t,1)^2 dt = [int x^2 y_t y_x dx]_0^T + int int x y_t^2
//       + int int (3 x a - x^2 a'/2) y_xx^2 - int int a' y_x^2.
inline IdentityResidual multiplier_identity_x2(const Trajectory& traj, const SystemMatrices& sys,
                                               const Coefficient& a) {
  detail::require_adjoint_traces(traj);
  FieldQuadrature quad(sys.mesh);
  double lhs = detail::boundary_term(traj, sys.a_at_one);
  auto bracket = [&](const BeamState& s) {
    return quad.integrate(s.u, s.v, [](double x, double, double yx, double, double yt) {
      return x * x * yt * yx;
    });
  };
  std::vector<double> dist;
  dist.reserve(traj.states.size());
  for (const auto& s : traj.states) {
    dist.push_back(quad.integrate(s.u, s.v, [&](double x, double, double yx, double yxx, double yt) {
      double ax = a(x), dax = a.derivative(x);
      return x * yt * yt + (3.0 * x * ax - 0.5 * x * x * dax) * yxx * yxx - dax * yx * yx;
    }));
  }
  double rhs = bracket(traj.states.back()) - bracket(traj.states.front()) + trapezoid(dist, traj.dt);
  return make_residual("multiplier_x2", lhs, rhs, sys.mesh.max_width(), traj.dt);
}

// Identity from the multiplier x y_x:
//   1/2 a(1) int_0^T y_xx(t,1)^2 dt = [int x y_t y_x dx]_0^T + 1/2 int int y_t^2
//       + 1/2 int int (3a - x a') y_xx^2.
inline IdentityResidual multiplier_identity_x(const Trajectory& traj, const SystemMatrices& sys,
                                              const Coefficient& a) {
  detail::require_adjoint_traces(traj);
  FieldQuadrature quad(sys.mesh);
  double lhs = detail::boundary_term(traj, sys.a_at_one);
  auto bracket = [&](const BeamState& s) {
    return quad.integrate(s.u, s.v, [](double x, double, double yx, double, double yt) {
      return x * yt * yx;
    });
  };
  std::vector<double> dist;
  dist.reserve(traj.states.size());
  for (const auto& s : traj.states) {
    dist.push_back(quad.integrate(s.u, s.v, [&](double x, double, double, double yxx, double yt) {
      return 0.5 * yt * yt + 0.5 * (3.0 * a(x) - x * a.derivative(x)) * yxx * yxx;
    }));
  }
  double rhs = bracket(traj.states.back()) - bracket(traj.states.front()) + trapezoid(dist, traj.dt);
  return make_residual("multiplier_x", lhs, rhs, sys.mesh.max_width(), traj.dt);
}

struct ScalarFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

struct HardyPoincareResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

inline double hardy_poincare_constant(double theta) { return 4.0 / ((1.0 - theta) * (1.0 - theta)); }

// int (a/x^2) w^2 <= C_HP int a w'^2 for w(0) = 0, when a/x^theta is
// nonincreasing.
inline HardyPoincareResult hardy_poincare_check(const Coefficient& a, double theta,
                                                const ScalarFunction& w, double tol = 1e-9) {
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgumentError("theta must lie in (0, 1)");
  if (std::abs(w.value(0.0)) > 1e-14) throw InvalidArgumentError("w must vanish at 0");
  std::vector<double> grid = default_sample_grid(2000, 1e-8);
  double prev = INFINITY;
  for (double x : grid) {
    double r = a(x) / std::pow(x, theta);
    if (r > prev * (1.0 + 1e-12)) {
      throw InvalidArgumentError("a(x)/x^theta is not nonincreasing on the sample grid");
    }
    prev = r;
  }
  const int levels = 60;
  double lhs = integrate_graded(
      [&](double x) {
        double wx = w.value(x);
        return a(x) / (x * x) * wx * wx;
      },
      0.0, 1.0, levels, 16);
  double rhs_int = integrate_graded(
      [&](double x) {
        double dw = w.derivative(x);
        return a(x) * dw * dw;
      },
      0.0, 1.0, levels, 16);
  // Innermost cell (0, x1): a/x^2 <= (a(x1)/x1^theta) x^(theta-2) and w ~ x w(x1)/x1.
  double x1 = std::ldexp(1.0, -levels);
  double w1 = w.value(x1), dw1 = w.derivative(x1);
  lhs += a(x1) * w1 * w1 / (x1 * (theta + 1.0));
  rhs_int += a(x1) * dw1 * dw1 * x1;
  HardyPoincareResult out;
  out.lhs = lhs;
  out.rhs = hardy_poincare_constant(theta) * rhs_int;
  out.holds = out.lhs <= out.rhs * (1.0 + tol);
  return out;
}

enum class NormSpace { H2a0, K2a0 };

struct NormCheck {
  double l2_sq = 0.0;         // ||u||^2
  double slope_sq = 0.0;      // ||u'||^2
  double weighted_sq = 0.0;   // int a u''^2
  double rotation_sq = 0.0;   // |u'(1)|^2
  // Chain of upper bounds, in the order they appear.
  std::vector<double> chain;
  bool holds = true;
};

inline NormCheck norm_equivalence_check(const SystemMatrices& sys, const Coefficient& a,
                                        const DegeneracyClass& cls, NormSpace space, const Vec& u,
                                        double tol = 1e-9) {
  (void)a;
  const int last = sys.mesh.elements();
  std::vector<int> constrained{value_dof(0)};
  if (cls.weak()) constrained.push_back(slope_dof(0));
  if (space == NormSpace::H2a0) {
    constrained.push_back(value_dof(last));
    constrained.push_back(slope_dof(last));
  }
  double scale = std::max(1.0, u.cwiseAbs().maxCoeff());
  for (int d : constrained) {
    if (std::abs(u[d]) > 1e-12 * scale) throw InvalidArgumentError("vector violates the space constraints");
  }
  NormCheck r;
  r.l2_sq = u.dot(sys.M * u);
  r.slope_sq = u.dot(sys.G * u);
  r.weighted_sq = u.dot(sys.S * u);
  r.rotation_sq = u[slope_dof(last)] * u[slope_dof(last)];
  const double c = 1.0 / (sys.a_at_one * (2.0 - cls.K));
  auto le = [&](double x, double y) { return x <= y * (1.0 + tol) + 1e-14; };
  if (space == NormSpace::H2a0) {
    r.chain = {r.l2_sq, r.slope_sq, c * r.weighted_sq};
  } else {
    r.chain = {r.l2_sq, r.slope_sq, 2.0 * (r.rotation_sq + c * r.weighted_sq),
               2.0 * std::max(1.0, c) * (r.rotation_sq + r.weighted_sq)};
    // |u'(1)|^2 <= 2(int a u''^2 / (a(1)(2-K)) + ||u'||^2)
    r.holds = le(r.rotation_sq, 2.0 * (c * r.weighted_sq + r.slope_sq));
  }
  for (std::size_t i = 0; i + 1 < r.chain.size(); ++i) r.holds = r.holds && le(r.chain[i], r.chain[i + 1]);
  return r;
}

}  // namespace degenbeam
