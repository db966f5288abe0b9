#pragma once

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "degenbeam/errors.hpp"
#include "degenbeam/femdisc.hpp"

namespace degenbeam {

struct BeamState {
  double t = 0.0;
  Vec u;  // full dof vector
  Vec v;
};

struct BoundaryTrace {
  double t = 0.0;
  double energy = 0.0;
  double y = 0.0, y_x = 0.0, y_t = 0.0, y_tx = 0.0, y_xx = 0.0;
};

struct Trajectory {
  double dt = 0.0;
  RegimeKind regime = RegimeKind::Adjoint;
  std::vector<BeamState> states;  // increasing time
  std::vector<BoundaryTrace> traces;

  int steps() const { return static_cast<int>(states.size()) - 1; }
};

// Rotation samples g_n = f(t_n) on the time grid, n = 0..N.
struct Drive {
  std::vector<double> samples;
  double dt = 0.0;

  double value(int n) const { return samples[n]; }
  // Central differences inside, one-sided at both ends.
  double rate(int n) const {
    const int N = static_cast<int>(samples.size()) - 1;
    if (N == 0) return 0.0;
    if (n == 0) return (samples[1] - samples[0]) / dt;
    if (n == N) return (samples[N] - samples[N - 1]) / dt;
    return (samples[n + 1] - samples[n - 1]) / (2.0 * dt);
  }
};

struct DriveStep {
  double g0 = 0.0, g1 = 0.0;        // rotation at t and t + dt
  double rate0 = 0.0, rate1 = 0.0;  // its time derivative at t and t + dt
};

// Sparse products accumulated in long double. The stiffness rows cancel to
// roughly h^4 of their entries, so plain double sums leak energy over 1e4 steps.
inline long double quadratic_form(const SpMat& A, const Vec& x) {
  long double s = 0.0L;
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      s += static_cast<long double>(x[it.row()]) * it.value() * x[it.col()];
    }
  }
  return s;
}

// alpha A x + beta B y.
inline Vec combine_products(double alpha, const SpMat& A, const Vec& x, double beta, const SpMat& B, const Vec& y) {
  std::vector<long double> acc(A.rows(), 0.0L);
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      acc[it.row()] += static_cast<long double>(alpha) * it.value() * x[it.col()];
    }
  }
  for (int k = 0; k < B.outerSize(); ++k) {
    for (SpMat::InnerIterator it(B, k); it; ++it) {
      acc[it.row()] += static_cast<long double>(beta) * it.value() * y[it.col()];
    }
  }
  Vec out(A.rows());
  for (int i = 0; i < out.size(); ++i) out[i] = static_cast<double>(acc[i]);
  return out;
}

inline double energy(const BeamState& s, const SystemMatrices& sys) {
  return static_cast<double>(0.5L * (quadratic_form(sys.M, s.v) + quadratic_form(sys.S, s.u) +
                                     quadratic_form(sys.B, s.u)));
}

inline BoundaryTrace boundary_trace(const BeamState& s, const SystemMatrices& sys) {
  BoundaryTrace tr;
  tr.t = s.t;
  tr.energy = energy(s, sys);
  tr.y = s.u[sys.trace_value];
  tr.y_x = s.u[sys.trace_rotation];
  tr.y_t = s.v[sys.trace_value];
  tr.y_tx = s.v[sys.trace_rotation];
  tr.y_xx = second_derivative_trace(s.u, sys.mesh);
  return tr;
}

// Implicit midpoint map on the free dofs. With w = v+ + v the update is
//   (M + dt/2 D + dt^2/4 K) w = 2 M v - dt K u + c,
//   u+ = u + dt/2 w,  v+ = w - v,
// where K = S + B and c carries the columns of driven dofs.
class MidpointStepper {
 public:
  // refine = false skips the refinement solve; the adjoint recursion in the
  // control solver only needs the same operator forward and backward.
  MidpointStepper(const SystemMatrices& sys, double dt, bool refine = true) : sys_(&sys), dt_(dt), refine_(refine) {
    const auto& f = sys.dofs.free;
    SpMat K = stiffness_with_boundary(sys);
    Mf_ = submatrix(sys.M, f, f);
    Kf_ = submatrix(K, f, f);
    Df_ = submatrix(sys.D, f, f);
    if (sys.dofs.driven >= 0) {
      s_drive_ = column(K, f, sys.dofs.driven);
      m_drive_ = column(sys.M, f, sys.dofs.driven);
    }
    A_ = Mf_ + (0.5 * dt) * Df_ + (0.25 * dt * dt) * Kf_;
    solver_ = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(A_);
    if (solver_->info() != Eigen::Success) throw Error("midpoint system is singular");
  }

  double dt() const { return dt_; }
  const SystemMatrices& system() const { return *sys_; }
  const SpMat& mass() const { return Mf_; }
  const SpMat& stiffness() const { return Kf_; }
  const Vec& drive_stiffness() const { return s_drive_; }
  const Vec& drive_mass() const { return m_drive_; }

  // One step of refinement with the residual accumulated in long double.
  Vec solve(const Vec& rhs) const {
    Vec w = solver_->solve(rhs);
    if (refine_) w += solver_->solve(residual(rhs, w));
    return w;
  }

  // Load on the free rows produced by a driven rotation.
  Vec drive_load(const DriveStep& d) const {
    return (-0.5 * dt_ * (d.g0 + d.g1)) * s_drive_ - (d.rate1 - d.rate0) * m_drive_;
  }

  void advance(Vec& u, Vec& v, const Vec* load = nullptr) const {
    Vec rhs = combine_products(2.0, Mf_, v, -dt_, Kf_, u);
    if (load) rhs += *load;
    Vec w = solve(rhs);
    u += (0.5 * dt_) * w;
    v = w - v;
  }

  BeamState step(const BeamState& s, const DriveStep* drive = nullptr) const {
    const DofMap& map = sys_->dofs;
    if (map.driven >= 0 && !drive) throw InvalidArgumentError("controlled regime needs a drive");
    if (map.driven < 0 && drive) throw InvalidArgumentError("this regime has no driven dof");
    Vec u = restrict_to(map, s.u), v = restrict_to(map, s.v);
    if (drive) {
      Vec load = drive_load(*drive);
      advance(u, v, &load);
      return {s.t + dt_, expand_from(map, u, drive->g1), expand_from(map, v, drive->rate1)};
    }
    advance(u, v);
    return {s.t + dt_, expand_from(map, u), expand_from(map, v)};
  }

 private:
  Vec residual(const Vec& rhs, const Vec& w) const {
    std::vector<long double> acc(rhs.data(), rhs.data() + rhs.size());
    for (int k = 0; k < A_.outerSize(); ++k) {
      for (SpMat::InnerIterator it(A_, k); it; ++it) {
        acc[it.row()] -= static_cast<long double>(it.value()) * w[it.col()];
      }
    }
    Vec r(rhs.size());
    for (int i = 0; i < r.size(); ++i) r[i] = static_cast<double>(acc[i]);
    return r;
  }

  const SystemMatrices* sys_;
  double dt_;
  bool refine_;
  SpMat Mf_, Kf_, Df_, A_;
  Vec s_drive_, m_drive_;
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> solver_;
};

inline BeamState step_midpoint(const SystemMatrices& sys, const BeamState& s, double dt,
                               const DriveStep* drive = nullptr) {
  if (!(dt > 0.0)) throw InvalidArgumentError("dt must be positive");
  return MidpointStepper(sys, dt).step(s, drive);
}

inline int step_count(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw InvalidArgumentError("T and dt must be positive");
  return static_cast<int>(std::ceil(T / dt - 1e-9));
}

namespace detail {

inline Trajectory integrate(const SystemMatrices& sys, const BeamState& start, int steps, double dt,
                            const Drive* drive) {
  const bool driven = sys.dofs.driven >= 0;
  if (driven && !drive) throw InvalidArgumentError("controlled regime needs a drive");
  if (!driven && drive) throw InvalidArgumentError("this regime has no driven dof");
  if (drive) {
    if (static_cast<int>(drive->samples.size()) != steps + 1) {
      throw InvalidArgumentError("drive has " + std::to_string(drive->samples.size()) +
                                 " samples, expected " + std::to_string(steps + 1));
    }
    if (std::abs(drive->dt - std::abs(dt)) > 1e-12 * std::abs(dt)) {
      throw InvalidArgumentError("drive sampling step does not match dt");
    }
  }
  MidpointStepper stepper(sys, dt);
  Trajectory traj;
  traj.dt = std::abs(dt);
  traj.regime = sys.regime.kind;
  traj.states.reserve(steps + 1);
  traj.traces.reserve(steps + 1);
  BeamState s = start;
  if (drive) {
    s.u[sys.dofs.driven] = drive->value(0);
    s.v[sys.dofs.driven] = drive->rate(0);
  }
  traj.states.push_back(s);
  traj.traces.push_back(boundary_trace(s, sys));
  for (int n = 0; n < steps; ++n) {
    if (drive) {
      DriveStep d{drive->value(n), drive->value(n + 1), drive->rate(n), drive->rate(n + 1)};
      s = stepper.step(s, &d);
    } else {
      s = stepper.step(s);
    }
    s.t = start.t + (n + 1) * dt;
    traj.states.push_back(s);
    traj.traces.push_back(boundary_trace(s, sys));
  }
  return traj;
}

}  // namespace detail

// T is split into ceil(T/dt) equal steps, so the final state sits at T.
inline Trajectory simulate(const SystemMatrices& sys, const BeamState& initial, double T, double dt,
                           const Drive* drive = nullptr) {
  int steps = step_count(T, dt);
  return detail::integrate(sys, initial, steps, T / steps, drive);
}

// Integrates from the terminal state at time T back to 0 with the same
// midpoint map and dt -> -dt. States are returned in increasing time.
inline Trajectory simulate_backward(const SystemMatrices& sys, const BeamState& terminal, double T,
                                    double dt) {
  int steps = step_count(T, dt);
  BeamState start = terminal;
  start.t = T;
  Trajectory traj = detail::integrate(sys, start, steps, -T / steps, nullptr);
  std::reverse(traj.states.begin(), traj.states.end());
  std::reverse(traj.traces.begin(), traj.traces.end());
  for (int n = 0; n <= steps; ++n) {
    traj.states[n].t = n * traj.dt;
    traj.traces[n].t = n * traj.dt;
  }
  return traj;
}

inline BeamState zero_state(const SystemMatrices& sys) {
  return {0.0, Vec::Zero(sys.size()), Vec::Zero(sys.size())};
}

}  // namespace degenbeam
