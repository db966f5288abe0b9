#pragma once

#include <Eigen/SparseCholesky>

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "degenbeam/constants.hpp"
#include "degenbeam/dynamics.hpp"
#include "degenbeam/errors.hpp"
#include "degenbeam/femdisc.hpp"
#include "degenbeam/identities.hpp"

namespace degenbeam {

// Terminal data (v(T), v_t(T)) of the backward clamped problem, as full dof
// vectors.
struct AdjointData {
  Vec v0T;
  Vec v1T;
};

struct GramianImage {
  std::vector<double> trace;   // v_xx(t_n, 1), n = 0..N
  std::vector<double> output;  // discrete boundary output of the scheme's transpose, n = 0..N
  Vec v_at_zero;               // v(0)
  Vec vt_at_zero;              // v_t(0)
};

struct CgStep {
  double residual = 0.0;  // relative residual in the dual energy norm
  double objective = 0.0;  // 1/2 x'Hx - x'b
};

struct ControlResult {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<double> f;  // rotation drive at x = 1
  int cg_iterations = 0;
  double cg_residual = 0.0;
  bool converged = false;
  double terminal_energy_ratio = 0.0;
  double cost = 0.0;   // int f^2
  int sign = 1;        // orientation kept by the verification run
  double discarded_ratio = 0.0;  // terminal energy ratio of the opposite sign
  double lambda_star = 0.0;      // Lambda(V*, V*)
  bool below_T0 = false;
  std::vector<CgStep> history;
  AdjointData adjoint;  // V* (up to the recorded sign)
};

// Controlled/adjoint pair sharing one factorization. The controlled scheme
// is the implicit midpoint map with the rotation at x = 1 driven by samples
// g_0..g_N; its control-to-terminal-state map F and the exact transpose of F
// (a backward clamped solve) give the discrete Gramian F W^-1 F^T with
// W = a(1) dt I. Samples g_0, g_1, g_{N-1}, g_N are held at zero so the
// driven dof starts and ends at rest.
class NullControlProblem {
 public:
  NullControlProblem(const SystemMatrices& adjoint_system, double T, double dt)
      : adjoint_(adjoint_system), T_(T) {
    if (adjoint_.regime.kind != RegimeKind::Adjoint) {
      throw WrongRegimeError("null control needs the adjoint-regime matrices");
    }
    controlled_ = adjoint_;
    controlled_.regime = BoundaryRegime::controlled();
    controlled_.dofs = make_dof_map(static_cast<int>(adjoint_.mesh.nodes.size()), adjoint_.cls,
                                    controlled_.regime);
    if (controlled_.dofs.free != adjoint_.dofs.free) throw Error("adjoint and controlled free dofs differ");
    steps_ = step_count(T, dt);
    dt_ = T / steps_;
    if (steps_ < 5) throw InvalidArgumentError("null control needs at least 5 time steps");
    stepper_ = std::make_unique<MidpointStepper>(controlled_, dt_, false);
    const auto& f = adjoint_.dofs.free;
    Kf_solver_.compute(submatrix(adjoint_.S, f, f));
    Mf_solver_.compute(stepper_->mass());
    if (Kf_solver_.info() != Eigen::Success || Mf_solver_.info() != Eigen::Success) {
      throw Error("failed to factor the energy inner product");
    }
  }

  NullControlProblem(const NullControlProblem&) = delete;
  NullControlProblem& operator=(const NullControlProblem&) = delete;

  double dt() const { return dt_; }
  int steps() const { return steps_; }
  double T() const { return T_; }
  const SystemMatrices& adjoint_system() const { return adjoint_; }
  const SystemMatrices& controlled_system() const { return controlled_; }
  int free_size() const { return static_cast<int>(adjoint_.dofs.free.size()); }

  // Indices of samples that the control may move.
  int first_unknown() const { return 2; }
  int last_unknown() const { return steps_ - 2; }

  // Terminal free state of the controlled scheme from zero data.
  std::pair<Vec, Vec> apply_F(const std::vector<double>& g) const { return forward(g, nullptr, nullptr); }

  // Transpose of F applied to a dual terminal vector (lu, lv); the returned
  // vector has one entry per sample and (mu_u, mu_v) receives (P^T)^N (lu, lv).
  std::vector<double> apply_FT(const Vec& lu, const Vec& lv, Vec* mu_u = nullptr, Vec* mu_v = nullptr) const {
    const Vec& s = stepper_->drive_stiffness();
    const Vec& m = stepper_->drive_mass();
    const SpMat& Mf = stepper_->mass();
    const SpMat& Kf = stepper_->stiffness();
    const int N = steps_;
    std::vector<double> alpha(N), beta(N);
    Vec mu = lu, nu = lv;
    for (int n = N - 1; n >= 0; --n) {
      Vec rho = stepper_->solve((0.5 * dt_) * mu + nu);
      alpha[n] = s.dot(rho);
      beta[n] = m.dot(rho);
      mu -= dt_ * (Kf * rho);
      nu = 2.0 * (Mf * rho) - nu;
    }
    // c_n = -dt/2 s (g_n + g_{n+1}) - m (r_{n+1} - r_n), r = rate(g).
    std::vector<double> grad(N + 1, 0.0), rate_grad(N + 1, 0.0);
    for (int n = 0; n < N; ++n) {
      grad[n] -= 0.5 * dt_ * alpha[n];
      grad[n + 1] -= 0.5 * dt_ * alpha[n];
      rate_grad[n + 1] -= beta[n];
      rate_grad[n] += beta[n];
    }
    // Transpose of Drive::rate.
    grad[0] += -rate_grad[0] / dt_;
    grad[1] += rate_grad[0] / dt_;
    grad[N] += rate_grad[N] / dt_;
    grad[N - 1] += -rate_grad[N] / dt_;
    for (int k = 1; k < N; ++k) {
      grad[k + 1] += rate_grad[k] / (2.0 * dt_);
      grad[k - 1] -= rate_grad[k] / (2.0 * dt_);
    }
    if (mu_u) *mu_u = mu;
    if (mu_v) *mu_v = nu;
    return grad;
  }

  // Dual vector paired with terminal adjoint data (phi, phi_t):
  // (-M phi_t, M phi).
  std::pair<Vec, Vec> dual_of(const Vec& phi, const Vec& phi_t) const {
    return {-(stepper_->mass() * phi_t), stepper_->mass() * phi};
  }

  // Control samples generated by terminal adjoint data on the free dofs.
  std::vector<double> control_from(const Vec& phi, const Vec& phi_t) const {
    auto [lu, lv] = dual_of(phi, phi_t);
    std::vector<double> g = apply_FT(lu, lv);
    const double scale = 1.0 / (adjoint_.a_at_one * dt_);
    for (int n = 0; n <= steps_; ++n) {
      g[n] = (n >= first_unknown() && n <= last_unknown()) ? g[n] * scale : 0.0;
    }
    return g;
  }

  // H (phi, phi_t): the discrete Gramian as a form on terminal adjoint data.
  std::pair<Vec, Vec> apply_H(const Vec& phi, const Vec& phi_t) const {
    auto [zu, zv] = apply_F(control_from(phi, phi_t));
    return {stepper_->mass() * zv, -(stepper_->mass() * zu)};
  }

  // Free terminal state reached from (u0, u1) with the rotation held at 0.
  std::pair<Vec, Vec> free_evolution(const Vec& u0, const Vec& u1) const {
    std::vector<double> zero(steps_ + 1, 0.0);
    Vec uf = restrict_to(adjoint_.dofs, u0), vf = restrict_to(adjoint_.dofs, u1);
    return forward(zero, &uf, &vf);
  }

  // The functional W -> <u1, w(0)> - int u0 w_t(0) as a vector on
  // terminal data, obtained from one forward free evolution (the midpoint
  // map preserves the pairing u_t' M w - u' M w_t).
  std::pair<Vec, Vec> rhs_vector(const Vec& u0, const Vec& u1) const {
    auto [uN, vN] = free_evolution(u0, u1);
    return {stepper_->mass() * vN, -(stepper_->mass() * uN)};
  }

  std::pair<Vec, Vec> precondition(const Vec& ru, const Vec& rv) const {
    return {Kf_solver_.solve(ru), Mf_solver_.solve(rv)};
  }

  double initial_energy(const Vec& u0, const Vec& u1) const {
    return 0.5 * (u1.dot(adjoint_.M * u1) + u0.dot(adjoint_.S * u0));
  }

  Trajectory run_controlled(const Vec& u0, const Vec& u1, const std::vector<double>& f) const {
    Drive drive{f, dt_};
    BeamState s{0.0, u0, u1};
    return simulate(controlled_, s, T_, dt_, &drive);
  }

 private:
  std::pair<Vec, Vec> forward(const std::vector<double>& g, const Vec* u0, const Vec* v0) const {
    const int nf = free_size();
    Vec u = u0 ? *u0 : Vec::Zero(nf);
    Vec v = v0 ? *v0 : Vec::Zero(nf);
    Drive drive{g, dt_};
    for (int n = 0; n < steps_; ++n) {
      DriveStep d{drive.value(n), drive.value(n + 1), drive.rate(n), drive.rate(n + 1)};
      Vec load = stepper_->drive_load(d);
      stepper_->advance(u, v, &load);
    }
    return {u, v};
  }

  SystemMatrices adjoint_;
  SystemMatrices controlled_;
  double T_;
  double dt_ = 0.0;
  int steps_ = 0;
  std::unique_ptr<MidpointStepper> stepper_;
  Eigen::SimplicialLDLT<SpMat> Kf_solver_, Mf_solver_;
};

// Backward clamped solve from terminal data: Hermite trace v_xx(t,1), the
// transpose output used by the solver, and (v(0), v_t(0)).
inline GramianImage gramian_apply(const NullControlProblem& p, const AdjointData& data) {
  const SystemMatrices& sys = p.adjoint_system();
  BeamState terminal{p.T(), constrain(sys.dofs, data.v0T), constrain(sys.dofs, data.v1T)};
  Trajectory back = simulate_backward(sys, terminal, p.T(), p.dt());
  GramianImage img;
  for (const auto& tr : back.traces) img.trace.push_back(tr.y_xx);
  img.v_at_zero = back.states.front().u;
  img.vt_at_zero = back.states.front().v;
  Vec phi = restrict_to(sys.dofs, terminal.u), phi_t = restrict_to(sys.dofs, terminal.v);
  img.output = p.control_from(phi, phi_t);
  return img;
}

// a(1) int_0^T v_xx(t,1) w_xx(t,1) dt by the trapezoid rule.
inline double gramian_pairing(const NullControlProblem& p, const GramianImage& v, const GramianImage& w) {
  std::vector<double> prod(v.trace.size());
  for (std::size_t n = 0; n < prod.size(); ++n) prod[n] = v.trace[n] * w.trace[n];
  return p.adjoint_system().a_at_one * trapezoid(prod, p.dt());
}

// The same pairing for the discrete Gramian the solver inverts.
inline double discrete_gramian_pairing(const NullControlProblem& p, const GramianImage& v, const GramianImage& w) {
  double s = 0.0;
  for (std::size_t n = 0; n < v.output.size(); ++n) s += v.output[n] * w.output[n];
  return p.adjoint_system().a_at_one * p.dt() * s;
}

// <u1, w(0)> - int u0 w_t(0) dx via one backward solve from W.
inline double rhs_functional(const NullControlProblem& p, const Vec& u0, const Vec& u1, const AdjointData& W) {
  GramianImage img = gramian_apply(p, W);
  const SpMat& M = p.adjoint_system().M;
  return u1.dot(M * img.v_at_zero) - u0.dot(M * img.vt_at_zero);
}

inline double verify_null_control(const ControlResult& result, const Vec& u0, const Vec& u1,
                                  const SystemMatrices& adjoint_system, double T) {
  // Fresh matrices and factorization.
  NullControlProblem fresh(adjoint_system, T, result.dt);
  double e0 = fresh.initial_energy(u0, u1);
  Trajectory traj = fresh.run_controlled(u0, u1, result.f);
  double eT = energy(traj.states.back(), fresh.controlled_system());
  if (e0 == 0.0) return eT == 0.0 ? 0.0 : INFINITY;
  return eT / e0;
}

inline ControlResult solve_null_control(const NullControlProblem& p, const Vec& u0_full, const Vec& u1_full,
                                        double cg_tol = 1e-8, int max_iter = 2000) {
  if (!(cg_tol > 0.0)) throw InvalidArgumentError("cg_tol must be positive");
  const SystemMatrices& sys = p.adjoint_system();
  Vec u0 = constrain(sys.dofs, u0_full), u1 = constrain(sys.dofs, u1_full);
  ControlResult res;
  res.dt = p.dt();
  for (int n = 0; n <= p.steps(); ++n) res.times.push_back(n * p.dt());
  res.f.assign(p.steps() + 1, 0.0);
  res.below_T0 = p.T() <= controllability_constants(sys.cls.K, sys.a_at_one).T0;
  const int nf = p.free_size();
  res.adjoint = {Vec::Zero(sys.size()), Vec::Zero(sys.size())};

  auto [bu, bv] = p.rhs_vector(u0, u1);
  auto [zu0, zv0] = p.precondition(bu, bv);
  const double norm0 = std::sqrt(std::max(0.0, bu.dot(zu0) + bv.dot(zv0)));
  if (norm0 == 0.0) {
    res.converged = true;
    return res;
  }
  // Preconditioned CG for H x = b on terminal data x = (phi, phi_t), in the
  // inner product phi' S phi + phi_t' M phi_t.
  Vec xu = Vec::Zero(nf), xv = Vec::Zero(nf);
  Vec ru = bu, rv = bv;
  Vec zu = zu0, zv = zv0;
  Vec pu = zu, pv = zv;
  double rz = ru.dot(zu) + rv.dot(zv);
  for (int it = 0; it < max_iter; ++it) {
    auto [qu, qv] = p.apply_H(pu, pv);
    double pq = pu.dot(qu) + pv.dot(qv);
    if (!(pq > 0.0)) break;
    double alpha = rz / pq;
    xu += alpha * pu;
    xv += alpha * pv;
    ru -= alpha * qu;
    rv -= alpha * qv;
    auto z = p.precondition(ru, rv);
    zu = z.first;
    zv = z.second;
    double rz_new = ru.dot(zu) + rv.dot(zv);
    res.cg_iterations = it + 1;
    res.cg_residual = std::sqrt(std::max(0.0, rz_new)) / norm0;
    // Hx = b - r, so the objective is -x'(b + r) / 2.
    res.history.push_back({res.cg_residual, -0.5 * (xu.dot(bu + ru) + xv.dot(bv + rv))});
    if (res.cg_residual <= cg_tol) {
      res.converged = true;
      break;
    }
    double beta = rz_new / rz;
    rz = rz_new;
    pu = zu + beta * pu;
    pv = zv + beta * pv;
  }

  std::vector<double> g = p.control_from(xu, xv);
  auto [hu, hv] = p.apply_H(xu, xv);
  res.lambda_star = xu.dot(hu) + xv.dot(hv);
  // Keep whichever orientation brings the state to rest.
  double e0 = p.initial_energy(u0, u1);
  double best = INFINITY;
  for (int sign : {1, -1}) {
    std::vector<double> f(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) f[n] = sign * g[n];
    Trajectory traj = p.run_controlled(u0, u1, f);
    double ratio = energy(traj.states.back(), p.controlled_system()) / e0;
    if (ratio < best) {
      if (std::isfinite(best)) res.discarded_ratio = best;
      best = ratio;
      res.sign = sign;
      res.f = f;
    } else {
      res.discarded_ratio = ratio;
    }
  }
  res.terminal_energy_ratio = best;
  std::vector<double> sq(res.f.size());
  for (std::size_t n = 0; n < sq.size(); ++n) sq[n] = res.f[n] * res.f[n];
  res.cost = trapezoid(sq, p.dt());
  res.adjoint = {expand_from(sys.dofs, res.sign * xu), expand_from(sys.dofs, res.sign * xv)};
  return res;
}

}  // namespace degenbeam
