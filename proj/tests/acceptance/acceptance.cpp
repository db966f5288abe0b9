// One line per acceptance criterion; exits nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "degenbeam/degenbeam.hpp"

using namespace degenbeam;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

SystemMatrices system_for(double alpha, int n, BoundaryRegime regime, Grading g = Grading::uniform()) {
  Coefficient a = Coefficient::power_law(alpha);
  return assemble(a, classify(a), build_mesh(n, g), regime);
}

// 1. Adjoint energy drift, 128 elements, 10^4 steps.
Outcome energy_conservation() {
  const double tol = 1e-10;
  double worst = 0.0;
  for (double alpha : {0.5, 1.5}) {
    SystemMatrices sys = system_for(alpha, 128, BoundaryRegime::adjoint());
    auto modes = eigenmodes(sys, 3);
    BeamState s{0.0, modes[0].shape + 0.5 * modes[1].shape, modes[2].shape};
    Trajectory traj = simulate(sys, s, 1.0, 1e-4);
    worst = std::max(worst, conservation_drift(traj, sys));
  }
  return {worst <= tol, fmt("max relative drift %.3e <= %.0e", worst, tol)};
}

// 2. Feedback dissipation identity per step.
Outcome dissipation_identity() {
  const double tol = 1e-8;
  SystemMatrices sys = system_for(0.5, 64, BoundaryRegime::feedback(1.0, 1.0));
  auto modes = eigenmodes(sys, 3);
  BeamState s{0.0, modes[0].shape + modes[1].shape, 2.0 * modes[2].shape};
  Trajectory traj = simulate(sys, s, 2.0, 1.0 / 512);
  IdentityResidual r = dissipation_residual(traj, sys);
  return {r.residual <= tol, fmt("max per-step residual %.3e <= %.0e", r.residual, tol)};
}

// 3. Both multiplier identities over three dyadic refinements.
Outcome multiplier_identities() {
  const double tol = 1e-2;
  bool ok = true;
  std::string detail;
  for (double alpha : {0.5, 1.5}) {
    Coefficient a = Coefficient::power_law(alpha);
    std::vector<double> r2, r1;
    for (int n : {8, 16, 32, 64}) {
      SystemMatrices sys = assemble(a, classify(a), build_mesh(n), BoundaryRegime::adjoint());
      auto modes = eigenmodes(sys, 1);
      BeamState s{0.0, modes[0].shape, Vec::Zero(sys.size())};
      Trajectory traj = simulate(sys, s, 1.0, 0.16 / n);
      r2.push_back(multiplier_identity_x2(traj, sys, a).residual);
      r1.push_back(multiplier_identity_x(traj, sys, a).residual);
    }
    for (const auto* r : {&r2, &r1}) {
      for (std::size_t k = 1; k < r->size(); ++k) ok = ok && (*r)[k] < (*r)[k - 1];
      ok = ok && r->back() <= tol;
    }
    detail += fmt("x^%.1f final x2 %.2e, x %.2e; ", alpha, r2.back(), r1.back());
  }
  return {ok, detail + fmt("monotone, final <= %.0e", tol)};
}

// 4. Controllability constants for x^(1/2).
Outcome controllability() {
  ControllabilityConstants c = controllability_constants(0.5, 1.0);
  bool ok = c.T0 == 1.8 && c.CT_lower(2.0) == 0.5;
  return {ok, fmt("T0 = %.17g, CT_lower(2) = %.17g", c.T0, c.CT_lower(2.0))};
}

// 5. Observability quotient over the 5 lowest modes.
Outcome observability() {
  SystemMatrices sys = system_for(0.5, 64, BoundaryRegime::adjoint());
  auto modes = eigenmodes(sys, 5);
  double lowest = INFINITY, bound = 0.0;
  for (const auto& m : modes) {
    BeamState s{0.0, m.shape, Vec::Zero(sys.size())};
    ObservabilityReport r = observability_quotient(s, 2.0, sys, 1.0 / 512, 0.10);
    lowest = std::min(lowest, r.scaled_quotient);
    bound = r.CT_lower_bound * (1.0 - r.slack);
  }
  return {lowest >= bound, fmt("min quotient %.4f >= %.2f", lowest, bound)};
}

// 6. HUM null control, verified on a fresh run.
Outcome null_control() {
  const double tol = 1e-6;
  SystemMatrices sys = system_for(0.5, 64, BoundaryRegime::adjoint());
  auto modes = eigenmodes(sys, 1);
  const double T = 2.0, dt = sys.mesh.max_width() / 4.0;
  NullControlProblem p(sys, T, dt);
  Vec u0 = modes[0].shape, u1 = Vec::Zero(sys.size());
  ControlResult r = solve_null_control(p, u0, u1, 1e-8, 4000);
  double verified = verify_null_control(r, u0, u1, sys, T);
  return {r.converged && verified <= tol,
          fmt("CG %g iterations, verified ratio %.3e <= %.0e", r.cg_iterations, verified, tol)};
}

// 7. Decay envelope over 5M for five initial data.
Outcome decay_envelope_check() {
  Coefficient a = Coefficient::power_law(0.5);
  ConstantsReport rep = stability_constants(a, classify(a), 1.0, 1.0);
  const double M = envelope_rate(rep), horizon = 5.0 * M;
  const int steps = 10000;
  SystemMatrices sys = system_for(0.5, 32, BoundaryRegime::feedback(1.0, 1.0));
  auto modes = eigenmodes(sys, 4);
  std::vector<BeamState> data;
  for (int k = 0; k < 4; ++k) data.push_back({0.0, modes[k].shape, Vec::Zero(sys.size())});
  data.push_back({0.0, modes[0].shape + 0.5 * modes[1].shape, std::sqrt(modes[0].omega_squared) * modes[0].shape});
  double worst = 0.0;
  for (const auto& s : data) {
    auto env = decay_envelope(rep, energy(s, sys));
    Trajectory traj = simulate(sys, s, horizon, horizon / steps);
    for (const auto& st : traj.states) worst = std::max(worst, energy(st, sys) / env(st.t));
  }
  return {worst <= 1.0, fmt("M = %.2f, max E/envelope %.3f <= 1", M, worst)};
}

// 8. Hardy-Poincare inequality.
Outcome hardy_poincare() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0), coef(-2.0, 2.0);
  int held = 0;
  for (int i = 0; i < 100; ++i) {
    double alpha = 0.05 + 0.9 * u01(rng);
    double theta = alpha + (0.999 - alpha) * u01(rng);
    double c1 = coef(rng), c2 = coef(rng), c3 = coef(rng), p = 1.0 + 2.0 * u01(rng);
    ScalarFunction w{[=](double x) { return c1 * x + c2 * std::pow(x, p) + c3 * std::sin(M_PI * x); },
                     [=](double x) { return c1 + c2 * p * std::pow(x, p - 1.0) + c3 * M_PI * std::cos(M_PI * x); }};
    held += hardy_poincare_check(Coefficient::power_law(alpha), theta, w).holds;
  }
  ScalarFunction lin{[](double x) { return x; }, [](double) { return 1.0; }};
  HardyPoincareResult r = hardy_poincare_check(Coefficient::power_law(0.5), 0.5, lin);
  double factor = r.rhs / r.lhs;
  bool ok = held == 100 && std::abs(factor - 16.0) <= 1e-9 && hardy_poincare_constant(0.5) == 16.0;
  return {ok, fmt("%g/100 hold, analytic factor %.12g", held, factor)};
}

// 9. Elliptic problem against the closed form, plus both estimates.
Outcome elliptic() {
  Coefficient a = Coefficient::power_law(0.5);
  PowerLawEllipticOracle o = power_law_elliptic_oracle(0.5, 1.0, 1.0, 1.0, 0.0);
  std::vector<double> err;
  bool bounds = true;
  double triple_slack = INFINITY, l2_slack = INFINITY;
  for (int n : {32, 64, 128}) {
    EllipticSolution s = solve_boundary_elliptic(a, classify(a), build_mesh(n, Grading::power(6.0)), 1.0, 1.0, 1.0, 0.0);
    double e = 0.0;
    for (std::size_t i = 0; i < s.mesh.nodes.size(); ++i) {
      e = std::max(e, std::abs(s.z[value_dof(static_cast<int>(i))] - o.value(s.mesh.nodes[i])));
    }
    err.push_back(e);
    EllipticCheck c = elliptic_estimate_check(s, a);
    bounds = bounds && c.triple_holds && c.l2_holds;
    triple_slack = std::min(triple_slack, c.triple_slack);
    l2_slack = std::min(l2_slack, c.l2_slack);
  }
  double rate = std::min(std::log2(err[0] / err[1]), std::log2(err[1] / err[2]));
  return {rate >= 2.0 && bounds,
          fmt("rate %.2f >= 2; slack triple %.4f, l2 %.4f", rate, triple_slack, l2_slack)};
}

// 10. Weakly degenerate constants against their general counterparts.
Outcome wd_constants() {
  Coefficient a = Coefficient::power_law(0.5);
  const double beta = 1.0, gamma = 1.0;
  ConstantsReport r = stability_constants(a, classify(a), beta, gamma);
  const WdVariants& w = *r.wd_variants;
  EllipticSolution s = solve_boundary_elliptic(a, classify(a), build_mesh(32), beta, gamma, 1.0, 1.0);
  const double rel = 1.0 + 1e-12;
  bool ok = w.C_beta <= 2.0 / beta && w.C_gamma <= 2.0 / gamma && w.A_gamma <= r.C2 &&
            s.wd->bound_C <= *s.bound_C * rel && s.wd->l2_bound <= *s.l2_bound * rel && w.chain.M <= r.chain.M * rel;
  return {ok, fmt("C_beta %.3g <= 2/beta, C_gamma %.3g <= 2/gamma, A_gamma %.3g <= C2", w.C_beta, w.C_gamma,
                  w.A_gamma)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"energy conservation", energy_conservation},
      {"dissipation identity", dissipation_identity},
      {"multiplier identities", multiplier_identities},
      {"controllability constants", controllability},
      {"observability quotient", observability},
      {"null control", null_control},
      {"decay envelope", decay_envelope_check},
      {"hardy-poincare", hardy_poincare},
      {"elliptic problem", elliptic},
      {"wd constants", wd_constants},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%2zu] %s  %-26s %s (%.1f s)\n", i + 1, o.passed ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.passed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
