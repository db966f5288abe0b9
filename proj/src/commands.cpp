#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>

#include "degenbeam/degenbeam.hpp"

namespace degenbeam::app {

namespace {

namespace fs = std::filesystem;

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct Context {
  const RunConfig& config;
  fs::path out;
  Coefficient a;
  DegeneracyClass cls;
  BeamMesh mesh;
  Json results = Json::object();
  std::vector<Check> checks;
  std::vector<std::string> notes;

  void check(std::string name, bool passed, double value, double threshold) {
    checks.push_back({std::move(name), passed, value, threshold});
  }
  double dt_or(double fallback) const { return config.dt.value_or(fallback); }
  double T_or(double fallback) const { return config.T.value_or(fallback); }
};

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
    os << '\n';
  }
}

void write_trace_csv(const fs::path& path, const Trajectory& traj) {
  std::vector<std::vector<double>> rows;
  rows.reserve(traj.traces.size());
  for (const auto& t : traj.traces) rows.push_back({t.t, t.energy, t.y, t.y_x, t.y_t, t.y_tx, t.y_xx});
  write_csv(path, {"t", "energy", "y", "y_x", "y_t", "y_tx", "y_xx"}, rows);
}

// Same layout that file initial data expects.
void write_state_csv(const fs::path& path, const BeamState& s, const BeamMesh& mesh) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    int n = static_cast<int>(i);
    rows.push_back({mesh.nodes[i], s.u[value_dof(n)], s.u[slope_dof(n)], s.v[value_dof(n)], s.v[slope_dof(n)]});
  }
  write_csv(path, {"x", "y", "y_x", "y_t", "y_tx"}, rows);
}

Json residual_json(const IdentityResidual& r) {
  return {{"identity", r.identity}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"residual", r.residual},
          {"h", r.h},           {"dt", r.dt}};
}

Json chain_json(const DeltaChain& c) {
  return {{"delta", c.delta}, {"C_delta", c.C_delta}, {"C3", c.C3}, {"C4", c.C4},
          {"C5", c.C5},       {"M", c.M},             {"admissible", c.admissible}};
}

Json constants_json(const ConstantsReport& r) {
  Json j;
  j["K"] = r.K;
  j["a1"] = r.a1;
  j["norm_const"] = r.norm_const;
  if (r.C_HP) j["C_HP"] = *r.C_HP;
  j["T0"] = r.controllability.T0;
  j["rate"] = r.controllability.rate;
  j["offset"] = r.controllability.offset;
  if (r.T) j["T"] = *r.T;
  if (r.CT_lower) j["CT_lower"] = *r.CT_lower;
  if (r.cost_cT) j["cost_cT"] = *r.cost_cT;
  j["beta"] = r.beta;
  j["gamma"] = r.gamma;
  j["eps0"] = r.eps0;
  j["C1"] = r.C1;
  j["sigma"] = r.sigma_const;
  if (r.nu) {
    j["C2"] = r.C2;
    j["theta"] = r.theta_const;
    j["rho"] = r.rho_const;
    j["nu"] = *r.nu;
    j["delta_star"] = r.delta_star;
    j["chain"] = chain_json(r.chain);
  }
  if (r.wd_variants) {
    const auto& w = *r.wd_variants;
    j["wd"] = {{"A_gamma", w.A_gamma},   {"C_beta", w.C_beta}, {"C_gamma", w.C_gamma},
               {"theta", w.theta_wd},    {"rho", w.rho_wd},    {"nu", w.nu_wd},
               {"chain", chain_json(w.chain)}};
  }
  return j;
}

void require_regime(const RunConfig& c, std::initializer_list<const char*> kinds, const std::string& command) {
  for (const char* k : kinds) {
    if (c.regime.kind == k) return;
  }
  std::string list;
  for (const char* k : kinds) list += (list.empty() ? "" : " or ") + std::string(k);
  throw WrongRegimeError(command + " needs regime " + list + ", got " + c.regime.kind);
}

SystemMatrices system_for(Context& ctx, const BeamMesh& mesh) {
  return assemble(ctx.a, ctx.cls, mesh, make_regime(ctx.config.regime));
}

// ---------------------------------------------------------------------------

void cmd_classify(Context& ctx) {
  ctx.results["kind"] = to_string(ctx.cls.kind);
  ctx.results["K"] = ctx.cls.K;
  ctx.results["a_at_one"] = ctx.a(1.0);
  ctx.results["description"] = ctx.a.description();
  if (ctx.cls.weak() && !ctx.a.is_unit()) ctx.results["inv_a_l1"] = integral_one_over_a(ctx.a);
}

void cmd_constants(Context& ctx) {
  const RunConfig& c = ctx.config;
  double T = ctx.T_or(2.0);
  if (c.regime.kind == "feedback") {
    ConstantsReport r = stability_constants(ctx.a, ctx.cls, c.regime.beta, c.regime.gamma, T, c.options.delta,
                                            c.options.eps0);
    ctx.results = constants_json(r);
    ctx.results["envelope_M"] = envelope_rate(r);
    return;
  }
  ControllabilityConstants cc = controllability_constants(ctx.a, ctx.cls);
  Json& j = ctx.results;
  j["K"] = ctx.cls.K;
  j["a1"] = cc.a1;
  j["norm_const"] = 1.0 / (cc.a1 * (2.0 - ctx.cls.K));
  if (ctx.cls.weak() && ctx.cls.K > 0.0) j["C_HP"] = hardy_poincare_constant(ctx.cls.K);
  j["T0"] = cc.T0;
  j["rate"] = cc.rate;
  j["offset"] = cc.offset;
  j["T"] = T;
  j["CT_lower"] = cc.CT_lower(T);
  if (cc.CT_lower(T) > 0.0) j["cost_cT"] = cc.cost(T);
  j["observability_upper_factor"] = observability_upper_factor(cc.K, cc.a1, T);
}

void cmd_simulate(Context& ctx) {
  const RunConfig& c = ctx.config;
  SystemMatrices sys = system_for(ctx, ctx.mesh);
  BeamState s0 = make_initial_state(c.initial, sys);
  double T = ctx.T_or(1.0);
  double dt = ctx.dt_or(ctx.mesh.max_width() / 4.0);
  std::optional<Drive> drive;
  if (sys.dofs.driven >= 0) {
    if (c.options.drive.empty()) throw ConfigError("controlled simulate needs options.drive, a function of x = t");
    Expression f = Expression::parse(c.options.drive);
    int steps = step_count(T, dt);
    Drive d;
    d.dt = T / steps;
    for (int n = 0; n <= steps; ++n) d.samples.push_back(f(n * d.dt));
    drive = d;
  }
  Trajectory traj = simulate(sys, s0, T, dt, drive ? &*drive : nullptr);
  write_trace_csv(ctx.out / "trace.csv", traj);
  write_state_csv(ctx.out / "final_state.csv", traj.states.back(), ctx.mesh);

  double e0 = traj.traces.front().energy, eT = traj.traces.back().energy;
  ctx.results["steps"] = traj.steps();
  ctx.results["dt"] = traj.dt;
  ctx.results["T"] = T;
  ctx.results["E0"] = e0;
  ctx.results["ET"] = eT;
  if (sys.regime.kind == RegimeKind::Adjoint) {
    double drift = conservation_drift(traj, sys);
    ctx.results["drift"] = drift;
    ctx.check("energy_conservation", drift <= c.options.tol, drift, c.options.tol);
  } else if (sys.regime.kind == RegimeKind::Feedback) {
    IdentityResidual r = dissipation_residual(traj, sys);
    ctx.results["dissipation"] = residual_json(r);
    ctx.check("dissipation_identity", r.residual <= c.options.tol, r.residual, c.options.tol);
    double worst_rise = 0.0;
    for (std::size_t n = 1; n < traj.traces.size(); ++n) {
      worst_rise = std::max(worst_rise, (traj.traces[n].energy - traj.traces[n - 1].energy) / e0);
    }
    ctx.check("energy_nonincreasing", worst_rise <= 1e-12, worst_rise, 1e-12);
  }
}

void cmd_decay(Context& ctx) {
  const RunConfig& c = ctx.config;
  require_regime(c, {"feedback"}, "decay");
  ConstantsReport rep = stability_constants(ctx.a, ctx.cls, c.regime.beta, c.regime.gamma, std::nullopt,
                                            c.options.delta, c.options.eps0);
  const double M = envelope_rate(rep);
  const double T = ctx.T_or(5.0 * M);
  const double dt = ctx.dt_or(T / 1e4);
  SystemMatrices sys = system_for(ctx, ctx.mesh);
  std::vector<Eigenmode> modes = eigenmodes(sys, c.options.n_initial + 1);

  ctx.results["constants"] = constants_json(rep);
  ctx.results["M"] = M;
  ctx.results["T"] = T;
  Json runs = Json::array();
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header{"t"};
  bool all_ok = true;
  double worst_ratio = 0.0;
  for (int k = 0; k < c.options.n_initial; ++k) {
    BeamState s;
    std::string label;
    if (k == 0) {
      s = make_initial_state(c.initial, sys);
      label = "config";
    } else {
      // Mode k displaced and mode k moving, each at unit amplitude.
      const Eigenmode& m = modes[std::min<std::size_t>(k - 1, modes.size() - 1)];
      s = BeamState{0.0, m.shape, std::sqrt(m.omega_squared) * m.shape};
      label = "mode_" + std::to_string(k);
    }
    double e0 = energy(s, sys);
    if (!(e0 > 0.0)) throw InvalidArgumentError("decay needs nonzero initial energy");
    Trajectory traj = simulate(sys, s, T, dt);
    auto env = decay_envelope(rep, e0);
    double worst = 0.0;
    int violations = 0;
    if (rows.empty()) rows.resize(traj.traces.size());
    for (std::size_t n = 0; n < traj.traces.size(); ++n) {
      double e = traj.traces[n].energy, bound = env(traj.traces[n].t);
      worst = std::max(worst, e / bound);
      if (e > bound) ++violations;
      if (rows[n].empty()) rows[n].push_back(traj.traces[n].t);
      rows[n].push_back(e);
      rows[n].push_back(bound);
    }
    header.push_back("energy_" + label);
    header.push_back("envelope_" + label);
    runs.push_back({{"label", label},
                    {"E0", e0},
                    {"ET", traj.traces.back().energy},
                    {"max_energy_over_envelope", worst},
                    {"violations", violations}});
    all_ok = all_ok && violations == 0;
    if (violations > 0 && k > 0) {
      const Eigenmode& m = modes[std::min<std::size_t>(k - 1, modes.size() - 1)];
      ctx.notes.push_back(label + " exceeds the envelope with omega dt = " +
                          format_number(std::sqrt(m.omega_squared) * T / step_count(T, dt)) +
                          "; the step does not resolve this mode, reduce dt (or the horizon) to resolve it");
    }
    worst_ratio = std::max(worst_ratio, worst);
  }
  write_csv(ctx.out / "decay.csv", header, rows);
  ctx.results["runs"] = runs;
  ctx.results["dt"] = T / step_count(T, dt);
  ctx.check("below_envelope", all_ok, worst_ratio, 1.0);
}

void cmd_identities(Context& ctx) {
  const RunConfig& c = ctx.config;
  require_regime(c, {"adjoint", "feedback"}, "identities");
  const double T = ctx.T_or(1.0);
  const double dt0 = ctx.dt_or(ctx.mesh.max_width() / 4.0);
  SystemMatrices sys = system_for(ctx, ctx.mesh);
  BeamState s0 = make_initial_state(c.initial, sys);

  if (sys.regime.kind == RegimeKind::Adjoint) {
    const bool refine = c.initial.kind != "file";
    const int levels = refine ? 3 : 1;
    Json rows = Json::array();
    std::vector<double> r2, r1;
    std::vector<std::vector<double>> csv;
    for (int l = 0; l < levels; ++l) {
      MeshSpec spec = c.mesh;
      spec.n_elements = c.mesh.n_elements << l;
      BeamMesh mesh = make_mesh(spec);
      SystemMatrices s = l == 0 ? sys : system_for(ctx, mesh);
      BeamState init = l == 0 ? s0 : make_initial_state(c.initial, s);
      Trajectory traj = simulate(s, init, T, dt0 / (1 << l));
      IdentityResidual x2 = multiplier_identity_x2(traj, s, ctx.a);
      IdentityResidual x1 = multiplier_identity_x(traj, s, ctx.a);
      double drift = conservation_drift(traj, s);
      r2.push_back(x2.residual);
      r1.push_back(x1.residual);
      rows.push_back({{"n_elements", spec.n_elements},
                      {"drift", drift},
                      {"multiplier_x2", residual_json(x2)},
                      {"multiplier_x", residual_json(x1)}});
      csv.push_back({static_cast<double>(spec.n_elements), x2.h, x2.dt, drift, x2.residual, x1.residual});
      ctx.check("energy_conservation_n" + std::to_string(spec.n_elements), drift <= c.options.tol, drift,
                c.options.tol);
    }
    write_csv(ctx.out / "identities.csv", {"n_elements", "h", "dt", "drift", "multiplier_x2", "multiplier_x"},
              csv);
    ctx.results["refinement"] = rows;
    auto monotone = [](const std::vector<double>& v) {
      for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) return false;
      }
      return true;
    };
    ctx.check("multiplier_x2_monotone", monotone(r2), r2.back(), c.options.identity_tol);
    ctx.check("multiplier_x2_final", r2.back() <= c.options.identity_tol, r2.back(), c.options.identity_tol);
    ctx.check("multiplier_x_monotone", monotone(r1), r1.back(), c.options.identity_tol);
    ctx.check("multiplier_x_final", r1.back() <= c.options.identity_tol, r1.back(), c.options.identity_tol);
  } else {
    Trajectory traj = simulate(sys, s0, T, dt0);
    IdentityResidual r = dissipation_residual(traj, sys);
    ctx.results["dissipation"] = residual_json(r);
    ctx.check("dissipation_identity", r.residual <= c.options.tol, r.residual, c.options.tol);
  }

  NormSpace space = sys.regime.kind == RegimeKind::Adjoint ? NormSpace::H2a0 : NormSpace::K2a0;
  if (s0.u.squaredNorm() > 0.0) {
    NormCheck nc = norm_equivalence_check(sys, ctx.a, ctx.cls, space, s0.u);
    ctx.results["norm_equivalence"] = {{"space", space == NormSpace::H2a0 ? "H2a0" : "K2a0"},
                                       {"l2_sq", nc.l2_sq},
                                       {"slope_sq", nc.slope_sq},
                                       {"weighted_sq", nc.weighted_sq},
                                       {"rotation_sq", nc.rotation_sq},
                                       {"chain", nc.chain}};
    ctx.check("norm_equivalence", nc.holds, nc.l2_sq, nc.chain.empty() ? 0.0 : nc.chain.back());
  }

  if (ctx.cls.weak() && ctx.cls.K > 0.0) {
    // w = x sin(pi x / 2) + x, vanishing at 0.
    ScalarFunction w{[](double x) { return x * std::sin(M_PI * x / 2.0) + x; },
                     [](double x) { return std::sin(M_PI * x / 2.0) + x * M_PI / 2.0 * std::cos(M_PI * x / 2.0) + 1.0; }};
    HardyPoincareResult hp = hardy_poincare_check(ctx.a, ctx.cls.K, w);
    ctx.results["hardy_poincare"] = {{"theta", ctx.cls.K},
                                     {"C_HP", hardy_poincare_constant(ctx.cls.K)},
                                     {"lhs", hp.lhs},
                                     {"rhs", hp.rhs}};
    ctx.check("hardy_poincare", hp.holds, hp.lhs, hp.rhs);
  }
}

void cmd_observability(Context& ctx) {
  const RunConfig& c = ctx.config;
  require_regime(c, {"adjoint"}, "observability");
  const double T = ctx.T_or(2.0);
  const double dt = ctx.dt_or(ctx.mesh.max_width() / 4.0);
  SystemMatrices sys = system_for(ctx, ctx.mesh);
  BeamState s0 = make_initial_state(c.initial, sys);
  ObservabilityReport own = observability_quotient(s0, T, sys, dt, c.options.slack);
  ObservabilityReport rep = empirical_observability_constant(T, sys, c.options.n_probes, dt, c.seed, c.options.slack);
  rep.probes.insert(rep.probes.begin(), own.probes.front());

  Json probes = Json::array();
  std::vector<std::vector<double>> rows;
  double worst = own.scaled_quotient;
  for (std::size_t i = 0; i < rep.probes.size(); ++i) {
    const auto& p = rep.probes[i];
    probes.push_back({{"label", p.label},
                      {"observed", p.observed},
                      {"initial_energy", p.initial_energy},
                      {"quotient", p.quotient},
                      {"scaled_quotient", p.scaled_quotient},
                      {"satisfied", p.satisfied}});
    rows.push_back({static_cast<double>(i), p.observed, p.initial_energy, p.quotient, p.scaled_quotient});
    worst = std::min(worst, p.scaled_quotient);
  }
  write_csv(ctx.out / "probes.csv", {"probe", "observed", "initial_energy", "quotient", "scaled_quotient"}, rows);
  ctx.results["T"] = T;
  ctx.results["T0"] = rep.T0;
  ctx.results["CT_lower"] = rep.CT_lower_bound;
  ctx.results["below_T0"] = T <= rep.T0;
  ctx.results["slack"] = rep.slack;
  ctx.results["min_scaled_quotient"] = worst;
  ctx.results["probes"] = probes;
  if (T <= rep.T0) ctx.notes.push_back("T <= T0: the lower bound is not positive and the check is vacuous");
  double threshold = rep.CT_lower_bound * (1.0 - rep.slack);
  ctx.check("observability_lower_bound", worst >= threshold, worst, threshold);
}

void cmd_control(Context& ctx) {
  const RunConfig& c = ctx.config;
  require_regime(c, {"adjoint", "controlled"}, "control");
  const double T = ctx.T_or(2.0);
  const double dt = ctx.dt_or(ctx.mesh.max_width() / 4.0);
  SystemMatrices adj = assemble(ctx.a, ctx.cls, ctx.mesh, BoundaryRegime::adjoint());
  BeamState s0 = make_initial_state(c.initial, adj);
  NullControlProblem problem(adj, T, dt);
  ControlResult res = solve_null_control(problem, s0.u, s0.v, c.options.cg_tol, c.options.max_iter);
  double verified = verify_null_control(res, s0.u, s0.v, adj, T);

  std::vector<std::vector<double>> rows;
  for (std::size_t n = 0; n < res.f.size(); ++n) rows.push_back({res.times[n], res.f[n]});
  write_csv(ctx.out / "control.csv", {"t", "f"}, rows);
  std::vector<std::vector<double>> hist;
  for (std::size_t k = 0; k < res.history.size(); ++k) {
    hist.push_back({static_cast<double>(k), res.history[k].residual, res.history[k].objective});
  }
  write_csv(ctx.out / "cg_history.csv", {"iteration", "residual", "objective"}, hist);

  ControllabilityConstants cc = controllability_constants(ctx.a, ctx.cls);
  ctx.results["T"] = T;
  ctx.results["T0"] = cc.T0;
  ctx.results["below_T0"] = res.below_T0;
  ctx.results["dt"] = res.dt;
  ctx.results["cg_iterations"] = res.cg_iterations;
  ctx.results["cg_residual"] = res.cg_residual;
  ctx.results["converged"] = res.converged;
  ctx.results["terminal_energy_ratio"] = res.terminal_energy_ratio;
  ctx.results["verified_terminal_energy_ratio"] = verified;
  ctx.results["cost"] = res.cost;
  ctx.results["lambda_star"] = res.lambda_star;
  ctx.results["sign"] = res.sign;
  ctx.results["discarded_ratio"] = res.discarded_ratio;
  if (res.below_T0) ctx.notes.push_back("T <= T0: the theory does not guarantee controllability here");
  ctx.check("cg_converged", res.converged, res.cg_residual, c.options.cg_tol);
  ctx.check("null_control", verified <= c.options.terminal_tol, verified, c.options.terminal_tol);
}

void cmd_elliptic(Context& ctx) {
  const RunConfig& c = ctx.config;
  require_regime(c, {"feedback"}, "elliptic");
  EllipticSolution sol = solve_boundary_elliptic(ctx.a, ctx.cls, ctx.mesh, c.regime.beta, c.regime.gamma,
                                                 c.options.lambda, c.options.mu);
  EllipticCheck chk = elliptic_estimate_check(sol, ctx.a);
  std::ofstream os(ctx.out / "elliptic.csv");
  write_elliptic_csv(sol, os);

  Json& j = ctx.results;
  j["lambda"] = sol.lambda;
  j["mu"] = sol.mu;
  j["beta"] = sol.beta;
  j["gamma"] = sol.gamma;
  j["triple_norm_sq"] = sol.triple_norm_sq;
  j["l2_sq"] = sol.l2_sq;
  j["C1"] = sol.C1;
  if (sol.C2) j["C2"] = *sol.C2;
  if (sol.bound_C) j["bound_C"] = *sol.bound_C;
  if (sol.l2_bound) j["l2_bound"] = *sol.l2_bound;
  if (sol.wd) {
    j["wd"] = {{"A_gamma", sol.wd->A_gamma}, {"bound_C", sol.wd->bound_C}, {"l2_bound", sol.wd->l2_bound}};
  }
  j["triple_slack"] = chk.triple_slack;
  j["l2_slack"] = chk.l2_slack;
  j["value_condition_residual"] = chk.value_condition_residual;
  j["rotation_condition_residual"] = chk.rotation_condition_residual;
  j["interior_residual"] = chk.interior_residual;
  if (auto alpha = ctx.a.power_exponent(); alpha && *alpha != 1.0 && *alpha < 2.0) {
    PowerLawEllipticOracle o = power_law_elliptic_oracle(*alpha, sol.beta, sol.gamma, sol.lambda, sol.mu);
    double err = 0.0;
    for (std::size_t i = 0; i < sol.mesh.nodes.size(); ++i) {
      err = std::max(err, std::abs(sol.z[value_dof(static_cast<int>(i))] - o.value(sol.mesh.nodes[i])));
    }
    j["closed_form_nodal_error"] = err;
  }
  ctx.check("triple_norm_bound", chk.triple_holds, sol.triple_norm_sq, sol.bound_C.value_or(sol.wd ? sol.wd->bound_C : 0.0));
  ctx.check("l2_bound", chk.l2_holds, sol.l2_sq, sol.l2_bound.value_or(sol.wd ? sol.wd->l2_bound : 0.0));
  if (sol.wd) {
    ctx.check("wd_bounds", chk.wd_triple_holds && chk.wd_l2_holds, sol.l2_sq, sol.wd->l2_bound);
    ctx.check("wd_tighter", chk.wd_tighter, sol.wd->l2_bound, sol.l2_bound.value_or(INFINITY));
  }
}

using Handler = std::function<void(Context&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{
      {"classify", cmd_classify},   {"constants", cmd_constants},         {"simulate", cmd_simulate},
      {"decay", cmd_decay},         {"identities", cmd_identities},       {"observability", cmd_observability},
      {"control", cmd_control},     {"elliptic", cmd_elliptic}};
  return h;
}

void write_report(const Context& ctx, const std::string& command, int status, const std::string& error) {
  Json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = command;
  report["config"] = to_json(ctx.config);
  report["status"] = status;
  if (!error.empty()) report["error"] = error;
  report["results"] = ctx.results;
  Json checks = Json::array();
  for (const auto& c : ctx.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}});
  }
  report["checks"] = checks;
  if (!ctx.notes.empty()) report["notes"] = ctx.notes;
  std::ofstream os(ctx.out / "report.json");
  os << report.dump(2) << '\n';
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"classify", "constants",     "simulate", "decay",
                                              "identities", "observability", "control",  "elliptic"};
  return names;
}

int run_command(const std::string& command, const RunConfig& config, const std::string& out_dir,
                std::ostream& err) {
  auto it = handlers().find(command);
  if (it == handlers().end()) {
    err << "unknown command '" << command << "'\n";
    return kConfigError;
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    err << "cannot create output directory " << out_dir << ": " << ec.message() << '\n';
    return kRuntimeError;
  }
  Context ctx{config, fs::path(out_dir), Coefficient::unit(), {}, {}};
  int status = kOk;
  std::string error;
  try {
    ctx.a = make_coefficient(config.coefficient);
    ctx.cls = resolve_class(config, ctx.a);
    ctx.mesh = make_mesh(config.mesh);
    it->second(ctx);
    for (const auto& c : ctx.checks) {
      if (!c.passed) status = kChecksFailed;
    }
  } catch (const OutOfScopeError& e) {
    status = kOutOfScope;
    error = e.what();
  } catch (const ConfigError& e) {
    status = kConfigError;
    error = e.what();
  } catch (const InvalidArgumentError& e) {
    status = kConfigError;
    error = e.what();
  } catch (const InvalidCoefficientError& e) {
    status = kConfigError;
    error = e.what();
  } catch (const WrongRegimeError& e) {
    status = kConfigError;
    error = e.what();
  } catch (const std::exception& e) {
    status = kRuntimeError;
    error = e.what();
  }
  if (!error.empty()) err << command << ": " << error << '\n';
  for (const auto& c : ctx.checks) {
    if (!c.passed) err << command << ": check " << c.name << " failed (" << c.value << " vs " << c.threshold << ")\n";
  }
  write_report(ctx, command, status, error);
  return status;
}

}  // namespace degenbeam::app
