#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "degenbeam/coeff.hpp"
#include "degenbeam/constants.hpp"
#include "degenbeam/dynamics.hpp"
#include "degenbeam/errors.hpp"
#include "degenbeam/femdisc.hpp"
#include "degenbeam/identities.hpp"

namespace degenbeam {

struct ProbeResult {
  std::string label;
  double observed = 0.0;
  double initial_energy = 0.0;
  double quotient = 0.0;         // observed / E(0)
  double scaled_quotient = 0.0;  // a(1) observed / E(0)
  bool satisfied = false;
};

struct ObservabilityReport {
  double T = 0.0;
  double T0 = 0.0;
  double CT_lower_bound = 0.0;
  double slack = 0.1;
  double observed = 0.0;
  double initial_energy = 0.0;
  double quotient = 0.0;
  double scaled_quotient = 0.0;
  bool satisfied = false;
  std::vector<ProbeResult> probes;
};

inline double observed_boundary_energy(const Trajectory& traj) {
  if (traj.traces.empty()) throw InvalidArgumentError("trajectory is missing boundary traces");
  std::vector<double> sq;
  sq.reserve(traj.traces.size());
  for (const auto& tr : traj.traces) sq.push_back(tr.y_xx * tr.y_xx);
  return trapezoid(sq, traj.dt);
}

namespace detail {

inline ProbeResult run_probe(const BeamState& initial, double T, double dt, const SystemMatrices& sys,
                             double bound, double slack, std::string label) {
  double e0 = energy(initial, sys);
  if (!(e0 > 0.0)) throw InvalidArgumentError("observability quotient is undefined for zero initial data");
  Trajectory traj = simulate(sys, initial, T, dt);
  ProbeResult p;
  p.label = std::move(label);
  p.observed = observed_boundary_energy(traj);
  p.initial_energy = e0;
  p.quotient = p.observed / e0;
  p.scaled_quotient = sys.a_at_one * p.quotient;
  p.satisfied = p.scaled_quotient >= bound * (1.0 - slack);
  return p;
}

inline void require_adjoint(const SystemMatrices& sys) {
  if (sys.regime.kind != RegimeKind::Adjoint) {
    throw WrongRegimeError("observability is defined for the clamped adjoint problem");
  }
}

}  // namespace detail

// The satisfied flag compares a(1) * observed / E(0) against the lower bound
// for C_T, relaxed by the discretization slack.
inline ObservabilityReport observability_quotient(const BeamState& initial, double T, const SystemMatrices& sys,
                                                  double dt, double slack = 0.1) {
  detail::require_adjoint(sys);
  ControllabilityConstants cc = controllability_constants(sys.cls.K, sys.a_at_one);
  ObservabilityReport r;
  r.T = T;
  r.T0 = cc.T0;
  r.CT_lower_bound = cc.CT_lower(T);
  r.slack = slack;
  ProbeResult p = detail::run_probe(initial, T, dt, sys, r.CT_lower_bound, slack, "initial");
  r.observed = p.observed;
  r.initial_energy = p.initial_energy;
  r.quotient = p.quotient;
  r.scaled_quotient = p.scaled_quotient;
  r.satisfied = p.satisfied;
  r.probes.push_back(p);
  return r;
}

// Smooth random data: Gaussian combinations of the lowest modes with
// coefficients decaying like 1/k^2.
inline BeamState random_smooth_state(const std::vector<Eigenmode>& modes, std::mt19937_64& rng, int span = 8) {
  std::normal_distribution<double> normal(0.0, 1.0);
  int count = std::min<int>(span, static_cast<int>(modes.size()));
  BeamState s{0.0, Vec::Zero(modes.front().shape.size()), Vec::Zero(modes.front().shape.size())};
  for (int k = 0; k < count; ++k) {
    double w = 1.0 / ((k + 1.0) * (k + 1.0));
    double omega = std::sqrt(modes[k].omega_squared);
    s.u += (w * normal(rng)) * modes[k].shape;
    s.v += (w * omega * normal(rng)) * modes[k].shape;
  }
  return s;
}

// Minimum of the quotient over the lowest n_probes eigenmodes and n_probes
// random smooth states. Both families are nested in n_probes for a fixed
// seed, so the minimum can only decrease as n_probes grows.
inline ObservabilityReport empirical_observability_constant(double T, const SystemMatrices& sys, int n_probes,
                                                            double dt, unsigned long long seed = 0,
                                                            double slack = 0.1) {
  detail::require_adjoint(sys);
  if (n_probes < 1) throw InvalidArgumentError("n_probes must be at least 1");
  ControllabilityConstants cc = controllability_constants(sys.cls.K, sys.a_at_one);
  ObservabilityReport r;
  r.T = T;
  r.T0 = cc.T0;
  r.CT_lower_bound = cc.CT_lower(T);
  r.slack = slack;
  std::vector<Eigenmode> modes = eigenmodes(sys, std::max(n_probes, 8));
  std::mt19937_64 rng(seed);
  for (int k = 0; k < n_probes && k < static_cast<int>(modes.size()); ++k) {
    BeamState s{0.0, modes[k].shape, Vec::Zero(sys.size())};
    r.probes.push_back(detail::run_probe(s, T, dt, sys, r.CT_lower_bound, slack,
                                         "mode_" + std::to_string(k + 1)));
  }
  for (int k = 0; k < n_probes; ++k) {
    BeamState s = random_smooth_state(modes, rng);
    r.probes.push_back(detail::run_probe(s, T, dt, sys, r.CT_lower_bound, slack,
                                         "random_" + std::to_string(k + 1)));
  }
  auto worst = std::min_element(r.probes.begin(), r.probes.end(), [](const auto& x, const auto& y) {
    return x.scaled_quotient < y.scaled_quotient;
  });
  r.observed = worst->observed;
  r.initial_energy = worst->initial_energy;
  r.quotient = worst->quotient;
  r.scaled_quotient = worst->scaled_quotient;
  r.satisfied = std::all_of(r.probes.begin(), r.probes.end(), [](const auto& p) { return p.satisfied; });
  return r;
}

}  // namespace degenbeam
