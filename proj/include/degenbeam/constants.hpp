#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "degenbeam/coeff.hpp"
#include "degenbeam/errors.hpp"

namespace degenbeam {

// Observability and controllability thresholds for the clamped problem.
struct ControllabilityConstants {
  double K = 0.0;
  double a1 = 1.0;
  double rate = 0.0;    // min{6 - 3K, K + 2}
  double offset = 0.0;  // (K + 4) max{1, 1/(a(1)(2-K))}
  double T0 = 0.0;

  double CT_lower(double T) const { return T * rate - offset; }
  double cost(double T) const {
    double c = CT_lower(T);
    if (!(c > 0.0)) {
      std::ostringstream os;
      os << "control cost is undefined for T = " << T << " <= T0 = " << T0;
      throw UndefinedCostError(os.str());
    }
    return 1.0 / c;
  }
};

inline ControllabilityConstants controllability_constants(double K, double a1) {
  ControllabilityConstants c;
  c.K = K;
  c.a1 = a1;
  c.rate = std::min(6.0 - 3.0 * K, K + 2.0);
  c.offset = (K + 4.0) * std::max(1.0, 1.0 / (a1 * (2.0 - K)));
  c.T0 = c.offset / c.rate;
  return c;
}

inline ControllabilityConstants controllability_constants(const Coefficient& a, const DegeneracyClass& cls) {
  return controllability_constants(cls.K, a(1.0));
}

// Upper observability estimate, a(1) int y_xx(t,1)^2 <= bound * E(0).
// max_abs_da is max |a'| on [0,1] and is used only when K >= 1.
inline double observability_upper_factor(double K, double a1, double T, double max_abs_da = 0.0) {
  double inner = K < 1.0 ? 4.0 * K / ((1.0 - K) * (1.0 - K)) : max_abs_da / (a1 * (2.0 - K));
  double first = std::max(1.0, (6.0 + K) / 2.0 + inner);
  return 4.0 * (T * first + std::max(1.0 / (a1 * (2.0 - K)), 1.0));
}

struct StabilityInputs {
  double K = 0.0;
  double a1 = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double eps0 = std::numeric_limits<double>::quiet_NaN();  // defaults to 2 - K
  std::optional<double> inv_a_l1;                            // ||1/a||_L1, weakly degenerate only
};

// Constants that depend on delta.
struct DeltaChain {
  double delta = 0.0;
  double C_delta = 0.0;
  double C3 = 0.0;
  double C4 = 0.0;
  double C5 = 0.0;
  double M = 0.0;
  bool admissible = false;
};

struct WdVariants {
  double A_gamma = 0.0;
  double C_beta = 0.0;
  double C_gamma = 0.0;
  double theta_wd = 0.0;
  double rho_wd = 0.0;
  double nu_wd = 0.0;
  DeltaChain chain;  // C_delta_wd, C3_wd, C4_wd, C5_wd, M_wd at the chosen delta
};

struct ConstantsReport {
  double K = 0.0;
  std::optional<double> C_HP;
  double norm_const = 0.0;
  ControllabilityConstants controllability;
  std::optional<double> T;
  std::optional<double> CT_lower;
  std::optional<double> cost_cT;

  double a1 = 1.0, beta = 0.0, gamma = 0.0;
  double eps0 = 0.0;
  double theta_const = 0.0, rho_const = 0.0, sigma_const = 0.0;
  double C1 = 0.0, C2 = 0.0;
  std::optional<double> nu;
  double delta_star = 0.0;
  DeltaChain chain;
  std::optional<WdVariants> wd_variants;
};

namespace detail {

inline double bracket_c3_first(const StabilityInputs& in, double eps0) {
  return in.K / 4.0 + in.K * in.beta / 2.0 + in.beta + eps0 * in.beta / 2.0;
}
inline double bracket_c3_second(const StabilityInputs& in, double eps0) {
  return in.beta + 1.0 + 2.0 * in.gamma * in.gamma / in.a1 + eps0 * in.gamma / 2.0;
}
inline double bracket_c5(const StabilityInputs& in, double eps0) {
  return in.K / 4.0 + in.K * in.beta / 2.0 + 2.0 * in.beta + eps0 * in.beta / 2.0 + 1.0 +
         2.0 * in.gamma * in.gamma / in.a1 + eps0 * in.gamma / 2.0;
}

}  // namespace detail

class StabilityChain {
 public:
  explicit StabilityChain(StabilityInputs in) : in_(in) {
    if (std::isnan(in_.eps0)) in_.eps0 = 2.0 - in_.K;
    const double K = in_.K, a1 = in_.a1, g = in_.gamma;
    eps0_ = in_.eps0;
    const double nc = 1.0 / (a1 * (2.0 - K));
    C1_ = 2.0 * std::max(1.0, nc);
    sigma_ = std::max(K / 4.0 + 2.0, 2.0 / a1);
    if (in_.beta > 0.0 && g > 0.0) {
      general_ = true;
      C2_ = std::max(1.0, 1.0 / g);
      theta_ = K * std::max({1.0, 2.0 * nc, 2.0 / g});
      rho_ = 4.0 * std::max({2.0 / g, 2.0 * nc, 1.0});
      nu_ = in_.beta * g / (2.0 * C2_ * std::max(1.0, C1_) * (in_.beta + g));
    }
    if (in_.inv_a_l1) {
      wd_ = true;
      const double L = *in_.inv_a_l1;
      C_beta_ = in_.beta > 0.0 ? 2.0 * std::min(L, 1.0 / in_.beta) : 2.0 * L;
      C_gamma_ = g > 0.0 ? 2.0 * std::min(L, 1.0 / g) : 2.0 * L;
      A_gamma_ = g > 0.0 ? std::min(std::max(1.0, 1.0 / g), 1.0 + L) : 1.0 + L;
      theta_wd_ = K * std::max({1.0, 2.0 * nc, C_gamma_});
      rho_wd_ = 4.0 * std::max({C_gamma_, 2.0 * nc, 1.0});
      nu_wd_ = 1.0 / (std::max(1.0, C1_) * (C_beta_ + C_gamma_) * A_gamma_);
    }
  }

  bool has_general() const { return general_; }
  bool has_wd() const { return wd_; }
  const StabilityInputs& inputs() const { return in_; }
  double eps0() const { return eps0_; }
  double C1() const { return C1_; }
  double C2() const { return C2_; }
  double theta() const { return theta_; }
  double rho() const { return rho_; }
  double sigma() const { return sigma_; }
  double nu() const { return nu_; }
  double C_beta() const { return C_beta_; }
  double C_gamma() const { return C_gamma_; }
  double A_gamma() const { return A_gamma_; }
  double theta_wd() const { return theta_wd_; }
  double rho_wd() const { return rho_wd_; }
  double nu_wd() const { return nu_wd_; }

  DeltaChain at(double delta) const {
    const double K = in_.K, b = in_.beta, g = in_.gamma;
    DeltaChain c;
    c.delta = delta;
    c.C_delta = 1.0 - 2.0 * C2_ * std::max(1.0, C1_) * delta * (1.0 / b + 1.0 / g);
    c.C3 = detail::bracket_c3_first(in_, eps0_) * 2.0 / c.C_delta +
           detail::bracket_c3_second(in_, eps0_) * 2.0 / c.C_delta;
    const double C1 = C1_, C2 = C2_, m1 = std::max(1.0, C1);
    c.C5 = (1.0 / c.C_delta) *
           (2.0 + 4.0 * C1 * C1 * C2 * C2 / b + 4.0 * C1 * C2 * C2 / g + 1.0 / delta +
            2.0 * C1 * C2 * C2 * m1 / delta) *
           detail::bracket_c5(in_, eps0_);
    c.C4 = theta_ + rho_ + sigma_ + (2.0 - K / 2.0) / g + c.C5;
    finish(c);
    return c;
  }

  DeltaChain at_wd(double delta) const {
    const double K = in_.K;
    DeltaChain c;
    c.delta = delta;
    const double C1 = C1_, m1 = std::max(1.0, C1), Ag = A_gamma_;
    c.C_delta = 1.0 - delta * m1 * (C_beta_ + C_gamma_) * Ag;
    c.C3 = detail::bracket_c3_first(in_, eps0_) * 2.0 / c.C_delta +
           detail::bracket_c3_second(in_, eps0_) * 2.0 / c.C_delta;
    c.C5 = (1.0 / c.C_delta) *
           (2.0 + 2.0 * C1 * C1 * Ag * Ag * C_beta_ + 2.0 * C1 * Ag * Ag * C_gamma_ + 1.0 / delta +
            2.0 * C1 * Ag * Ag * m1 / delta) *
           detail::bracket_c5(in_, eps0_);
    c.C4 = theta_wd_ + rho_wd_ + sigma_ + (2.0 - K / 2.0) * C_gamma_ / 2.0 + c.C5;
    finish(c);
    return c;
  }

 private:
  void finish(DeltaChain& c) const {
    double denom = eps0_ - c.delta * c.C3;
    c.admissible = c.delta > 0.0 && c.C_delta > 0.0 && denom > 0.0;
    c.M = c.admissible ? c.C4 / denom : std::numeric_limits<double>::infinity();
  }

  StabilityInputs in_;
  bool general_ = false, wd_ = false;
  double eps0_ = 0.0, C1_ = 0.0, C2_ = 0.0, theta_ = 0.0, rho_ = 0.0, sigma_ = 0.0, nu_ = 0.0;
  double C_beta_ = 0.0, C_gamma_ = 0.0, A_gamma_ = 0.0, theta_wd_ = 0.0, rho_wd_ = 0.0, nu_wd_ = 0.0;
};

// Minimizes M over a logarithmic grid of candidates in (0, nu).
inline DeltaChain choose_delta(const std::function<DeltaChain(double)>& chain, double nu,
                               int candidates = 1000) {
  DeltaChain best;
  best.M = std::numeric_limits<double>::infinity();
  int n_cdelta = 0, n_denominator = 0;
  for (int k = 0; k < candidates; ++k) {
    double delta = nu * std::pow(10.0, -6.0 + 6.0 * k / candidates);
    DeltaChain c = chain(delta);
    if (!(c.C_delta > 0.0)) {
      ++n_cdelta;
      continue;
    }
    if (!c.admissible) {
      ++n_denominator;
      continue;
    }
    if (c.M < best.M) best = c;
  }
  if (!best.admissible) {
    std::ostringstream os;
    os << "no admissible delta in (0, nu): C_delta <= 0 for " << n_cdelta << " candidates, delta >= eps0/C3 for "
       << n_denominator << " candidates";
    throw InfeasibleConstantsError(os.str());
  }
  return best;
}

inline DeltaChain choose_delta(const StabilityChain& chain) {
  return choose_delta([&](double d) { return chain.at(d); }, chain.nu());
}

inline DeltaChain choose_delta_wd(const StabilityChain& chain) {
  return choose_delta([&](double d) { return chain.at_wd(d); }, chain.nu_wd());
}

// Full constant report for a coefficient and feedback gains. The general
// chain needs beta, gamma > 0; the weakly degenerate chain also accepts
// zero gains. delta_override replaces the grid search.
inline ConstantsReport stability_constants(const Coefficient& a, const DegeneracyClass& cls, double beta,
                                           double gamma, std::optional<double> T = std::nullopt,
                                           std::optional<double> delta_override = std::nullopt,
                                           std::optional<double> eps0 = std::nullopt) {
  if (beta < 0.0 || gamma < 0.0) throw InvalidArgumentError("beta and gamma must be nonnegative");
  if (!cls.weak() && !(beta > 0.0 && gamma > 0.0)) {
    throw OutOfScopeError(
        "strongly degenerate feedback with beta = 0 or gamma = 0 is out of scope (open problem)");
  }
  ConstantsReport r;
  r.K = cls.K;
  r.a1 = a(1.0);
  r.beta = beta;
  r.gamma = gamma;
  if (cls.weak() && cls.K > 0.0) r.C_HP = 4.0 / ((1.0 - cls.K) * (1.0 - cls.K));
  r.norm_const = 1.0 / (r.a1 * (2.0 - cls.K));
  r.controllability = controllability_constants(cls.K, r.a1);
  if (T) {
    r.T = *T;
    r.CT_lower = r.controllability.CT_lower(*T);
    if (*r.CT_lower > 0.0) r.cost_cT = 1.0 / *r.CT_lower;
  }

  StabilityInputs in;
  in.K = cls.K;
  in.a1 = r.a1;
  in.beta = beta;
  in.gamma = gamma;
  if (eps0) in.eps0 = *eps0;
  if (cls.weak()) in.inv_a_l1 = integral_one_over_a(a);
  StabilityChain chain(in);
  r.eps0 = chain.eps0();
  if (!(r.eps0 > 0.0 && r.eps0 <= 2.0 - cls.K)) throw InvalidArgumentError("eps0 must lie in (0, 2 - K]");
  r.C1 = chain.C1();
  r.sigma_const = chain.sigma();
  if (chain.has_general()) {
    r.C2 = chain.C2();
    r.theta_const = chain.theta();
    r.rho_const = chain.rho();
    r.nu = chain.nu();
    r.chain = delta_override ? chain.at(*delta_override) : choose_delta(chain);
    if (delta_override && !r.chain.admissible) {
      throw InfeasibleConstantsError("delta override is outside the admissible range");
    }
    r.delta_star = r.chain.delta;
  }
  if (chain.has_wd()) {
    WdVariants w;
    w.A_gamma = chain.A_gamma();
    w.C_beta = chain.C_beta();
    w.C_gamma = chain.C_gamma();
    w.theta_wd = chain.theta_wd();
    w.rho_wd = chain.rho_wd();
    w.nu_wd = chain.nu_wd();
    w.chain = choose_delta_wd(chain);
    r.wd_variants = w;
  }
  return r;
}

// Decay rate M actually used for the envelope: the general chain when it
// applies, otherwise the weakly degenerate one.
inline double envelope_rate(const ConstantsReport& r) {
  if (r.nu) return r.chain.M;
  if (r.wd_variants) return r.wd_variants->chain.M;
  throw InfeasibleConstantsError("report has no decay constant");
}

inline std::function<double(double)> decay_envelope(const ConstantsReport& r, double E0) {
  double M = envelope_rate(r);
  return [M, E0](double t) { return E0 * std::exp(1.0 - t / M); };
}

}  // namespace degenbeam
