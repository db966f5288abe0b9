#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "degenbeam/errors.hpp"
#include "degenbeam/quadrature.hpp"

namespace degenbeam {

enum class DegeneracyKind { WD, SD };

inline const char* to_string(DegeneracyKind kind) {
  return kind == DegeneracyKind::WD ? "WD" : "SD";
}

struct DegeneracyClass {
  DegeneracyKind kind = DegeneracyKind::WD;
  double K = 0.0;

  bool weak() const { return kind == DegeneracyKind::WD; }
};

// The flexural rigidity a on [0, 1] together with its derivative.
class Coefficient {
 public:
  using Fn = std::function<double(double)>;

  static Coefficient power_law(double alpha) {
    Coefficient c;
    c.alpha_ = alpha;
    c.a_ = [alpha](double x) { return std::pow(x, alpha); };
    c.da_ = [alpha](double x) { return alpha * std::pow(x, alpha - 1.0); };
    std::ostringstream os;
    os << "x^" << alpha;
    c.description_ = os.str();
    return c;
  }

  static Coefficient general(Fn a, Fn da, std::string description) {
    Coefficient c;
    c.a_ = std::move(a);
    c.da_ = std::move(da);
    c.description_ = std::move(description);
    return c;
  }

  // a == 1, the nondegenerate beam. It is not admissible for classify; pair
  // it with an explicit class when assembling.
  static Coefficient unit() {
    Coefficient c = general([](double) { return 1.0; }, [](double) { return 0.0; }, "1");
    c.unit_ = true;
    return c;
  }

  double operator()(double x) const { return a_(x); }
  double derivative(double x) const { return da_(x); }
  std::optional<double> power_exponent() const { return alpha_; }
  bool is_unit() const { return unit_; }
  const std::string& description() const { return description_; }

 private:
  Coefficient() = default;

  Fn a_;
  Fn da_;
  std::optional<double> alpha_;
  bool unit_ = false;
  std::string description_;
};

// Geometric grid on (0, 1] clustered toward 0, ending exactly at 1.
inline std::vector<double> default_sample_grid(int points = 10000, double smallest = 1e-10) {
  std::vector<double> grid(points);
  double log_lo = std::log(smallest);
  for (int i = 0; i < points; ++i) {
    grid[i] = std::exp(log_lo * (1.0 - static_cast<double>(i) / (points - 1)));
  }
  grid.back() = 1.0;
  return grid;
}

inline double degeneracy_constant(const Coefficient& a, const std::vector<double>& grid) {
  if (grid.empty()) throw InvalidArgumentError("sample grid is empty");
  for (double x : grid) {
    if (!(x > 0.0 && x <= 1.0)) throw InvalidArgumentError("sample grid must lie in (0, 1]");
  }
  if (auto alpha = a.power_exponent()) return *alpha;
  double K = 0.0;
  for (double x : grid) {
    double ax = a(x);
    if (!(ax > 0.0)) {
      std::ostringstream os;
      os << "coefficient is not positive at x = " << x << " (a = " << ax << ")";
      throw InvalidCoefficientError(os.str());
    }
    K = std::max(K, x * std::abs(a.derivative(x)) / ax);
  }
  return K;
}

inline double degeneracy_constant(const Coefficient& a) {
  return degeneracy_constant(a, default_sample_grid());
}

inline DegeneracyClass classify(const Coefficient& a, const std::vector<double>& grid) {
  double a0 = a(0.0);
  if (!(std::abs(a0) <= 1e-12)) {
    std::ostringstream os;
    os << "coefficient must vanish at 0, got a(0) = " << a0;
    throw InvalidCoefficientError(os.str());
  }
  double K = degeneracy_constant(a, grid);
  if (K >= 2.0) {
    std::ostringstream os;
    os << "K = " << K << ": K >= 2 is out of scope (open problem; the theory requires K < 2)";
    throw OutOfScopeError(os.str());
  }
  if (K <= 0.0) {
    std::ostringstream os;
    os << "K = " << K << ": K <= 0 is out of scope (the degeneracy constant must lie in (0, 2))";
    throw OutOfScopeError(os.str());
  }
  return {K < 1.0 ? DegeneracyKind::WD : DegeneracyKind::SD, K};
}

inline DegeneracyClass classify(const Coefficient& a) { return classify(a, default_sample_grid()); }

// x^g / a(x) must be nondecreasing whenever g >= K.
inline bool ratio_nondecreasing(const Coefficient& a, double g, const std::vector<double>& grid,
                                double rel_tol = 1e-12) {
  double prev = 0.0;
  for (double x : grid) {
    double r = std::pow(x, g) / a(x);
    if (r < prev * (1.0 - rel_tol)) return false;
    prev = r;
  }
  return true;
}

// Integral of 1/a over (0, 1). Requires a weakly degenerate coefficient.
inline double integral_one_over_a(const Coefficient& a) {
  if (a.is_unit()) return 1.0;
  if (auto alpha = a.power_exponent()) {
    if (*alpha >= 1.0) {
      throw DivergentIntegralError("1/a is not integrable for x^alpha with alpha >= 1");
    }
    return 1.0 / (1.0 - *alpha);
  }
  DegeneracyClass cls = classify(a);
  if (!cls.weak()) {
    throw DivergentIntegralError("1/a is not integrable for a strongly degenerate coefficient");
  }
  const int levels = 60;
  double body = integrate_graded([&](double x) { return 1.0 / a(x); }, 0.0, 1.0, levels, 16);
  // Below x0, x^K / a(x) <= x0^K / a(x0) bounds the remainder.
  double x0 = std::ldexp(1.0, -levels);
  double tail = x0 / (a(x0) * (1.0 - cls.K));
  return body + tail;
}

}  // namespace degenbeam
