#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace degenbeam {

// Gauss-Legendre rule mapped to [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.nodes[i] = 0.5 * (1.0 - z);
    rule.weights[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return rule;
}

template <class F>
double integrate_interval(F&& f, double a, double b, const GaussRule& rule) {
  double h = b - a;
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    sum += rule.weights[q] * f(a + h * rule.nodes[q]);
  }
  return sum * h;
}

// Integrates over [a, b] with dyadic cells shrinking toward a, for
// integrands with an integrable singularity at the left endpoint. The
// innermost cell [a, a + (b-a) 2^-levels] is left out.
template <class F>
double integrate_graded(F&& f, double a, double b, int levels = 48,
                        int points = 12) {
  GaussRule rule = gauss_legendre(points);
  double sum = 0.0;
  double right = b;
  for (int k = 0; k < levels; ++k) {
    double left = a + 0.5 * (right - a);
    sum += integrate_interval(f, left, right, rule);
    right = left;
  }
  return sum;
}

}  // namespace degenbeam
