#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "degenbeam/elliptic.hpp"

using namespace degenbeam;

namespace {

EllipticSolution solve_power(double alpha, int n, Grading g, double beta, double gamma, double lambda, double mu) {
  Coefficient a = Coefficient::power_law(alpha);
  return solve_boundary_elliptic(a, classify(a), build_mesh(n, g), beta, gamma, lambda, mu);
}

double nodal_error(const EllipticSolution& s, const PowerLawEllipticOracle& o) {
  double err = 0.0;
  for (std::size_t i = 0; i < s.mesh.nodes.size(); ++i) {
    double x = s.mesh.nodes[i];
    err = std::max(err, std::abs(s.z[value_dof(static_cast<int>(i))] - o.value(x)));
  }
  return err;
}

}  // namespace

TEST(Elliptic, ZeroDataZeroSolution) {
  EllipticSolution s = solve_power(0.5, 8, Grading::uniform(), 1, 1, 0, 0);
  EXPECT_EQ(s.z.norm(), 0.0);
  EXPECT_EQ(s.triple_norm_sq, 0.0);
}

TEST(Elliptic, Rejections) {
  Coefficient a = Coefficient::power_law(0.5), b = Coefficient::power_law(1.5);
  EXPECT_THROW(solve_boundary_elliptic(a, classify(a), build_mesh(8), -1, 1, 1, 0), InvalidArgumentError);
  EXPECT_THROW(solve_boundary_elliptic(b, classify(b), build_mesh(8), 1, 0, 1, 0), OutOfScopeError);
  EXPECT_THROW(power_law_elliptic_oracle(1.0, 1, 1, 1, 0), InvalidArgumentError);
  // gamma = 0 is fine in the weakly degenerate case.
  EllipticSolution s = solve_boundary_elliptic(a, classify(a), build_mesh(8), 1, 0, 1, 0);
  EXPECT_FALSE(s.bound_C.has_value());
  ASSERT_TRUE(s.wd.has_value());
  EXPECT_TRUE(elliptic_estimate_check(s, a).holds());
}

TEST(Elliptic, LinearInData) {
  EllipticSolution s1 = solve_power(0.5, 16, Grading::uniform(), 1, 2, 1, 0);
  EllipticSolution s2 = solve_power(0.5, 16, Grading::uniform(), 1, 2, 0, 1);
  EllipticSolution s3 = solve_power(0.5, 16, Grading::uniform(), 1, 2, 2, -3);
  EXPECT_LT((s3.z - (2.0 * s1.z - 3.0 * s2.z)).norm(), 1e-12 * s3.z.norm());
}

// Independent check of the closed form: finite differences for a z'' and the
// boundary rows.
TEST(Oracle, SatisfiesProblem) {
  for (double alpha : {0.5, 1.5}) {
    const double beta = 1.3, gamma = 0.7, lambda = 1.0, mu = -0.4;
    PowerLawEllipticOracle o = power_law_elliptic_oracle(alpha, beta, gamma, lambda, mu);
    auto flux = [&](double x) {
      const double h = 1e-4;
      double zxx = (o.derivative(x + h) - o.derivative(x - h)) / (2 * h);
      return std::pow(x, alpha) * zxx;
    };
    // a z'' is the line c1 + c2 x, so (a z'')(1) = c1 + c2 and (a z'')'(1) = c2.
    for (double x : {0.2, 0.5, 0.9}) EXPECT_NEAR(flux(x), o.c1 + o.c2 * x, 1e-6);
    EXPECT_NEAR(beta * o.value(1.0) - o.c2, lambda, 1e-12);
    EXPECT_NEAR(gamma * o.derivative(1.0) + o.c1 + o.c2, mu, 1e-12);
    EXPECT_NEAR(o.value(0.0), 0.0, 1e-15);
    if (alpha < 1.0) EXPECT_NEAR(o.derivative(1e-12), 0.0, 1e-5);
  }
}

TEST(Elliptic, GradedMeshConvergesAtSecondOrderOrBetter) {
  PowerLawEllipticOracle o = power_law_elliptic_oracle(0.5, 1, 1, 1, 0);
  double prev = 0.0;
  for (int n : {16, 32, 64, 128}) {
    double e = nodal_error(solve_power(0.5, n, Grading::power(6.0), 1, 1, 1, 0), o);
    if (prev > 0.0) EXPECT_GE(std::log2(prev / e), 2.0);
    prev = e;
  }
}

TEST(Elliptic, UniformMeshConvergesAtReducedRate) {
  // Nodal error near the singularity of z'' falls like h^(1/2) here.
  PowerLawEllipticOracle o = power_law_elliptic_oracle(0.5, 1, 1, 1, 0);
  double e1 = nodal_error(solve_power(0.5, 32, Grading::uniform(), 1, 1, 1, 0), o);
  double e2 = nodal_error(solve_power(0.5, 128, Grading::uniform(), 1, 1, 1, 0), o);
  double rate = std::log2(e1 / e2) / 2.0;
  EXPECT_GT(rate, 0.4);
  EXPECT_LT(rate, 0.7);
}

TEST(Elliptic, StronglyDegenerateConverges) {
  PowerLawEllipticOracle o = power_law_elliptic_oracle(1.5, 1, 1, 1, 0.5);
  double e1 = nodal_error(solve_power(1.5, 16, Grading::power(3.0), 1, 1, 1, 0.5), o);
  double e2 = nodal_error(solve_power(1.5, 64, Grading::power(3.0), 1, 1, 1, 0.5), o);
  EXPECT_GE(std::log2(e1 / e2) / 2.0, 2.0);
}

TEST(Elliptic, BoundaryConditionResidualShrinks) {
  Coefficient a = Coefficient::power_law(0.5);
  double prev_v = 0.0, prev_r = 0.0;
  for (int n : {16, 32, 64}) {
    EllipticSolution s = solve_power(0.5, n, Grading::power(6.0), 1, 1, 1, 0);
    EllipticCheck c = elliptic_estimate_check(s, a);
    if (prev_v > 0.0) {
      EXPECT_GE(std::log2(prev_v / c.value_condition_residual), 0.9);
      EXPECT_GE(std::log2(prev_r / c.rotation_condition_residual), 0.9);
    }
    prev_v = c.value_condition_residual;
    prev_r = c.rotation_condition_residual;
    EXPECT_LT(c.interior_residual, 0.1);
  }
}

TEST(Elliptic, TripleNormMatchesQuadrature) {
  Coefficient a = Coefficient::power_law(0.5);
  EllipticSolution s = solve_power(0.5, 32, Grading::power(4.0), 2, 3, 1, 1);
  double integral = 0.0;
  const GaussRule rule = gauss_legendre(5);
  for (int e = 0; e < s.mesh.elements(); ++e) {
    double x0 = s.mesh.nodes[e], h = s.mesh.width(e);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      double x = x0 + h * rule.nodes[k];
      double d2 = evaluate(s.mesh, s.z, x).d2;
      integral += h * rule.weights[k] * a(x) * d2 * d2;
    }
  }
  const int n = s.mesh.elements();
  double z1 = s.z[value_dof(n)], zx1 = s.z[slope_dof(n)];
  double expected = integral + 2 * z1 * z1 + 3 * zx1 * zx1;
  EXPECT_NEAR(s.triple_norm_sq, expected, 1e-3 * expected);
  // Energy identity of the weak form: |||z|||^2 = lambda z(1) + mu z'(1).
  EXPECT_NEAR(s.triple_norm_sq, z1 + zx1, 1e-12 * s.triple_norm_sq);
}

TEST(Elliptic, CsvHasOneRowPerNode) {
  EllipticSolution s = solve_power(0.5, 4, Grading::uniform(), 1, 1, 1, 0);
  std::ostringstream os;
  write_elliptic_csv(s, os);
  std::string text = os.str();
  EXPECT_EQ(text.rfind("x,z,z_x\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
}

// Both estimates hold, and the refined ones are no weaker, over a grid of
// gains and data.
TEST(Property, EstimatesHold) {
  for (double alpha : {0.3, 0.5, 1.2, 1.7}) {
    Coefficient a = Coefficient::power_law(alpha);
    for (double beta : {0.2, 1.0, 5.0}) {
      for (double gamma : {0.2, 1.0, 5.0}) {
        for (auto [lambda, mu] : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{-2.0, 0.5}}) {
          EllipticSolution s = solve_boundary_elliptic(a, classify(a), build_mesh(16, Grading::power(3.0)), beta,
                                                       gamma, lambda, mu);
          EllipticCheck c = elliptic_estimate_check(s, a);
          EXPECT_TRUE(c.holds()) << alpha << ' ' << beta << ' ' << gamma;
          EXPECT_GE(c.triple_slack, 0.0);
          EXPECT_GE(c.l2_slack, 0.0);
          if (s.wd) EXPECT_LE(s.wd->bound_C, *s.bound_C * (1.0 + 1e-12));
        }
      }
    }
  }
}
