#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "degenbeam/identities.hpp"

using namespace degenbeam;

namespace {

Trajectory mode_run(const Coefficient& a, const DegeneracyClass& cls, int n, SystemMatrices& sys) {
  sys = assemble(a, cls, build_mesh(n), BoundaryRegime::adjoint());
  auto modes = eigenmodes(sys, 1);
  BeamState s{0.0, modes[0].shape, Vec::Zero(sys.size())};
  return simulate(sys, s, 1.0, 0.16 / n);
}

}  // namespace

TEST(Trapezoid, Basic) {
  EXPECT_DOUBLE_EQ(trapezoid({1.0, 1.0, 1.0}, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(trapezoid({0.0, 1.0}, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(trapezoid({3.0}, 1.0), 0.0);
}

TEST(FieldQuadrature, IntegratesSingularWeight) {
  // y = x^2 and a = x^1/2: a' y_x^2 = 2 x^3/2.
  BeamMesh mesh = build_mesh(8);
  Vec u(18);
  for (int i = 0; i <= 8; ++i) {
    u[2 * i] = mesh.nodes[i] * mesh.nodes[i];
    u[2 * i + 1] = 2 * mesh.nodes[i];
  }
  FieldQuadrature q(mesh);
  double got = q.integrate(u, Vec::Zero(18), [](double x, double, double yx, double, double) {
    return 0.5 / std::sqrt(x) * yx * yx;
  });
  EXPECT_NEAR(got, 2.0 * 2.0 / 5.0, 1e-12);
}

TEST(Conservation, WrongRegimeRejected) {
  auto a = Coefficient::power_law(0.5);
  SystemMatrices sys = assemble(a, classify(a), build_mesh(8), BoundaryRegime::feedback(1, 1));
  auto modes = eigenmodes(sys, 1);
  Trajectory traj = simulate(sys, {0.0, modes[0].shape, Vec::Zero(sys.size())}, 0.1, 0.01);
  EXPECT_THROW(conservation_drift(traj, sys), WrongRegimeError);
  EXPECT_THROW(multiplier_identity_x2(traj, sys, a), WrongRegimeError);
  EXPECT_NO_THROW(dissipation_residual(traj, sys));
}

TEST(Dissipation, PerStepIdentity) {
  for (double alpha : {0.5, 1.5}) {
    auto a = Coefficient::power_law(alpha);
    SystemMatrices sys = assemble(a, classify(a), build_mesh(16), BoundaryRegime::feedback(1.0, 1.0));
    auto modes = eigenmodes(sys, 2);
    Trajectory traj = simulate(sys, {0.0, modes[0].shape, modes[1].shape}, 2.0, 0.005);
    EXPECT_LT(dissipation_residual(traj, sys, DissipationQuadrature::MidpointAverage).residual, 1e-8) << alpha;
  }
}

TEST(Multipliers, ResidualsShrinkUnderRefinement) {
  for (double alpha : {0.5, 1.5}) {
    auto a = Coefficient::power_law(alpha);
    auto cls = classify(a);
    double prev2 = INFINITY, prev1 = INFINITY;
    for (int n : {8, 16, 32}) {
      SystemMatrices sys;
      Trajectory traj = mode_run(a, cls, n, sys);
      double r2 = multiplier_identity_x2(traj, sys, a).residual;
      double r1 = multiplier_identity_x(traj, sys, a).residual;
      EXPECT_LT(r2, prev2) << alpha << " " << n;
      EXPECT_LT(r1, prev1) << alpha << " " << n;
      prev2 = r2;
      prev1 = r1;
    }
    EXPECT_LT(prev2, 1e-2);
    EXPECT_LT(prev1, 1e-2);
  }
}

TEST(Multipliers, UnitCoefficientSanity) {
  auto a = Coefficient::unit();
  DegeneracyClass cls{DegeneracyKind::WD, 0.0};
  SystemMatrices sys;
  Trajectory traj = mode_run(a, cls, 32, sys);
  EXPECT_LT(multiplier_identity_x2(traj, sys, a).residual, 1e-3);
  EXPECT_LT(multiplier_identity_x(traj, sys, a).residual, 1e-3);
}

TEST(HardyPoincare, AnalyticCaseGivesSixteen) {
  auto a = Coefficient::power_law(0.5);
  ScalarFunction w{[](double x) { return x; }, [](double) { return 1.0; }};
  HardyPoincareResult r = hardy_poincare_check(a, 0.5, w);
  // Both integrals equal int x^1/2 = 2/3.
  EXPECT_NEAR(r.lhs, 2.0 / 3.0, 1e-10);
  EXPECT_NEAR(r.rhs, 16.0 * 2.0 / 3.0, 1e-9);
  EXPECT_DOUBLE_EQ(hardy_poincare_constant(0.5), 16.0);
  EXPECT_TRUE(r.holds);
}

TEST(HardyPoincare, RandomizedSuite) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0), coef(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    double alpha = 0.05 + 0.9 * u01(rng);
    double theta = alpha + (0.999 - alpha) * u01(rng);
    double c1 = coef(rng), c2 = coef(rng), c3 = coef(rng), p = 1.0 + 2.0 * u01(rng);
    ScalarFunction w{[=](double x) { return c1 * x + c2 * std::pow(x, p) + c3 * std::sin(M_PI * x); },
                     [=](double x) {
                       return c1 + c2 * p * std::pow(x, p - 1.0) + c3 * M_PI * std::cos(M_PI * x);
                     }};
    HardyPoincareResult r = hardy_poincare_check(Coefficient::power_law(alpha), theta, w);
    EXPECT_TRUE(r.holds) << "alpha=" << alpha << " theta=" << theta << " lhs=" << r.lhs << " rhs=" << r.rhs;
  }
}

TEST(HardyPoincare, PreconditionsEnforced) {
  auto a = Coefficient::power_law(0.5);
  ScalarFunction w{[](double x) { return x; }, [](double) { return 1.0; }};
  ScalarFunction shifted{[](double x) { return 1.0 + x; }, [](double) { return 1.0; }};
  EXPECT_THROW(hardy_poincare_check(a, 1.0, w), InvalidArgumentError);
  EXPECT_THROW(hardy_poincare_check(a, 0.5, shifted), InvalidArgumentError);
  EXPECT_THROW(hardy_poincare_check(a, 0.3, w), InvalidArgumentError);  // a / x^0.3 increases
}

TEST(NormEquivalence, RandomConstrainedVectors) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (double alpha : {0.5, 1.5}) {
    auto a = Coefficient::power_law(alpha);
    auto cls = classify(a);
    for (auto [regime, space] : {std::pair{BoundaryRegime::adjoint(), NormSpace::H2a0},
                                 std::pair{BoundaryRegime::feedback(1, 1), NormSpace::K2a0}}) {
      SystemMatrices sys = assemble(a, cls, build_mesh(16), regime);
      for (int k = 0; k < 20; ++k) {
        Vec u = constrain(sys.dofs, Vec::NullaryExpr(sys.size(), [&] { return g(rng); }));
        NormCheck nc = norm_equivalence_check(sys, a, cls, space, u);
        EXPECT_TRUE(nc.holds) << alpha;
      }
    }
  }
}

TEST(NormEquivalence, RejectsUnconstrainedVector) {
  auto a = Coefficient::power_law(0.5);
  SystemMatrices sys = assemble(a, classify(a), build_mesh(8), BoundaryRegime::adjoint());
  Vec u = Vec::Ones(sys.size());
  EXPECT_THROW(norm_equivalence_check(sys, a, classify(a), NormSpace::H2a0, u), InvalidArgumentError);
}
