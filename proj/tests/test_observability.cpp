#include <gtest/gtest.h>

#include "degenbeam/observability.hpp"

using namespace degenbeam;

namespace {

SystemMatrices adjoint_system(double alpha, int n) {
  Coefficient a = Coefficient::power_law(alpha);
  return assemble(a, classify(a), build_mesh(n), BoundaryRegime::adjoint());
}

}  // namespace

TEST(ObservedEnergy, TrapezoidOfTraceSquares) {
  Trajectory traj;
  traj.dt = 0.5;
  for (double v : {1.0, 2.0, 3.0}) {
    BoundaryTrace tr;
    tr.y_xx = v;
    traj.traces.push_back(tr);
  }
  // 0.5 * (1/2 + 4 + 9/2)
  EXPECT_DOUBLE_EQ(observed_boundary_energy(traj), 4.5);
  EXPECT_THROW(observed_boundary_energy(Trajectory{}), InvalidArgumentError);
}

TEST(Quotient, LowestModesAboveBoundAtTwo) {
  SystemMatrices sys = adjoint_system(0.5, 32);
  auto modes = eigenmodes(sys, 5);
  for (const auto& m : modes) {
    BeamState s{0.0, m.shape, Vec::Zero(sys.size())};
    ObservabilityReport r = observability_quotient(s, 2.0, sys, 1.0 / 256);
    EXPECT_DOUBLE_EQ(r.T0, 1.8);
    EXPECT_DOUBLE_EQ(r.CT_lower_bound, 0.5);
    EXPECT_GE(r.scaled_quotient, 0.45);
    EXPECT_TRUE(r.satisfied);
    EXPECT_DOUBLE_EQ(r.scaled_quotient, r.quotient);  // a(1) = 1
  }
}

TEST(Quotient, ScaleInvariant) {
  SystemMatrices sys = adjoint_system(0.5, 16);
  auto modes = eigenmodes(sys, 2);
  BeamState s{0.0, modes[0].shape, modes[1].shape};
  BeamState t{0.0, 3.0 * s.u, 3.0 * s.v};
  double q1 = observability_quotient(s, 2.0, sys, 1.0 / 128).quotient;
  double q2 = observability_quotient(t, 2.0, sys, 1.0 / 128).quotient;
  EXPECT_NEAR(q1, q2, 1e-10 * q1);
}

TEST(Quotient, Rejections) {
  SystemMatrices sys = adjoint_system(0.5, 8);
  EXPECT_THROW(observability_quotient(zero_state(sys), 2.0, sys, 0.01), InvalidArgumentError);
  Coefficient a = Coefficient::power_law(0.5);
  SystemMatrices fb = assemble(a, classify(a), build_mesh(8), BoundaryRegime::feedback(1, 1));
  EXPECT_THROW(observability_quotient(zero_state(fb), 2.0, fb, 0.01), WrongRegimeError);
  EXPECT_THROW(empirical_observability_constant(2.0, sys, 0, 0.01), InvalidArgumentError);
}

TEST(Quotient, BelowTheoreticalTimeStillComputed) {
  SystemMatrices sys = adjoint_system(0.5, 16);
  auto modes = eigenmodes(sys, 1);
  BeamState s{0.0, modes[0].shape, Vec::Zero(sys.size())};
  ObservabilityReport r = observability_quotient(s, 1.0, sys, 1.0 / 128);
  EXPECT_LT(r.CT_lower_bound, 0.0);
  EXPECT_GT(r.quotient, 0.0);
  EXPECT_TRUE(r.satisfied);
}

// The empirical minimum is nonincreasing in the probe count.
TEST(Property, EmpiricalMinimumNested) {
  SystemMatrices sys = adjoint_system(0.5, 16);
  double previous = INFINITY;
  for (int n = 1; n <= 5; ++n) {
    ObservabilityReport r = empirical_observability_constant(2.0, sys, n, 1.0 / 128, 11);
    EXPECT_EQ(static_cast<int>(r.probes.size()), 2 * n);
    EXPECT_LE(r.scaled_quotient, previous * (1.0 + 1e-12));
    previous = r.scaled_quotient;
    for (const auto& p : r.probes) EXPECT_GE(p.scaled_quotient, r.scaled_quotient);
  }
}

TEST(Property, StronglyDegenerateQuotientPositive) {
  SystemMatrices sys = adjoint_system(1.5, 16);
  ObservabilityReport r = empirical_observability_constant(10.0, sys, 3, 1.0 / 64, 3);
  EXPECT_GT(r.CT_lower_bound, 0.0);
  EXPECT_GT(r.scaled_quotient, 0.0);
}
