#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "degenbeam/coeff.hpp"
#include "degenbeam/errors.hpp"
#include "degenbeam/mesh.hpp"
#include "degenbeam/quadrature.hpp"

namespace degenbeam {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

// Cubic Hermite basis on an element of width h at local coordinate
// xi in [0, 1]. Order: value left, slope left, value right, slope right.
struct HermiteBasis {
  std::array<double, 4> v, d1, d2;
};

inline HermiteBasis hermite_basis(double xi, double h) {
  double x2 = xi * xi, x3 = x2 * xi;
  HermiteBasis b;
  b.v = {1.0 - 3.0 * x2 + 2.0 * x3, h * (xi - 2.0 * x2 + x3), 3.0 * x2 - 2.0 * x3, h * (x3 - x2)};
  b.d1 = {(6.0 * x2 - 6.0 * xi) / h, 1.0 - 4.0 * xi + 3.0 * x2, (6.0 * xi - 6.0 * x2) / h,
          3.0 * x2 - 2.0 * xi};
  b.d2 = {(12.0 * xi - 6.0) / (h * h), (6.0 * xi - 4.0) / h, (6.0 - 12.0 * xi) / (h * h),
          (6.0 * xi - 2.0) / h};
  return b;
}

inline int value_dof(int node) { return 2 * node; }
inline int slope_dof(int node) { return 2 * node + 1; }

enum class RegimeKind { Adjoint, Controlled, Feedback };

struct BoundaryRegime {
  RegimeKind kind = RegimeKind::Adjoint;
  double beta = 0.0;
  double gamma = 0.0;

  static BoundaryRegime adjoint() { return {RegimeKind::Adjoint, 0.0, 0.0}; }
  static BoundaryRegime controlled() { return {RegimeKind::Controlled, 0.0, 0.0}; }
  static BoundaryRegime feedback(double beta, double gamma) {
    return {RegimeKind::Feedback, beta, gamma};
  }
};

inline const char* to_string(RegimeKind kind) {
  switch (kind) {
    case RegimeKind::Adjoint: return "adjoint";
    case RegimeKind::Controlled: return "controlled";
    case RegimeKind::Feedback: return "feedback";
  }
  return "";
}

struct DofMap {
  int total = 0;
  std::vector<int> free;
  std::vector<int> pinned;
  int driven = -1;
  std::vector<int> position;  // global dof -> index in free, or -1
};

struct SystemMatrices {
  BeamMesh mesh;
  DegeneracyClass cls;
  BoundaryRegime regime;
  double a_at_one = 1.0;

  // Full-size matrices over all 2(n+1) dofs.
  SpMat M;  // integral of u v
  SpMat S;  // integral of a u'' v''
  SpMat B;  // beta u(1)v(1) + gamma u'(1)v'(1)
  SpMat D;  // u(1)v(1) + u'(1)v'(1), feedback regime only
  SpMat G;  // integral of u' v'

  DofMap dofs;
  int trace_value = 0;     // dof holding u(1)
  int trace_rotation = 0;  // dof holding u'(1)

  int size() const { return dofs.total; }
  int free_size() const { return static_cast<int>(dofs.free.size()); }
};

inline SpMat submatrix(const SpMat& A, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> row_pos(A.rows(), -1), col_pos(A.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) row_pos[rows[i]] = static_cast<int>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) col_pos[cols[j]] = static_cast<int>(j);
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      int r = row_pos[it.row()], c = col_pos[it.col()];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  }
  SpMat out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

inline Vec column(const SpMat& A, const std::vector<int>& rows, int col) {
  Vec out = Vec::Zero(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = A.coeff(rows[i], col);
  return out;
}

inline Vec restrict_to(const DofMap& map, const Vec& full) {
  Vec out(static_cast<int>(map.free.size()));
  for (std::size_t i = 0; i < map.free.size(); ++i) out[i] = full[map.free[i]];
  return out;
}

inline Vec expand_from(const DofMap& map, const Vec& free_values, double driven_value = 0.0) {
  Vec out = Vec::Zero(map.total);
  for (std::size_t i = 0; i < map.free.size(); ++i) out[map.free[i]] = free_values[i];
  if (map.driven >= 0) out[map.driven] = driven_value;
  return out;
}

// Zeroes pinned and driven dofs.
inline Vec constrain(const DofMap& map, Vec full) {
  for (int p : map.pinned) full[p] = 0.0;
  if (map.driven >= 0) full[map.driven] = 0.0;
  return full;
}

inline DofMap make_dof_map(int nodes, const DegeneracyClass& cls, const BoundaryRegime& regime) {
  DofMap map;
  map.total = 2 * nodes;
  int last = nodes - 1;
  std::vector<char> pinned(map.total, 0);
  pinned[value_dof(0)] = 1;
  if (cls.weak()) pinned[slope_dof(0)] = 1;
  switch (regime.kind) {
    case RegimeKind::Adjoint:
      pinned[value_dof(last)] = 1;
      pinned[slope_dof(last)] = 1;
      break;
    case RegimeKind::Controlled:
      pinned[value_dof(last)] = 1;
      map.driven = slope_dof(last);
      break;
    case RegimeKind::Feedback:
      break;
  }
  map.position.assign(map.total, -1);
  for (int d = 0; d < map.total; ++d) {
    if (d == map.driven) continue;
    if (pinned[d]) {
      map.pinned.push_back(d);
    } else {
      map.position[d] = static_cast<int>(map.free.size());
      map.free.push_back(d);
    }
  }
  return map;
}

inline SystemMatrices assemble(const Coefficient& a, const DegeneracyClass& cls, const BeamMesh& mesh,
                               const BoundaryRegime& regime, int gauss_points = 6) {
  if (regime.kind == RegimeKind::Feedback) {
    if (regime.beta < 0.0 || regime.gamma < 0.0) {
      throw InvalidArgumentError("feedback gains must be nonnegative");
    }
    if (!cls.weak() && !(regime.beta > 0.0 && regime.gamma > 0.0)) {
      throw OutOfScopeError(
          "strongly degenerate feedback with beta = 0 or gamma = 0 is out of scope (open problem)");
    }
  }
  SystemMatrices sys;
  sys.mesh = mesh;
  sys.cls = cls;
  sys.regime = regime;
  sys.a_at_one = a(1.0);

  const int n = mesh.elements();
  const int ndof = 2 * (n + 1);
  const GaussRule rule = gauss_legendre(gauss_points);
  std::vector<Eigen::Triplet<double>> tm, ts, tg;
  tm.reserve(16 * n);
  ts.reserve(16 * n);
  tg.reserve(16 * n);

  auto check_positive = [](double x, double ax) {
    if (ax < 0.0) {
      std::ostringstream os;
      os << "coefficient is negative at quadrature point x = " << x << " (a = " << ax << ")";
      throw InvalidCoefficientError(os.str());
    }
  };

  for (int e = 0; e < n; ++e) {
    const double x0 = mesh.nodes[e], h = mesh.width(e);
    Eigen::Matrix4d me = Eigen::Matrix4d::Zero(), se = Eigen::Matrix4d::Zero(),
                    ge = Eigen::Matrix4d::Zero();
    // The first element touches the degeneracy point, where a is only
    // Hoelder continuous; split it into dyadic cells toward 0.
    std::vector<std::pair<double, double>> cells;
    if (e == 0) {
      double right = 1.0;
      for (int k = 0; k < 40; ++k) {
        cells.emplace_back(0.5 * right, right);
        right *= 0.5;
      }
      cells.emplace_back(0.0, right);
    } else {
      cells.emplace_back(0.0, 1.0);
    }
    for (auto [lo, hi] : cells) {
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        double xi = lo + (hi - lo) * rule.nodes[q];
        double w = rule.weights[q] * (hi - lo) * h;
        double x = x0 + h * xi;
        double ax = a(x);
        check_positive(x, ax);
        HermiteBasis b = hermite_basis(xi, h);
        for (int i = 0; i < 4; ++i) {
          for (int j = 0; j < 4; ++j) {
            me(i, j) += w * b.v[i] * b.v[j];
            se(i, j) += w * ax * b.d2[i] * b.d2[j];
            ge(i, j) += w * b.d1[i] * b.d1[j];
          }
        }
      }
    }
    const int base = 2 * e;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        tm.emplace_back(base + i, base + j, me(i, j));
        ts.emplace_back(base + i, base + j, se(i, j));
        tg.emplace_back(base + i, base + j, ge(i, j));
      }
    }
  }

  sys.M.resize(ndof, ndof);
  sys.S.resize(ndof, ndof);
  sys.G.resize(ndof, ndof);
  sys.M.setFromTriplets(tm.begin(), tm.end());
  sys.S.setFromTriplets(ts.begin(), ts.end());
  sys.G.setFromTriplets(tg.begin(), tg.end());

  sys.trace_value = value_dof(n);
  sys.trace_rotation = slope_dof(n);
  sys.B.resize(ndof, ndof);
  sys.D.resize(ndof, ndof);
  if (regime.kind == RegimeKind::Feedback) {
    std::vector<Eigen::Triplet<double>> tb{{sys.trace_value, sys.trace_value, regime.beta},
                                           {sys.trace_rotation, sys.trace_rotation, regime.gamma}};
    std::vector<Eigen::Triplet<double>> td{{sys.trace_value, sys.trace_value, 1.0},
                                           {sys.trace_rotation, sys.trace_rotation, 1.0}};
    sys.B.setFromTriplets(tb.begin(), tb.end());
    sys.D.setFromTriplets(td.begin(), td.end());
  }
  sys.dofs = make_dof_map(n + 1, cls, regime);
  return sys;
}

struct FieldValue {
  double value = 0.0, d1 = 0.0, d2 = 0.0;
};

inline int locate_element(const BeamMesh& mesh, double x) {
  auto it = std::upper_bound(mesh.nodes.begin(), mesh.nodes.end(), x);
  int e = static_cast<int>(it - mesh.nodes.begin()) - 1;
  return std::clamp(e, 0, mesh.elements() - 1);
}

inline FieldValue evaluate(const BeamMesh& mesh, const Vec& dofs, double x) {
  int e = locate_element(mesh, x);
  double h = mesh.width(e);
  HermiteBasis b = hermite_basis((x - mesh.nodes[e]) / h, h);
  FieldValue f;
  for (int i = 0; i < 4; ++i) {
    double c = dofs[2 * e + i];
    f.value += c * b.v[i];
    f.d1 += c * b.d1[i];
    f.d2 += c * b.d2[i];
  }
  return f;
}

// y_xx(1) from the last element.
inline double second_derivative_trace(const Vec& dofs, const BeamMesh& mesh) {
  const int n = mesh.elements();
  if (dofs.size() != 2 * (n + 1)) throw InvalidArgumentError("dof vector does not match the mesh");
  const double h = mesh.width(n - 1);
  return 6.0 * (dofs[value_dof(n - 1)] - dofs[value_dof(n)]) / (h * h) +
         2.0 * dofs[slope_dof(n - 1)] / h + 4.0 * dofs[slope_dof(n)] / h;
}

template <class F, class DF>
Vec interpolate(const BeamMesh& mesh, F&& f, DF&& df) {
  Vec out(2 * static_cast<int>(mesh.nodes.size()));
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    out[value_dof(static_cast<int>(i))] = f(mesh.nodes[i]);
    out[slope_dof(static_cast<int>(i))] = df(mesh.nodes[i]);
  }
  return out;
}

inline SpMat stiffness_with_boundary(const SystemMatrices& sys) {
  SpMat K = sys.S + sys.B;
  return K;
}

struct Eigenmode {
  double omega_squared = 0.0;
  Vec shape;  // full dof vector, unit mass norm
};

// Lowest generalized eigenpairs of (S + B, M) on the free dofs.
inline std::vector<Eigenmode> eigenmodes(const SystemMatrices& sys, int count) {
  Eigen::MatrixXd Kf = Eigen::MatrixXd(submatrix(stiffness_with_boundary(sys), sys.dofs.free, sys.dofs.free));
  Eigen::MatrixXd Mf = Eigen::MatrixXd(submatrix(sys.M, sys.dofs.free, sys.dofs.free));
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(Kf, Mf);
  if (solver.info() != Eigen::Success) throw Error("generalized eigensolver failed");
  count = std::min<int>(count, static_cast<int>(Kf.rows()));
  std::vector<Eigenmode> modes;
  for (int k = 0; k < count; ++k) {
    Vec v = solver.eigenvectors().col(k);
    v /= std::sqrt(v.dot(Mf * v));
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;
    modes.push_back({solver.eigenvalues()[k], expand_from(sys.dofs, v)});
  }
  return modes;
}

// MatrixMarket coordinate format, 1-based indices.
inline void write_coordinate(const SpMat& A, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  os.precision(17);
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace degenbeam
