#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "degenbeam/errors.hpp"

namespace degenbeam {

struct Grading {
  enum class Kind { Uniform, GeometricTowardZero, Power };
  Kind kind = Kind::Uniform;
  // Width ratio between neighbouring elements (geometric) or the exponent q
  // of x_i = (i/n)^q (power).
  double parameter = 1.0;

  static Grading uniform() { return {Kind::Uniform, 1.0}; }
  static Grading geometric(double ratio = 0.7) { return {Kind::GeometricTowardZero, ratio}; }
  static Grading power(double q) { return {Kind::Power, q}; }
};

struct BeamMesh {
  std::vector<double> nodes;
  Grading grading;

  int elements() const { return static_cast<int>(nodes.size()) - 1; }
  double width(int e) const { return nodes[e + 1] - nodes[e]; }
  double max_width() const {
    double h = 0.0;
    for (int e = 0; e < elements(); ++e) h = std::max(h, width(e));
    return h;
  }
};

inline BeamMesh build_mesh(int n_elements, Grading grading = Grading::uniform()) {
  if (n_elements < 4) {
    throw InvalidArgumentError("a mesh needs at least 4 elements, got " + std::to_string(n_elements));
  }
  BeamMesh mesh;
  mesh.grading = grading;
  mesh.nodes.resize(n_elements + 1);
  switch (grading.kind) {
    case Grading::Kind::Uniform:
      for (int i = 0; i <= n_elements; ++i) mesh.nodes[i] = static_cast<double>(i) / n_elements;
      break;
    case Grading::Kind::GeometricTowardZero: {
      double r = grading.parameter;
      if (!(r > 0.0 && r <= 1.0)) throw InvalidArgumentError("geometric ratio must lie in (0, 1]");
      // Element e has width proportional to r^(n-1-e).
      std::vector<double> w(n_elements);
      double total = 0.0;
      for (int e = 0; e < n_elements; ++e) {
        w[e] = std::pow(r, n_elements - 1 - e);
        total += w[e];
      }
      mesh.nodes[0] = 0.0;
      for (int e = 0; e < n_elements; ++e) mesh.nodes[e + 1] = mesh.nodes[e] + w[e] / total;
      break;
    }
    case Grading::Kind::Power: {
      double q = grading.parameter;
      if (!(q >= 1.0)) throw InvalidArgumentError("power grading exponent must be >= 1");
      for (int i = 0; i <= n_elements; ++i) {
        mesh.nodes[i] = std::pow(static_cast<double>(i) / n_elements, q);
      }
      break;
    }
  }
  mesh.nodes.front() = 0.0;
  mesh.nodes.back() = 1.0;
  for (int e = 0; e < n_elements; ++e) {
    if (!(mesh.nodes[e + 1] > mesh.nodes[e])) {
      throw InvalidArgumentError("mesh nodes are not strictly increasing");
    }
  }
  return mesh;
}

}  // namespace degenbeam
