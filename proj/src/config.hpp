#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "degenbeam/coeff.hpp"
#include "degenbeam/dynamics.hpp"
#include "degenbeam/femdisc.hpp"
#include "degenbeam/mesh.hpp"

namespace degenbeam::app {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct CoefficientSpec {
  std::string type = "power";  // power | expression | unit
  double alpha = 0.5;
  std::string a;   // expression in x
  std::string da;  // its derivative
};

struct ClassOverride {
  std::string kind;  // WD | SD
  double K = 0.0;
};

struct MeshSpec {
  int n_elements = 64;
  std::string grading = "uniform";  // uniform | geometric | power
  std::optional<double> grading_parameter;
};

struct RegimeSpec {
  std::string kind = "adjoint";  // adjoint | controlled | feedback
  double beta = 0.0;
  double gamma = 0.0;
};

struct InitialSpec {
  std::string kind = "eigenmode";  // eigenmode | polynomial | file
  int index = 1;                   // eigenmode, 1-based
  std::optional<int> velocity_index;
  double amplitude = 1.0;
  std::vector<double> displacement;  // polynomial coefficients, increasing degree
  std::vector<double> velocity;
  std::string path;
};

struct Options {
  double cg_tol = 1e-8;
  int max_iter = 3000;
  int n_probes = 5;
  std::optional<double> delta;
  std::optional<double> eps0;
  double slack = 0.1;
  double lambda = 1.0;
  double mu = 0.0;
  double tol = 1e-8;           // conservation and dissipation checks
  double identity_tol = 1e-2;  // multiplier identities
  double terminal_tol = 1e-6;  // HUM terminal energy ratio
  std::string drive;           // controlled simulate: rotation f(t), written in x
  int n_initial = 5;           // decay: number of initial data
};

struct RunConfig {
  CoefficientSpec coefficient;
  std::optional<ClassOverride> class_override;
  MeshSpec mesh;
  std::optional<double> dt;
  std::optional<double> T;
  RegimeSpec regime;
  InitialSpec initial;
  Options options;
  std::uint64_t seed = 0;
};

Json to_json(const RunConfig& c);
RunConfig config_from_json(const Json& j);
// Parse errors throw ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& c);

Coefficient make_coefficient(const CoefficientSpec& spec);
DegeneracyClass resolve_class(const RunConfig& c, const Coefficient& a);
BeamMesh make_mesh(const MeshSpec& spec);
BoundaryRegime make_regime(const RegimeSpec& spec);

// Initial state on the system's dof layout with its pinned dofs zeroed.
BeamState make_initial_state(const InitialSpec& spec, const SystemMatrices& sys);

}  // namespace degenbeam::app
