#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "degenbeam/errors.hpp"
#include "degenbeam/expression.hpp"

namespace degenbeam::app {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
T get(const Json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
void read_optional(const Json& j, const std::string& key, const std::string& where, T& out) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

template <class T>
void read_optional(const Json& j, const std::string& key, const std::string& where, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = get<T>(j, key, where);
}

Json coefficient_json(const CoefficientSpec& c) {
  Json j;
  j["type"] = c.type;
  if (c.type == "power") j["alpha"] = c.alpha;
  if (c.type == "expression") {
    j["a"] = c.a;
    j["da"] = c.da;
  }
  return j;
}

CoefficientSpec coefficient_from(const Json& j) {
  reject_unknown(j, {"type", "alpha", "a", "da"}, "coefficient");
  CoefficientSpec c;
  c.type = get<std::string>(j, "type", "coefficient");
  if (c.type == "power") {
    c.alpha = get<double>(j, "alpha", "coefficient");
  } else if (c.type == "expression") {
    c.a = get<std::string>(j, "a", "coefficient");
    c.da = get<std::string>(j, "da", "coefficient");
  } else if (c.type != "unit") {
    throw ConfigError("coefficient.type must be power, expression or unit");
  }
  return c;
}

}  // namespace

Json to_json(const RunConfig& c) {
  Json j;
  j["coefficient"] = coefficient_json(c.coefficient);
  if (c.class_override) j["class"] = {{"kind", c.class_override->kind}, {"K", c.class_override->K}};
  Json mesh;
  mesh["n_elements"] = c.mesh.n_elements;
  mesh["grading"] = c.mesh.grading;
  if (c.mesh.grading_parameter) mesh["grading_parameter"] = *c.mesh.grading_parameter;
  j["mesh"] = mesh;
  if (c.dt) j["dt"] = *c.dt;
  if (c.T) j["T"] = *c.T;
  Json regime;
  regime["kind"] = c.regime.kind;
  if (c.regime.kind == "feedback") {
    regime["beta"] = c.regime.beta;
    regime["gamma"] = c.regime.gamma;
  }
  j["regime"] = regime;
  Json init;
  init["kind"] = c.initial.kind;
  if (c.initial.kind == "eigenmode") {
    init["index"] = c.initial.index;
    if (c.initial.velocity_index) init["velocity_index"] = *c.initial.velocity_index;
    init["amplitude"] = c.initial.amplitude;
  } else if (c.initial.kind == "polynomial") {
    init["displacement"] = c.initial.displacement;
    init["velocity"] = c.initial.velocity;
  } else {
    init["path"] = c.initial.path;
  }
  j["initial"] = init;
  const Options& o = c.options;
  Json opt;
  opt["cg_tol"] = o.cg_tol;
  opt["max_iter"] = o.max_iter;
  opt["n_probes"] = o.n_probes;
  if (o.delta) opt["delta"] = *o.delta;
  if (o.eps0) opt["eps0"] = *o.eps0;
  opt["slack"] = o.slack;
  opt["lambda"] = o.lambda;
  opt["mu"] = o.mu;
  opt["tol"] = o.tol;
  opt["identity_tol"] = o.identity_tol;
  opt["terminal_tol"] = o.terminal_tol;
  if (!o.drive.empty()) opt["drive"] = o.drive;
  opt["n_initial"] = o.n_initial;
  j["options"] = opt;
  j["seed"] = c.seed;
  return j;
}

RunConfig config_from_json(const Json& j) {
  reject_unknown(j, {"coefficient", "class", "mesh", "dt", "T", "regime", "initial", "options", "seed"}, "config");
  RunConfig c;
  if (!j.contains("coefficient")) throw ConfigError("config.coefficient is required");
  c.coefficient = coefficient_from(j.at("coefficient"));

  if (j.contains("class") && !j.at("class").is_null()) {
    const Json& k = j.at("class");
    reject_unknown(k, {"kind", "K"}, "class");
    ClassOverride o{get<std::string>(k, "kind", "class"), get<double>(k, "K", "class")};
    if (o.kind != "WD" && o.kind != "SD") throw ConfigError("class.kind must be WD or SD");
    c.class_override = o;
  }

  if (j.contains("mesh")) {
    const Json& m = j.at("mesh");
    reject_unknown(m, {"n_elements", "grading", "grading_parameter"}, "mesh");
    read_optional(m, "n_elements", "mesh", c.mesh.n_elements);
    read_optional(m, "grading", "mesh", c.mesh.grading);
    read_optional(m, "grading_parameter", "mesh", c.mesh.grading_parameter);
    if (c.mesh.grading != "uniform" && c.mesh.grading != "geometric" && c.mesh.grading != "power") {
      throw ConfigError("mesh.grading must be uniform, geometric or power");
    }
  }
  read_optional(j, "dt", "config", c.dt);
  read_optional(j, "T", "config", c.T);
  if (c.dt && !(*c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (c.T && !(*c.T > 0.0)) throw ConfigError("T must be positive");

  if (j.contains("regime")) {
    const Json& r = j.at("regime");
    reject_unknown(r, {"kind", "beta", "gamma"}, "regime");
    c.regime.kind = get<std::string>(r, "kind", "regime");
    if (c.regime.kind == "feedback") {
      c.regime.beta = get<double>(r, "beta", "regime");
      c.regime.gamma = get<double>(r, "gamma", "regime");
    } else if (c.regime.kind != "adjoint" && c.regime.kind != "controlled") {
      throw ConfigError("regime.kind must be adjoint, controlled or feedback");
    }
  }

  if (j.contains("initial")) {
    const Json& i = j.at("initial");
    reject_unknown(i, {"kind", "index", "velocity_index", "amplitude", "displacement", "velocity", "path"},
                   "initial");
    c.initial.kind = get<std::string>(i, "kind", "initial");
    if (c.initial.kind == "eigenmode") {
      read_optional(i, "index", "initial", c.initial.index);
      read_optional(i, "velocity_index", "initial", c.initial.velocity_index);
      read_optional(i, "amplitude", "initial", c.initial.amplitude);
      if (c.initial.index < 1) throw ConfigError("initial.index is 1-based");
      if (c.initial.velocity_index && *c.initial.velocity_index < 1) {
        throw ConfigError("initial.velocity_index is 1-based");
      }
    } else if (c.initial.kind == "polynomial") {
      read_optional(i, "displacement", "initial", c.initial.displacement);
      read_optional(i, "velocity", "initial", c.initial.velocity);
    } else if (c.initial.kind == "file") {
      c.initial.path = get<std::string>(i, "path", "initial");
    } else {
      throw ConfigError("initial.kind must be eigenmode, polynomial or file");
    }
  }

  if (j.contains("options")) {
    const Json& o = j.at("options");
    reject_unknown(o,
                   {"cg_tol", "max_iter", "n_probes", "delta", "eps0", "slack", "lambda", "mu", "tol",
                    "identity_tol", "terminal_tol", "drive", "n_initial"},
                   "options");
    Options& p = c.options;
    read_optional(o, "cg_tol", "options", p.cg_tol);
    read_optional(o, "max_iter", "options", p.max_iter);
    read_optional(o, "n_probes", "options", p.n_probes);
    read_optional(o, "delta", "options", p.delta);
    read_optional(o, "eps0", "options", p.eps0);
    read_optional(o, "slack", "options", p.slack);
    read_optional(o, "lambda", "options", p.lambda);
    read_optional(o, "mu", "options", p.mu);
    read_optional(o, "tol", "options", p.tol);
    read_optional(o, "identity_tol", "options", p.identity_tol);
    read_optional(o, "terminal_tol", "options", p.terminal_tol);
    read_optional(o, "drive", "options", p.drive);
    read_optional(o, "n_initial", "options", p.n_initial);
    if (p.n_probes < 1) throw ConfigError("options.n_probes must be at least 1");
    if (p.n_initial < 1) throw ConfigError("options.n_initial must be at least 1");
    if (p.max_iter < 1) throw ConfigError("options.max_iter must be at least 1");
  }
  read_optional(j, "seed", "config", c.seed);
  return c;
}

RunConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

Coefficient make_coefficient(const CoefficientSpec& spec) {
  if (spec.type == "unit") return Coefficient::unit();
  if (spec.type == "power") {
    if (!(spec.alpha > 0.0)) throw InvalidCoefficientError("power-law exponent must be positive");
    return Coefficient::power_law(spec.alpha);
  }
  Expression a = Expression::parse(spec.a);
  Expression da = Expression::parse(spec.da);
  return Coefficient::general(a, da, spec.a);
}

DegeneracyClass resolve_class(const RunConfig& c, const Coefficient& a) {
  if (c.class_override) {
    const auto& o = *c.class_override;
    DegeneracyClass cls{o.kind == "WD" ? DegeneracyKind::WD : DegeneracyKind::SD, o.K};
    if (cls.weak() != (o.K < 1.0) && !a.is_unit()) {
      throw ConfigError("class override kind does not match K");
    }
    return cls;
  }
  if (a.is_unit()) throw ConfigError("a = 1 needs an explicit class override");
  return classify(a);
}

BeamMesh make_mesh(const MeshSpec& spec) {
  if (spec.grading == "uniform") return build_mesh(spec.n_elements);
  if (spec.grading == "geometric") return build_mesh(spec.n_elements, Grading::geometric(spec.grading_parameter.value_or(0.7)));
  if (!spec.grading_parameter) throw ConfigError("power grading needs mesh.grading_parameter");
  return build_mesh(spec.n_elements, Grading::power(*spec.grading_parameter));
}

BoundaryRegime make_regime(const RegimeSpec& spec) {
  if (spec.kind == "adjoint") return BoundaryRegime::adjoint();
  if (spec.kind == "controlled") return BoundaryRegime::controlled();
  return BoundaryRegime::feedback(spec.beta, spec.gamma);
}

namespace {

double poly(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
  return s;
}

double dpoly(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) s = s * x + static_cast<double>(k) * c[k];
  return s;
}

// CSV with header x,y,y_x,y_t,y_tx and one row per mesh node.
BeamState read_state_file(const std::string& path, const SystemMatrices& sys) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open initial data file " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("x,y,y_x,y_t,y_tx", 0) != 0) {
    throw ConfigError("initial data file must start with the header x,y,y_x,y_t,y_tx");
  }
  BeamState s{0.0, Vec::Zero(sys.size()), Vec::Zero(sys.size())};
  const auto& nodes = sys.mesh.nodes;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("bad number '" + cell + "' in " + path);
      }
    }
    if (vals.size() != 5) throw ConfigError("initial data rows need 5 columns");
    if (row >= nodes.size()) throw ConfigError("initial data file has more rows than mesh nodes");
    if (std::abs(vals[0] - nodes[row]) > 1e-9) throw ConfigError("initial data nodes do not match the mesh");
    int node = static_cast<int>(row);
    s.u[value_dof(node)] = vals[1];
    s.u[slope_dof(node)] = vals[2];
    s.v[value_dof(node)] = vals[3];
    s.v[slope_dof(node)] = vals[4];
    ++row;
  }
  if (row != nodes.size()) throw ConfigError("initial data file does not cover every mesh node");
  return s;
}

}  // namespace

BeamState make_initial_state(const InitialSpec& spec, const SystemMatrices& sys) {
  BeamState s{0.0, Vec::Zero(sys.size()), Vec::Zero(sys.size())};
  if (spec.kind == "eigenmode") {
    int need = std::max(spec.index, spec.velocity_index.value_or(0));
    std::vector<Eigenmode> modes = eigenmodes(sys, need);
    if (static_cast<int>(modes.size()) < need) throw ConfigError("eigenmode index exceeds the free dofs");
    s.u = spec.amplitude * modes[spec.index - 1].shape;
    if (spec.velocity_index) {
      const Eigenmode& m = modes[*spec.velocity_index - 1];
      s.v = (spec.amplitude * std::sqrt(m.omega_squared)) * m.shape;
    }
  } else if (spec.kind == "polynomial") {
    s.u = interpolate(sys.mesh, [&](double x) { return poly(spec.displacement, x); },
                      [&](double x) { return dpoly(spec.displacement, x); });
    s.v = interpolate(sys.mesh, [&](double x) { return poly(spec.velocity, x); },
                      [&](double x) { return dpoly(spec.velocity, x); });
  } else {
    s = read_state_file(spec.path, sys);
  }
  s.u = constrain(sys.dofs, s.u);
  s.v = constrain(sys.dofs, s.v);
  return s;
}

}  // namespace degenbeam::app
