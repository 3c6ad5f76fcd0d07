#pragma once

// Run configuration read from a JSON document. Every key is checked against
// the schema below before any computation; unknown keys are errors.
//
//   name                string
//   dimension           2 | 3
//   cell_length         mm, > 0                        (default 1)
//   resolution          cells per edge, >= 4
//   geometry.shape      homogeneous | disk | cylinder | sphere | cube
//   geometry.radius     mm (disk, cylinder, sphere)
//   geometry.side       mm (cube)
//   geometry.axis       0 | 1 | 2 (cylinder, default 2)
//   geometry.offset     [mm, mm(, mm)] inclusion center offset (default 0)
//   materials.matrix / materials.inclusion
//       youngs_modulus GPa, poisson_ratio, mass_density kg/m^3
//   stiffness_floor     GPa                            (default 1e-10)
//   solver.tolerance    relative residual              (default 1e-10)
//   solver.max_iterations                              (default 0: 50 sqrt(dofs))
//   solver.preconditioner auto | jacobi | reference_medium | none (default auto)
//   homothetic_scale    > 0                            (default 1)
//   density_weighting   bool                           (default true)
//   voigt_ordering      block_diagonal | lexicographic (default block_diagonal)
//   symmetry_tolerance  relative                       (default 0.05)
//   output.directory    path                           (default ".")
//   output.dump_correctors bool                        (default false)
//   sweep.axis          inclusion_size | resolution | repetition | cell_length
//   sweep.values        list of numbers
//   verify.states       random macro states            (default 20)
//   verify.seed         integer                        (default 20240611)
//   verify.energy_tolerance                            (default 1e-6)
//   verify.stack_repeats list of 1..3                  (default [2, 3])
//   verify.stack_resolution cells per edge of one cell (default resolution)
//   verify.stack_tolerance                             (default 0.01)
//   verify.homogeneous_resolution                      (default 8)
//   verify.expected_symmetry cubic | transverse_isotropic | other
//   verify.tensors      result document whose tensors replace the computed ones
//                       (path relative to the config file)

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <variant>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "sgh/error.hpp"
#include "sgh/fem/solver.hpp"
#include "sgh/microstructure.hpp"
#include "sgh/voigt.hpp"

namespace sgh::io {

using json = nlohmann::json;

struct SweepSpec {
  std::string axis;
  std::vector<double> values;
};

struct VerifySpec {
  int states = 20;
  std::uint64_t seed = 20240611;
  double energy_tolerance = 1e-6;
  std::vector<int> stack_repeats{2, 3};
  int stack_resolution = 0;
  double stack_tolerance = 0.01;
  int homogeneous_resolution = 8;
  std::string expected_symmetry;
  std::string tensors;
};

struct RunConfig {
  std::string name = "run";
  GeometrySpec geometry;
  int resolution = 0;
  std::array<Material, 2> materials{};
  double stiffness_floor = default_stiffness_floor;
  fem::SolverOptions solver;
  double homothetic_scale = 1.0;
  bool density_weighting = true;
  VoigtOrdering voigt_ordering = VoigtOrdering::block_diagonal;
  double symmetry_tolerance = 0.05;
  std::string output_directory = ".";
  bool dump_correctors = false;
  std::optional<SweepSpec> sweep;
  VerifySpec verify;
  json source;
};

namespace detail {

inline void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
}

inline double number(const json& j, const std::string& key, const std::string& where, double fallback,
                     bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError("missing key '" + where + key + "'");
    return fallback;
  }
  if (!j[key].is_number()) throw ConfigError("'" + where + key + "' must be a number");
  return j[key].get<double>();
}

inline int integer(const json& j, const std::string& key, const std::string& where, int fallback,
                   bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError("missing key '" + where + key + "'");
    return fallback;
  }
  if (!j[key].is_number_integer()) throw ConfigError("'" + where + key + "' must be an integer");
  return j[key].get<int>();
}

inline bool boolean(const json& j, const std::string& key, const std::string& where, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError("'" + where + key + "' must be true or false");
  return j[key].get<bool>();
}

inline std::string text(const json& j, const std::string& key, const std::string& where, const std::string& fallback,
                        bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError("missing key '" + where + key + "'");
    return fallback;
  }
  if (!j[key].is_string()) throw ConfigError("'" + where + key + "' must be a string");
  return j[key].get<std::string>();
}

inline Material material(const json& j, const std::string& where) {
  allow_keys(j, where, {"youngs_modulus", "poisson_ratio", "mass_density"});
  Material m;
  m.youngs_modulus = number(j, "youngs_modulus", where + ".", 0.0, true);
  m.poisson_ratio = number(j, "poisson_ratio", where + ".", 0.0, true);
  m.mass_density = number(j, "mass_density", where + ".", 0.0, true);
  try {
    validate_material(m);
  } catch (const MaterialError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return m;
}

}  // namespace detail

/// Validates and converts a parsed document.
inline RunConfig parse_config(const json& j) {
  using namespace detail;
  allow_keys(j, "", {"name", "dimension", "cell_length", "resolution", "geometry", "materials", "stiffness_floor",
                     "solver", "homothetic_scale", "density_weighting", "voigt_ordering", "symmetry_tolerance",
                     "output", "sweep", "verify"});
  RunConfig c;
  c.source = j;
  c.name = text(j, "name", "", "run");
  const int dim = integer(j, "dimension", "", 0, true);
  if (dim != 2 && dim != 3) throw ConfigError("'dimension' must be 2 or 3");
  c.geometry.dimension = dim;
  c.geometry.cell_length = number(j, "cell_length", "", 1.0);
  if (!(c.geometry.cell_length > 0.0)) throw ConfigError("'cell_length' must be positive");
  c.resolution = integer(j, "resolution", "", 0, true);
  if (c.resolution < 4) throw ConfigError("'resolution' must be at least 4");

  if (!j.contains("geometry")) throw ConfigError("missing key 'geometry'");
  const auto& g = j["geometry"];
  allow_keys(g, "geometry", {"shape", "radius", "side", "axis", "offset"});
  const std::string shape = text(g, "shape", "geometry.", "", true);
  if (shape == "homogeneous") {
    c.geometry.shape = Homogeneous{};
  } else if (shape == "disk") {
    c.geometry.shape = Disk{number(g, "radius", "geometry.", 0.0, true)};
  } else if (shape == "cylinder") {
    const int axis = integer(g, "axis", "geometry.", 2);
    c.geometry.shape = Cylinder{number(g, "radius", "geometry.", 0.0, true), axis};
  } else if (shape == "sphere") {
    c.geometry.shape = Sphere{number(g, "radius", "geometry.", 0.0, true)};
  } else if (shape == "cube") {
    c.geometry.shape = Cube{number(g, "side", "geometry.", 0.0, true)};
  } else {
    throw ConfigError("unknown geometry.shape '" + shape + "'");
  }
  if (g.contains("offset")) {
    const auto& o = g["offset"];
    if (!o.is_array() || static_cast<int>(o.size()) != dim)
      throw ConfigError("geometry.offset must list one number per dimension");
    for (int i = 0; i < dim; ++i) {
      if (!o[i].is_number()) throw ConfigError("geometry.offset entries must be numbers");
      c.geometry.offset[i] = o[i].get<double>();
    }
  }
  try {
    validate_geometry(c.geometry);
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }

  if (!j.contains("materials")) throw ConfigError("missing key 'materials'");
  const auto& m = j["materials"];
  allow_keys(m, "materials", {"matrix", "inclusion"});
  if (!m.contains("matrix")) throw ConfigError("missing key 'materials.matrix'");
  c.materials[0] = material(m["matrix"], "materials.matrix");
  c.materials[1] = m.contains("inclusion") ? material(m["inclusion"], "materials.inclusion") : c.materials[0];
  if (!m.contains("inclusion") && !std::holds_alternative<Homogeneous>(c.geometry.shape))
    throw ConfigError("missing key 'materials.inclusion'");

  c.stiffness_floor = number(j, "stiffness_floor", "", default_stiffness_floor);
  if (!(c.stiffness_floor > 0.0)) throw ConfigError("'stiffness_floor' must be positive");
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    allow_keys(s, "solver", {"tolerance", "max_iterations", "preconditioner"});
    c.solver.tolerance = number(s, "tolerance", "solver.", c.solver.tolerance);
    if (!(c.solver.tolerance > 0.0 && c.solver.tolerance < 1.0)) throw ConfigError("solver.tolerance must be in (0, 1)");
    const int it = integer(s, "max_iterations", "solver.", 0);
    if (it < 0) throw ConfigError("solver.max_iterations must be non-negative");
    c.solver.max_iterations = static_cast<std::size_t>(it);
    const std::string pc = text(s, "preconditioner", "solver.", "auto");
    if (pc == "auto")
      c.solver.preconditioner = fem::PreconditionerKind::automatic;
    else if (pc == "jacobi")
      c.solver.preconditioner = fem::PreconditionerKind::jacobi;
    else if (pc == "reference_medium")
      c.solver.preconditioner = fem::PreconditionerKind::reference_medium;
    else if (pc == "none")
      c.solver.preconditioner = fem::PreconditionerKind::none;
    else
      throw ConfigError("unknown solver.preconditioner '" + pc + "'");
  }
  c.homothetic_scale = number(j, "homothetic_scale", "", 1.0);
  if (!(c.homothetic_scale > 0.0)) throw ConfigError("'homothetic_scale' must be positive");
  c.density_weighting = boolean(j, "density_weighting", "", true);
  const std::string ord = text(j, "voigt_ordering", "", "block_diagonal");
  if (ord == "block_diagonal") {
    c.voigt_ordering = VoigtOrdering::block_diagonal;
  } else if (ord == "lexicographic") {
    if (dim != 2) throw ConfigError("voigt_ordering 'lexicographic' is only defined in 2D");
    c.voigt_ordering = VoigtOrdering::lexicographic;
  } else {
    throw ConfigError("unknown voigt_ordering '" + ord + "'");
  }
  c.symmetry_tolerance = number(j, "symmetry_tolerance", "", 0.05);
  if (!(c.symmetry_tolerance > 0.0)) throw ConfigError("'symmetry_tolerance' must be positive");

  if (j.contains("output")) {
    const auto& o = j["output"];
    allow_keys(o, "output", {"directory", "dump_correctors"});
    c.output_directory = text(o, "directory", "output.", ".");
    c.dump_correctors = boolean(o, "dump_correctors", "output.", false);
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    allow_keys(s, "sweep", {"axis", "values"});
    SweepSpec sw;
    sw.axis = text(s, "axis", "sweep.", "", true);
    if (!s.contains("values") || !s["values"].is_array()) throw ConfigError("sweep.values must be a list");
    for (const auto& v : s["values"]) {
      if (!v.is_number()) throw ConfigError("sweep.values entries must be numbers");
      sw.values.push_back(v.get<double>());
    }
    c.sweep = sw;
  }
  if (j.contains("verify")) {
    const auto& v = j["verify"];
    allow_keys(v, "verify", {"states", "seed", "energy_tolerance", "stack_repeats", "stack_resolution",
                             "stack_tolerance", "homogeneous_resolution", "expected_symmetry", "tensors"});
    auto& vs = c.verify;
    vs.states = integer(v, "states", "verify.", vs.states);
    if (vs.states < 1) throw ConfigError("verify.states must be positive");
    if (v.contains("seed")) {
      if (!v["seed"].is_number_unsigned()) throw ConfigError("verify.seed must be a non-negative integer");
      vs.seed = v["seed"].get<std::uint64_t>();
    }
    vs.energy_tolerance = number(v, "energy_tolerance", "verify.", vs.energy_tolerance);
    if (v.contains("stack_repeats")) {
      if (!v["stack_repeats"].is_array()) throw ConfigError("verify.stack_repeats must be a list");
      vs.stack_repeats.clear();
      for (const auto& r : v["stack_repeats"]) {
        if (!r.is_number_integer() || r.get<int>() < 1 || r.get<int>() > 3)
          throw ConfigError("verify.stack_repeats entries must be 1, 2 or 3");
        vs.stack_repeats.push_back(r.get<int>());
      }
    }
    vs.stack_resolution = integer(v, "stack_resolution", "verify.", 0);
    vs.stack_tolerance = number(v, "stack_tolerance", "verify.", vs.stack_tolerance);
    vs.homogeneous_resolution = integer(v, "homogeneous_resolution", "verify.", vs.homogeneous_resolution);
    if (vs.homogeneous_resolution < 4) throw ConfigError("verify.homogeneous_resolution must be at least 4");
    vs.expected_symmetry = text(v, "expected_symmetry", "verify.", "");
    if (!vs.expected_symmetry.empty() && vs.expected_symmetry != "cubic" &&
        vs.expected_symmetry != "transverse_isotropic" && vs.expected_symmetry != "other")
      throw ConfigError("unknown verify.expected_symmetry '" + vs.expected_symmetry + "'");
    vs.tensors = text(v, "tensors", "verify.", "");
  }
  if (c.verify.stack_resolution == 0) c.verify.stack_resolution = c.resolution;
  if (c.verify.stack_resolution < 4) throw ConfigError("verify.stack_resolution must be at least 4");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  auto cfg = parse_config(j);
  // verify.tensors is relative to the config file
  if (!cfg.verify.tensors.empty() && std::filesystem::path(cfg.verify.tensors).is_relative())
    cfg.verify.tensors = (std::filesystem::path(path).parent_path() / cfg.verify.tensors).string();
  return cfg;
}

}  // namespace sgh::io
