#pragma once

// Command-line front end: homogenize, sweep and verify.
// Exit status 0 success, 1 failed check, 2 configuration error, 3 solver error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sgh/definiteness.hpp"
#include "sgh/io/config.hpp"
#include "sgh/io/result.hpp"
#include "sgh/pipeline.hpp"
#include "sgh/symmetry.hpp"
#include "sgh/verification.hpp"

namespace sgh::cli {

using io::json;

enum ExitCode : int { ok = 0, check_failed = 1, config_error = 2, solver_error = 3 };

struct Overrides {
  int threads = 1;
  std::optional<double> tolerance;
  bool dump_correctors = false;
  std::optional<std::string> out;
};

inline io::RunConfig load(const std::string& path, const Overrides& o) {
  auto cfg = io::load_config(path);
  if (o.tolerance) {
    if (!(*o.tolerance > 0.0 && *o.tolerance < 1.0)) throw ConfigError("--tol must be in (0, 1)");
    cfg.solver.tolerance = *o.tolerance;
  }
  if (o.dump_correctors) cfg.dump_correctors = true;
  if (o.out) cfg.output_directory = *o.out;
  if (o.threads < 1) throw ConfigError("--threads must be positive");
  return cfg;
}

inline HomogenizationOptions options(const io::RunConfig& cfg, int threads) {
  HomogenizationOptions opt;
  opt.cell.solver = cfg.solver;
  opt.cell.density_weighting = cfg.density_weighting;
  opt.threads = threads;
  return opt;
}

inline PhaseGrid grid_of(const io::RunConfig& cfg) {
  return voxelize(cfg.geometry, cfg.resolution, cfg.materials, cfg.stiffness_floor);
}

inline std::string output_path(const io::RunConfig& cfg, const std::string& file) {
  std::filesystem::create_directories(cfg.output_directory);
  return (std::filesystem::path(cfg.output_directory) / file).string();
}

inline void print_matrix(std::ostream& os, const char* title, const Eigen::MatrixXd& m, double scale) {
  os << title << '\n';
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%11.2f", scale * m(i, j));
      os << buf;
    }
    os << '\n';
  }
}

inline int cmd_homogenize(const io::RunConfig& cfg, int threads, std::ostream& os) {
  const auto grid = grid_of(cfg);
  const auto res = homogenize(grid, options(cfg, threads));
  const auto reported = scale_homothetic(res.tensors, cfg.homothetic_scale);
  const auto doc = io::result_document(cfg, grid, res, reported);
  const auto path = output_path(cfg, cfg.name + ".json");
  io::write_json(path, doc);
  if (cfg.dump_correctors) io::write_correctors_csv(output_path(cfg, cfg.name + "_correctors.csv"), grid, res.correctors);

  const auto v = pack_voigt(reported, cfg.voigt_ordering);
  os << cfg.name << ": " << grid.dimension() << "D, n = " << grid.resolution() << ", "
     << res.diagnostics.dofs << " dofs, preconditioner " << res.diagnostics.preconditioner << '\n';
  print_matrix(os, "C (GPa)", v.C, 1.0);
  print_matrix(os, "D (N)", v.D.topLeftCorner(std::min<int>(6, v.D.rows()), std::min<int>(6, v.D.cols())), 1000.0);
  os << "symmetry " << doc["symmetry"]["class"].get<std::string>() << ", positive definite "
     << (doc["definiteness"]["positive"].get<bool>() ? "yes" : "no") << '\n';
  os << "wrote " << path << '\n';
  return ok;
}

/// Config of one sweep point.
inline io::RunConfig sweep_point(io::RunConfig cfg, const std::string& axis, double value, int& repeat) {
  repeat = 1;
  if (axis == "inclusion_size") {
    if (value < 0.0) throw ConfigError("inclusion_size values must be non-negative");
    if (value == 0.0) {
      cfg.geometry.shape = Homogeneous{};
    } else {
      std::visit(
          [value](auto& s) {
            if constexpr (requires { s.radius; }) s.radius = value;
            if constexpr (requires { s.side; }) s.side = value;
          },
          cfg.geometry.shape);
      if (std::holds_alternative<Homogeneous>(cfg.geometry.shape))
        throw ConfigError("inclusion_size sweep needs an inclusion shape");
    }
  } else if (axis == "resolution") {
    if (value != std::floor(value) || value < 4) throw ConfigError("resolution values must be integers >= 4");
    cfg.resolution = static_cast<int>(value);
  } else if (axis == "repetition") {
    if (value != std::floor(value) || value < 1 || value > 3) throw ConfigError("repetition values must be 1, 2 or 3");
    repeat = static_cast<int>(value);
  } else if (axis == "cell_length") {
    if (!(value > 0.0)) throw ConfigError("cell_length values must be positive");
    cfg.geometry = scale_geometry(cfg.geometry, value / cfg.geometry.cell_length);
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "' (inclusion_size, resolution, repetition, cell_length)");
  }
  validate_geometry(cfg.geometry);
  return cfg;
}

inline SymmetryTemplate sweep_template(const std::string& name, int dim) {
  if (name == "transverse_isotropic" && dim == 3) return transverse_isotropic_template();
  return cubic_template(dim);
}

inline int cmd_sweep(const io::RunConfig& base, std::string axis, std::vector<double> values, int threads,
                     std::ostream& os) {
  if (axis.empty() && base.sweep) axis = base.sweep->axis;
  if (values.empty() && base.sweep) values = base.sweep->values;
  if (axis.empty() || values.empty()) throw ConfigError("sweep needs an axis and values (--axis/--values or sweep.*)");
  int dummy = 0;
  for (double v : values) sweep_point(base, axis, v, dummy);  // validate every point first

  struct Point {
    io::RunConfig cfg;
    int repeat = 1;
    std::optional<HomogenizationResult> res;
    EffectiveTensors reported;
    double matrix_fraction = 0.0;
    std::string error;
    int code = ok;
  };
  std::vector<Point> pts(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) pts[k].cfg = sweep_point(base, axis, values[k], pts[k].repeat);

  // independent points run side by side; each pipeline then runs serially
  const int outer = std::min<int>(threads, static_cast<int>(pts.size()));
  const int inner = outer > 1 ? 1 : threads;
  parallel_for(pts.size(), outer, [&](std::size_t k) {
    auto& p = pts[k];
    try {
      auto grid = grid_of(p.cfg);
      if (p.repeat > 1) grid = repeat_cell(grid, p.repeat);
      p.res = homogenize(grid, options(p.cfg, inner));
      p.reported = scale_homothetic(p.res->tensors, p.cfg.homothetic_scale);
      p.matrix_fraction = volume_fraction(grid, Phase::matrix);
      auto doc = io::result_document(p.cfg, grid, *p.res, p.reported);
      doc["sweep"] = {{"axis", axis}, {"value", values[k]}};
      io::write_json(output_path(p.cfg, base.name + "_" + axis + "_" + std::to_string(k) + ".json"), doc);
    } catch (const SolverError& e) {
      p.error = e.what();
      p.code = solver_error;
    } catch (const Error& e) {
      p.error = e.what();
      p.code = config_error;
    }
  });

  std::string tname = base.verify.expected_symmetry;
  if (tname.empty())
    for (const auto& p : pts)
      if (p.res) {
        tname = classify_symmetry(p.reported, base.symmetry_tolerance).symmetry_class;
        break;
      }
  const auto tpl = sweep_template(tname, base.geometry.dimension);
  int nd = 0;
  for (const auto& row : tpl.D) nd = std::max(nd, *std::max_element(row.begin(), row.end()));

  const auto path = output_path(base, base.name + "_sweep_" + axis + ".csv");
  std::ofstream csv(path);
  if (!csv) throw ConfigError("cannot write '" + path + "'");
  csv << axis << ",status,matrix_fraction,template";
  for (int c = 1; c <= tpl.classical_constants; ++c) csv << ",c" << c << "_GPa";
  for (int c = 1; c <= nd; ++c) csv << ",d" << c << "_N";
  csv << ",pattern_deviation,error\n";
  csv.precision(10);
  int worst = ok;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto& p = pts[k];
    csv << values[k] << ',' << (p.res ? "ok" : "failed") << ',' << p.matrix_fraction << ',' << tpl.name;
    if (p.res) {
      const auto v = pack_voigt(p.reported);
      const auto fc = fit_pattern(v.C, tpl.C, "c");
      const auto fd = fit_pattern(v.D, tpl.D, "d");
      for (int c = 0; c < tpl.classical_constants; ++c) csv << ',' << fc.constants[c].value;
      for (const auto& c : fd.constants) csv << ',' << 1000.0 * c.value;
      csv << ',' << std::max(fc.max_deviation, fd.max_deviation) << ",\n";
      os << axis << " = " << values[k] << ": ok, matrix fraction " << p.matrix_fraction << '\n';
    } else {
      for (int c = 0; c < tpl.classical_constants + nd + 1; ++c) csv << ',';
      std::string msg = p.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      csv << ",\"" << msg << "\"\n";
      os << axis << " = " << values[k] << ": FAILED " << p.error << '\n';
      worst = std::max(worst, p.code);
    }
  }
  os << "wrote " << path << '\n';
  return worst;
}

/// One line per check: "[PASS] name  detail".
class CheckLog {
 public:
  explicit CheckLog(std::ostream& os) : os_(os) {}
  void record(const std::string& suite, const std::string& name, bool pass, const std::string& detail,
              json data = json::object()) {
    os_ << (pass ? "[PASS] " : "[FAIL] ") << suite << ": " << name << "  " << detail << '\n';
    data["suite"] = suite;
    data["check"] = name;
    data["pass"] = pass;
    data["detail"] = detail;
    checks_.push_back(std::move(data));
    failed_ += pass ? 0 : 1;
  }
  int failed() const { return failed_; }
  const json& checks() const { return checks_; }

 private:
  std::ostream& os_;
  json checks_ = json::array();
  int failed_ = 0;
};

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> s{"hygiene", "energy",  "homogeneous", "symmetry",
                                          "definiteness", "scaling", "stack", "density_ab"};
  return s;
}

inline int cmd_verify(const io::RunConfig& cfg, const std::string& suite, int threads, std::ostream& os) {
  std::vector<std::string> run;
  if (suite == "all") {
    run = verify_suites();
  } else if (std::find(verify_suites().begin(), verify_suites().end(), suite) != verify_suites().end()) {
    run = {suite};
  } else {
    throw ConfigError("unknown suite '" + suite + "'");
  }
  auto wants = [&](const char* s) { return std::find(run.begin(), run.end(), s) != run.end(); };
  const auto opt = options(cfg, threads);
  const auto& vs = cfg.verify;
  CheckLog log(os);

  std::optional<PhaseGrid> grid;
  std::optional<fem::PeriodicDofMap> map;
  std::optional<HomogenizationResult> res;
  EffectiveTensors tensors;
  const bool needs_run = wants("hygiene") || wants("energy") || wants("symmetry") || wants("definiteness") ||
                         wants("density_ab");
  if (needs_run) {
    grid.emplace(grid_of(cfg));
    map.emplace(fem::build_periodic_dofmap(*grid));
    res.emplace(homogenize(*grid, opt));
    tensors = res->tensors;
    if (!vs.tensors.empty()) {
      tensors = io::tensors_from_json(io::read_json(vs.tensors).at("tensors"));
      if (tensors.dim != grid->dimension()) throw ConfigError("verify.tensors dimension does not match the config");
      if (tensors.homothetic_scale != 1.0) throw ConfigError("verify.tensors must be at homothetic scale 1");
      os << "using tensors from " << vs.tensors << '\n';
    }
  }

  if (wants("hygiene")) {
    const auto& d = res->diagnostics;
    log.record("hygiene", "translations", d.translation_residual <= 1e-12, "K t / |K| = " + sci(d.translation_residual));
    log.record("hygiene", "operator symmetry", d.operator_asymmetry <= 1e-12, "asymmetry " + sci(d.operator_asymmetry));
    log.record("hygiene", "phi compatibility", d.phi_compatibility <= 1e-10, sci(d.phi_compatibility));
    log.record("hygiene", "psi compatibility", d.psi_compatibility <= 1e-10, sci(d.psi_compatibility));
    double worst = 0.0;
    for (const auto* v : {&d.phi, &d.psi})
      for (const auto& s : *v) worst = std::max(worst, s.relative_residual);
    log.record("hygiene", "solver residuals", worst <= cfg.solver.tolerance, "max relative residual " + sci(worst));
  }

  if (wants("energy")) {
    const auto states = random_macro_states(grid->dimension(), grid->length(), vs.states, vs.seed);
    double worst = 0.0;
    for (std::size_t k = 0; k < states.size(); ++k) {
      const auto r = energy_equivalence_check(*grid, *map, res->correctors, tensors, states[k], vs.energy_tolerance);
      worst = std::max(worst, r.residual);
      log.record("energy", "state " + std::to_string(k), r.pass,
                 "micro " + sci(r.micro) + " macro " + sci(r.macro) + " residual " + sci(r.residual),
                 {{"micro", r.micro}, {"macro", r.macro}, {"residual", r.residual}});
    }
    const auto z = energy_equivalence_check(*grid, *map, res->correctors, tensors, zero_macro_state(grid->dimension()),
                                            vs.energy_tolerance);
    log.record("energy", "zero state", z.pass, "residual " + sci(z.residual));
  }

  if (wants("homogeneous")) {
    const auto r = homogeneous_limit_check(cfg.materials[0], cfg.geometry.dimension, vs.homogeneous_resolution,
                                           cfg.geometry.cell_length, opt);
    log.record("homogeneous", "single phase limit", r.pass,
               "C error " + sci(r.c_error) + " |G| " + sci(r.g_norm) + " |D| " + sci(r.d_norm),
               {{"c_error", r.c_error}, {"g_norm", r.g_norm}, {"d_norm", r.d_norm}});
  }

  if (wants("symmetry")) {
    const auto rep = classify_symmetry(tensors, cfg.symmetry_tolerance);
    const double major = major_symmetry_residual(tensors.D);
    log.record("symmetry", "D major symmetry", major <= 1e-10, "residual " + sci(major));
    if (!vs.expected_symmetry.empty()) {
      log.record("symmetry", "class " + vs.expected_symmetry, rep.symmetry_class == vs.expected_symmetry,
                 "found " + rep.symmetry_class + " (C dev " + sci(rep.c_deviation) + ", D dev " + sci(rep.d_deviation) +
                     ")",
                 io::symmetry_to_json(rep));
    } else {
      log.record("symmetry", "classification", true, "found " + rep.symmetry_class, io::symmetry_to_json(rep));
    }
  }

  if (wants("definiteness")) {
    const auto r = check_positive_definiteness(tensors);
    log.record("definiteness", "energy form", r.positive,
               "eigenvalues [" + sci(r.min_eigenvalue) + ", " + sci(r.max_eigenvalue) + "]", io::definiteness_to_json(r));
  }

  if (wants("scaling")) {
    const auto r = scaling_check(cfg.geometry, cfg.materials, cfg.resolution, 0.5, std::max(1e-6, 100 * cfg.solver.tolerance),
                                 opt, cfg.stiffness_floor);
    log.record("scaling", "homothetic s = 1/2", r.homothetic_G == 0.0 && r.homothetic_D == 0.0,
               "G " + sci(r.homothetic_G) + " D " + sci(r.homothetic_D));
    log.record("scaling", "halved cell re-run", r.rerun.max() <= r.tolerance,
               "deviation C " + sci(r.rerun.C) + " G " + sci(r.rerun.G) + " D " + sci(r.rerun.D));
  }

  if (wants("stack")) {
    for (int rep : vs.stack_repeats) {
      const auto r = stack_invariance_check(cfg.geometry, cfg.materials, rep, vs.stack_resolution, vs.stack_tolerance, opt);
      log.record("stack", std::to_string(rep) + "-fold repetition", r.pass,
                 "deviation C " + sci(r.deviation.C) + " G " + sci(r.deviation.G) + " D " + sci(r.deviation.D),
                 {{"cell_hash", io::hex64(r.cell_hash)}, {"stack_hash", io::hex64(r.stack_hash)}});
    }
  }

  if (wants("density_ab")) {
    // recorded comparison: the flipped source is reported, not asserted
    auto other_opt = opt;
    other_opt.cell.density_weighting = !cfg.density_weighting;
    json data = {{"reference_density_weighting", cfg.density_weighting},
                 {"reference_psi_compatibility", res->diagnostics.psi_compatibility}};
    try {
      const auto other = homogenize(*grid, other_opt);
      const auto dev = tensor_deviation(res->tensors, other.tensors);
      data["flipped_psi_compatibility"] = other.diagnostics.psi_compatibility;
      data["D_deviation"] = dev.D;
      data["G_deviation"] = dev.G;
      log.record("density_ab", "flipped density source", true,
                 "psi compatibility " + sci(other.diagnostics.psi_compatibility) + ", D differs by " + sci(dev.D), data);
    } catch (const SolverError& e) {
      data["error"] = e.what();
      log.record("density_ab", "flipped density source", true, std::string("flipped run failed: ") + e.what(), data);
    }
  }

  json report = {{"config", cfg.name}, {"suite", suite}, {"failed", log.failed()}, {"checks", log.checks()}};
  if (grid) report["grid_hash"] = io::hex64(grid_hash(*grid));
  const auto path = output_path(cfg, cfg.name + "_verify.json");
  io::write_json(path, report);
  os << log.failed() << " failed of " << log.checks().size() << " checks; wrote " << path << '\n';
  return log.failed() ? check_failed : ok;
}

/// Parses argv and runs one command; errors are reported on `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Strain-gradient homogenization of periodic voxel cells"};
  app.require_subcommand(1);
  Overrides o;
  std::string config, suite = "all", axis;
  std::vector<double> values;
  app.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--tol", o.tolerance, "relative solver tolerance");
  app.add_flag("--dump-correctors", o.dump_correctors, "write corrector fields as CSV");

  auto* hom = app.add_subcommand("homogenize", "compute C, G, D for one cell");
  auto* swp = app.add_subcommand("sweep", "homogenize over a list of parameter values");
  auto* ver = app.add_subcommand("verify", "run verification suites");
  for (auto* s : {hom, swp, ver}) {
    s->add_option("--config", config, "run configuration (JSON)")->required();
    s->add_option("--out", o.out, "output directory");
    s->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    s->add_option("--tol", o.tolerance, "relative solver tolerance");
    s->add_flag("--dump-correctors", o.dump_correctors, "write corrector fields as CSV");
  }
  swp->add_option("--axis", axis, "inclusion_size | resolution | repetition | cell_length");
  swp->add_option("--values", values, "comma separated values")->delimiter(',');
  ver->add_option("--suite", suite, "all | hygiene | energy | homogeneous | symmetry | definiteness | scaling | stack | density_ab");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return config_error;
  }
  try {
    const auto cfg = load(config, o);
    if (*hom) return cmd_homogenize(cfg, o.threads, out);
    if (*swp) return cmd_sweep(cfg, axis, values, o.threads, out);
    return cmd_verify(cfg, suite, o.threads, out);
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return solver_error;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return config_error;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return config_error;
  } catch (const json::exception& e) {
    err << "error: malformed document: " << e.what() << '\n';
    return config_error;
  }
}

}  // namespace sgh::cli
