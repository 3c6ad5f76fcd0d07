#pragma once

// Result documents (JSON). Full tensors are stored in internal units
// (GPa, GPa mm, GPa mm^2) so they read back bit-exactly; Voigt matrices are
// also given in display units (GPa, N/mm, N).

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "sgh/definiteness.hpp"
#include "sgh/io/config.hpp"
#include "sgh/pipeline.hpp"
#include "sgh/symmetry.hpp"
#include "sgh/voigt.hpp"

namespace sgh::io {

template <int R>
json tensor_to_json(const Tensor<R>& t) {
  json j;
  j["dimension"] = t.dim();
  j["rank"] = R;
  j["data"] = std::vector<double>(t.data().begin(), t.data().end());
  return j;
}

template <int R>
Tensor<R> tensor_from_json(const json& j, int dim) {
  if (!j.is_object() || !j.contains("data") || j.value("rank", 0) != R || j.value("dimension", 0) != dim)
    throw ConfigError("malformed rank-" + std::to_string(R) + " tensor in result document");
  Tensor<R> t(dim);
  const auto data = j["data"].get<std::vector<double>>();
  if (data.size() != t.size()) throw ConfigError("tensor data has the wrong length");
  for (std::size_t k = 0; k < data.size(); ++k) t[k] = data[k];
  return t;
}

inline json matrix_to_json(const Eigen::MatrixXd& m, double scale = 1.0) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    std::vector<double> r(m.cols());
    for (int k = 0; k < m.cols(); ++k) r[k] = scale * m(i, k);
    rows.push_back(r);
  }
  return rows;
}

inline json tensors_to_json(const EffectiveTensors& t) {
  return {{"dimension", t.dim},
          {"C", tensor_to_json(t.C)},
          {"G", tensor_to_json(t.G)},
          {"D", tensor_to_json(t.D)},
          {"I_bar", tensor_to_json(t.I_bar)},
          {"cell_length", t.cell_length},
          {"homothetic_scale", t.homothetic_scale}};
}

inline EffectiveTensors tensors_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dimension")) throw ConfigError("result document has no tensors");
  EffectiveTensors t;
  t.dim = j["dimension"].get<int>();
  if (t.dim != 2 && t.dim != 3) throw ConfigError("tensor dimension must be 2 or 3");
  t.C = tensor_from_json<4>(j.at("C"), t.dim);
  t.G = tensor_from_json<5>(j.at("G"), t.dim);
  t.D = tensor_from_json<6>(j.at("D"), t.dim);
  t.I_bar = tensor_from_json<2>(j.at("I_bar"), t.dim);
  t.cell_length = j.at("cell_length").get<double>();
  t.homothetic_scale = j.at("homothetic_scale").get<double>();
  return t;
}

inline std::string ordering_name(VoigtOrdering o) {
  return o == VoigtOrdering::lexicographic ? "lexicographic" : "block_diagonal";
}

inline json voigt_to_json(const EffectiveTensors& t, VoigtOrdering ordering) {
  const auto v = pack_voigt(t, ordering);
  std::vector<std::string> rows, cols;
  for (const auto& p : strain_pairs(t.dim)) rows.push_back(std::to_string(p[0] + 1) + std::to_string(p[1] + 1));
  for (const auto& tr : gradient_triples(t.dim, ordering)) cols.push_back(triple_label(tr));
  return {{"ordering", ordering_name(ordering)},
          {"strain_labels", rows},
          {"gradient_labels", cols},
          {"C_GPa", matrix_to_json(v.C)},
          {"G_N_per_mm", matrix_to_json(v.G, 1000.0)},
          {"D_N", matrix_to_json(v.D, 1000.0)},
          {"I_bar_mm2", matrix_to_json(v.I_bar)}};
}

inline json symmetry_to_json(const SymmetryReport& s) {
  auto consts = [](const std::vector<NamedConstant>& v) {
    json a = json::array();
    for (const auto& c : v) a.push_back({{"name", c.name}, {"value", c.value}, {"spread", c.spread}});
    return a;
  };
  return {{"class", s.symmetry_class},   {"axis", s.axis},
          {"tolerance", s.tolerance},    {"classical_GPa", consts(s.classical)},
          {"gradient_N", consts(s.gradient)}, {"c_deviation", s.c_deviation},
          {"d_deviation", s.d_deviation}, {"isotropy_residual", s.isotropy_residual},
          {"G_relative_norm", s.g_norm}};
}

inline json definiteness_to_json(const DefinitenessReport& d) {
  return {{"positive", d.positive},
          {"min_eigenvalue", d.min_eigenvalue},
          {"max_eigenvalue", d.max_eigenvalue},
          {"tolerance", d.tolerance},
          {"eigenvalues", d.eigenvalues}};
}

inline json diagnostics_to_json(const Diagnostics& d) {
  auto stats = [](const std::vector<fem::SolveStats>& v) {
    json a = json::array();
    for (const auto& s : v)
      a.push_back({{"case", s.label},
                   {"iterations", s.iterations},
                   {"relative_residual", s.relative_residual},
                   {"compatibility", s.compatibility},
                   {"max_abs_mean", s.mean_abs},
                   {"trivial", s.trivial}});
    return a;
  };
  return {{"preconditioner", d.preconditioner},
          {"dofs", d.dofs},
          {"nonzeros", d.nonzeros},
          {"operator_asymmetry", d.operator_asymmetry},
          {"translation_residual", d.translation_residual},
          {"phi_compatibility", d.phi_compatibility},
          {"psi_compatibility", d.psi_compatibility},
          {"phi", stats(d.phi)},
          {"psi", stats(d.psi)}};
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json units_json() {
  return {{"length", "mm"},
          {"C", "GPa"},
          {"G", "GPa mm (full arrays); N/mm (Voigt, x1000)"},
          {"D", "GPa mm^2 = kN (full arrays); N (Voigt, x1000)"},
          {"I_bar", "mm^2"},
          {"youngs_modulus", "GPa"},
          {"mass_density", "kg/m^3"}};
}

/// Complete document of one homogenization run.
inline json result_document(const RunConfig& cfg, const PhaseGrid& grid, const HomogenizationResult& res,
                            const EffectiveTensors& reported) {
  json doc;
  doc["units"] = units_json();
  doc["input"] = cfg.source;
  doc["grid"] = {{"hash", hex64(grid_hash(grid))},
                 {"dimension", grid.dimension()},
                 {"resolution", grid.resolution()},
                 {"cell_length", grid.length()},
                 {"matrix_fraction", volume_fraction(grid, Phase::matrix)},
                 {"inclusion_fraction", volume_fraction(grid, Phase::inclusion)},
                 {"density_weighting", res.correctors.density_weighting},
                 {"solver_tolerance", cfg.solver.tolerance}};
  doc["tensors"] = tensors_to_json(reported);
  doc["voigt"] = voigt_to_json(reported, cfg.voigt_ordering);
  doc["symmetry"] = symmetry_to_json(classify_symmetry(reported, cfg.symmetry_tolerance));
  doc["definiteness"] = definiteness_to_json(check_positive_definiteness(reported));
  doc["diagnostics"] = diagnostics_to_json(res.diagnostics);
  doc["timings_s"] = {{"assembly", res.diagnostics.seconds_assembly},
                      {"phi", res.diagnostics.seconds_phi},
                      {"psi", res.diagnostics.seconds_psi},
                      {"quadrature", res.diagnostics.seconds_quadrature}};
  return doc;
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

/// Node coordinates and every corrector component, one row per node.
inline void write_correctors_csv(const std::string& path, const PhaseGrid& grid, const CorrectorSet& cs) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  const int d = grid.dimension();
  const auto map = fem::build_periodic_dofmap(grid);
  const char* axes = "xyz";
  for (int i = 0; i < d; ++i) out << (i ? "," : "") << axes[i];
  for (int p = 0; p < pair_count(d); ++p)
    for (int i = 0; i < d; ++i) out << ',' << phi_label(d, p) << '_' << axes[i];
  for (int p = 0; p < pair_count(d); ++p)
    for (int c = 0; c < d; ++c)
      for (int i = 0; i < d; ++i) out << ',' << psi_label(d, p, c) << '_' << axes[i];
  out << '\n';
  out.precision(17);
  for (std::size_t n = 0; n < map.node_count(); ++n) {
    const auto y = map.node_coordinate(n);
    for (int i = 0; i < d; ++i) out << (i ? "," : "") << y[i];
    for (const auto& f : cs.phi)
      for (int i = 0; i < d; ++i) out << ',' << f(n, i);
    for (const auto& f : cs.psi)
      for (int i = 0; i < d; ++i) out << ',' << f(n, i);
    out << '\n';
  }
}

}  // namespace sgh::io
