#pragma once

// End-to-end homogenization of one voxel cell: assemble K once, solve phi,
// form C^M, solve psi, integrate C, G, D.

#include <algorithm>
#include <chrono>
#include <string>
#include <vector>

#include "sgh/cell_problems.hpp"
#include "sgh/effective_tensors.hpp"
#include "sgh/fem/sparse.hpp"

namespace sgh {

struct HomogenizationOptions {
  CellProblemOptions cell;
  int threads = 1;
};

struct Diagnostics {
  std::size_t dofs = 0;
  std::size_t nonzeros = 0;
  double operator_asymmetry = 0.0;
  double translation_residual = 0.0;
  /// max over cases of |P_null b| / |b|
  double phi_compatibility = 0.0;
  double psi_compatibility = 0.0;
  std::vector<fem::SolveStats> phi;
  std::vector<fem::SolveStats> psi;
  std::string preconditioner;
  double seconds_assembly = 0.0;
  double seconds_phi = 0.0;
  double seconds_psi = 0.0;
  double seconds_quadrature = 0.0;
};

struct HomogenizationResult {
  EffectiveTensors tensors;
  CorrectorSet correctors;
  Diagnostics diagnostics;
};

inline HomogenizationResult homogenize(const PhaseGrid& grid, const HomogenizationOptions& opt = {}) {
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a) { return std::chrono::duration<double>(clock::now() - a).count(); };
  const int d = grid.dimension();
  CellProblemOptions cell = opt.cell;
  cell.solver.threads = opt.threads;

  HomogenizationResult res;
  Diagnostics& diag = res.diagnostics;
  auto t0 = clock::now();
  const auto map = fem::build_periodic_dofmap(grid);
  const auto K = fem::assemble_stiffness(grid, map);
  diag.dofs = K.rows();
  diag.nonzeros = K.nnz();
  diag.operator_asymmetry = K.asymmetry();
  diag.translation_residual = fem::translation_residual(K, map);
  const auto prec = make_preconditioner(grid, K, cell.solver);
  diag.preconditioner = prec->name();
  diag.seconds_assembly = seconds(t0);

  CorrectorSet& cs = res.correctors;
  cs.dim = d;
  cs.density_weighting = cell.density_weighting;
  cs.density_ratio = density_ratio_field(grid, cell.density_weighting);

  t0 = clock::now();
  cs.phi = solve_phi(grid, map, K, cell, &diag.phi, prec.get());
  diag.seconds_phi = seconds(t0);
  for (const auto& s : diag.phi) diag.phi_compatibility = std::max(diag.phi_compatibility, s.compatibility);

  t0 = clock::now();
  const ElasticTensor C = compute_C_eff(grid, map, cs, opt.threads);
  diag.seconds_quadrature += seconds(t0);

  t0 = clock::now();
  cs.psi = solve_psi(grid, map, K, cs.phi, C, cs.density_ratio, cell, &diag.psi, prec.get());
  diag.seconds_psi = seconds(t0);
  for (const auto& s : diag.psi) diag.psi_compatibility = std::max(diag.psi_compatibility, s.compatibility);

  t0 = clock::now();
  res.tensors = compute_effective_tensors(grid, map, cs, opt.threads);
  diag.seconds_quadrature += seconds(t0);
  return res;
}

}  // namespace sgh
