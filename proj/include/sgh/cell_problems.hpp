#pragma once

// First-order (phi) and second-order (psi) periodic corrector problems on a
// voxel grid. One operator K serves every case; only the loads differ.

#include <cmath>
#include <memory>
#include <utility>
#include <string>
#include <vector>

#include "sgh/correctors.hpp"
#include "sgh/fem/dofmap.hpp"
#include "sgh/fem/element.hpp"
#include "sgh/fem/solver.hpp"
#include "sgh/fem/sparse.hpp"
#include "sgh/microstructure.hpp"

namespace sgh {

struct CellProblemOptions {
  fem::SolverOptions solver;
  /// Weight the second-order source by rho^m / rho^M; false uses a uniform
  /// density (ratio 1 everywhere).
  bool density_weighting = true;
};

/// rho^m / rho^M per element with rho^M the cell average, or all ones.
inline std::vector<double> density_ratio_field(const PhaseGrid& grid, bool density_weighting = true) {
  std::vector<double> r(grid.element_count(), 1.0);
  if (!density_weighting) return r;
  const double rho[2] = {grid.material(Phase::matrix).mass_density, grid.material(Phase::inclusion).mass_density};
  double mean = 0.0;
  for (Phase p : grid.phases()) mean += rho[static_cast<int>(p)];
  mean /= static_cast<double>(grid.element_count());
  if (!(mean > 0.0)) throw MaterialError("average mass density of the cell must be positive");
  for (std::size_t e = 0; e < r.size(); ++e) r[e] = rho[static_cast<int>(grid.phase(e))] / mean;
  return r;
}

/// Typical load magnitude max|C| h^(d-1) sqrt(dofs); loads far below it are
/// round-off.
inline double load_scale(const PhaseGrid& grid, const fem::PeriodicDofMap& map) {
  const double c = std::max(grid.stiffness(Phase::matrix).max_abs(), grid.stiffness(Phase::inclusion).max_abs());
  return c * std::pow(grid.spacing(), grid.dimension() - 1) * std::sqrt(static_cast<double>(map.dof_count()));
}

inline std::string phi_label(int dim, int p) {
  const auto ab = strain_pairs(dim)[p];
  return "phi_" + std::to_string(ab[0] + 1) + std::to_string(ab[1] + 1);
}

inline std::string psi_label(int dim, int p, int c) {
  const auto ab = strain_pairs(dim)[p];
  return "psi_" + std::to_string(ab[0] + 1) + std::to_string(ab[1] + 1) + std::to_string(c + 1);
}

namespace detail {

inline fem::SolverOptions with_default_atol(fem::SolverOptions opt, const PhaseGrid& grid,
                                            const fem::PeriodicDofMap& map) {
  if (opt.absolute_tolerance == 0.0) opt.absolute_tolerance = 1e-3 * opt.tolerance * load_scale(grid, map);
  return opt;
}

}  // namespace detail

/// Preconditioner for K according to opt.preconditioner. The reference
/// medium is isotropic, fitted to the Lame constants of both phases.
inline std::unique_ptr<fem::Preconditioner> make_preconditioner(const PhaseGrid& grid, const fem::CsrMatrix& K,
                                                                const fem::SolverOptions& opt) {
  using Kind = fem::PreconditionerKind;
  switch (opt.preconditioner) {
    case Kind::none:
      return std::make_unique<fem::IdentityPreconditioner>(K.rows());
    case Kind::jacobi:
      return std::make_unique<fem::JacobiPreconditioner>(K);
    default:
      break;
  }
  const int d = grid.dimension();
  std::vector<std::pair<double, double>> moduli;
  for (Phase p : {Phase::matrix, Phase::inclusion}) {
    const auto& C = grid.stiffness(p);
    const double mu = C(0, 1, 0, 1);
    moduli.emplace_back(C(0, 0, 1, 1) + 2.0 * mu / d, mu);
  }
  double spread = 0.0;
  const ElasticTensor C0 = fem::reference_stiffness(moduli, d, &spread);
  if (opt.preconditioner == Kind::automatic && spread > opt.reference_spread_limit)
    return std::make_unique<fem::JacobiPreconditioner>(K);
  return std::make_unique<fem::ReferenceMediumPreconditioner>(d, grid.resolution(), grid.spacing(), C0);
}

/// Loads f_ab = -int C_ijab dN/dy_j for every strain pair.
inline std::vector<std::vector<double>> phi_rhs(const PhaseGrid& grid, const fem::PeriodicDofMap& map) {
  const int d = grid.dimension();
  const int np = pair_count(d);
  const auto pairs = strain_pairs(d);
  const fem::VoxelElement el(d, grid.spacing());
  const int ne = el.nodes();
  std::vector<std::vector<double>> f(np, std::vector<double>(map.dof_count(), 0.0));

  // element load per phase and pair: fe[phase][p][a * d + i]
  std::vector<double> fe[2];
  for (int ph = 0; ph < 2; ++ph) {
    const auto& C = grid.stiffness(static_cast<Phase>(ph));
    fe[ph].assign(static_cast<std::size_t>(np) * ne * d, 0.0);
    for (int p = 0; p < np; ++p) {
      const int a = pairs[p][0], b = pairs[p][1];
      for (int q = 0; q < el.gauss_points(); ++q)
        for (int n = 0; n < ne; ++n)
          for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += 0.5 * (C(i, j, a, b) + C(i, j, b, a)) * el.dN(q, n, j);
            fe[ph][(static_cast<std::size_t>(p) * ne + n) * d + i] -= el.weight() * s;
          }
    }
  }
  for (std::size_t e = 0; e < grid.element_count(); ++e) {
    const auto& le = fe[static_cast<int>(grid.phase(e))];
    for (int n = 0; n < ne; ++n) {
      const std::size_t node = map.element_node(e, n);
      for (int p = 0; p < np; ++p)
        for (int i = 0; i < d; ++i) f[p][map.dof(node, i)] += le[(static_cast<std::size_t>(p) * ne + n) * d + i];
    }
  }
  return f;
}

/// Solves K phi_ab = f_ab with zero mean for all strain pairs.
inline std::vector<fem::NodalField> solve_phi(const PhaseGrid& grid, const fem::PeriodicDofMap& map,
                                              const fem::CsrMatrix& K, const CellProblemOptions& opt = {},
                                              std::vector<fem::SolveStats>* stats = nullptr,
                                              fem::Preconditioner* prec = nullptr) {
  const int d = grid.dimension();
  std::vector<std::string> labels;
  for (int p = 0; p < pair_count(d); ++p) labels.push_back(phi_label(d, p));
  std::unique_ptr<fem::Preconditioner> own;
  if (!prec) prec = (own = make_preconditioner(grid, K, opt.solver)).get();
  return fem::solve_zero_mean_block(K, phi_rhs(grid, map), d, detail::with_default_atol(opt.solver, grid, map), stats,
                                    labels, prec);
}

/// Loads of the second-order problems, case index p * d + c:
///   f_i = -int C_ijkc phi_abk dN/dy_j + int [C_ickl L_abkl - r C^M_icab] N
/// with L_abkl = d_ka d_lb + dphi_abk/dy_l and r the density ratio.
inline std::vector<std::vector<double>> psi_rhs(const PhaseGrid& grid, const fem::PeriodicDofMap& map,
                                                const std::vector<fem::NodalField>& phi, const ElasticTensor& C_eff,
                                                const std::vector<double>& density_ratio) {
  const int d = grid.dimension();
  const int np = pair_count(d);
  if (static_cast<int>(phi.size()) != np) throw DimensionError("expected one phi field per strain pair");
  if (C_eff.dim() != d) throw DimensionError("effective stiffness dimension does not match the grid");
  if (density_ratio.size() != grid.element_count()) throw DimensionError("density ratio field size mismatch");
  const auto pairs = strain_pairs(d);
  const fem::VoxelElement el(d, grid.spacing());
  const int ne = el.nodes();
  const int ng = el.gauss_points();
  const double w = el.weight();
  std::vector<std::vector<double>> f(static_cast<std::size_t>(np) * d, std::vector<double>(map.dof_count(), 0.0));

  std::size_t gn[fem::VoxelElement::max_nodes];
  std::vector<double> u(static_cast<std::size_t>(ne) * d);
  std::vector<double> fe(static_cast<std::size_t>(ne) * d);
  for (std::size_t e = 0; e < grid.element_count(); ++e) {
    const auto& C = grid.stiffness(grid.phase(e));
    const double r = density_ratio[e];
    for (int n = 0; n < ne; ++n) gn[n] = map.element_node(e, n);
    for (int p = 0; p < np; ++p) {
      const int a = pairs[p][0], b = pairs[p][1];
      for (int n = 0; n < ne; ++n)
        for (int i = 0; i < d; ++i) u[n * d + i] = phi[p](gn[n], i);
      for (int c = 0; c < d; ++c) {
        std::fill(fe.begin(), fe.end(), 0.0);
        for (int q = 0; q < ng; ++q) {
          double val[3] = {0.0, 0.0, 0.0};
          double L[3][3];
          for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l) L[k][l] = 0.5 * (kronecker(k, a) * kronecker(l, b) + kronecker(k, b) * kronecker(l, a));
          for (int n = 0; n < ne; ++n)
            for (int k = 0; k < d; ++k) {
              val[k] += el.N(q, n) * u[n * d + k];
              for (int l = 0; l < d; ++l) L[k][l] += el.dN(q, n, l) * u[n * d + k];
            }
          for (int i = 0; i < d; ++i) {
            double vol = -r * C_eff(i, c, a, b);
            for (int k = 0; k < d; ++k)
              for (int l = 0; l < d; ++l) vol += C(i, c, k, l) * L[k][l];
            for (int n = 0; n < ne; ++n) {
              double flux = 0.0;
              for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (int k = 0; k < d; ++k) s += C(i, j, k, c) * val[k];
                flux += s * el.dN(q, n, j);
              }
              fe[n * d + i] += w * (vol * el.N(q, n) - flux);
            }
          }
        }
        auto& fc = f[static_cast<std::size_t>(p) * d + c];
        for (int n = 0; n < ne; ++n)
          for (int i = 0; i < d; ++i) fc[map.dof(gn[n], i)] += fe[n * d + i];
      }
    }
  }
  return f;
}

/// Solves the second-order problems for every (ab, c).
inline std::vector<fem::NodalField> solve_psi(const PhaseGrid& grid, const fem::PeriodicDofMap& map,
                                              const fem::CsrMatrix& K, const std::vector<fem::NodalField>& phi,
                                              const ElasticTensor& C_eff, const std::vector<double>& density_ratio,
                                              const CellProblemOptions& opt = {},
                                              std::vector<fem::SolveStats>* stats = nullptr,
                                              fem::Preconditioner* prec = nullptr) {
  const int d = grid.dimension();
  std::vector<std::string> labels;
  for (int p = 0; p < pair_count(d); ++p)
    for (int c = 0; c < d; ++c) labels.push_back(psi_label(d, p, c));
  std::unique_ptr<fem::Preconditioner> own;
  if (!prec) prec = (own = make_preconditioner(grid, K, opt.solver)).get();
  return fem::solve_zero_mean_block(K, psi_rhs(grid, map, phi, C_eff, density_ratio), d,
                                    detail::with_default_atol(opt.solver, grid, map), stats, labels, prec);
}

/// Nullspace component of each load relative to its norm (0 for a zero load).
inline std::vector<double> compatibility_residuals(const std::vector<std::vector<double>>& rhs, int components) {
  std::vector<double> out;
  for (const auto& b : rhs) {
    const double n = std::sqrt(fem::detail::dot(b, b));
    out.push_back(n > 0.0 ? fem::detail::nullspace_component(b, components) / n : 0.0);
  }
  return out;
}

}  // namespace sgh
