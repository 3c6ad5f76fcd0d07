#pragma once

// Localization fields at Gauss points:
//   L_abij  = d_ia d_jb + dphi_abi/dy_j
//   M_abcij = y_c L_abij + phi_abi d_jc + dpsi_abci/dy_j
// with y measured from the cell center.

#include <array>
#include <span>
#include <vector>

#include "sgh/correctors.hpp"
#include "sgh/fem/dofmap.hpp"
#include "sgh/fem/element.hpp"
#include "sgh/microstructure.hpp"

namespace sgh {

/// One quadrature point handed to a localization visitor.
struct GaussSample {
  std::size_t element = 0;
  int point = 0;
  std::array<double, 3> y{0.0, 0.0, 0.0};
  double weight = 0.0;
  const ElasticTensor* stiffness = nullptr;
};

/// Streams L and M over the Gauss points of elements [begin, end).
///
/// fn(sample, L, M) receives L[(p d + i) d + j] for strain pair p and
/// M[((p d + c) d + i) d + j]; the (a, b) load is symmetrized. When only_L
/// is set M is left empty and psi is not required.
template <class Fn>
void for_each_gauss_point(const PhaseGrid& grid, const fem::PeriodicDofMap& map, const CorrectorSet& cs,
                          std::size_t begin, std::size_t end, Fn&& fn, bool only_L = false) {
  const int d = grid.dimension();
  const int np = pair_count(d);
  const auto pairs = strain_pairs(d);
  const fem::VoxelElement el(d, grid.spacing());
  const int ne = el.nodes();
  std::vector<double> phi_e(static_cast<std::size_t>(np) * ne * d), psi_e;
  if (!only_L) psi_e.resize(static_cast<std::size_t>(np) * d * ne * d);
  std::vector<double> L(static_cast<std::size_t>(np) * d * d), M;
  if (!only_L) M.resize(static_cast<std::size_t>(np) * d * d * d);
  std::vector<double> val(static_cast<std::size_t>(np) * d);
  std::size_t gn[fem::VoxelElement::max_nodes];

  for (std::size_t e = begin; e < end; ++e) {
    for (int n = 0; n < ne; ++n) gn[n] = map.element_node(e, n);
    for (int p = 0; p < np; ++p)
      for (int n = 0; n < ne; ++n)
        for (int i = 0; i < d; ++i) phi_e[(static_cast<std::size_t>(p) * ne + n) * d + i] = cs.phi[p](gn[n], i);
    if (!only_L)
      for (int s = 0; s < np * d; ++s)
        for (int n = 0; n < ne; ++n)
          for (int i = 0; i < d; ++i) psi_e[(static_cast<std::size_t>(s) * ne + n) * d + i] = cs.psi[s](gn[n], i);
    const auto center = grid.element_center(e);
    GaussSample g;
    g.element = e;
    g.weight = el.weight();
    g.stiffness = &grid.stiffness(grid.phase(e));
    for (int q = 0; q < el.gauss_points(); ++q) {
      g.point = q;
      for (int i = 0; i < 3; ++i) g.y[i] = center[i] + el.gauss_offset(q)[i];
      for (int p = 0; p < np; ++p) {
        const int a = pairs[p][0], b = pairs[p][1];
        const double* u = &phi_e[static_cast<std::size_t>(p) * ne * d];
        double* Lp = &L[static_cast<std::size_t>(p) * d * d];
        for (int i = 0; i < d; ++i) {
          double v = 0.0;
          for (int n = 0; n < ne; ++n) v += el.N(q, n) * u[n * d + i];
          val[p * d + i] = v;
          for (int j = 0; j < d; ++j) {
            double s = 0.5 * (kronecker(i, a) * kronecker(j, b) + kronecker(i, b) * kronecker(j, a));
            for (int n = 0; n < ne; ++n) s += el.dN(q, n, j) * u[n * d + i];
            Lp[i * d + j] = s;
          }
        }
      }
      if (!only_L) {
        for (int p = 0; p < np; ++p)
          for (int c = 0; c < d; ++c) {
            const int s = p * d + c;
            const double* u = &psi_e[static_cast<std::size_t>(s) * ne * d];
            double* Ms = &M[static_cast<std::size_t>(s) * d * d];
            const double* Lp = &L[static_cast<std::size_t>(p) * d * d];
            for (int i = 0; i < d; ++i)
              for (int j = 0; j < d; ++j) {
                double v = g.y[c] * Lp[i * d + j] + (j == c ? val[p * d + i] : 0.0);
                for (int n = 0; n < ne; ++n) v += el.dN(q, n, j) * u[n * d + i];
                Ms[i * d + j] = v;
              }
          }
      }
      fn(static_cast<const GaussSample&>(g), std::span<const double>(L), std::span<const double>(M));
    }
  }
}

/// Full-index localization fields at every Gauss point (small grids).
/// L[g] has rank 4 (a, b, i, j); M[g] rank 5 (a, b, c, i, j). Point g is
/// element * 2^d + local Gauss index.
struct LocalizationFields {
  int dim = 0;
  std::vector<Tensor4> L;
  std::vector<Tensor5> M;
  std::vector<std::array<double, 3>> y;
  std::vector<double> weight;
};

/// Direct evaluation with the unsymmetrized load d_ia d_jb.
inline LocalizationFields compute_localization(const PhaseGrid& grid, const fem::PeriodicDofMap& map,
                                               const CorrectorSet& cs) {
  const int d = grid.dimension();
  const fem::VoxelElement el(d, grid.spacing());
  LocalizationFields out;
  out.dim = d;
  const std::size_t count = grid.element_count() * el.gauss_points();
  out.L.reserve(count);
  out.M.reserve(count);
  for (std::size_t e = 0; e < grid.element_count(); ++e) {
    const auto center = grid.element_center(e);
    for (int q = 0; q < el.gauss_points(); ++q) {
      std::array<double, 3> y{};
      for (int i = 0; i < 3; ++i) y[i] = center[i] + el.gauss_offset(q)[i];
      Tensor4 L(d);
      Tensor5 M(d);
      auto value = [&](const fem::NodalField& f, int i) {
        double v = 0.0;
        for (int n = 0; n < el.nodes(); ++n) v += el.N(q, n) * f(map.element_node(e, n), i);
        return v;
      };
      auto grad = [&](const fem::NodalField& f, int i, int j) {
        double v = 0.0;
        for (int n = 0; n < el.nodes(); ++n) v += el.dN(q, n, j) * f(map.element_node(e, n), i);
        return v;
      };
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          const auto& phi = cs.phi_of(a, b);
          for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) L(a, b, i, j) = kronecker(i, a) * kronecker(j, b) + grad(phi, i, j);
          for (int c = 0; c < d; ++c) {
            const auto& psi = cs.psi_of(a, b, c);
            for (int i = 0; i < d; ++i)
              for (int j = 0; j < d; ++j)
                M(a, b, c, i, j) = y[c] * L(a, b, i, j) + value(phi, i) * kronecker(j, c) + grad(psi, i, j);
          }
        }
      out.L.push_back(std::move(L));
      out.M.push_back(std::move(M));
      out.y.push_back(y);
      out.weight.push_back(el.weight());
    }
  }
  return out;
}

}  // namespace sgh
