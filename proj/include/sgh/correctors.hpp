#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "sgh/error.hpp"
#include "sgh/fem/solver.hpp"

namespace sgh {

/// Symmetric index pairs (a, b) in strain Voigt order:
/// 2D 11 22 12, 3D 11 22 33 23 13 12 (zero-based).
inline std::vector<std::array<int, 2>> strain_pairs(int dim) {
  if (dim == 2) return {{0, 0}, {1, 1}, {0, 1}};
  if (dim == 3) return {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
  throw DimensionError("dimension must be 2 or 3");
}

inline int pair_count(int dim) { return dim * (dim + 1) / 2; }

/// Position of the unordered pair {a, b} in strain_pairs(dim).
inline int pair_index(int dim, int a, int b) {
  if (a == b) return a;
  if (dim == 2) return 2;
  return 6 - a - b;
}

/// First- and second-order corrector fields of one unit cell.
///
/// phi[p] is phi_ab for p = pair_index(a, b) (mm per unit macroscopic
/// gradient); psi[p * dim + c] is psi_abc (mm^2). Fields live on the
/// periodic node set and have zero mean.
struct CorrectorSet {
  int dim = 0;
  std::vector<fem::NodalField> phi;
  std::vector<fem::NodalField> psi;
  /// rho^m / rho^M per element.
  std::vector<double> density_ratio;
  /// False when the second-order source used a uniform density.
  bool density_weighting = true;

  const fem::NodalField& phi_of(int a, int b) const { return phi.at(pair_index(dim, a, b)); }
  const fem::NodalField& psi_of(int a, int b, int c) const { return psi.at(pair_index(dim, a, b) * dim + c); }
};

}  // namespace sgh
