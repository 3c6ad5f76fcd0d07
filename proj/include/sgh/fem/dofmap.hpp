#pragma once

#include <array>
#include <cstddef>

#include "sgh/microstructure.hpp"

namespace sgh::fem {

/// Node identification for a periodic structured grid. Grid node (i, j, k)
/// with i, j, k in [0, n] is glued to (i mod n, j mod n, k mod n), so
/// opposite faces, edges and corners share degrees of freedom. Dofs are
/// ordered by (z, y, x, component) with the component fastest.
class PeriodicDofMap {
 public:
  PeriodicDofMap(int dim, int resolution, double length) : dim_(dim), n_(resolution), length_(length) {
    nodes_ = ipow(static_cast<std::size_t>(n_), dim_);
  }

  int dimension() const { return dim_; }
  int components() const { return dim_; }
  int resolution() const { return n_; }
  std::size_t node_count() const { return nodes_; }
  std::size_t dof_count() const { return nodes_ * static_cast<std::size_t>(dim_); }

  /// Node index of grid position (i, j, k); any integers, wrapped periodically.
  std::size_t node(int i, int j, int k = 0) const {
    const auto wrap = [this](int v) { return static_cast<std::size_t>(((v % n_) + n_) % n_); };
    if (dim_ == 2) return wrap(j) * n_ + wrap(i);
    return (wrap(k) * n_ + wrap(j)) * n_ + wrap(i);
  }
  std::size_t dof(std::size_t node, int component) const { return node * dim_ + component; }

  /// Global node of local node `a` of element `e` (element layout as in PhaseGrid).
  std::size_t element_node(std::size_t e, int a) const {
    const int ex = static_cast<int>(e % n_);
    const int ey = static_cast<int>((e / n_) % n_);
    const int ez = dim_ == 3 ? static_cast<int>(e / (static_cast<std::size_t>(n_) * n_)) : 0;
    return node(ex + (a & 1), ey + ((a >> 1) & 1), ez + ((a >> 2) & 1));
  }

  /// Representative position of a node in cell-centered coordinates
  /// y = X - X_c, taking the image on the lower faces.
  std::array<double, 3> node_coordinate(std::size_t node) const {
    const double h = length_ / n_;
    std::array<double, 3> y{0.0, 0.0, 0.0};
    for (int i = 0; i < dim_; ++i) {
      y[i] = static_cast<double>(node % n_) * h - 0.5 * length_;
      node /= n_;
    }
    return y;
  }

 private:
  int dim_;
  int n_;
  double length_;
  std::size_t nodes_;
};

inline PeriodicDofMap build_periodic_dofmap(const PhaseGrid& grid) {
  return PeriodicDofMap(grid.dimension(), grid.resolution(), grid.length());
}

}  // namespace sgh::fem
