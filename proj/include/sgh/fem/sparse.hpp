#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sgh/fem/dofmap.hpp"
#include "sgh/fem/element.hpp"
#include "sgh/parallel.hpp"

namespace sgh::fem {

/// Compressed sparse row matrix with sorted column indices per row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t rows, std::vector<std::int64_t> row_ptr, std::vector<std::int32_t> cols,
            std::vector<double> values)
      : rows_(rows), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values)) {}

  std::size_t rows() const { return rows_; }
  std::size_t nnz() const { return values_.size(); }
  std::span<const std::int64_t> row_ptr() const { return row_ptr_; }
  std::span<const std::int32_t> cols() const { return cols_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values_mutable() { return values_; }

  /// Entry (i, j), zero if not stored.
  double at(std::size_t i, std::size_t j) const {
    const auto b = cols_.begin() + row_ptr_[i], e = cols_.begin() + row_ptr_[i + 1];
    const auto it = std::lower_bound(b, e, static_cast<std::int32_t>(j));
    return (it != e && *it == static_cast<std::int32_t>(j)) ? values_[it - cols_.begin()] : 0.0;
  }

  void multiply(std::span<const double> x, std::span<double> y, int threads = 1) const {
    multiply_block(x, y, 1, threads);
  }

  /// Y = K X for `k` vectors stored interleaved (row r of vector j at r*k + j).
  /// Each column is summed in the same order as a single-vector product.
  void multiply_block(std::span<const double> X, std::span<double> Y, std::size_t k, int threads = 1) const {
    parallel_chunks(rows_, threads, [&](std::size_t rb, std::size_t re) {
      for (std::size_t r = rb; r < re; ++r) {
        double* y = &Y[r * k];
        for (std::size_t j = 0; j < k; ++j) y[j] = 0.0;
        for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
          const double a = values_[p];
          const double* x = &X[static_cast<std::size_t>(cols_[p]) * k];
          for (std::size_t j = 0; j < k; ++j) y[j] += a * x[j];
        }
      }
    });
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(rows_);
    for (std::size_t r = 0; r < rows_; ++r) d[r] = at(r, r);
    return d;
  }

  /// max |K_ij - K_ji| over stored entries.
  double asymmetry() const {
    double m = 0.0;
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
        m = std::max(m, std::abs(values_[p] - at(static_cast<std::size_t>(cols_[p]), r)));
    return m;
  }

  /// max_r sum_j |K_rj|
  double row_norm() const {
    double m = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      double s = 0.0;
      for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += std::abs(values_[p]);
      m = std::max(m, s);
    }
    return m;
  }

 private:
  std::size_t rows_ = 0;
  std::vector<std::int64_t> row_ptr_;
  std::vector<std::int32_t> cols_;
  std::vector<double> values_;
};

namespace detail {

/// Sorted distinct neighbor nodes (offsets in {-1,0,1}^d, wrapped) of `node`.
inline std::vector<std::size_t> node_neighbors(const PeriodicDofMap& map, std::size_t node) {
  const int n = map.resolution();
  const int d = map.dimension();
  const int i = static_cast<int>(node % n), j = static_cast<int>((node / n) % n);
  const int k = d == 3 ? static_cast<int>(node / (static_cast<std::size_t>(n) * n)) : 0;
  std::vector<std::size_t> out;
  const int kz = d == 3 ? 1 : 0;
  for (int dz = -kz; dz <= kz; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) out.push_back(map.node(i + dx, j + dy, k + dz));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/// Periodic elasticity operator of the voxel grid: sum over elements of the
/// element stiffness of the element's phase. Assembly is serial in element
/// order, so the result is bit-reproducible; symmetric entries receive the
/// same contributions in the same order and are therefore bitwise equal.
inline CsrMatrix assemble_stiffness(const PhaseGrid& grid, const PeriodicDofMap& map) {
  const int d = grid.dimension();
  const VoxelElement element(d, grid.spacing());
  const Eigen::MatrixXd Ke[2] = {element.stiffness(grid.stiffness(Phase::matrix)),
                                 element.stiffness(grid.stiffness(Phase::inclusion))};
  const std::size_t nodes = map.node_count();
  const std::size_t rows = map.dof_count();

  // The neighbor count is the same for every node of a periodic grid.
  const std::size_t per_node = detail::node_neighbors(map, 0).size();
  const std::size_t per_row = per_node * d;
  std::vector<std::int64_t> row_ptr(rows + 1);
  for (std::size_t r = 0; r <= rows; ++r) row_ptr[r] = static_cast<std::int64_t>(r * per_row);
  std::vector<std::int32_t> cols(rows * per_row);
  std::vector<double> values(rows * per_row, 0.0);
  std::vector<std::vector<std::size_t>> neighbors(nodes);
  for (std::size_t a = 0; a < nodes; ++a) {
    neighbors[a] = detail::node_neighbors(map, a);
    for (int i = 0; i < d; ++i) {
      const std::size_t base = (a * d + i) * per_row;
      for (std::size_t s = 0; s < per_node; ++s)
        for (int k = 0; k < d; ++k) cols[base + s * d + k] = static_cast<std::int32_t>(neighbors[a][s] * d + k);
    }
  }

  const int ne = element.nodes();
  std::size_t gn[VoxelElement::max_nodes];
  std::size_t slot[VoxelElement::max_nodes][VoxelElement::max_nodes];
  for (std::size_t e = 0; e < grid.element_count(); ++e) {
    const Eigen::MatrixXd& K = Ke[static_cast<int>(grid.phase(e))];
    for (int a = 0; a < ne; ++a) gn[a] = map.element_node(e, a);
    for (int a = 0; a < ne; ++a)
      for (int b = 0; b < ne; ++b) {
        const auto& nb = neighbors[gn[a]];
        slot[a][b] = static_cast<std::size_t>(std::lower_bound(nb.begin(), nb.end(), gn[b]) - nb.begin());
      }
    for (int a = 0; a < ne; ++a)
      for (int i = 0; i < d; ++i) {
        const std::size_t base = (gn[a] * d + i) * per_row;
        for (int b = 0; b < ne; ++b)
          for (int k = 0; k < d; ++k) values[base + slot[a][b] * d + k] += K(a * d + i, b * d + k);
      }
  }
  return CsrMatrix(rows, std::move(row_ptr), std::move(cols), std::move(values));
}

/// Translation modes t_c (unit displacement in component c at every node).
inline std::vector<double> translation_mode(const PeriodicDofMap& map, int component) {
  std::vector<double> t(map.dof_count(), 0.0);
  for (std::size_t a = 0; a < map.node_count(); ++a) t[map.dof(a, component)] = 1.0;
  return t;
}

/// max_c ||K t_c||_inf / (row norm of K): zero for an exact periodic operator.
inline double translation_residual(const CsrMatrix& K, const PeriodicDofMap& map) {
  double worst = 0.0;
  std::vector<double> y(K.rows());
  const double scale = K.row_norm();
  for (int c = 0; c < map.components(); ++c) {
    const auto t = translation_mode(map, c);
    K.multiply(t, y);
    for (double v : y) worst = std::max(worst, std::abs(v));
  }
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace sgh::fem
