#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "sgh/tensor.hpp"

namespace sgh::fem {

/// Bilinear quadrilateral (2D) / trilinear hexahedron (3D) on an axis-aligned
/// voxel of edge h, integrated with the 2-point Gauss rule per direction.
///
/// Local node a has offsets (a & 1, (a >> 1) & 1, (a >> 2) & 1) from the
/// element's lower corner; Gauss points use the same bit layout with
/// -1/sqrt(3) for bit 0 and +1/sqrt(3) for bit 1.
class VoxelElement {
 public:
  static constexpr int max_nodes = 8;

  VoxelElement(int dim, double h) : dim_(dim), h_(h) {
    nodes_ = 1 << dim;
    const double g = 1.0 / std::sqrt(3.0);
    weight_ = std::pow(0.5 * h, dim);
    for (int q = 0; q < nodes_; ++q) {
      std::array<double, 3> xi{0.0, 0.0, 0.0};
      for (int i = 0; i < dim; ++i) xi[i] = ((q >> i) & 1) ? g : -g;
      for (int i = 0; i < 3; ++i) gauss_[q][i] = i < dim ? 0.5 * h * xi[i] : 0.0;
      for (int a = 0; a < nodes_; ++a) {
        double n = 1.0;
        std::array<double, 3> f{};
        for (int i = 0; i < dim; ++i) {
          const double s = ((a >> i) & 1) ? 1.0 : -1.0;
          f[i] = 0.5 * (1.0 + s * xi[i]);
          n *= f[i];
        }
        N_[q][a] = n;
        for (int j = 0; j < dim; ++j) {
          const double s = ((a >> j) & 1) ? 1.0 : -1.0;
          double dn = 0.5 * s * (2.0 / h);
          for (int i = 0; i < dim; ++i)
            if (i != j) dn *= f[i];
          dN_[q][a][j] = dn;
        }
      }
    }
  }

  int dim() const { return dim_; }
  double size() const { return h_; }
  int nodes() const { return nodes_; }
  int gauss_points() const { return nodes_; }
  int dofs() const { return nodes_ * dim_; }
  /// Quadrature weight (including the Jacobian), identical for all points.
  double weight() const { return weight_; }
  double N(int q, int a) const { return N_[q][a]; }
  double dN(int q, int a, int j) const { return dN_[q][a][j]; }
  /// Gauss point position relative to the element center.
  const std::array<double, 3>& gauss_offset(int q) const { return gauss_[q]; }
  int node_offset(int a, int axis) const { return (a >> axis) & 1; }

  /// Ke[(a,i),(b,k)] = sum_q w dN_a,j C_ijkl dN_b,l, symmetrized exactly.
  Eigen::MatrixXd stiffness(const ElasticTensor& C) const {
    const int n = dofs();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (int q = 0; q < nodes_; ++q)
      for (int a = 0; a < nodes_; ++a)
        for (int i = 0; i < dim_; ++i)
          for (int b = 0; b < nodes_; ++b)
            for (int k = 0; k < dim_; ++k) {
              double s = 0.0;
              for (int j = 0; j < dim_; ++j)
                for (int l = 0; l < dim_; ++l) s += dN_[q][a][j] * C(i, j, k, l) * dN_[q][b][l];
              K(a * dim_ + i, b * dim_ + k) += weight_ * s;
            }
    return 0.5 * (K + K.transpose());
  }

 private:
  int dim_;
  double h_;
  int nodes_;
  double weight_;
  double N_[max_nodes][max_nodes]{};
  double dN_[max_nodes][max_nodes][3]{};
  std::array<double, 3> gauss_[max_nodes]{};
};

}  // namespace sgh::fem
