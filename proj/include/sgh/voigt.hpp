#pragma once

// Matrix views of C, G and D. Rows/columns of C are strain pairs; those of D
// are triples (ab, c) with (ab) symmetric, i.e. the gradient index last.

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgh/correctors.hpp"
#include "sgh/effective_tensors.hpp"

namespace sgh {

enum class VoigtOrdering {
  /// Decoupled blocks (default): 2D 111 221 122 | 222 112 121; 3D
  /// groups 111 221 122 331 133 | 222 112 121 332 233 | 333 113 131 223 232 |
  /// 231 132 123.
  block_diagonal,
  /// 2D only: 111 112 221 222 121 122.
  lexicographic,
};

/// Triples (a, b, c), zero-based, in the given order.
inline std::vector<std::array<int, 3>> gradient_triples(int dim, VoigtOrdering ordering = VoigtOrdering::block_diagonal) {
  using T = std::array<int, 3>;
  if (dim == 2) {
    if (ordering == VoigtOrdering::lexicographic)
      return {T{0, 0, 0}, T{0, 0, 1}, T{1, 1, 0}, T{1, 1, 1}, T{0, 1, 0}, T{0, 1, 1}};
    return {T{0, 0, 0}, T{1, 1, 0}, T{0, 1, 1}, T{1, 1, 1}, T{0, 0, 1}, T{0, 1, 0}};
  }
  if (dim != 3) throw DimensionError("dimension must be 2 or 3");
  if (ordering != VoigtOrdering::block_diagonal) throw DimensionError("lexicographic triple ordering is 2D only");
  return {T{0, 0, 0}, T{1, 1, 0}, T{0, 1, 1}, T{2, 2, 0}, T{0, 2, 2}, T{1, 1, 1}, T{0, 0, 1}, T{0, 1, 0}, T{2, 2, 1},
          T{1, 2, 2}, T{2, 2, 2}, T{0, 0, 2}, T{0, 2, 0}, T{1, 1, 2}, T{1, 2, 1}, T{1, 2, 0}, T{0, 2, 1}, T{0, 1, 2}};
}

/// "111"-style one-based label of a triple.
inline std::string triple_label(const std::array<int, 3>& t) {
  return std::to_string(t[0] + 1) + std::to_string(t[1] + 1) + std::to_string(t[2] + 1);
}

/// Matrix form in internal units (GPa, GPa mm, GPa mm^2).
struct VoigtView {
  int dim = 0;
  VoigtOrdering ordering = VoigtOrdering::block_diagonal;
  Eigen::MatrixXd C;  // np x np
  Eigen::MatrixXd G;  // np x nt
  Eigen::MatrixXd D;  // nt x nt
  Eigen::MatrixXd I_bar;
  double cell_length = 1.0;
  double homothetic_scale = 1.0;
};

inline VoigtView pack_voigt(const EffectiveTensors& t, VoigtOrdering ordering = VoigtOrdering::block_diagonal) {
  const int d = t.dim;
  if (t.C.dim() != d || t.G.dim() != d || t.D.dim() != d || t.I_bar.dim() != d)
    throw DimensionError("tensor dimensions disagree");
  const auto pairs = strain_pairs(d);
  const auto tri = gradient_triples(d, ordering);
  const int np = static_cast<int>(pairs.size()), nt = static_cast<int>(tri.size());
  VoigtView v;
  v.dim = d;
  v.ordering = ordering;
  v.cell_length = t.cell_length;
  v.homothetic_scale = t.homothetic_scale;
  v.C.resize(np, np);
  v.G.resize(np, nt);
  v.D.resize(nt, nt);
  v.I_bar.resize(d, d);
  for (int p = 0; p < np; ++p)
    for (int q = 0; q < np; ++q) v.C(p, q) = t.C(pairs[p][0], pairs[p][1], pairs[q][0], pairs[q][1]);
  for (int p = 0; p < np; ++p)
    for (int s = 0; s < nt; ++s) v.G(p, s) = t.G(pairs[p][0], pairs[p][1], tri[s][0], tri[s][1], tri[s][2]);
  for (int s = 0; s < nt; ++s)
    for (int u = 0; u < nt; ++u) v.D(s, u) = t.D(tri[s][0], tri[s][1], tri[s][2], tri[u][0], tri[u][1], tri[u][2]);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) v.I_bar(i, j) = t.I_bar(i, j);
  return v;
}

/// Inverse of pack_voigt; fills every index permutation allowed by the
/// pair symmetries.
inline EffectiveTensors unpack_voigt(const VoigtView& v) {
  const int d = v.dim;
  if (d != 2 && d != 3) throw DimensionError("dimension must be 2 or 3");
  const int np = pair_count(d);
  const int nt = np * d;
  if (v.C.rows() != np || v.C.cols() != np || v.G.rows() != np || v.G.cols() != nt || v.D.rows() != nt ||
      v.D.cols() != nt || v.I_bar.rows() != d || v.I_bar.cols() != d)
    throw DimensionError("Voigt matrix shapes do not match dimension " + std::to_string(d));
  std::vector<int> slot(static_cast<std::size_t>(np) * d);
  const auto tri = gradient_triples(d, v.ordering);
  for (int s = 0; s < nt; ++s) slot[pair_index(d, tri[s][0], tri[s][1]) * d + tri[s][2]] = s;
  EffectiveTensors t;
  t.dim = d;
  t.cell_length = v.cell_length;
  t.homothetic_scale = v.homothetic_scale;
  t.C = Tensor4(d);
  t.G = Tensor5(d);
  t.D = Tensor6(d);
  t.I_bar = Tensor2(d);
  for (std::size_t k = 0; k < t.C.size(); ++k) {
    const auto x = t.C.unflatten(k);
    t.C[k] = v.C(pair_index(d, x[0], x[1]), pair_index(d, x[2], x[3]));
  }
  for (std::size_t k = 0; k < t.G.size(); ++k) {
    const auto x = t.G.unflatten(k);
    t.G[k] = v.G(pair_index(d, x[0], x[1]), slot[pair_index(d, x[2], x[3]) * d + x[4]]);
  }
  for (std::size_t k = 0; k < t.D.size(); ++k) {
    const auto x = t.D.unflatten(k);
    t.D[k] = v.D(slot[pair_index(d, x[0], x[1]) * d + x[2]], slot[pair_index(d, x[3], x[4]) * d + x[5]]);
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t.I_bar(i, j) = v.I_bar(i, j);
  return t;
}

}  // namespace sgh
