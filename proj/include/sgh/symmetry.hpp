#pragma once

// Equality-pattern classification of packed tensors (cubic / transversely
// isotropic / other) and extraction of the named constants c_k, d_k.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "sgh/voigt.hpp"

namespace sgh {

/// Label matrices: entry k > 0 names constant k, 0 an expected zero.
struct SymmetryTemplate {
  std::string name;
  std::vector<std::vector<int>> C;
  std::vector<std::vector<int>> D;
  /// Number of C labels reported as named constants (higher labels are
  /// pattern-only).
  int classical_constants = 0;
};

namespace detail {

using LabelMatrix = std::vector<std::vector<int>>;

inline void place_block(LabelMatrix& m, int offset, const LabelMatrix& block) {
  for (std::size_t i = 0; i < block.size(); ++i)
    for (std::size_t j = 0; j < block.size(); ++j) m[offset + i][offset + j] = block[i][j];
}

inline LabelMatrix symmetric_labels(int n, int first) {
  LabelMatrix b(n, std::vector<int>(n));
  int k = first;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) b[i][j] = b[j][i] = k++;
  return b;
}

}  // namespace detail

/// Square (2D) / cubic (3D) pattern in the block_diagonal ordering.
inline SymmetryTemplate cubic_template(int dim) {
  using detail::LabelMatrix;
  SymmetryTemplate t;
  t.name = "cubic";
  if (dim == 2) {
    t.C = {{1, 2, 0}, {2, 1, 0}, {0, 0, 3}};
    t.classical_constants = 3;
    t.D.assign(6, std::vector<int>(6, 0));
    const LabelMatrix b = detail::symmetric_labels(3, 1);
    detail::place_block(t.D, 0, b);
    detail::place_block(t.D, 3, b);
    return t;
  }
  t.C = {{1, 2, 2, 0, 0, 0}, {2, 1, 2, 0, 0, 0}, {2, 2, 1, 0, 0, 0},
         {0, 0, 0, 3, 0, 0}, {0, 0, 0, 0, 3, 0}, {0, 0, 0, 0, 0, 3}};
  t.classical_constants = 3;
  t.D.assign(18, std::vector<int>(18, 0));
  const LabelMatrix b = {{1, 2, 3, 2, 3}, {2, 4, 5, 6, 7}, {3, 5, 8, 7, 9}, {2, 6, 7, 4, 5}, {3, 7, 9, 5, 8}};
  for (int k = 0; k < 3; ++k) detail::place_block(t.D, 5 * k, b);
  detail::place_block(t.D, 15, {{10, 11, 11}, {11, 10, 11}, {11, 11, 10}});
  return t;
}

/// Transverse isotropy about the third axis (3D): constants
/// c1 = C11, c2 = C13, c3 = C33, c4 = C44, c5 = C66; C12 appears as
/// pattern label 6.
inline SymmetryTemplate transverse_isotropic_template() {
  SymmetryTemplate t;
  t.name = "transverse_isotropic";
  t.C = {{1, 6, 2, 0, 0, 0}, {6, 1, 2, 0, 0, 0}, {2, 2, 3, 0, 0, 0},
         {0, 0, 0, 4, 0, 0}, {0, 0, 0, 0, 4, 0}, {0, 0, 0, 0, 0, 5}};
  t.classical_constants = 5;
  t.D.assign(18, std::vector<int>(18, 0));
  const auto b = detail::symmetric_labels(5, 1);
  detail::place_block(t.D, 0, b);
  detail::place_block(t.D, 5, b);
  detail::place_block(t.D, 10, {{16, 17, 18, 17, 18},
                                {17, 19, 20, 21, 22},
                                {18, 20, 23, 22, 24},
                                {17, 21, 22, 19, 20},
                                {18, 22, 24, 20, 23}});
  detail::place_block(t.D, 15, {{25, 27, 28}, {27, 25, 28}, {28, 28, 26}});
  return t;
}

struct NamedConstant {
  std::string name;
  double value = 0.0;  // mean over the entries carrying the label
  double spread = 0.0;  // max |entry - value| / matrix scale
};

struct PatternFit {
  std::vector<NamedConstant> constants;
  double max_deviation = 0.0;  // over labels and expected zeros, relative to max|entry|
};

/// Fits label groups of `labels` to `m`.
inline PatternFit fit_pattern(const Eigen::MatrixXd& m, const std::vector<std::vector<int>>& labels,
                              const std::string& prefix) {
  const int n = static_cast<int>(labels.size());
  if (m.rows() != n || m.cols() != n) throw DimensionError("pattern size does not match matrix");
  const double scale = m.cwiseAbs().maxCoeff();
  int count = 0;
  for (const auto& row : labels) count = std::max(count, *std::max_element(row.begin(), row.end()));
  PatternFit fit;
  // label 0 is compared against zero, not its mean
  std::vector<double> sum(count + 1, 0.0);
  std::vector<int> hits(count + 1, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      sum[labels[i][j]] += m(i, j);
      ++hits[labels[i][j]];
    }
  std::vector<double> mean(count + 1, 0.0), spread(count + 1, 0.0);
  for (int k = 1; k <= count; ++k) mean[k] = hits[k] ? sum[k] / hits[k] : 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int k = labels[i][j];
      const double dev = scale > 0.0 ? std::abs(m(i, j) - mean[k]) / scale : std::abs(m(i, j));
      spread[k] = std::max(spread[k], dev);
      fit.max_deviation = std::max(fit.max_deviation, dev);
    }
  for (int k = 1; k <= count; ++k) fit.constants.push_back({prefix + std::to_string(k), mean[k], spread[k]});
  return fit;
}

struct SymmetryReport {
  std::string symmetry_class = "other";
  /// Symmetry axis (0-based) for transverse isotropy, -1 otherwise.
  int axis = -1;
  double tolerance = 0.05;
  /// Named constants: classical in GPa, gradient in N (GPa mm^2 x 1000).
  std::vector<NamedConstant> classical;
  std::vector<NamedConstant> gradient;
  double c_deviation = 0.0;
  double d_deviation = 0.0;
  /// |C12 - (C11 - 2 C66)| / C11 for transverse isotropy (diagnostic only).
  double isotropy_residual = 0.0;
  /// |G| / (|C| l); zero for centro-symmetric cells.
  double g_norm = 0.0;
};

/// Tensors with axis `axis` moved to the third position by a cyclic index map.
inline EffectiveTensors permute_axes(const EffectiveTensors& t, int axis) {
  if (t.dim != 3 || axis == 2) return t;
  std::array<int, 3> P{};
  for (int i = 0; i < 3; ++i) P[i] = (i + 2 - axis) % 3;
  EffectiveTensors r = t;
  for (std::size_t k = 0; k < t.C.size(); ++k) {
    const auto x = t.C.unflatten(k);
    r.C(P[x[0]], P[x[1]], P[x[2]], P[x[3]]) = t.C[k];
  }
  for (std::size_t k = 0; k < t.G.size(); ++k) {
    const auto x = t.G.unflatten(k);
    r.G(P[x[0]], P[x[1]], P[x[2]], P[x[3]], P[x[4]]) = t.G[k];
  }
  for (std::size_t k = 0; k < t.D.size(); ++k) {
    const auto x = t.D.unflatten(k);
    r.D(P[x[0]], P[x[1]], P[x[2]], P[x[3]], P[x[4]], P[x[5]]) = t.D[k];
  }
  for (std::size_t k = 0; k < t.I_bar.size(); ++k) {
    const auto x = t.I_bar.unflatten(k);
    r.I_bar(P[x[0]], P[x[1]]) = t.I_bar[k];
  }
  return r;
}

/// Tests the cubic pattern, then transverse isotropy about each axis.
inline SymmetryReport classify_symmetry(const EffectiveTensors& t, double rel_tol = 0.05) {
  SymmetryReport rep;
  rep.tolerance = rel_tol;
  const double cn = t.C.norm();
  rep.g_norm = cn > 0.0 ? t.G.norm() / (cn * t.cell_length) : t.G.norm();

  auto accept = [&](const SymmetryTemplate& tpl, const VoigtView& v, int axis) {
    const auto fc = fit_pattern(v.C, tpl.C, "c");
    const auto fd = fit_pattern(v.D, tpl.D, "d");
    if (fc.max_deviation > rel_tol || fd.max_deviation > rel_tol) return false;
    rep.symmetry_class = tpl.name;
    rep.axis = axis;
    rep.c_deviation = fc.max_deviation;
    rep.d_deviation = fd.max_deviation;
    rep.classical.assign(fc.constants.begin(), fc.constants.begin() + tpl.classical_constants);
    rep.gradient = fd.constants;
    for (auto& c : rep.gradient) c.value *= 1000.0;
    if (tpl.name == "transverse_isotropic") {
      const double c11 = v.C(0, 0), c12 = v.C(0, 1), c66 = v.C(5, 5);
      rep.isotropy_residual = std::abs(c12 - (c11 - 2.0 * c66)) / std::abs(c11);
    }
    return true;
  };

  if (accept(cubic_template(t.dim), pack_voigt(t), -1)) return rep;
  if (t.dim == 3) {
    const auto ti = transverse_isotropic_template();
    for (int axis : {2, 0, 1})
      if (accept(ti, pack_voigt(permute_axes(t, axis)), axis)) return rep;
  }
  // report the closest fit of the cubic pattern
  const auto v = pack_voigt(t);
  rep.c_deviation = fit_pattern(v.C, cubic_template(t.dim).C, "c").max_deviation;
  rep.d_deviation = fit_pattern(v.D, cubic_template(t.dim).D, "d").max_deviation;
  return rep;
}

}  // namespace sgh
