#pragma once

// Effective strain-gradient tensors by quadrature of the localization fields:
//   C_abcd   = <C_ijkl L_abij L_cdkl>
//   G_abcde  = eps <C_ijkl L_abij M_cdekl>
//   D_abcdef = eps^2 (<C_ijkl M_abcij M_defkl> - C_abde Ibar_cf)
// with Ibar_cf = <y_c y_f> and <.> the cell average.

#include <vector>

#include "sgh/correctors.hpp"
#include "sgh/localization.hpp"
#include "sgh/parallel.hpp"

namespace sgh {

/// Units: C in GPa, G in GPa mm, D in GPa mm^2, I_bar in mm^2, length in mm.
struct EffectiveTensors {
  int dim = 0;
  Tensor4 C;
  Tensor5 G;
  Tensor6 D;
  Tensor2 I_bar;
  double cell_length = 1.0;
  double homothetic_scale = 1.0;

  bool operator==(const EffectiveTensors&) const = default;
};

namespace detail {

/// Element block length of the reductions. Fixed, so sums do not depend on
/// the thread count.
inline constexpr std::size_t reduction_block = 512;

/// sigma = C : X for a d x d array X (row-major).
inline void contract_stiffness(const ElasticTensor& C, int d, const double* X, double* out) {
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) s += C(i, j, k, l) * X[k * d + l];
      out[i * d + j] = s;
    }
}

inline double frobenius(int d, const double* A, const double* B) {
  double s = 0.0;
  for (int k = 0; k < d * d; ++k) s += A[k] * B[k];
  return s;
}

/// Reduced sums over pairs p and second-order cases s = p d + c.
struct CompactSums {
  std::vector<double> LL, LM, MM, yy;  // np*np, np*ns, ns*ns, 9
  double volume = 0.0;

  void resize(int np, int ns) {
    LL.assign(static_cast<std::size_t>(np) * np, 0.0);
    LM.assign(static_cast<std::size_t>(np) * ns, 0.0);
    MM.assign(static_cast<std::size_t>(ns) * ns, 0.0);
    yy.assign(9, 0.0);
  }
  void add(const CompactSums& o) {
    for (std::size_t k = 0; k < LL.size(); ++k) LL[k] += o.LL[k];
    for (std::size_t k = 0; k < LM.size(); ++k) LM[k] += o.LM[k];
    for (std::size_t k = 0; k < MM.size(); ++k) MM[k] += o.MM[k];
    for (std::size_t k = 0; k < 9; ++k) yy[k] += o.yy[k];
    volume += o.volume;
  }
};

inline CompactSums compact_sums(const PhaseGrid& grid, const fem::PeriodicDofMap& map, const CorrectorSet& cs,
                                bool only_L, int threads) {
  const int d = grid.dimension();
  const int np = pair_count(d);
  const int ns = only_L ? 0 : np * d;
  const std::size_t ne = grid.element_count();
  const std::size_t blocks = (ne + reduction_block - 1) / reduction_block;
  std::vector<CompactSums> part(blocks);
  parallel_for(blocks, threads, [&](std::size_t blk) {
    CompactSums& S = part[blk];
    S.resize(np, ns);
    std::vector<double> sL(static_cast<std::size_t>(np) * d * d), sM(static_cast<std::size_t>(ns) * d * d);
    const std::size_t b = blk * reduction_block, e = std::min(ne, b + reduction_block);
    for_each_gauss_point(
        grid, map, cs, b, e,
        [&](const GaussSample& g, std::span<const double> L, std::span<const double> M) {
          const double w = g.weight;
          const int dd = d * d;
          for (int p = 0; p < np; ++p) contract_stiffness(*g.stiffness, d, &L[p * dd], &sL[p * dd]);
          for (int s = 0; s < ns; ++s) contract_stiffness(*g.stiffness, d, &M[s * dd], &sM[s * dd]);
          for (int p = 0; p < np; ++p)
            for (int q = p; q < np; ++q) S.LL[p * np + q] += w * frobenius(d, &L[p * dd], &sL[q * dd]);
          for (int p = 0; p < np; ++p)
            for (int s = 0; s < ns; ++s) S.LM[p * ns + s] += w * frobenius(d, &L[p * dd], &sM[s * dd]);
          for (int s = 0; s < ns; ++s)
            for (int t = s; t < ns; ++t) S.MM[s * ns + t] += w * frobenius(d, &M[s * dd], &sM[t * dd]);
          for (int c = 0; c < d; ++c)
            for (int f = 0; f < d; ++f) S.yy[c * 3 + f] += w * (g.y[c] * g.y[f]);
          S.volume += w;
        },
        only_L);
  });
  CompactSums total;
  total.resize(np, ns);
  for (const auto& p : part) total.add(p);
  // mirror the upper triangles
  for (int p = 0; p < np; ++p)
    for (int q = 0; q < p; ++q) total.LL[p * np + q] = total.LL[q * np + p];
  for (int s = 0; s < ns; ++s)
    for (int t = 0; t < s; ++t) total.MM[s * ns + t] = total.MM[t * ns + s];
  return total;
}

}  // namespace detail

/// C^M from phi alone (needed to form the second-order loads).
inline ElasticTensor compute_C_eff(const PhaseGrid& grid, const fem::PeriodicDofMap& map, const CorrectorSet& cs,
                                   int threads = 1) {
  const int d = grid.dimension();
  const int np = pair_count(d);
  const auto S = detail::compact_sums(grid, map, cs, true, threads);
  const double V = grid.volume();
  ElasticTensor C(d);
  for (std::size_t k = 0; k < C.size(); ++k) {
    const auto i = C.unflatten(k);
    C[k] = S.LL[pair_index(d, i[0], i[1]) * np + pair_index(d, i[2], i[3])] / V;
  }
  return C;
}

/// Flux average <C_ijkl L_abkl>, symmetrized in (ij); equals C^M up to the
/// phi solve error.
inline ElasticTensor compute_C_flux(const PhaseGrid& grid, const fem::PeriodicDofMap& map, const CorrectorSet& cs) {
  const int d = grid.dimension();
  ElasticTensor F(d);
  std::vector<double> sL(9);
  for_each_gauss_point(
      grid, map, cs, 0, grid.element_count(),
      [&](const GaussSample& g, std::span<const double> L, std::span<const double>) {
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) {
            detail::contract_stiffness(*g.stiffness, d, &L[pair_index(d, a, b) * d * d], sL.data());
            for (int i = 0; i < d; ++i)
              for (int j = 0; j < d; ++j) F(i, j, a, b) += g.weight * 0.5 * (sL[i * d + j] + sL[j * d + i]);
          }
      },
      true);
  F *= 1.0 / grid.volume();
  return F;
}

/// Geometric moment <y_c y_f> of the cell by the same quadrature.
inline Tensor2 geometric_moment(const PhaseGrid& grid) {
  const int d = grid.dimension();
  const fem::VoxelElement el(d, grid.spacing());
  Tensor2 I(d);
  for (std::size_t e = 0; e < grid.element_count(); ++e) {
    const auto c = grid.element_center(e);
    for (int q = 0; q < el.gauss_points(); ++q)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          I(i, j) += el.weight() * ((c[i] + el.gauss_offset(q)[i]) * (c[j] + el.gauss_offset(q)[j]));
  }
  I *= 1.0 / grid.volume();
  return I;
}

/// C, G, D and I_bar from a complete corrector set (homothetic scale 1).
inline EffectiveTensors compute_effective_tensors(const PhaseGrid& grid, const fem::PeriodicDofMap& map,
                                                  const CorrectorSet& cs, int threads = 1) {
  const int d = grid.dimension();
  const int np = pair_count(d);
  const int ns = np * d;
  if (static_cast<int>(cs.psi.size()) != ns) throw DimensionError("second-order correctors missing");
  const auto S = detail::compact_sums(grid, map, cs, false, threads);
  const double V = grid.volume();
  EffectiveTensors t;
  t.dim = d;
  t.cell_length = grid.length();
  t.C = Tensor4(d);
  t.G = Tensor5(d);
  t.D = Tensor6(d);
  t.I_bar = Tensor2(d);
  for (int c = 0; c < d; ++c)
    for (int f = 0; f < d; ++f) t.I_bar(c, f) = S.yy[c * 3 + f] / V;
  for (std::size_t k = 0; k < t.C.size(); ++k) {
    const auto i = t.C.unflatten(k);
    t.C[k] = S.LL[pair_index(d, i[0], i[1]) * np + pair_index(d, i[2], i[3])] / V;
  }
  for (std::size_t k = 0; k < t.G.size(); ++k) {
    const auto i = t.G.unflatten(k);
    t.G[k] = S.LM[pair_index(d, i[0], i[1]) * ns + pair_index(d, i[2], i[3]) * d + i[4]] / V;
  }
  for (std::size_t k = 0; k < t.D.size(); ++k) {
    const auto i = t.D.unflatten(k);
    const int s = pair_index(d, i[0], i[1]) * d + i[2];
    const int u = pair_index(d, i[3], i[4]) * d + i[5];
    t.D[k] = S.MM[s * ns + u] / V - t.C(i[0], i[1], i[3], i[4]) * t.I_bar(i[2], i[5]);
  }
  return t;
}

/// Second evaluation path: full-index sums over materialized fields.
inline EffectiveTensors effective_tensors_reference(const PhaseGrid& grid, const LocalizationFields& loc) {
  const int d = grid.dimension();
  const fem::VoxelElement el(d, grid.spacing());
  EffectiveTensors t;
  t.dim = d;
  t.cell_length = grid.length();
  t.C = Tensor4(d);
  t.G = Tensor5(d);
  t.D = Tensor6(d);
  t.I_bar = Tensor2(d);
  const int gp = el.gauss_points();
  for (std::size_t g = 0; g < loc.L.size(); ++g) {
    const auto& Cm = grid.stiffness(grid.phase(g / gp));
    const auto& L = loc.L[g];
    const auto& M = loc.M[g];
    const double w = loc.weight[g];
    for (int c = 0; c < d; ++c)
      for (int f = 0; f < d; ++f) t.I_bar(c, f) += w * (loc.y[g][c] * loc.y[g][f]);
    for (std::size_t k = 0; k < t.C.size(); ++k) {
      const auto x = t.C.unflatten(k);
      double s = 0.0;
      for (std::size_t m = 0; m < Cm.size(); ++m) {
        const auto r = Cm.unflatten(m);
        s += Cm[m] * L(x[0], x[1], r[0], r[1]) * L(x[2], x[3], r[2], r[3]);
      }
      t.C[k] += w * s;
    }
    for (std::size_t k = 0; k < t.G.size(); ++k) {
      const auto x = t.G.unflatten(k);
      double s = 0.0;
      for (std::size_t m = 0; m < Cm.size(); ++m) {
        const auto r = Cm.unflatten(m);
        s += Cm[m] * L(x[0], x[1], r[0], r[1]) * M(x[2], x[3], x[4], r[2], r[3]);
      }
      t.G[k] += w * s;
    }
    for (std::size_t k = 0; k < t.D.size(); ++k) {
      const auto x = t.D.unflatten(k);
      double s = 0.0;
      for (std::size_t m = 0; m < Cm.size(); ++m) {
        const auto r = Cm.unflatten(m);
        s += Cm[m] * M(x[0], x[1], x[2], r[0], r[1]) * M(x[3], x[4], x[5], r[2], r[3]);
      }
      t.D[k] += w * s;
    }
  }
  const double V = grid.volume();
  t.C *= 1.0 / V;
  t.G *= 1.0 / V;
  t.D *= 1.0 / V;
  t.I_bar *= 1.0 / V;
  for (std::size_t k = 0; k < t.D.size(); ++k) {
    const auto x = t.D.unflatten(k);
    t.D[k] -= t.C(x[0], x[1], x[3], x[4]) * t.I_bar(x[2], x[5]);
  }
  return t;
}

/// Homothetic rescaling by s: G -> s G, D -> s^2 D, I_bar -> s^2 I_bar,
/// length -> s length.
inline EffectiveTensors scale_homothetic(EffectiveTensors t, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("homothetic scale must be positive");
  t.G *= s;
  t.D *= s * s;
  t.I_bar *= s * s;
  t.cell_length *= s;
  t.homothetic_scale *= s;
  return t;
}

/// max |D_abcdef - D_defabc| / |D|.
inline double major_symmetry_residual(const Tensor6& D) {
  double m = 0.0;
  for (std::size_t k = 0; k < D.size(); ++k) {
    const auto x = D.unflatten(k);
    m = std::max(m, std::abs(D[k] - D(x[3], x[4], x[5], x[0], x[1], x[2])));
  }
  const double n = D.max_abs();
  return n > 0.0 ? m / n : m;
}

}  // namespace sgh
