#pragma once

// RVE-level checks of the identified tensors: micro/macro energy
// equivalence, repetition invariance and the homogeneous limit.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "sgh/cell_problems.hpp"
#include "sgh/effective_tensors.hpp"
#include "sgh/localization.hpp"
#include "sgh/pipeline.hpp"

namespace sgh {

/// Mean displacement gradients: first(i, j) = <u_i,j>, second(i, j, k) =
/// <u_i,jk> (1/mm, symmetric in j, k).
struct MacroState {
  int dim = 0;
  Tensor2 first;
  Tensor3 second;
};

inline MacroState zero_macro_state(int dim) { return {dim, Tensor2(dim), Tensor3(dim)}; }

/// Entries uniform in [-1, 1]; second gradients divided by the cell length.
inline MacroState random_macro_state(int dim, double cell_length, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MacroState s = zero_macro_state(dim);
  for (std::size_t k = 0; k < s.first.size(); ++k) s.first[k] = u(rng);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = j; k < dim; ++k) s.second(i, j, k) = s.second(i, k, j) = u(rng) / cell_length;
  return s;
}

inline std::vector<MacroState> random_macro_states(int dim, double cell_length, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<MacroState> out;
  for (int k = 0; k < count; ++k) out.push_back(random_macro_state(dim, cell_length, rng));
  return out;
}

/// Microscale displacement gradient du_i/dy_j at every Gauss point:
/// gradient[g * d * d + i * d + j], point g = element * 2^d + local index.
struct MicroGradientField {
  int dim = 0;
  std::vector<double> gradient;
  std::vector<double> weight;
  std::vector<std::size_t> element;
};

/// grad u = L_abij <u_a,b> + M_abcij <u_a,bc>.
inline MicroGradientField reconstruct_microfield(const PhaseGrid& grid, const fem::PeriodicDofMap& map,
                                                 const CorrectorSet& cs, const MacroState& state) {
  const int d = grid.dimension();
  if (state.dim != d) throw DimensionError("macro state dimension does not match the grid");
  const int np = pair_count(d);
  const auto pairs = strain_pairs(d);
  MicroGradientField f;
  f.dim = d;
  // weights of the symmetrized fields: sum over (a, b) and (b, a)
  std::vector<double> wL(np), wM(static_cast<std::size_t>(np) * d);
  for (int p = 0; p < np; ++p) {
    const int a = pairs[p][0], b = pairs[p][1];
    wL[p] = state.first(a, b) + (a != b ? state.first(b, a) : 0.0);
    for (int c = 0; c < d; ++c) wM[p * d + c] = state.second(a, b, c) + (a != b ? state.second(b, a, c) : 0.0);
  }
  const bool has_psi = !cs.psi.empty();
  for_each_gauss_point(
      grid, map, cs, 0, grid.element_count(),
      [&](const GaussSample& g, std::span<const double> L, std::span<const double> M) {
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) {
            // skew parts dropped by the symmetrized loads
            double v = 0.5 * (state.first(i, j) - state.first(j, i));
            for (int c = 0; c < d; ++c) v += g.y[c] * 0.5 * (state.second(i, j, c) - state.second(j, i, c));
            for (int p = 0; p < np; ++p) v += wL[p] * L[(p * d + i) * d + j];
            if (has_psi)
              for (int s = 0; s < np * d; ++s) v += wM[s] * M[(s * d + i) * d + j];
            f.gradient.push_back(v);
          }
        f.weight.push_back(g.weight);
        f.element.push_back(g.element);
      },
      !has_psi);
  return f;
}

/// 1/2 int C grad u : grad u.
inline double micro_energy(const PhaseGrid& grid, const MicroGradientField& f) {
  const int d = f.dim;
  double E = 0.0;
  for (std::size_t g = 0; g < f.weight.size(); ++g) {
    const auto& C = grid.stiffness(grid.phase(f.element[g]));
    const double* H = &f.gradient[g * d * d];
    double s = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) s += H[i * d + j] * C(i, j, k, l) * H[k * d + l];
    E += 0.5 * f.weight[g] * s;
  }
  return E;
}

/// V/2 C u'u' + V G u'u'' + V/2 (C Ibar + D) u''u''.
inline double macro_energy(const EffectiveTensors& t, const MacroState& s, double volume) {
  const int d = t.dim;
  double ec = 0.0, eg = 0.0, ed = 0.0;
  for (std::size_t k = 0; k < t.C.size(); ++k) {
    const auto x = t.C.unflatten(k);
    ec += t.C[k] * s.first(x[0], x[1]) * s.first(x[2], x[3]);
  }
  for (std::size_t k = 0; k < t.G.size(); ++k) {
    const auto x = t.G.unflatten(k);
    eg += t.G[k] * s.first(x[0], x[1]) * s.second(x[2], x[3], x[4]);
  }
  for (std::size_t k = 0; k < t.D.size(); ++k) {
    const auto x = t.D.unflatten(k);
    const double cI = t.C(x[0], x[1], x[3], x[4]) * t.I_bar(x[2], x[5]);
    ed += (t.D[k] + cI) * s.second(x[0], x[1], x[2]) * s.second(x[3], x[4], x[5]);
  }
  (void)d;
  return volume * (0.5 * ec + eg + 0.5 * ed);
}

struct EnergyReport {
  double micro = 0.0;
  double macro = 0.0;
  double residual = 0.0;  // |micro - macro| / macro (absolute for zero states)
  double tolerance = 1e-6;
  bool pass = false;
};

/// Tensors must come from the same correctors at homothetic scale 1.
inline EnergyReport energy_equivalence_check(const PhaseGrid& grid, const fem::PeriodicDofMap& map,
                                             const CorrectorSet& cs, const EffectiveTensors& t,
                                             const MacroState& state, double rel_tol = 1e-6) {
  EnergyReport r;
  r.tolerance = rel_tol;
  r.micro = micro_energy(grid, reconstruct_microfield(grid, map, cs, state));
  r.macro = macro_energy(t, state, grid.volume());
  const double diff = std::abs(r.micro - r.macro);
  const double floor = t.C.max_abs() * grid.volume();
  if (std::abs(r.macro) > rel_tol * floor) {
    r.residual = diff / std::abs(r.macro);
  } else {
    r.residual = floor > 0.0 ? diff / floor : diff;
  }
  r.pass = r.residual <= rel_tol;
  return r;
}

/// Relative differences of two tensor sets: max|dC|/max|C|,
/// max|dG|/(max|C| l), max|dD|/max|D| (absolute in |C| l^2 when D = 0).
struct TensorDeviation {
  double C = 0.0;
  double G = 0.0;
  double D = 0.0;
  double max() const { return std::max({C, G, D}); }
};

inline TensorDeviation tensor_deviation(const EffectiveTensors& ref, const EffectiveTensors& other) {
  TensorDeviation dev;
  const double cs = ref.C.max_abs();
  const double l = ref.cell_length;
  dev.C = (other.C - ref.C).max_abs() / cs;
  dev.G = (other.G - ref.G).max_abs() / (cs * l);
  const double ds = ref.D.max_abs() > 1e-8 * cs * l * l ? ref.D.max_abs() : cs * l * l;
  dev.D = (other.D - ref.D).max_abs() / ds;
  return dev;
}

struct StackReport {
  int repeat = 1;
  int resolution = 0;
  std::uint64_t cell_hash = 0;
  std::uint64_t stack_hash = 0;
  TensorDeviation deviation;
  double tolerance = 0.01;
  bool pass = false;
  EffectiveTensors cell;
  EffectiveTensors stack;
};

/// Homogenizes one cell at `resolution` and its `repeat`-fold stack at the
/// same element size. All integrals are in physical coordinates, so the
/// comparison needs no rescaling.
inline StackReport stack_invariance_check(const GeometrySpec& spec, const std::array<Material, 2>& materials,
                                          int repeat, int resolution, double rel_tol = 0.01,
                                          const HomogenizationOptions& opt = {}) {
  if (repeat < 1 || repeat > 3) throw ConfigError("repeat count must be 1, 2 or 3");
  StackReport r;
  r.repeat = repeat;
  r.resolution = resolution;
  r.tolerance = rel_tol;
  const auto cell = voxelize(spec, resolution, materials);
  const auto stack = repeat_cell(cell, repeat);
  r.cell_hash = grid_hash(cell);
  r.stack_hash = grid_hash(stack);
  r.cell = homogenize(cell, opt).tensors;
  r.stack = repeat == 1 ? r.cell : homogenize(stack, opt).tensors;
  r.deviation = tensor_deviation(r.cell, r.stack);
  r.pass = r.deviation.max() <= rel_tol;
  return r;
}

struct HomogeneousReport {
  int resolution = 0;
  double c_error = 0.0;  // |C - C^m| / |C^m|
  double g_norm = 0.0;   // |G| / (|C| l)
  double d_norm = 0.0;   // |D| / (|C| l^2)
  bool pass = false;
};

inline HomogeneousReport homogeneous_limit_check(const Material& material, int dim, int resolution,
                                                 double cell_length = 1.0, const HomogenizationOptions& opt = {}) {
  GeometrySpec spec;
  spec.dimension = dim;
  spec.cell_length = cell_length;
  const auto grid = voxelize(spec, resolution, {material, material});
  const auto t = homogenize(grid, opt).tensors;
  const auto& Cm = grid.stiffness(Phase::matrix);
  HomogeneousReport r;
  r.resolution = resolution;
  r.c_error = (t.C - Cm).norm() / Cm.norm();
  r.g_norm = t.G.norm() / (t.C.norm() * cell_length);
  r.d_norm = t.D.norm() / (t.C.norm() * cell_length * cell_length);
  r.pass = r.c_error <= 1e-10 && r.g_norm <= 1e-8 && r.d_norm <= 1e-8;
  return r;
}

/// Geometry with every length (cell, inclusion, offset) multiplied by s.
inline GeometrySpec scale_geometry(GeometrySpec g, double s) {
  if (!(s > 0.0)) throw GeometryError("geometric scale factor must be positive");
  g.cell_length *= s;
  for (double& o : g.offset) o *= s;
  std::visit(
      [s](auto& shape) {
        if constexpr (requires { shape.radius; }) shape.radius *= s;
        if constexpr (requires { shape.side; }) shape.side *= s;
      },
      g.shape);
  return g;
}

struct ScalingReport {
  double scale = 1.0;
  /// max |scaled - s^k t| / max|s^k t| of the homothetic rescaling (k = 1 for
  /// G, 2 for D); exact by construction
  double homothetic_G = 0.0;
  double homothetic_D = 0.0;
  /// tensors of the geometrically scaled cell against s, s^2 rescaling
  TensorDeviation rerun;
  double tolerance = 1e-6;
  bool pass = false;
};

/// Homothetic rescaling against a full re-run on the cell scaled by s.
inline ScalingReport scaling_check(const GeometrySpec& spec, const std::array<Material, 2>& materials, int resolution,
                                   double s, double rel_tol = 1e-6, const HomogenizationOptions& opt = {},
                                   double stiffness_floor = default_stiffness_floor) {
  ScalingReport r;
  r.scale = s;
  r.tolerance = rel_tol;
  const auto t = homogenize(voxelize(spec, resolution, materials, stiffness_floor), opt).tensors;
  const auto h = scale_homothetic(t, s);
  auto rel = [](const auto& a, const auto& b) {
    const double m = b.max_abs();
    return m > 0.0 ? (a - b).max_abs() / m : a.max_abs();
  };
  r.homothetic_G = rel(h.G, t.G * s);
  r.homothetic_D = rel(h.D, t.D * (s * s));
  const auto small = homogenize(voxelize(scale_geometry(spec, s), resolution, materials, stiffness_floor), opt).tensors;
  r.rerun = tensor_deviation(h, small);
  r.pass = r.homothetic_G == 0.0 && r.homothetic_D == 0.0 && r.rerun.max() <= rel_tol;
  return r;
}

}  // namespace sgh
