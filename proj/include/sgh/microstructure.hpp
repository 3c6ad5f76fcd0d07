#pragma once

// Periodic two-phase unit cells: constituent materials, inclusion shapes and
// their voxelization onto a structured grid.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sgh/error.hpp"
#include "sgh/tensor.hpp"

namespace sgh {

/// Young's modulus assigned in place of an exact zero (voids), in GPa.
inline constexpr double default_stiffness_floor = 1e-10;

/// Isotropic linear elastic constituent. Units: GPa, -, kg/m^3.
struct Material {
  double youngs_modulus = 0.0;
  double poisson_ratio = 0.0;
  double mass_density = 0.0;
};

inline void validate_material(const Material& m) {
  if (!(m.youngs_modulus >= 0.0) || !std::isfinite(m.youngs_modulus))
    throw MaterialError("Young's modulus must be finite and non-negative");
  if (m.poisson_ratio == 0.5)
    throw MaterialError("Poisson ratio 0.5 is incompressible; displacement elements cannot represent it");
  if (!(m.poisson_ratio > -1.0 && m.poisson_ratio < 0.5))
    throw MaterialError("Poisson ratio must lie in (-1, 0.5)");
  if (!(m.mass_density >= 0.0) || !std::isfinite(m.mass_density))
    throw MaterialError("mass density must be finite and non-negative");
}

/// Lame construction C_ijkl = lambda d_ij d_kl + mu (d_ik d_jl + d_il d_jk).
/// In 2D this is the in-plane restriction of the 3D tensor (plane strain).
/// Moduli below `floor` are raised to `floor`.
inline ElasticTensor isotropic_stiffness(const Material& m, int dim,
                                         double floor = default_stiffness_floor) {
  validate_material(m);
  const double E = std::max(m.youngs_modulus, floor);
  const double nu = m.poisson_ratio;
  const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double mu = E / (2.0 * (1.0 + nu));
  ElasticTensor C(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l)
          C(i, j, k, l) = lambda * kronecker(i, j) * kronecker(k, l) +
                          mu * (kronecker(i, k) * kronecker(j, l) + kronecker(i, l) * kronecker(j, k));
  return C;
}

// Inclusion shapes. All lengths in mm, centered on the cell center plus an
// optional offset.
struct Homogeneous {};
struct Disk {
  double radius = 0.0;
};
struct Cylinder {
  double radius = 0.0;
  int axis = 2;  // 0 = x, 1 = y, 2 = z
};
struct Sphere {
  double radius = 0.0;
};
/// Square in 2D, cube in 3D.
struct Cube {
  double side = 0.0;
};

using InclusionShape = std::variant<Homogeneous, Disk, Cylinder, Sphere, Cube>;

/// Unit cell description. A nonzero `offset` moves the inclusion away from
/// the center, which breaks centro-symmetry (used to exercise the rank-5
/// coupling tensor; not one of the reference microstructures).
struct GeometrySpec {
  InclusionShape shape = Homogeneous{};
  double cell_length = 1.0;
  int dimension = 2;
  std::array<double, 3> offset{0.0, 0.0, 0.0};
};

inline std::string shape_name(const InclusionShape& s) {
  struct V {
    std::string operator()(const Homogeneous&) const { return "homogeneous"; }
    std::string operator()(const Disk&) const { return "disk"; }
    std::string operator()(const Cylinder&) const { return "cylinder"; }
    std::string operator()(const Sphere&) const { return "sphere"; }
    std::string operator()(const Cube&) const { return "cube"; }
  };
  return std::visit(V{}, s);
}

/// Checks dimension compatibility and that the inclusion stays strictly
/// inside the cell.
inline void validate_geometry(const GeometrySpec& g) {
  if (g.dimension != 2 && g.dimension != 3) throw GeometryError("dimension must be 2 or 3");
  if (!(g.cell_length > 0.0) || !std::isfinite(g.cell_length)) throw GeometryError("cell_length must be positive");
  const double half = 0.5 * g.cell_length;
  // extent[i]: half-width of the inclusion along axis i (0 if unbounded along it)
  std::array<double, 3> extent{0.0, 0.0, 0.0};
  bool bounded_axis[3] = {true, true, true};
  const std::string name = shape_name(g.shape);
  if (const auto* d = std::get_if<Disk>(&g.shape)) {
    if (g.dimension != 2) throw GeometryError("disk inclusions require dimension 2");
    if (!(d->radius > 0.0)) throw GeometryError("disk radius must be positive");
    extent = {d->radius, d->radius, 0.0};
  } else if (const auto* c = std::get_if<Cylinder>(&g.shape)) {
    if (g.dimension != 3) throw GeometryError("cylinder inclusions require dimension 3");
    if (c->axis < 0 || c->axis > 2) throw GeometryError("cylinder axis must be 0, 1 or 2");
    if (!(c->radius > 0.0)) throw GeometryError("cylinder radius must be positive");
    extent = {c->radius, c->radius, c->radius};
    extent[c->axis] = 0.0;
    bounded_axis[c->axis] = false;
  } else if (const auto* s = std::get_if<Sphere>(&g.shape)) {
    if (g.dimension != 3) throw GeometryError("sphere inclusions require dimension 3");
    if (!(s->radius > 0.0)) throw GeometryError("sphere radius must be positive");
    extent = {s->radius, s->radius, s->radius};
  } else if (const auto* q = std::get_if<Cube>(&g.shape)) {
    if (!(q->side > 0.0)) throw GeometryError("cube side must be positive");
    extent = {0.5 * q->side, 0.5 * q->side, 0.5 * q->side};
  }
  if (std::holds_alternative<Homogeneous>(g.shape)) return;
  for (int i = 0; i < g.dimension; ++i) {
    if (!bounded_axis[i]) continue;
    if (std::abs(g.offset[i]) + extent[i] >= half)
      throw GeometryError(name + " inclusion touches or exceeds the cell boundary along axis " +
                          std::to_string(i));
  }
}

/// True if `p` (coordinates relative to the cell center) lies strictly inside
/// the inclusion.
inline bool inside_inclusion(const GeometrySpec& g, const std::array<double, 3>& p) {
  std::array<double, 3> q{p[0] - g.offset[0], p[1] - g.offset[1], p[2] - g.offset[2]};
  if (g.dimension == 2) q[2] = 0.0;
  if (const auto* d = std::get_if<Disk>(&g.shape)) return q[0] * q[0] + q[1] * q[1] < d->radius * d->radius;
  if (const auto* c = std::get_if<Cylinder>(&g.shape)) {
    double r2 = 0.0;
    for (int i = 0; i < 3; ++i)
      if (i != c->axis) r2 += q[i] * q[i];
    return r2 < c->radius * c->radius;
  }
  if (const auto* s = std::get_if<Sphere>(&g.shape))
    return q[0] * q[0] + q[1] * q[1] + q[2] * q[2] < s->radius * s->radius;
  if (const auto* c = std::get_if<Cube>(&g.shape)) {
    const double h = 0.5 * c->side;
    for (int i = 0; i < g.dimension; ++i)
      if (!(std::abs(q[i]) < h)) return false;
    return true;
  }
  return false;
}

/// Analytic inclusion volume fraction of the (unit) cell.
inline double analytic_inclusion_fraction(const GeometrySpec& g) {
  const double L = g.cell_length;
  const double V = g.dimension == 2 ? L * L : L * L * L;
  using std::numbers::pi;
  if (const auto* d = std::get_if<Disk>(&g.shape)) return pi * d->radius * d->radius / V;
  if (const auto* c = std::get_if<Cylinder>(&g.shape)) return pi * c->radius * c->radius * L / V;
  if (const auto* s = std::get_if<Sphere>(&g.shape)) return 4.0 / 3.0 * pi * std::pow(s->radius, 3) / V;
  if (const auto* c = std::get_if<Cube>(&g.shape)) return std::pow(c->side, g.dimension) / V;
  return 0.0;
}

enum class Phase : std::uint8_t { matrix = 0, inclusion = 1 };

/// Voxelized periodic cell. The grid is exactly one period: n cells per edge,
/// elements ordered lexicographically with x fastest, then y, then z.
/// Immutable after construction.
class PhaseGrid {
 public:
  PhaseGrid(int dim, int resolution, double length, std::vector<Phase> phases,
            std::array<Material, 2> materials, double stiffness_floor = default_stiffness_floor)
      : dim_(dim),
        n_(resolution),
        length_(length),
        phases_(std::move(phases)),
        materials_(materials),
        floor_(stiffness_floor) {
    if (dim != 2 && dim != 3) throw GeometryError("dimension must be 2 or 3");
    if (resolution < 1) throw GeometryError("resolution must be positive");
    if (!(length > 0.0)) throw GeometryError("cell length must be positive");
    if (phases_.size() != ipow(static_cast<std::size_t>(n_), dim_))
      throw GeometryError("phase array size does not match resolution");
    for (int p = 0; p < 2; ++p) stiffness_[p] = isotropic_stiffness(materials_[p], dim_, floor_);
  }

  int dimension() const { return dim_; }
  int resolution() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return length_ / n_; }
  double volume() const { return std::pow(length_, dim_); }
  double stiffness_floor() const { return floor_; }
  std::size_t element_count() const { return phases_.size(); }
  std::span<const Phase> phases() const { return phases_; }
  Phase phase(std::size_t e) const { return phases_[e]; }
  const Material& material(Phase p) const { return materials_[static_cast<int>(p)]; }
  const std::array<Material, 2>& materials() const { return materials_; }
  const ElasticTensor& stiffness(Phase p) const { return stiffness_[static_cast<int>(p)]; }

  std::array<int, 3> element_coords(std::size_t e) const {
    std::array<int, 3> c{0, 0, 0};
    for (int i = 0; i < dim_; ++i) {
      c[i] = static_cast<int>(e % n_);
      e /= n_;
    }
    return c;
  }
  std::size_t element_index(int ix, int iy, int iz = 0) const {
    return (static_cast<std::size_t>(iz) * n_ + iy) * n_ + ix;
  }
  /// Element center in cell-centered coordinates y = X - X_c.
  std::array<double, 3> element_center(std::size_t e) const {
    const auto c = element_coords(e);
    const double h = spacing();
    std::array<double, 3> y{0.0, 0.0, 0.0};
    for (int i = 0; i < dim_; ++i) y[i] = (c[i] + 0.5) * h - 0.5 * length_;
    return y;
  }

 private:
  int dim_;
  int n_;
  double length_;
  std::vector<Phase> phases_;
  std::array<Material, 2> materials_;
  double floor_;
  std::array<ElasticTensor, 2> stiffness_;
};

/// Phase of each cell decided by whether its centroid lies inside the
/// inclusion. Deterministic; materials are {matrix, inclusion}.
inline PhaseGrid voxelize(const GeometrySpec& spec, int resolution, const std::array<Material, 2>& materials,
                          double stiffness_floor = default_stiffness_floor) {
  validate_geometry(spec);
  if (resolution < 4) throw GeometryError("resolution must be at least 4");
  const int d = spec.dimension;
  const std::size_t count = ipow(static_cast<std::size_t>(resolution), d);
  std::vector<Phase> phases(count, Phase::matrix);
  const double h = spec.cell_length / resolution;
  const int nz = d == 3 ? resolution : 1;
  std::size_t e = 0;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < resolution; ++j)
      for (int i = 0; i < resolution; ++i, ++e) {
        // centroid computed symmetrically about the center so mirrored cells
        // get bitwise mirrored coordinates
        const std::array<double, 3> y{(2 * i + 1 - resolution) * 0.5 * h, (2 * j + 1 - resolution) * 0.5 * h,
                                      d == 3 ? (2 * k + 1 - resolution) * 0.5 * h : 0.0};
        if (inside_inclusion(spec, y)) phases[e] = Phase::inclusion;
      }
  return PhaseGrid(d, resolution, spec.cell_length, std::move(phases), materials, stiffness_floor);
}

/// Stack of `copies` unit cells per direction (copies^d cells in total).
inline PhaseGrid repeat_cell(const PhaseGrid& cell, int copies) {
  if (copies < 1) throw GeometryError("repeat count must be positive");
  const int n = cell.resolution();
  const int d = cell.dimension();
  const int N = n * copies;
  std::vector<Phase> phases(ipow(static_cast<std::size_t>(N), d));
  const int Nz = d == 3 ? N : 1;
  std::size_t e = 0;
  for (int k = 0; k < Nz; ++k)
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i, ++e) phases[e] = cell.phase(cell.element_index(i % n, j % n, d == 3 ? k % n : 0));
  return PhaseGrid(d, N, cell.length() * copies, std::move(phases), cell.materials(), cell.stiffness_floor());
}

inline double volume_fraction(const PhaseGrid& grid, Phase phase) {
  std::size_t count = 0;
  for (Phase p : grid.phases()) count += (p == phase);
  return static_cast<double>(count) / static_cast<double>(grid.element_count());
}

/// FNV-1a over dimension, resolution, length, materials, floor and the phase array.
inline std::uint64_t grid_hash(const PhaseGrid& grid) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  const int d = grid.dimension(), n = grid.resolution();
  const double L = grid.length();
  mix(&d, sizeof d);
  mix(&n, sizeof n);
  mix(&L, sizeof L);
  for (const auto& m : grid.materials()) {
    mix(&m.youngs_modulus, sizeof(double));
    mix(&m.poisson_ratio, sizeof(double));
    mix(&m.mass_density, sizeof(double));
  }
  const double floor = grid.stiffness_floor();
  mix(&floor, sizeof floor);
  mix(grid.phases().data(), grid.phases().size());
  return h;
}

}  // namespace sgh
