#include <gtest/gtest.h>

#include <random>

#include "sgh/cell_problems.hpp"
#include "sgh/fem/preconditioner.hpp"
#include "sgh/fem/solver.hpp"

using namespace sgh;
using namespace sgh::fem;

namespace {

PhaseGrid disk_grid(int n) {
  GeometrySpec g;
  g.dimension = 2;
  g.shape = Disk{0.35};
  return voxelize(g, n, {Material{17.3, 0.35, 1780}, Material{35.9, 0.30, 1650}});
}

PhaseGrid sphere_grid(int n) {
  GeometrySpec g;
  g.dimension = 3;
  g.shape = Sphere{0.35};
  return voxelize(g, n, {Material{70, 0.3, 2900}, Material{450, 0.17, 3100}});
}

std::vector<double> random_zero_mean(std::size_t n, int components, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  fem::detail::remove_mean(v, components);
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

class ManufacturedSolution : public ::testing::TestWithParam<PreconditionerKind> {};

TEST_P(ManufacturedSolution, RecoversZeroMeanField) {
  for (const auto& grid : {disk_grid(16), sphere_grid(8)}) {
    const int d = grid.dimension();
    const auto map = build_periodic_dofmap(grid);
    const auto K = assemble_stiffness(grid, map);
    const auto u0 = random_zero_mean(K.rows(), d, 11);
    std::vector<double> b(K.rows());
    K.multiply(u0, b);
    SolverOptions opt;
    opt.tolerance = 1e-12;
    opt.preconditioner = GetParam();
    const auto prec = make_preconditioner(grid, K, opt);
    std::vector<SolveStats> st;
    const auto u = solve_zero_mean_block(K, {b}, d, opt, &st, {"manufactured"}, prec.get());
    EXPECT_LT(max_diff(u[0].values, u0), 1e-8 * max_abs(u0));
    EXPECT_LE(st[0].relative_residual, 1e-12);
    EXPECT_LE(st[0].mean_abs, 1e-14);
    EXPECT_GT(st[0].iterations, 0u);
  }
}

INSTANTIATE_TEST_SUITE_P(Preconditioners, ManufacturedSolution,
                         ::testing::Values(PreconditionerKind::jacobi, PreconditionerKind::reference_medium,
                                           PreconditionerKind::none, PreconditionerKind::automatic));

TEST(Solver, PreconditionersAgree) {
  const auto grid = sphere_grid(8);
  const auto map = build_periodic_dofmap(grid);
  const auto K = assemble_stiffness(grid, map);
  const auto b = random_zero_mean(K.rows(), 3, 5);
  std::vector<std::vector<double>> sols;
  for (auto kind : {PreconditionerKind::jacobi, PreconditionerKind::reference_medium, PreconditionerKind::none}) {
    SolverOptions opt;
    opt.tolerance = 1e-12;
    opt.preconditioner = kind;
    const auto prec = make_preconditioner(grid, K, opt);
    sols.push_back(solve_zero_mean_block(K, {b}, 3, opt, nullptr, {}, prec.get())[0].values);
  }
  EXPECT_LT(max_diff(sols[0], sols[1]), 1e-8 * max_abs(sols[0]));
  EXPECT_LT(max_diff(sols[0], sols[2]), 1e-8 * max_abs(sols[0]));
}

TEST(Solver, ReferenceMediumIsExactForHomogeneousCell) {
  for (int dim : {2, 3}) {
    GeometrySpec g;
    g.dimension = dim;
    const auto grid = voxelize(g, dim == 2 ? 16 : 8, {Material{70, 0.3, 2700}, Material{70, 0.3, 2700}});
    const auto map = build_periodic_dofmap(grid);
    const auto K = assemble_stiffness(grid, map);
    SolverOptions opt;
    opt.preconditioner = PreconditionerKind::reference_medium;
    const auto prec = make_preconditioner(grid, K, opt);
    EXPECT_STREQ(prec->name(), "reference_medium");
    std::vector<SolveStats> st;
    solve_zero_mean_block(K, {random_zero_mean(K.rows(), dim, 3)}, dim, opt, &st, {}, prec.get());
    EXPECT_LE(st[0].iterations, 2u);
  }
}

TEST(Solver, AutomaticChoice) {
  SolverOptions opt;
  const auto near = sphere_grid(4);
  const auto Kn = assemble_stiffness(near, build_periodic_dofmap(near));
  EXPECT_STREQ(make_preconditioner(near, Kn, opt)->name(), "reference_medium");
  GeometrySpec g;
  g.dimension = 3;
  g.shape = Cube{0.5};
  const auto foam = voxelize(g, 4, {Material{70, 0.3, 2700}, Material{1e-10, 0.0, 0.0}});
  const auto Kf = assemble_stiffness(foam, build_periodic_dofmap(foam));
  EXPECT_STREQ(make_preconditioner(foam, Kf, opt)->name(), "jacobi");
}

TEST(Solver, ReferenceStiffnessSpread) {
  double spread = 0.0;
  const auto C = reference_stiffness({{5.0, 2.0}, {5.0, 2.0}}, 3, &spread);
  EXPECT_NEAR(spread, 1.0, 1e-2);
  // positive definite isotropic tensor
  EXPECT_GT(C(0, 1, 0, 1), 0.0);
  EXPECT_GT(C(0, 0, 0, 0) + 2 * C(0, 0, 1, 1), 0.0);
  reference_stiffness({{1.0, 1.0}, {100.0, 100.0}}, 2, &spread);
  EXPECT_NEAR(spread, 100.0, 1.0);
  EXPECT_THROW(reference_stiffness({{1.0, 0.0}}, 2), SolverError);
}

TEST(Solver, IncompatibleRightHandSide) {
  const auto grid = disk_grid(8);
  const auto map = build_periodic_dofmap(grid);
  const auto K = assemble_stiffness(grid, map);
  auto b = random_zero_mean(K.rows(), 2, 1);
  for (std::size_t a = 0; a < map.node_count(); ++a) b[map.dof(a, 0)] += 0.1;
  EXPECT_THROW(solve_zero_mean(K, b, 2, SolverOptions{}), CompatibilityError);
}

TEST(Solver, ZeroRightHandSideIsTrivial) {
  const auto grid = disk_grid(8);
  const auto K = assemble_stiffness(grid, build_periodic_dofmap(grid));
  SolveStats st;
  const auto u = solve_zero_mean(K, std::vector<double>(K.rows(), 0.0), 2, SolverOptions{}, &st);
  EXPECT_TRUE(st.trivial);
  EXPECT_EQ(st.iterations, 0u);
  EXPECT_EQ(max_abs(u.values), 0.0);
}

TEST(Solver, IterationCapReportsCase) {
  const auto grid = disk_grid(16);
  const auto K = assemble_stiffness(grid, build_periodic_dofmap(grid));
  SolverOptions opt;
  opt.max_iterations = 2;
  opt.preconditioner = PreconditionerKind::none;
  try {
    solve_zero_mean_block(K, {random_zero_mean(K.rows(), 2, 4)}, 2, opt, nullptr, {"phi_12"});
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("phi_12"), std::string::npos);
  }
}

TEST(Solver, BlockColumnsIndependent) {
  const auto grid = sphere_grid(6);
  const auto map = build_periodic_dofmap(grid);
  const auto K = assemble_stiffness(grid, map);
  const auto b1 = random_zero_mean(K.rows(), 3, 21), b2 = random_zero_mean(K.rows(), 3, 22);
  SolverOptions opt;
  opt.preconditioner = PreconditionerKind::jacobi;
  const auto both = solve_zero_mean_block(K, {b1, b2}, 3, opt);
  const auto one = solve_zero_mean_block(K, {b2}, 3, opt);
  EXPECT_EQ(both[1].values, one[0].values);
}
