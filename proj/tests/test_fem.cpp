#include <gtest/gtest.h>

#include <random>
#include <set>

#include "sgh/fem/dofmap.hpp"
#include "sgh/fem/element.hpp"
#include "sgh/fem/sparse.hpp"

using namespace sgh;
using namespace sgh::fem;

namespace {

const Material epoxy{17.3, 0.35, 1780};
const Material carbon{35.9, 0.30, 1650};

PhaseGrid disk_grid(int n, double r = 0.3) {
  GeometrySpec g;
  g.dimension = 2;
  g.shape = Disk{r};
  g.offset = {0.1, -0.05, 0.0};
  return voxelize(g, n, {epoxy, carbon});
}

PhaseGrid sphere_grid(int n) {
  GeometrySpec g;
  g.dimension = 3;
  g.shape = Sphere{0.35};
  return voxelize(g, n, {Material{70, 0.3, 2900}, Material{450, 0.17, 3100}});
}

}  // namespace

TEST(DofMap, BruteForceNodeCount) {
  for (int dim : {2, 3})
    for (int n : {4, 5, 7}) {
      const PeriodicDofMap map(dim, n, 1.0);
      std::set<std::size_t> ids;
      const int nz = dim == 3 ? n : 0;
      for (int k = 0; k <= nz; ++k)
        for (int j = 0; j <= n; ++j)
          for (int i = 0; i <= n; ++i) ids.insert(map.node(i, j, k));
      EXPECT_EQ(ids.size(), map.node_count());
      EXPECT_EQ(map.node_count(), ipow(n, dim));
      EXPECT_EQ(*ids.rbegin() + 1, map.node_count());
      // opposite faces share nodes
      EXPECT_EQ(map.node(0, 2, 1), map.node(n, 2, 1));
      EXPECT_EQ(map.node(1, n, 0), map.node(1, 0, 0));
    }
}

TEST(DofMap, ElementNodesMatchGridPositions) {
  const auto grid = sphere_grid(5);
  const auto map = build_periodic_dofmap(grid);
  for (std::size_t e = 0; e < grid.element_count(); ++e) {
    const auto c = grid.element_coords(e);
    for (int a = 0; a < 8; ++a)
      EXPECT_EQ(map.element_node(e, a), map.node(c[0] + (a & 1), c[1] + ((a >> 1) & 1), c[2] + ((a >> 2) & 1)));
  }
}

TEST(Element, Q4TextbookEntries) {
  // unit-independent in 2D: int (dN_1/dx)^2 = 1/3, int dN_1/dx dN_1/dy = 1/4
  const auto C = isotropic_stiffness(epoxy, 2);
  const double lambda = C(0, 0, 1, 1), mu = C(0, 1, 0, 1);
  for (double h : {1.0, 0.125}) {
    const VoxelElement el(2, h);
    const auto K = el.stiffness(C);
    EXPECT_NEAR(K(0, 0), (lambda + 2 * mu) / 3 + mu / 3, 1e-12);
    EXPECT_NEAR(K(0, 1), (lambda + mu) / 4, 1e-12);
    // node 0 x against node 1 x (neighbor along x)
    EXPECT_NEAR(K(0, 2), -(lambda + 2 * mu) / 3 + mu / 6, 1e-12);
  }
}

TEST(Element, ReproducesLinearFieldsAndRigidModes) {
  for (int dim : {2, 3}) {
    const auto C = isotropic_stiffness(Material{70, 0.3, 1}, dim);
    const double h = 0.37;
    const VoxelElement el(dim, h);
    const auto K = el.stiffness(C);
    ASSERT_EQ(K.rows(), el.dofs());
    EXPECT_LT((K - K.transpose()).norm(), 1e-12 * K.norm());
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    double H[3][3];
    for (auto& r : H)
      for (double& v : r) v = u(rng);
    Eigen::VectorXd x(el.dofs()), rigid(el.dofs());
    for (int a = 0; a < el.nodes(); ++a)
      for (int i = 0; i < dim; ++i) {
        double s = 0.0, w = 0.0;
        for (int j = 0; j < dim; ++j) {
          s += H[i][j] * h * el.node_offset(a, j);
          // skew part only: rigid rotation
          w += 0.5 * (H[i][j] - H[j][i]) * h * el.node_offset(a, j);
        }
        x(a * dim + i) = s;
        rigid(a * dim + i) = w + (i == 0 ? 0.3 : -0.2);
      }
    double exact = 0.0;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k)
          for (int l = 0; l < dim; ++l) exact += 0.5 * C(i, j, k, l) * H[i][j] * H[k][l];
    exact *= std::pow(h, dim);
    EXPECT_NEAR(0.5 * x.dot(K * x), exact, 1e-12 * std::abs(exact));
    EXPECT_LT((K * rigid).norm(), 1e-12 * K.norm());
  }
}

TEST(Element, ShapeFunctionsPartitionUnity) {
  const VoxelElement el(3, 0.5);
  for (int q = 0; q < el.gauss_points(); ++q) {
    double s = 0.0, g[3] = {0, 0, 0};
    for (int a = 0; a < el.nodes(); ++a) {
      s += el.N(q, a);
      for (int j = 0; j < 3; ++j) g[j] += el.dN(q, a, j);
    }
    EXPECT_NEAR(s, 1.0, 1e-15);
    for (double v : g) EXPECT_NEAR(v, 0.0, 1e-13);
  }
  EXPECT_NEAR(el.weight() * el.gauss_points(), 0.125, 1e-15);
}

TEST(Assembly, SymmetricAndAnnihilatesTranslations) {
  for (const auto& grid : {disk_grid(12), sphere_grid(6)}) {
    const auto map = build_periodic_dofmap(grid);
    const auto K = assemble_stiffness(grid, map);
    EXPECT_EQ(K.rows(), map.dof_count());
    EXPECT_LE(K.asymmetry(), 1e-14);
    EXPECT_LE(translation_residual(K, map), 1e-12);
    for (double d : K.diagonal()) EXPECT_GT(d, 0.0);
  }
}

TEST(Assembly, MatchesDenseElementSum) {
  const auto grid = disk_grid(4);
  const auto map = build_periodic_dofmap(grid);
  const auto K = assemble_stiffness(grid, map);
  const int n = static_cast<int>(map.dof_count());
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  const VoxelElement el(2, grid.spacing());
  for (std::size_t e = 0; e < grid.element_count(); ++e) {
    const auto Ke = el.stiffness(grid.stiffness(grid.phase(e)));
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            dense(map.dof(map.element_node(e, a), i), map.dof(map.element_node(e, b), j)) += Ke(a * 2 + i, b * 2 + j);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) EXPECT_NEAR(K.at(i, j), dense(i, j), 1e-12);
}

TEST(Assembly, BlockMultiplyMatchesColumns) {
  const auto grid = sphere_grid(5);
  const auto map = build_periodic_dofmap(grid);
  const auto K = assemble_stiffness(grid, map);
  const std::size_t n = K.rows(), k = 3;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> X(n * k), Y(n * k), x(n), y(n);
  for (double& v : X) v = g(rng);
  K.multiply_block(X, Y, k, 2);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) x[i] = X[i * k + j];
    K.multiply(x, y);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(Y[i * k + j], y[i], 1e-12);
  }
}
