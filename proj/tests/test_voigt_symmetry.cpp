#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "sgh/definiteness.hpp"
#include "sgh/pipeline.hpp"
#include "sgh/symmetry.hpp"
#include "sgh/voigt.hpp"

using namespace sgh;

namespace {

const Material epoxy{17.3, 0.35, 1780};
const Material carbon{35.9, 0.30, 1650};
const Material aluminum{70, 0.3, 2900};
const Material sic{450, 0.17, 3100};

const EffectiveTensors& tensors_of(const std::string& which) {
  static std::map<std::string, EffectiveTensors> cache;
  auto it = cache.find(which);
  if (it != cache.end()) return it->second;
  GeometrySpec g;
  std::array<Material, 2> m{epoxy, carbon};
  int n = 12;
  if (which == "disk") {
    g.dimension = 2;
    g.shape = Disk{0.45};
    n = 32;
  } else if (which == "offset_disk") {
    g.dimension = 2;
    g.shape = Disk{0.3};
    g.offset = {0.1, 0.05, 0.0};
    n = 32;
  } else if (which == "cylinder_z" || which == "cylinder_x") {
    g.dimension = 3;
    g.shape = Cylinder{0.45, which == "cylinder_z" ? 2 : 0};
  } else if (which == "sphere") {
    g.dimension = 3;
    g.shape = Sphere{0.45};
    m = {aluminum, sic};
  } else {
    g.dimension = 3;
    g.shape = Cube{0.8};
    m = {Material{70, 0.3, 2700}, Material{1e-10, 0.0, 0.0}};
    n = 10;
  }
  return cache[which] = homogenize(voxelize(g, n, m)).tensors;
}

}  // namespace

TEST(Voigt, TripleOrderings) {
  const auto t2 = gradient_triples(2);
  EXPECT_EQ(triple_label(t2[0]), "111");
  EXPECT_EQ(triple_label(t2[1]), "221");
  std::vector<std::string> labels;
  for (const auto& t : t2) labels.push_back(triple_label(t));
  EXPECT_EQ(labels, (std::vector<std::string>{"111", "221", "122", "222", "112", "121"}));
  labels.clear();
  for (const auto& t : gradient_triples(2, VoigtOrdering::lexicographic)) labels.push_back(triple_label(t));
  EXPECT_EQ(labels, (std::vector<std::string>{"111", "112", "221", "222", "121", "122"}));
  const auto t3 = gradient_triples(3);
  ASSERT_EQ(t3.size(), 18u);
  // one-based positions 16 and 17
  EXPECT_EQ(triple_label(t3[15]), "231");
  EXPECT_EQ(triple_label(t3[16]), "132");
  EXPECT_EQ(triple_label(t3[17]), "123");
  EXPECT_THROW(gradient_triples(3, VoigtOrdering::lexicographic), DimensionError);
}

TEST(Voigt, EveryIndependentTripleOnce) {
  for (int dim : {2, 3}) {
    std::set<std::array<int, 3>> seen;
    for (auto t : gradient_triples(dim)) {
      if (t[0] > t[1]) std::swap(t[0], t[1]);
      EXPECT_TRUE(seen.insert(t).second);
    }
    EXPECT_EQ(static_cast<int>(seen.size()), dim * dim * (dim + 1) / 2);
  }
}

TEST(Voigt, RoundTripIsBitExact) {
  for (const char* which : {"offset_disk", "sphere"}) {
    const auto& t = tensors_of(which);
    const auto back = unpack_voigt(pack_voigt(t));
    EXPECT_TRUE(back == t) << which;
  }
  const auto& t = tensors_of("offset_disk");
  EXPECT_TRUE(unpack_voigt(pack_voigt(t, VoigtOrdering::lexicographic)) == t);
}

TEST(Voigt, OrderingsArePermutations) {
  const auto& t = tensors_of("offset_disk");
  const auto a = pack_voigt(t), b = pack_voigt(t, VoigtOrdering::lexicographic);
  // block 111 221 122 222 112 121 against 111 112 221 222 121 122
  const int perm[6] = {0, 2, 5, 3, 1, 4};
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) EXPECT_EQ(a.D(i, j), b.D(perm[i], perm[j]));
}

TEST(Voigt, ShapeErrors) {
  auto v = pack_voigt(tensors_of("disk"));
  v.D.conservativeResize(5, 5);
  EXPECT_THROW(unpack_voigt(v), DimensionError);
}

TEST(Symmetry, SquareCellBlocks) {
  const auto& t = tensors_of("disk");
  const auto rep = classify_symmetry(t);
  EXPECT_EQ(rep.symmetry_class, "cubic");
  EXPECT_LE(rep.c_deviation, 1e-8);
  EXPECT_LE(rep.d_deviation, 1e-8);
  EXPECT_EQ(rep.classical.size(), 3u);
  EXPECT_EQ(rep.gradient.size(), 6u);
  EXPECT_LE(rep.g_norm, 1e-8);
}

TEST(Symmetry, CylinderIsTransverselyIsotropic) {
  for (const char* which : {"cylinder_z", "cylinder_x"}) {
    const auto rep = classify_symmetry(tensors_of(which));
    EXPECT_EQ(rep.symmetry_class, "transverse_isotropic") << which;
    EXPECT_EQ(rep.axis, std::string(which) == "cylinder_z" ? 2 : 0);
    EXPECT_LE(rep.c_deviation, 1e-8);
    EXPECT_LE(rep.d_deviation, 1e-8);
    EXPECT_EQ(rep.classical.size(), 5u);
    EXPECT_EQ(rep.gradient.size(), 28u);
  }
  // first two 5x5 blocks equal
  const auto v = pack_voigt(tensors_of("cylinder_z"));
  const double s = v.D.cwiseAbs().maxCoeff();
  EXPECT_LE((v.D.block(0, 0, 5, 5) - v.D.block(5, 5, 5, 5)).cwiseAbs().maxCoeff(), 1e-8 * s);
  EXPECT_GT((v.D.block(0, 0, 5, 5) - v.D.block(10, 10, 5, 5)).cwiseAbs().maxCoeff(), 1e-3 * s);
}

TEST(Symmetry, SphereAndCubeAreCubic) {
  for (const char* which : {"sphere", "cube"}) {
    const auto& t = tensors_of(which);
    const auto rep = classify_symmetry(t);
    EXPECT_EQ(rep.symmetry_class, "cubic") << which;
    EXPECT_LE(rep.c_deviation, 1e-8);
    EXPECT_LE(rep.d_deviation, 1e-8);
    EXPECT_EQ(rep.gradient.size(), 11u);
    const auto v = pack_voigt(t);
    const double s = v.D.cwiseAbs().maxCoeff();
    for (int k : {5, 10}) EXPECT_LE((v.D.block(0, 0, 5, 5) - v.D.block(k, k, 5, 5)).cwiseAbs().maxCoeff(), 1e-8 * s);
    EXPECT_LE(v.D.block(0, 5, 5, 13).cwiseAbs().maxCoeff(), 1e-8 * s);
  }
}

TEST(Symmetry, OffCenterInclusionIsOther) {
  const auto rep = classify_symmetry(tensors_of("offset_disk"));
  EXPECT_EQ(rep.symmetry_class, "other");
  EXPECT_GT(rep.g_norm, 1e-4);
}

TEST(Symmetry, FitPatternReportsDeviation) {
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 0.1, 0.1, 1.0;
  const auto fit = fit_pattern(m, {{1, 0}, {0, 1}}, "x");
  EXPECT_DOUBLE_EQ(fit.constants[0].value, 1.5);
  EXPECT_DOUBLE_EQ(fit.max_deviation, 0.25);
}

TEST(Definiteness, ExampleTensorsDespiteNegativeEntries) {
  for (const char* which : {"disk", "offset_disk", "sphere", "cylinder_z", "cube"}) {
    const auto& t = tensors_of(which);
    EXPECT_LT(*std::min_element(t.D.data().begin(), t.D.data().end()), 0.0) << which;
    const auto r = check_positive_definiteness(t);
    EXPECT_TRUE(r.positive) << which;
    EXPECT_GE(r.min_eigenvalue, -1e-10 * r.max_eigenvalue);
  }
}

TEST(Definiteness, FormMatrixIsSymmetric) {
  const auto& t = tensors_of("offset_disk");
  const auto A = energy_form_matrix(t);
  EXPECT_LE((A - A.transpose()).cwiseAbs().maxCoeff(), 1e-12 * A.cwiseAbs().maxCoeff());
  EXPECT_EQ(A.rows(), 3 + 6);
}

TEST(Definiteness, Counterexamples) {
  auto t = tensors_of("disk");
  t.D *= -1.0;
  for (std::size_t k = 0; k < t.D.size(); ++k) {
    const auto x = t.D.unflatten(k);
    t.D(x[0], x[1], x[2], x[3], x[4], x[5]) -= 2.0 * t.C(x[0], x[1], x[3], x[4]) * t.I_bar(x[2], x[5]);
  }
  EXPECT_FALSE(check_positive_definiteness(t).positive);
  auto u = tensors_of("disk");
  u.C *= -1.0;
  EXPECT_FALSE(check_positive_definiteness(u).positive);
}
