// 2D carbon fiber / epoxy cell: C and D in both gradient orderings, then the
// same tensors for a cell half the size.
//
//   epoxy_tables [resolution]

#include <cstdio>
#include <cstdlib>

#include "sgh/pipeline.hpp"
#include "sgh/voigt.hpp"

namespace {

void print(const char* title, const Eigen::MatrixXd& m, double scale) {
  std::printf("%s\n", title);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) std::printf("%10.1f", scale * m(i, j));
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 128;
  sgh::GeometrySpec spec;
  spec.dimension = 2;
  spec.shape = sgh::Disk{0.45};
  const sgh::Material epoxy{17.3, 0.35, 1780}, carbon{35.9, 0.30, 1650};
  const auto grid = sgh::voxelize(spec, n, {epoxy, carbon});
  const auto res = sgh::homogenize(grid);
  std::printf("n = %d, matrix fraction %.3f, %zu dofs\n", n, sgh::volume_fraction(grid, sgh::Phase::matrix),
              res.diagnostics.dofs);

  const auto block = sgh::pack_voigt(res.tensors, sgh::VoigtOrdering::block_diagonal);
  const auto lex = sgh::pack_voigt(res.tensors, sgh::VoigtOrdering::lexicographic);
  print("C (GPa)", block.C, 1.0);
  print("D (N), 111 221 122 222 112 121", block.D, 1000.0);
  print("D (N), 111 112 221 222 121 122", lex.D, 1000.0);
  const auto half = sgh::pack_voigt(sgh::scale_homothetic(res.tensors, 0.5));
  print("D (N), homothetic scale 1/2", half.D, 1000.0);
}
