#pragma once

// Spectrum of the averaged energy density
//   w = 1/2 C e e + G e k + 1/2 (C Ibar + D) k k
// over symmetric strains e_ab and strain gradients k_abc (symmetric in ab).

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "sgh/correctors.hpp"
#include "sgh/effective_tensors.hpp"

namespace sgh {

struct DefinitenessReport {
  std::vector<double> eigenvalues;  // ascending
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double tolerance = 1e-10;
  bool positive = false;
};

/// Matrix of the quadratic form in orthonormal coordinates, with the
/// gradient variables scaled by the cell length so both blocks carry GPa.
inline Eigen::MatrixXd energy_form_matrix(const EffectiveTensors& t) {
  const int d = t.dim;
  const int np = pair_count(d);
  const int nt = np * d;
  const auto pairs = strain_pairs(d);
  const double l = t.cell_length;
  // basis weight of pair (a, b) entries: 1 on the diagonal, 1/sqrt(2) off it
  auto pw = [](int a, int b) { return a == b ? 1.0 : 1.0 / std::sqrt(2.0); };
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(np + nt, np + nt);

  // e = sum_p x_p B_p with B_p the unit symmetric tensor of pair p; the form
  // is a sum over the full index pairs of each basis tensor
  auto for_pair = [&](int p, auto&& fn) {
    const int a = pairs[p][0], b = pairs[p][1];
    fn(a, b, pw(a, b));
    if (a != b) fn(b, a, pw(a, b));
  };
  for (int p = 0; p < np; ++p)
    for (int q = 0; q < np; ++q) {
      double s = 0.0;
      for_pair(p, [&](int a, int b, double wp) {
        for_pair(q, [&](int c, int e, double wq) { s += wp * wq * t.C(a, b, c, e); });
      });
      A(p, q) = s;
    }
  for (int p = 0; p < np; ++p)
    for (int q = 0; q < np; ++q)
      for (int f = 0; f < d; ++f) {
        double s = 0.0;
        for_pair(p, [&](int a, int b, double wp) {
          for_pair(q, [&](int c, int e, double wq) { s += wp * wq * t.G(a, b, c, e, f); });
        });
        A(p, np + q * d + f) = A(np + q * d + f, p) = s / l;
      }
  for (int p = 0; p < np; ++p)
    for (int c = 0; c < d; ++c)
      for (int q = 0; q < np; ++q)
        for (int f = 0; f < d; ++f) {
          double s = 0.0;
          for_pair(p, [&](int a, int b, double wp) {
            for_pair(q, [&](int e, int g, double wq) {
              s += wp * wq * (t.D(a, b, c, e, g, f) + t.C(a, b, e, g) * t.I_bar(c, f));
            });
          });
          A(np + p * d + c, np + q * d + f) = s / (l * l);
        }
  return 0.5 * (A + A.transpose());
}

inline DefinitenessReport check_positive_definiteness(const EffectiveTensors& t, double tol = 1e-10) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(energy_form_matrix(t), Eigen::EigenvaluesOnly);
  DefinitenessReport r;
  r.tolerance = tol;
  const auto& ev = es.eigenvalues();
  r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  r.min_eigenvalue = ev.minCoeff();
  r.max_eigenvalue = ev.maxCoeff();
  r.positive = r.max_eigenvalue > 0.0 && r.min_eigenvalue >= -tol * r.max_eigenvalue;
  return r;
}

}  // namespace sgh
