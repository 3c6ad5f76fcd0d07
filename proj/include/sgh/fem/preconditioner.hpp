#pragma once

// Preconditioners for the periodic voxel operator. All act on blocks of k
// interleaved vectors (row i of vector j at i*k + j).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <fftw3.h>

#include "sgh/error.hpp"
#include "sgh/fem/dofmap.hpp"
#include "sgh/fem/element.hpp"
#include "sgh/fem/sparse.hpp"

namespace sgh::fem {

class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  /// Z = P^-1 R for k interleaved vectors of length rows().
  virtual void apply(const double* R, double* Z, std::size_t k) = 0;
  virtual const char* name() const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  explicit IdentityPreconditioner(std::size_t rows) : rows_(rows) {}
  void apply(const double* R, double* Z, std::size_t k) override {
    for (std::size_t i = 0; i < rows_ * k; ++i) Z[i] = R[i];
  }
  const char* name() const override { return "none"; }

 private:
  std::size_t rows_;
};

class JacobiPreconditioner final : public Preconditioner {
 public:
  explicit JacobiPreconditioner(const CsrMatrix& K) : inv_(K.rows()) {
    const auto d = K.diagonal();
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!(d[i] > 0.0)) throw SolverError("operator diagonal is not positive at dof " + std::to_string(i));
      inv_[i] = 1.0 / d[i];
    }
  }
  void apply(const double* R, double* Z, std::size_t k) override {
    for (std::size_t i = 0; i < inv_.size(); ++i) {
      const double w = inv_[i];
      for (std::size_t j = 0; j < k; ++j) Z[i * k + j] = w * R[i * k + j];
    }
  }
  const char* name() const override { return "jacobi"; }

 private:
  std::vector<double> inv_;
};

/// Exact inverse (on mean-zero fields) of the operator of a homogeneous
/// reference medium C0 on the same periodic grid, applied by FFT. The
/// operator is a convolution with d x d blocks A(o) over node offsets
/// o in {-1, 0, 1}^d, so it is diagonalized per frequency.
class ReferenceMediumPreconditioner final : public Preconditioner {
 public:
  ReferenceMediumPreconditioner(int dim, int resolution, double spacing, const ElasticTensor& C0)
      : d_(dim), n_(resolution) {
    nodes_ = ipow(static_cast<std::size_t>(n_), d_);
    half_ = static_cast<std::size_t>(n_ / 2 + 1);
    freqs_ = nodes_ / n_ * half_;
    // stencil A(o) from the element matrix: node 0 is local node a of the
    // element whose lower corner is -a
    const VoxelElement el(dim, spacing);
    const Eigen::MatrixXd Ke = el.stiffness(C0);
    const int no = d_ == 3 ? 27 : 9;
    std::vector<Eigen::MatrixXd> A(no, Eigen::MatrixXd::Zero(d_, d_));
    auto offset_index = [this](const std::array<int, 3>& o) {
      int k = 0;
      for (int i = d_ - 1; i >= 0; --i) k = k * 3 + (o[i] + 1);
      return k;
    };
    for (int a = 0; a < el.nodes(); ++a)
      for (int b = 0; b < el.nodes(); ++b) {
        std::array<int, 3> o{0, 0, 0};
        for (int i = 0; i < d_; ++i) o[i] = el.node_offset(b, i) - el.node_offset(a, i);
        A[offset_index(o)] += Ke.block(a * d_, b * d_, d_, d_);
      }

    inv_.assign(freqs_ * d_ * d_, std::complex<double>(0.0, 0.0));
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t f = 0; f < freqs_; ++f) {
      // frequency multi-index, x (halved) fastest
      std::array<int, 3> m{0, 0, 0};
      m[0] = static_cast<int>(f % half_);
      std::size_t rest = f / half_;
      for (int i = 1; i < d_; ++i) {
        m[i] = static_cast<int>(rest % n_);
        rest /= n_;
      }
      if (m[0] == 0 && m[1] == 0 && m[2] == 0) continue;  // translations
      Eigen::MatrixXcd Kh = Eigen::MatrixXcd::Zero(d_, d_);
      for (int k = 0; k < no; ++k) {
        std::array<int, 3> o{0, 0, 0};
        int r = k;
        for (int i = 0; i < d_; ++i) {
          o[i] = r % 3 - 1;
          r /= 3;
        }
        double phase = 0.0;
        for (int i = 0; i < d_; ++i) phase += two_pi * m[i] * o[i] / n_;
        Kh += A[k].cast<std::complex<double>>() * std::polar(1.0, phase);
      }
      const Eigen::MatrixXcd Ki = Kh.inverse();
      for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j) inv_[(f * d_ + i) * d_ + j] = Ki(i, j);
    }
  }

  ~ReferenceMediumPreconditioner() override {
    for (auto& [k, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }
  ReferenceMediumPreconditioner(const ReferenceMediumPreconditioner&) = delete;
  ReferenceMediumPreconditioner& operator=(const ReferenceMediumPreconditioner&) = delete;

  void apply(const double* R, double* Z, std::size_t k) override {
    const std::size_t howmany = static_cast<std::size_t>(d_) * k;
    spectrum_.resize(freqs_ * howmany);
    real_.resize(nodes_ * howmany);
    const Plans& p = plans(k);
    std::copy(R, R + nodes_ * howmany, real_.begin());
    fftw_execute_dft_r2c(p.forward, real_.data(), reinterpret_cast<fftw_complex*>(spectrum_.data()));
    const double scale = 1.0 / static_cast<double>(nodes_);
    std::complex<double> tmp[3];
    for (std::size_t f = 0; f < freqs_; ++f) {
      const std::complex<double>* Ki = &inv_[f * d_ * d_];
      std::complex<double>* s = &spectrum_[f * howmany];
      for (std::size_t j = 0; j < k; ++j) {
        for (int i = 0; i < d_; ++i) {
          std::complex<double> v(0.0, 0.0);
          for (int c = 0; c < d_; ++c) v += Ki[i * d_ + c] * s[c * k + j];
          tmp[i] = v * scale;
        }
        for (int i = 0; i < d_; ++i) s[i * k + j] = tmp[i];
      }
    }
    fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(spectrum_.data()), Z);
  }
  const char* name() const override { return "reference_medium"; }

 private:
  struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
  };

  const Plans& plans(std::size_t k) {
    auto it = plans_.find(k);
    if (it != plans_.end()) return it->second;
    const int howmany = static_cast<int>(d_ * k);
    int dims[3];
    for (int i = 0; i < d_; ++i) dims[i] = n_;
    real_.resize(nodes_ * howmany);
    spectrum_.resize(freqs_ * howmany);
    std::vector<double> out(nodes_ * howmany);
    auto* cplx = reinterpret_cast<fftw_complex*>(spectrum_.data());
    Plans p;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.forward = fftw_plan_many_dft_r2c(d_, dims, howmany, real_.data(), nullptr, howmany, 1, cplx, nullptr, howmany, 1,
                                       flags);
    p.backward = fftw_plan_many_dft_c2r(d_, dims, howmany, cplx, nullptr, howmany, 1, out.data(), nullptr, howmany, 1,
                                        flags | FFTW_DESTROY_INPUT);
    if (!p.forward || !p.backward) throw SolverError("FFT planning failed");
    return plans_.emplace(k, p).first->second;
  }

  int d_;
  int n_;
  std::size_t nodes_ = 0;
  std::size_t half_ = 0;
  std::size_t freqs_ = 0;
  std::vector<std::complex<double>> inv_;
  std::vector<double> real_;
  std::vector<std::complex<double>> spectrum_;
  std::map<std::size_t, Plans> plans_;
};

/// Isotropic reference medium minimizing the spread of the bulk and shear
/// modulus ratios over the phases (CG is invariant to its overall scale).
inline ElasticTensor reference_stiffness(const std::vector<std::pair<double, double>>& bulk_shear, int dim,
                                         double* spread = nullptr) {
  // ratios to (bulk0 = t, shear0 = 1) are {k_p / t, m_p}; scan t
  double kmin = std::numeric_limits<double>::infinity(), kmax = 0.0;
  double mmin = std::numeric_limits<double>::infinity(), mmax = 0.0;
  for (const auto& [k, m] : bulk_shear) {
    kmin = std::min(kmin, k);
    kmax = std::max(kmax, k);
    mmin = std::min(mmin, m);
    mmax = std::max(mmax, m);
  }
  if (bulk_shear.empty() || !(kmin > 0.0 && mmin > 0.0)) throw SolverError("reference medium needs positive moduli");
  const double t_lo = std::log(kmin / mmax), t_hi = std::log(kmax / mmin);
  double best_t = 1.0, best = std::numeric_limits<double>::infinity();
  constexpr int steps = 400;
  for (int s = 0; s <= steps; ++s) {
    const double t = std::exp(t_lo + (t_hi - t_lo) * s / steps);
    const double a = std::min(kmin / t, mmin), b = std::max(kmax / t, mmax);
    if (b / a < best) {
      best = b / a;
      best_t = t;
    }
  }
  if (spread) *spread = best;
  // C0 = K0 (bulk part) + 2 mu0 (deviatoric part) with mu0 = 1, K0 = best_t
  const double mu = 1.0;
  const double lambda = best_t - 2.0 * mu / dim;
  ElasticTensor C(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l)
          C(i, j, k, l) = lambda * kronecker(i, j) * kronecker(k, l) +
                          mu * (kronecker(i, k) * kronecker(j, l) + kronecker(i, l) * kronecker(j, k));
  return C;
}

}  // namespace sgh::fem
