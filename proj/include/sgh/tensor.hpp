#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sgh/error.hpp"

namespace sgh {

constexpr std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Dense tensor of rank `Rank` over a 2- or 3-dimensional index space.
/// Storage is row-major: the last index varies fastest.
template <int Rank>
class Tensor {
 public:
  static constexpr int rank = Rank;

  Tensor() = default;
  explicit Tensor(int dim) : dim_(dim), data_(ipow(static_cast<std::size_t>(dim), Rank), 0.0) {
    if (dim != 2 && dim != 3) throw DimensionError("tensor dimension must be 2 or 3");
  }

  int dim() const { return dim_; }
  std::size_t size() const { return data_.size(); }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  template <class... I>
    requires(sizeof...(I) == Rank)
  double& operator()(I... idx) {
    return data_[flat(static_cast<int>(idx)...)];
  }
  template <class... I>
    requires(sizeof...(I) == Rank)
  double operator()(I... idx) const {
    return data_[flat(static_cast<int>(idx)...)];
  }

  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }

  /// Multi-index of flat position k.
  std::array<int, Rank> unflatten(std::size_t k) const {
    std::array<int, Rank> idx{};
    for (int r = Rank - 1; r >= 0; --r) {
      idx[r] = static_cast<int>(k % dim_);
      k /= dim_;
    }
    return idx;
  }
  std::size_t flatten(const std::array<int, Rank>& idx) const {
    std::size_t k = 0;
    for (int r = 0; r < Rank; ++r) k = k * dim_ + idx[r];
    return k;
  }

  double norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  Tensor& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  Tensor& operator+=(const Tensor& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, double s) { return a *= s; }
  friend Tensor operator*(double s, Tensor a) { return a *= s; }

  /// Bitwise equality of dimension and every component.
  bool operator==(const Tensor&) const = default;

 private:
  template <class... I>
  std::size_t flat(I... idx) const {
    std::size_t k = 0;
    ((assert(idx >= 0 && idx < dim_), k = k * dim_ + static_cast<std::size_t>(idx)), ...);
    return k;
  }
  void check_same(const Tensor& o) const {
    if (o.dim_ != dim_) throw DimensionError("tensor dimension mismatch");
  }

  int dim_ = 0;
  std::vector<double> data_;
};

using Tensor2 = Tensor<2>;
using Tensor3 = Tensor<3>;
using Tensor4 = Tensor<4>;
using Tensor5 = Tensor<5>;
using Tensor6 = Tensor<6>;

/// Rank-4 constitutive tensor C_ijkl.
using ElasticTensor = Tensor4;

inline double kronecker(int i, int j) { return i == j ? 1.0 : 0.0; }

}  // namespace sgh
