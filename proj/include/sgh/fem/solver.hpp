#pragma once

// Zero-mean solves of the singular periodic elasticity operator by
// nullspace-projected preconditioned conjugate gradients.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sgh/error.hpp"
#include "sgh/fem/preconditioner.hpp"
#include "sgh/fem/sparse.hpp"
#include "sgh/parallel.hpp"

namespace sgh::fem {

/// Periodic nodal vector field: values[node * components + c].
struct NodalField {
  int components = 0;
  std::vector<double> values;

  std::size_t nodes() const { return components ? values.size() / components : 0; }
  double operator()(std::size_t node, int c) const { return values[node * components + c]; }
  /// Arithmetic mean of component c (equals the volume average on a uniform
  /// periodic grid, where every node carries the same weight).
  double mean(int c) const {
    double s = 0.0;
    for (std::size_t a = 0; a < nodes(); ++a) s += values[a * components + c];
    return nodes() ? s / static_cast<double>(nodes()) : 0.0;
  }
};

enum class PreconditionerKind { automatic, jacobi, reference_medium, none };

struct SolverOptions {
  double tolerance = 1e-10;            // relative residual ||K u - b|| / ||b||
  double absolute_tolerance = 0.0;     // right-hand sides below this norm are treated as zero
  double compatibility_tolerance = 1e-10;
  std::size_t max_iterations = 0;      // 0: 50 sqrt(dofs)
  /// automatic: reference medium when the phase moduli are within
  /// reference_spread_limit of each other, Jacobi otherwise
  PreconditionerKind preconditioner = PreconditionerKind::automatic;
  double reference_spread_limit = 1e4;
  int threads = 1;
};

struct SolveStats {
  std::string label;
  std::size_t iterations = 0;
  double relative_residual = 0.0;  // true residual, recomputed at exit
  double compatibility = 0.0;      // ||P_null b|| / ||b||
  double mean_abs = 0.0;           // max_c |mean_c(u)|
  bool trivial = false;            // right-hand side numerically zero
};

namespace detail {

inline void remove_mean(std::span<double> v, int components) {
  const std::size_t nodes = v.size() / components;
  for (int c = 0; c < components; ++c) {
    double s = 0.0;
    for (std::size_t a = 0; a < nodes; ++a) s += v[a * components + c];
    const double m = s / static_cast<double>(nodes);
    for (std::size_t a = 0; a < nodes; ++a) v[a * components + c] -= m;
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Norm of the projection of v onto the translation modes.
inline double nullspace_component(std::span<const double> v, int components) {
  const std::size_t nodes = v.size() / components;
  double s2 = 0.0;
  for (int c = 0; c < components; ++c) {
    double s = 0.0;
    for (std::size_t a = 0; a < nodes; ++a) s += v[a * components + c];
    s2 += s * s / static_cast<double>(nodes);
  }
  return std::sqrt(s2);
}

}  // namespace detail

/// One block run of projected PCG from initial guesses `x0` (interleaved,
/// row i of column j at i*k + j). Returns per-column iteration counts.
/// Columns iterate independently; a column stops once its recursive
/// residual meets `target[j]`.
inline std::vector<std::size_t> block_pcg(const CsrMatrix& K, const std::vector<const std::vector<double>*>& rhs,
                                          std::vector<std::vector<double>*>& x, std::span<const double> target,
                                          Preconditioner& prec, int components, std::size_t max_it,
                                          int threads, const std::vector<std::string>& labels) {
  const std::size_t n = K.rows();
  const std::size_t nodes = n / components;
  std::vector<std::size_t> iterations(rhs.size(), 0);
  std::vector<std::size_t> ids(rhs.size());
  for (std::size_t j = 0; j < ids.size(); ++j) ids[j] = j;

  std::size_t k = ids.size();
  std::vector<double> X(n * k), R(n * k), Z(n * k), P(n * k), Q(n * k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t i = 0; i < n; ++i) X[i * k + a] = (*x[ids[a]])[i];
  K.multiply_block(X, Q, k, threads);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t i = 0; i < n; ++i) R[i * k + a] = (*rhs[ids[a]])[i] - Q[i * k + a];

  std::vector<double> sums, zsums, rn2, rz, rz_new, pq;
  // Projects R onto the mean-zero subspace, forms Z = P^-1 R (unprojected)
  // and accumulates |R|^2, R.Z and the component sums of Z.
  auto project_and_precondition = [&] {
    sums.assign(k * components, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = static_cast<int>(i % components);
      for (std::size_t a = 0; a < k; ++a) sums[a * components + c] += R[i * k + a];
    }
    for (double& v : sums) v /= static_cast<double>(nodes);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = static_cast<int>(i % components);
      for (std::size_t a = 0; a < k; ++a) R[i * k + a] -= sums[a * components + c];
    }
    prec.apply(R.data(), Z.data(), k);
    zsums.assign(k * components, 0.0);
    rn2.assign(k, 0.0);
    rz_new.assign(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = static_cast<int>(i % components);
      for (std::size_t a = 0; a < k; ++a) {
        const double r = R[i * k + a];
        const double z = Z[i * k + a];
        zsums[a * components + c] += z;
        rn2[a] += r * r;
        rz_new[a] += r * z;
      }
    }
    for (double& v : zsums) v /= static_cast<double>(nodes);
  };

  project_and_precondition();
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % components);
    for (std::size_t a = 0; a < k; ++a) P[i * k + a] = Z[i * k + a] - zsums[a * components + c];
  }
  rz = rz_new;
  std::vector<char> finished(k, 0);
  for (std::size_t a = 0; a < k; ++a) finished[a] = std::sqrt(rn2[a]) <= target[ids[a]];

  for (;;) {
    // Write back finished columns and compact the block, keeping the
    // search state of the others.
    if (std::find(finished.begin(), finished.end(), 1) != finished.end()) {
      std::vector<std::size_t> keep;
      for (std::size_t a = 0; a < k; ++a) {
        if (finished[a]) {
          auto& xv = *x[ids[a]];
          for (std::size_t i = 0; i < n; ++i) xv[i] = X[i * k + a];
        } else {
          keep.push_back(a);
        }
      }
      const std::size_t k2 = keep.size();
      if (k2 == 0) break;
      auto compact = [&](std::vector<double>& B) {
        std::vector<double> C(n * k2);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t b = 0; b < k2; ++b) C[i * k2 + b] = B[i * k + keep[b]];
        B.swap(C);
      };
      compact(X);
      compact(R);
      compact(P);
      Z.resize(n * k2);
      Q.resize(n * k2);
      std::vector<std::size_t> ids2;
      std::vector<double> rz2;
      for (std::size_t b : keep) {
        ids2.push_back(ids[b]);
        rz2.push_back(rz[b]);
      }
      ids.swap(ids2);
      rz.swap(rz2);
      k = k2;
      finished.assign(k, 0);
    }

    K.multiply_block(P, Q, k, threads);
    pq.assign(k, 0.0);
    for (std::size_t i = 0; i < n * k; i += k)
      for (std::size_t a = 0; a < k; ++a) pq[a] += P[i + a] * Q[i + a];
    for (std::size_t i = 0; i < n * k; i += k)
      for (std::size_t a = 0; a < k; ++a) {
        const double alpha = rz[a] / pq[a];
        X[i + a] += alpha * P[i + a];
        R[i + a] -= alpha * Q[i + a];
      }
    project_and_precondition();
    for (std::size_t a = 0; a < k; ++a) {
      const std::size_t j = ids[a];
      ++iterations[j];
      if (std::sqrt(rn2[a]) <= target[j]) {
        finished[a] = 1;
      } else if (iterations[j] >= max_it) {
        const double bn = std::sqrt(detail::dot(*rhs[j], *rhs[j]));
        throw SolverError("no convergence for " + labels[j] + " after " + std::to_string(iterations[j]) +
                          " iterations (relative residual " + std::to_string(std::sqrt(rn2[a]) / bn) + ")");
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int c = static_cast<int>(i % components);
      for (std::size_t a = 0; a < k; ++a) {
        const double beta = rz_new[a] / rz[a];
        P[i * k + a] = (Z[i * k + a] - zsums[a * components + c]) + beta * P[i * k + a];
      }
    }
    rz = rz_new;
  }
  return iterations;
}

/// Solves K u_j = b_j, mean(u_j) = 0 for every right-hand side, sharing each
/// operator application across the still-unconverged columns. Each column's
/// arithmetic is independent of the others and of the thread count.
inline std::vector<NodalField> solve_zero_mean_block(const CsrMatrix& K, const std::vector<std::vector<double>>& rhs,
                                                     int components, const SolverOptions& opt,
                                                     std::vector<SolveStats>* stats = nullptr,
                                                     std::vector<std::string> labels = {},
                                                     Preconditioner* preconditioner = nullptr) {
  const std::size_t n = K.rows();
  const std::size_t m = rhs.size();
  const std::size_t max_it =
      opt.max_iterations ? opt.max_iterations : static_cast<std::size_t>(50.0 * std::sqrt(static_cast<double>(n)));
  labels.resize(m);
  for (std::size_t j = 0; j < m; ++j)
    if (labels[j].empty()) labels[j] = "rhs " + std::to_string(j);

  // without a supplied preconditioner only the matrix-based ones apply
  std::unique_ptr<Preconditioner> own;
  if (!preconditioner) {
    if (opt.preconditioner == PreconditionerKind::none)
      own = std::make_unique<IdentityPreconditioner>(n);
    else
      own = std::make_unique<JacobiPreconditioner>(K);
    preconditioner = own.get();
  }

  std::vector<SolveStats> st(m);
  std::vector<std::vector<double>> xs(m, std::vector<double>(n, 0.0));
  std::vector<double> bnorm(m), target(m);
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < m; ++j) {
    if (rhs[j].size() != n) throw DimensionError("right-hand side size does not match operator");
    st[j].label = labels[j];
    bnorm[j] = std::sqrt(detail::dot(rhs[j], rhs[j]));
    if (bnorm[j] == 0.0 || bnorm[j] <= opt.absolute_tolerance) {
      st[j].trivial = true;
      continue;
    }
    const double null = detail::nullspace_component(rhs[j], components);
    st[j].compatibility = null / bnorm[j];
    if (st[j].compatibility > opt.compatibility_tolerance && null > opt.absolute_tolerance)
      throw CompatibilityError("incompatible right-hand side for " + labels[j] + ": nullspace component " +
                               std::to_string(st[j].compatibility) + " of its norm");
    target[j] = std::max(opt.tolerance * bnorm[j], opt.absolute_tolerance);
    active.push_back(j);
  }

  // Recursive residuals can drift from the true residual; re-run columns
  // whose true residual misses the target, warm-started.
  constexpr int max_passes = 5;
  for (int pass = 0; pass < max_passes && !active.empty(); ++pass) {
    std::vector<const std::vector<double>*> b;
    std::vector<std::vector<double>*> x;
    std::vector<std::string> lab;
    std::vector<double> tgt;
    for (std::size_t j : active) {
      b.push_back(&rhs[j]);
      x.push_back(&xs[j]);
      lab.push_back(labels[j]);
      tgt.push_back(target[j]);
    }
    std::size_t remaining_it = max_it;
    for (std::size_t j : active) remaining_it = std::min(remaining_it, max_it - std::min(max_it, st[j].iterations));
    const auto its = block_pcg(K, b, x, tgt, *preconditioner, components, std::max<std::size_t>(remaining_it, 1),
                               opt.threads, lab);
    for (std::size_t a = 0; a < active.size(); ++a) st[active[a]].iterations += its[a];

    const std::size_t k = active.size();
    std::vector<double> X(n * k), Q(n * k);
    for (std::size_t a = 0; a < k; ++a) {
      detail::remove_mean(xs[active[a]], components);
      for (std::size_t i = 0; i < n; ++i) X[i * k + a] = xs[active[a]][i];
    }
    K.multiply_block(X, Q, k, opt.threads);
    std::vector<std::size_t> again;
    for (std::size_t a = 0; a < k; ++a) {
      const std::size_t j = active[a];
      std::vector<double> r(n);
      for (std::size_t i = 0; i < n; ++i) r[i] = rhs[j][i] - Q[i * k + a];
      detail::remove_mean(r, components);
      const double rn = std::sqrt(detail::dot(r, r));
      st[j].relative_residual = rn / bnorm[j];
      if (rn > target[j]) again.push_back(j);
    }
    if (pass + 1 == max_passes && !again.empty())
      throw SolverError("true residual of " + labels[again.front()] + " stagnated at " +
                        std::to_string(st[again.front()].relative_residual));
    active.swap(again);
  }

  std::vector<NodalField> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    out[j].components = components;
    out[j].values = std::move(xs[j]);
    double mean_abs = 0.0;
    for (int c = 0; c < components; ++c) mean_abs = std::max(mean_abs, std::abs(out[j].mean(c)));
    st[j].mean_abs = mean_abs;
  }
  if (stats) *stats = std::move(st);
  return out;
}

inline NodalField solve_zero_mean(const CsrMatrix& K, std::span<const double> rhs, int components,
                                  const SolverOptions& opt, SolveStats* stats = nullptr) {
  std::vector<std::vector<double>> b{std::vector<double>(rhs.begin(), rhs.end())};
  std::vector<SolveStats> st;
  auto out = solve_zero_mean_block(K, b, components, opt, &st);
  if (stats) *stats = st.front();
  return std::move(out.front());
}

}  // namespace sgh::fem
