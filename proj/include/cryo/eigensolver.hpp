#pragma once

// Top-k eigenpairs of Hermitian transport matrices: LAPACK zheevr on the
// dense matrix for desk-scale N, Lanczos with full reorthogonalization on the
// sparse matrix above that.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "cryo/errors.hpp"
#include "cryo/transport_matrix.hpp"

namespace cryo {

enum class EigenSolverKind { Auto, Dense, Lanczos };

/// Auto selects the dense solver up to this size.
inline constexpr std::size_t kDenseSolverLimit = 4096;

/// Eigenvalues in descending order with matching unit eigenvectors as columns.
struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

namespace detail {

inline EigenPairs dense_top_eigenpairs(const TransportMatrix& m, std::size_t k) {
  const auto n = static_cast<lapack_int>(m.size());
  Eigen::MatrixXcd a = m.dense();
  std::vector<double> w(m.size());
  Eigen::MatrixXcd z(m.size(), k);
  std::vector<lapack_int> support(2 * k);
  lapack_int found = 0;
  const lapack_int info = LAPACKE_zheevr(
      LAPACK_COL_MAJOR, 'V', 'I', 'U', n, reinterpret_cast<lapack_complex_double*>(a.data()), n, 0.0, 0.0,
      n - static_cast<lapack_int>(k) + 1, n, 0.0, &found, w.data(), reinterpret_cast<lapack_complex_double*>(z.data()),
      n, support.data());
  if (info != 0 || found != static_cast<lapack_int>(k)) {
    throw ConvergenceFailure("zheevr failed (info = " + std::to_string(info) + ", found " + std::to_string(found) +
                             " of " + std::to_string(k) + " eigenpairs)");
  }
  EigenPairs out;
  out.values.resize(static_cast<Eigen::Index>(k));
  out.vectors.resize(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(k));
  for (std::size_t c = 0; c < k; ++c) {
    out.values[static_cast<Eigen::Index>(c)] = w[k - 1 - c];
    out.vectors.col(static_cast<Eigen::Index>(c)) = z.col(static_cast<Eigen::Index>(k - 1 - c));
  }
  return out;
}

/// Orthogonalizes v against the first `count` columns of basis (two passes).
inline void reorthogonalize(const Eigen::MatrixXcd& basis, Eigen::Index count, Eigen::VectorXcd& v) {
  for (int pass = 0; pass < 2; ++pass) {
    if (count == 0) return;
    const Eigen::VectorXcd coeff = basis.leftCols(count).adjoint() * v;
    v.noalias() -= basis.leftCols(count) * coeff;
  }
}

inline Eigen::VectorXcd random_unit_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = {normal(rng), normal(rng)};
  return v / v.norm();
}

/// Lanczos with full reorthogonalization. The Krylov dimension grows until
/// the top-k Ritz pairs have residual below tol * |largest Ritz value|.
/// Breakdown (an invariant subspace) restarts from a fresh random direction,
/// which keeps exactly repeated eigenvalues from being lost.
inline EigenPairs lanczos_top_eigenpairs(const TransportMatrix& m, std::size_t k, double tol = 1e-10) {
  const auto n = static_cast<Eigen::Index>(m.size());
  const auto want = static_cast<Eigen::Index>(k);
  std::mt19937_64 rng(0x5eedULL);

  Eigen::Index dim = std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * want + 40, 60));
  for (;;) {
    Eigen::MatrixXcd basis(n, dim);
    std::vector<double> alpha, beta;  // beta[j] couples basis j and j + 1
    basis.col(0) = random_unit_vector(n, rng);
    for (Eigen::Index j = 0; j < dim; ++j) {
      Eigen::VectorXcd w = m * Eigen::VectorXcd(basis.col(j));
      const double a = basis.col(j).dot(w).real();
      alpha.push_back(a);
      if (j + 1 == dim) break;
      reorthogonalize(basis, j + 1, w);
      double b = w.norm();
      if (b < 1e-12 * std::max(1.0, std::abs(a))) {
        w = random_unit_vector(n, rng);
        reorthogonalize(basis, j + 1, w);
        w /= w.norm();
        b = 0.0;
        basis.col(j + 1) = w;
      } else {
        basis.col(j + 1) = w / b;
      }
      beta.push_back(b);
    }

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) tri(j, j) = alpha[static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j + 1 < dim; ++j) {
      tri(j, j + 1) = tri(j + 1, j) = beta[static_cast<std::size_t>(j)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(tri);
    const Eigen::VectorXd& theta = small.eigenvalues();

    EigenPairs out;
    out.values.resize(want);
    out.vectors.resize(n, want);
    for (Eigen::Index c = 0; c < want; ++c) {
      const Eigen::Index src = dim - 1 - c;
      out.values[c] = theta[src];
      out.vectors.col(c) = basis * small.eigenvectors().col(src).cast<std::complex<double>>();
      out.vectors.col(c).normalize();
    }
    const Eigen::MatrixXcd residual = m * out.vectors - out.vectors * out.values.asDiagonal();
    const double scale = std::max(std::abs(theta[dim - 1]), std::abs(theta[0]));
    double worst = 0.0;
    for (Eigen::Index c = 0; c < want; ++c) worst = std::max(worst, residual.col(c).norm());
    if (worst <= tol * scale || scale == 0.0) return out;
    if (dim == n) {
      throw ConvergenceFailure("Lanczos: residual " + std::to_string(worst) + " above tolerance at full dimension");
    }
    dim = std::min<Eigen::Index>(n, 2 * dim);
  }
}

}  // namespace detail

/// Top-k eigenpairs of a Hermitian transport matrix, descending.
inline EigenPairs top_eigenpairs(const TransportMatrix& m, std::size_t k,
                                 EigenSolverKind kind = EigenSolverKind::Auto) {
  if (k < 1 || k > m.size()) {
    throw DomainError("top_eigenpairs: k = " + std::to_string(k) + " must lie in [1, " + std::to_string(m.size()) + "]");
  }
  if (kind == EigenSolverKind::Auto) {
    kind = m.size() <= kDenseSolverLimit ? EigenSolverKind::Dense : EigenSolverKind::Lanczos;
  }
  return kind == EigenSolverKind::Dense ? detail::dense_top_eigenpairs(m, k) : detail::lanczos_top_eigenpairs(m, k);
}

}  // namespace cryo
