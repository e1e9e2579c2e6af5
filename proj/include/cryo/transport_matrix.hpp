#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "cryo/errors.hpp"
#include "cryo/parallel.hpp"
#include "cryo/so3.hpp"

namespace cryo {

/// One unordered pair {i, j} with i < j carrying the rotation placed at (i, j);
/// (j, i) holds its inverse.
struct TransportEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  UnitComplex rotation;
};

/// Sparse N x N Hermitian matrix whose stored entries are unit complex
/// numbers scaled by 1/N; the discretization of T_h on N sampled frames.
class TransportMatrix {
 public:
  using Sparse = Eigen::SparseMatrix<std::complex<double>, Eigen::RowMajor, std::ptrdiff_t>;

  TransportMatrix() = default;

  /// Assembles the matrix from unordered edges. The diagonal is always 1/N.
  /// Edges must satisfy i < j < n and appear at most once.
  static TransportMatrix from_edges(std::size_t n, double h, std::span<const TransportEdge> edges) {
    std::vector<std::vector<std::pair<std::size_t, UnitComplex>>> upper(n);
    for (const auto& e : edges) {
      if (!(e.i < e.j) || e.j >= n) {
        throw DomainError("TransportMatrix: edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                          ") is not an ordered pair inside the matrix");
      }
      upper[e.i].emplace_back(e.j, e.rotation);
    }
    for (auto& row : upper) {
      std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      for (std::size_t k = 1; k < row.size(); ++k) {
        if (row[k].first == row[k - 1].first) throw DomainError("TransportMatrix: duplicate edge");
      }
    }
    return assemble(n, h, upper);
  }

  std::size_t size() const { return n_; }
  /// Cap height h = 1 - cos(a) the matrix was built for (metadata for
  /// matrices assembled from empirical data).
  double cap() const { return h_; }
  const Sparse& sparse() const { return m_; }

  /// Stored entry, or 0 when (i, j) is not an edge.
  std::complex<double> entry(std::size_t i, std::size_t j) const {
    return m_.coeff(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j));
  }

  /// Number of stored unordered off-diagonal pairs.
  std::size_t edge_count() const { return (static_cast<std::size_t>(m_.nonZeros()) - n_) / 2; }

  /// Unordered edges (i < j) with the unscaled rotation at (i, j).
  std::vector<TransportEdge> edges() const {
    std::vector<TransportEdge> out;
    out.reserve(edge_count());
    const double scale = static_cast<double>(n_);
    for (std::ptrdiff_t i = 0; i < m_.outerSize(); ++i) {
      for (Sparse::InnerIterator it(m_, i); it; ++it) {
        if (it.col() > i) {
          const std::complex<double> v = it.value() * scale;
          out.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(it.col()),
                         UnitComplex(v.real(), v.imag())});
        }
      }
    }
    return out;
  }

  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(m_); }

  Eigen::VectorXcd operator*(const Eigen::VectorXcd& v) const { return m_ * v; }
  Eigen::MatrixXcd operator*(const Eigen::MatrixXcd& v) const { return m_ * v; }

  /// Builds from per-row sorted upper-triangle entries; (j, i) is written as
  /// the exact conjugate of (i, j).
  static TransportMatrix assemble(std::size_t n, double h,
                                  const std::vector<std::vector<std::pair<std::size_t, UnitComplex>>>& upper) {
    if (n < 1) throw DomainError("TransportMatrix: empty matrix");
    TransportMatrix out;
    out.n_ = n;
    out.h_ = h;
    Eigen::Matrix<std::ptrdiff_t, Eigen::Dynamic, 1> degree = Eigen::Matrix<std::ptrdiff_t, Eigen::Dynamic, 1>::Ones(n);
    for (std::size_t i = 0; i < n; ++i) {
      degree[i] += static_cast<std::ptrdiff_t>(upper[i].size());
      for (const auto& [j, g] : upper[i]) degree[j] += 1;
    }
    out.m_.resize(static_cast<std::ptrdiff_t>(n), static_cast<std::ptrdiff_t>(n));
    out.m_.reserve(degree);
    const double inv_n = 1.0 / static_cast<double>(n);
    // Rows receive columns in increasing order: lower entries from earlier
    // rows first, then the diagonal, then this row's upper entries.
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<std::ptrdiff_t>(i);
      out.m_.insert(r, r) = inv_n;
      for (const auto& [j, g] : upper[i]) {
        const std::complex<double> value(g.re() * inv_n, g.im() * inv_n);
        out.m_.insert(r, static_cast<std::ptrdiff_t>(j)) = value;
        out.m_.insert(static_cast<std::ptrdiff_t>(j), r) = std::conj(value);
      }
    }
    out.m_.makeCompressed();
    return out;
  }

 private:
  std::size_t n_ = 0;
  double h_ = 0.0;
  Sparse m_;
};

/// Entry (i, j) = T(x_i, x_j) / N whenever (pi(x_i), pi(x_j)) > 1 - h, by a
/// brute-force scan over all pairs. Each unordered pair is computed once.
inline TransportMatrix build_transport_matrix(std::span<const Frame> frames, double h, unsigned threads = 1) {
  const std::size_t n = frames.size();
  if (n < 2) throw DomainError("build_transport_matrix: need at least two frames");
  if (!(h > 0.0 && h <= 2.0)) throw DomainError("build_transport_matrix: h must lie in (0, 2]");
  const double cutoff = 1.0 - h;
  std::vector<Vec3> directions(n);
  for (std::size_t i = 0; i < n; ++i) directions[i] = frames[i].viewing_direction();

  std::vector<std::vector<std::pair<std::size_t, UnitComplex>>> upper(n);
  parallel_for(n, threads, [&](std::size_t i) {
    auto& row = upper[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (directions[i].dot(directions[j]) > cutoff) row.emplace_back(j, transport_rotation(frames[i], frames[j]));
    }
  });
  return TransportMatrix::assemble(n, h, upper);
}

}  // namespace cryo
