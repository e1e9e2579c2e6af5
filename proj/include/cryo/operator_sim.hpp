#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cryo/eigensolver.hpp"
#include "cryo/errors.hpp"
#include "cryo/so3.hpp"
#include "cryo/transport_matrix.hpp"

namespace cryo {

/// Clusters split wherever consecutive eigenvalues differ by more than this
/// fraction of the largest consecutive difference.
inline constexpr double kClusterGapFraction = 0.4;

struct EigenCluster {
  double mean = 0.0;
  std::size_t multiplicity = 0;
};

struct SpectrumReport {
  std::vector<double> eigenvalues;  // descending
  std::vector<EigenCluster> clusters;
  /// gaps[c] = last eigenvalue of cluster c minus first eigenvalue of cluster c + 1.
  std::vector<double> gaps;
  /// Absolute clustering tolerance that produced the split.
  double tolerance = 0.0;
};

/// Groups descending eigenvalues into clusters.
inline SpectrumReport cluster_eigenvalues(std::vector<double> eigenvalues) {
  SpectrumReport report;
  report.eigenvalues = std::move(eigenvalues);
  const auto& ev = report.eigenvalues;
  if (ev.empty()) return report;
  double largest_step = 0.0;
  double magnitude = 0.0;
  for (std::size_t i = 0; i + 1 < ev.size(); ++i) largest_step = std::max(largest_step, ev[i] - ev[i + 1]);
  for (double v : ev) magnitude = std::max(magnitude, std::abs(v));
  report.tolerance = kClusterGapFraction * largest_step;
  // Steps at rounding level never split.
  const double floor = 1e-12 * std::max(magnitude, 1e-300);

  std::size_t start = 0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const bool last = i + 1 == ev.size();
    const double step = last ? 0.0 : ev[i] - ev[i + 1];
    if (last || (step > report.tolerance && step > floor)) {
      double sum = 0.0;
      for (std::size_t m = start; m <= i; ++m) sum += ev[m];
      report.clusters.push_back({sum / static_cast<double>(i + 1 - start), i + 1 - start});
      if (!last) report.gaps.push_back(step);
      start = i + 1;
    }
  }
  return report;
}

/// Top-k eigenvalues of the transport matrix, descending and clustered.
inline SpectrumReport spectrum(const TransportMatrix& m, std::size_t k,
                               EigenSolverKind solver = EigenSolverKind::Auto) {
  const EigenPairs pairs = top_eigenpairs(m, k, solver);
  return cluster_eigenvalues({pairs.values.data(), pairs.values.data() + pairs.values.size()});
}

/// f(x_i) for the weight-k function f(x) = <delta_x, a>^k (k >= 0) or
/// conj(<delta_x, a>)^|k| (k < 0), with a fixed generic real vector a.
/// f(x <| g) = g^k f(x).
inline Eigen::VectorXcd weight_test_vector(std::span<const Frame> frames, int k) {
  const Vec3 a = Vec3(0.3, -0.5, 0.8).normalized();
  const ComplexVec3 ac = a.cast<std::complex<double>>();
  Eigen::VectorXcd v(static_cast<Eigen::Index>(frames.size()));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::complex<double> base = hermitian_product(delta(frames[i]), ac);
    v[static_cast<Eigen::Index>(i)] = k >= 0 ? std::pow(base, k) : std::pow(std::conj(base), -k);
  }
  return v;
}

/// ||M v|| / ||v|| for the weight-k test vector. For k != -1 the continuum
/// operator annihilates weight-k functions, so this is O(N^(-1/2)).
inline double kernel_residual(const TransportMatrix& m, std::span<const Frame> frames, int k) {
  if (frames.size() != m.size()) throw DomainError("kernel_residual: frame count does not match the matrix");
  const Eigen::VectorXcd v = weight_test_vector(frames, k);
  const double norm = v.norm();
  if (!(norm > 0.0)) throw DomainError("kernel_residual: test vector vanishes");
  return (m * v).norm() / norm;
}

}  // namespace cryo
