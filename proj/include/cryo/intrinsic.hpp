#pragma once

// Intrinsic classification: the top-3 eigenspace of a transport matrix
// recovers the Hermitian products <delta_i, delta_j> up to a unitary change
// of basis, and |<delta_i, delta_j>| - 1 is the viewing-direction inner product.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cryo/eigensolver.hpp"
#include "cryo/errors.hpp"
#include "cryo/operator_sim.hpp"
#include "cryo/so3.hpp"
#include "cryo/transport_matrix.hpp"

namespace cryo {

struct IntrinsicModel {
  std::size_t n = 0;
  Eigen::Vector3d eigenvalues;
  double fourth_eigenvalue = 0.0;
  /// Columns: orthonormal eigenvectors, descending eigenvalue.
  Eigen::MatrixXcd basis;
  double scale = 0.0;

  /// Cluster boundary separating the top eigenspace from the rest.
  double lambda0() const { return 0.5 * (eigenvalues[2] + fourth_eigenvalue); }
};

/// Builds the model from the top four eigenpairs of M. Clustering the four
/// eigenvalues must split between the third and the fourth, and the graph
/// needs at least as many edges as frames.
inline IntrinsicModel intrinsic_model(const TransportMatrix& m, EigenSolverKind solver = EigenSolverKind::Auto) {
  if (m.size() < 4) throw NoSpectralGap("intrinsic_model: need at least four frames");
  const EigenPairs pairs = top_eigenpairs(m, 4, solver);
  const auto& ev = pairs.values;
  const SpectrumReport report = cluster_eigenvalues({ev.data(), ev.data() + ev.size()});
  const double gap = ev[2] - ev[3];
  if (!(gap > report.tolerance) || !(gap > 1e-9 * std::abs(ev[0])) || m.edge_count() < m.size()) {
    throw NoSpectralGap("intrinsic_model: eigenvalues 3 and 4 are not separated (lambda3 = " + std::to_string(ev[2]) +
                        ", lambda4 = " + std::to_string(ev[3]) + ", tolerance " + std::to_string(report.tolerance) +
                        ", " + std::to_string(m.edge_count()) + " edges on " + std::to_string(m.size()) + " frames)");
  }
  IntrinsicModel model;
  model.n = m.size();
  model.eigenvalues = ev.head<3>();
  model.fourth_eigenvalue = ev[3];
  model.basis = pairs.vectors.leftCols(3);
  model.scale = static_cast<double>(m.size());
  return model;
}

/// scale * (2/3) * P_ij with P_ij = sum_k conj(v_k(i)) v_k(j); approximates
/// <delta_{x_i}, delta_{x_j}>.
inline std::complex<double> pairwise_phi_inner(const IntrinsicModel& model, std::size_t i, std::size_t j) {
  const auto ri = static_cast<Eigen::Index>(i), rj = static_cast<Eigen::Index>(j);
  std::complex<double> p = 0.0;
  for (Eigen::Index k = 0; k < model.basis.cols(); ++k) p += std::conj(model.basis(ri, k)) * model.basis(rj, k);
  return model.scale * (2.0 / 3.0) * p;
}

/// |<phi_i, phi_j>| - 1 before clamping.
inline double estimate_viewing_inner_raw(const IntrinsicModel& model, std::size_t i, std::size_t j) {
  return std::abs(pairwise_phi_inner(model, i, j)) - 1.0;
}

inline double estimate_viewing_inner(const IntrinsicModel& model, std::size_t i, std::size_t j) {
  return std::clamp(estimate_viewing_inner_raw(model, i, j), -1.0, 1.0);
}

/// Unordered pair of frame indices.
struct GraphEdge {
  std::size_t i = 0;
  std::size_t j = 0;
};

struct EdgeLabel {
  std::size_t i = 0;
  std::size_t j = 0;
  double estimate = 0.0;
  bool is_neighbor = false;
  std::optional<bool> is_true_neighbor;
};

struct EdgeLabeling {
  std::vector<EdgeLabel> labels;
  double threshold = 0.0;
  std::size_t clamp_count = 0;
  /// Present only with ground truth. An empty denominator counts as 1.
  std::optional<double> precision;
  std::optional<double> recall;
};

/// Labels each edge a neighbor iff its clamped estimate is >= threshold.
/// `truth`, when given, holds one ground-truth flag per edge.
inline EdgeLabeling classify_edges(const IntrinsicModel& model, std::span<const GraphEdge> edges, double threshold,
                                   const std::vector<bool>* truth = nullptr) {
  if (!(threshold > -1.0 && threshold < 1.0)) throw DomainError("classify_edges: threshold must lie in (-1, 1)");
  if (truth && truth->size() != edges.size()) throw ShapeMismatch("classify_edges: one truth flag per edge required");
  EdgeLabeling out;
  out.threshold = threshold;
  out.labels.reserve(edges.size());
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    if (i >= model.n || j >= model.n) throw DomainError("classify_edges: edge index out of range");
    const double raw = estimate_viewing_inner_raw(model, i, j);
    const double est = std::clamp(raw, -1.0, 1.0);
    if (est != raw) ++out.clamp_count;
    EdgeLabel label{i, j, est, est >= threshold, std::nullopt};
    if (truth) {
      const bool t = (*truth)[e];
      label.is_true_neighbor = t;
      tp += label.is_neighbor && t;
      fp += label.is_neighbor && !t;
      fn += !label.is_neighbor && t;
    }
    out.labels.push_back(label);
  }
  if (truth) {
    out.precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    out.recall = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  return out;
}

/// Median over all unordered pairs i < j of |estimate - (pi(x_i), pi(x_j))|.
inline double median_viewing_error(const IntrinsicModel& model, std::span<const Frame> frames) {
  if (frames.size() != model.n) throw ShapeMismatch("median_viewing_error: frame count does not match the model");
  const std::size_t n = frames.size();
  // Rows of conj(basis) and basis, scaled once, make each pair a 3-term sum.
  const Eigen::MatrixXcd left = model.basis.conjugate().transpose() * (model.scale * 2.0 / 3.0);
  const Eigen::MatrixXcd right = model.basis.transpose();
  std::vector<double> errors;
  errors.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 vi = frames[i].viewing_direction();
    const auto ci = static_cast<Eigen::Index>(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto cj = static_cast<Eigen::Index>(j);
      const std::complex<double> p = left.col(ci).cwiseProduct(right.col(cj)).sum();
      const double est = std::clamp(std::abs(p) - 1.0, -1.0, 1.0);
      errors.push_back(std::abs(est - vi.dot(frames[j].viewing_direction())));
    }
  }
  if (errors.empty()) return 0.0;
  const auto mid = errors.begin() + static_cast<std::ptrdiff_t>(errors.size() / 2);
  std::nth_element(errors.begin(), mid, errors.end());
  if (errors.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(errors.begin(), mid));
}

struct GeometricDataset {
  std::vector<Frame> frames;
  TransportMatrix matrix;
  /// Every stored off-diagonal pair; true edges first, then planted outliers.
  std::vector<GraphEdge> edges;
  std::vector<bool> is_true_edge;
  std::size_t outlier_count = 0;
};

/// Haar frames with geometric transport entries inside the cap, plus
/// round(f / (1 - f) * true_edges) outlier pairs drawn uniformly from the
/// non-edges, so outliers make up the fraction f of all edges. Outlier
/// entries are independent uniform unit complex numbers.
template <class URBG>
GeometricDataset generate_geometric_dataset(std::size_t n, double h, double outlier_frac, URBG& rng,
                                            unsigned threads = 1) {
  if (n < 2) throw DomainError("generate_geometric_dataset: need at least two frames");
  if (!(outlier_frac >= 0.0 && outlier_frac < 1.0)) {
    throw DomainError("generate_geometric_dataset: outlier_frac must lie in [0, 1)");
  }
  GeometricDataset data;
  data.frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) data.frames.push_back(sample_haar_frame(rng));
  const TransportMatrix clean = build_transport_matrix(data.frames, h, threads);
  if (outlier_frac == 0.0) {
    for (const auto& e : clean.edges()) data.edges.push_back({e.i, e.j});
    data.is_true_edge.assign(data.edges.size(), true);
    data.matrix = clean;
    return data;
  }

  std::vector<TransportEdge> all = clean.edges();
  const std::size_t true_count = all.size();
  const std::size_t pairs = n * (n - 1) / 2;
  const auto wanted = static_cast<std::size_t>(std::llround(outlier_frac / (1.0 - outlier_frac) * true_count));
  if (wanted > pairs - true_count) {
    throw DomainError("generate_geometric_dataset: not enough non-edges for the requested outlier fraction");
  }
  std::set<std::pair<std::size_t, std::size_t>> taken;
  for (const auto& e : all) taken.emplace(e.i, e.j);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  while (data.outlier_count < wanted) {
    std::size_t i = pick(rng), j = pick(rng);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (!taken.emplace(i, j).second) continue;
    all.push_back({i, j, sample_unit_complex(rng)});
    ++data.outlier_count;
  }
  data.matrix = TransportMatrix::from_edges(n, h, all);
  data.edges.reserve(all.size());
  for (const auto& e : all) data.edges.push_back({e.i, e.j});
  data.is_true_edge.assign(all.size(), false);
  std::fill(data.is_true_edge.begin(), data.is_true_edge.begin() + static_cast<std::ptrdiff_t>(true_count), true);
  return data;
}

}  // namespace cryo
