#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cryo/errors.hpp"
#include "cryo/parallel.hpp"
#include "cryo/so3.hpp"
#include "cryo/transport_matrix.hpp"

namespace cryo {

struct GaussianBlob {
  Vec3 center = Vec3::Zero();
  double width = 1.0;
  double amplitude = 1.0;
};

/// Sum of isotropic Gaussian blobs.
class Density {
 public:
  explicit Density(std::vector<GaussianBlob> blobs) : blobs_(std::move(blobs)) {
    if (blobs_.empty()) throw DomainError("Density: at least one blob required");
    for (const auto& b : blobs_) {
      if (!(b.width > 0.0)) throw DomainError("Density: blob widths must be positive");
    }
  }

  /// Three blobs of unequal width and amplitude in general position; no
  /// rotation other than the identity maps it to itself.
  static Density reference_phantom() {
    return Density({{Vec3(0.55, 0.0, 0.1), 0.30, 1.0},
                    {Vec3(-0.25, 0.45, -0.2), 0.22, 0.8},
                    {Vec3(-0.1, -0.35, 0.45), 0.26, 0.6}});
  }

  const std::vector<GaussianBlob>& blobs() const { return blobs_; }

 private:
  std::vector<GaussianBlob> blobs_;
};

/// Square image on [-extent, extent]^2. Pixel (r, c) samples the camera
/// coordinates (p, q) = (center(c), center(r)).
class ProjectionImage {
 public:
  using Pixels = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  ProjectionImage(std::size_t side, double extent) : ProjectionImage(side, extent, Pixels::Zero(side, side)) {}

  ProjectionImage(std::size_t side, double extent, Pixels pixels) : side_(side), extent_(extent), pixels_(std::move(pixels)) {
    if (side == 0 || side % 2 != 0) throw DomainError("ProjectionImage: side must be a positive even number");
    if (!(extent > 0.0) || !std::isfinite(extent)) throw DomainError("ProjectionImage: extent must be positive");
    if (pixels_.rows() != static_cast<Eigen::Index>(side) || pixels_.cols() != static_cast<Eigen::Index>(side)) {
      throw ShapeMismatch("ProjectionImage: pixel array is not side x side");
    }
    if (!pixels_.allFinite()) throw DomainError("ProjectionImage: non-finite pixel");
  }

  std::size_t side() const { return side_; }
  double extent() const { return extent_; }
  double spacing() const { return 2.0 * extent_ / static_cast<double>(side_); }
  /// Camera coordinate of the center of pixel row or column `index`.
  double coordinate(std::size_t index) const { return -extent_ + (static_cast<double>(index) + 0.5) * spacing(); }

  const Pixels& pixels() const { return pixels_; }
  Pixels& pixels() { return pixels_; }
  double operator()(std::size_t r, std::size_t c) const {
    return pixels_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  double norm() const { return pixels_.norm(); }
  bool same_grid(const ProjectionImage& o) const { return side_ == o.side_ && extent_ == o.extent_; }

 private:
  std::size_t side_;
  double extent_;
  Pixels pixels_;
};

/// Line integral of the density along the viewing direction of x, sampled
/// at pixel centers: each blob contributes A sqrt(2 pi) s exp(-|(p,q) - c'|^2 / (2 s^2))
/// where c' is its center in the (e1, e2) camera coordinates.
inline ProjectionImage xray_project(const Density& density, const Frame& x, std::size_t side, double extent) {
  if (side < 8) throw DomainError("xray_project: side must be at least 8");
  ProjectionImage image(side, extent);
  auto& px = image.pixels();
  for (const auto& b : density.blobs()) {
    const double cp = b.center.dot(x.e1());
    const double cq = b.center.dot(x.e2());
    const double weight = b.amplitude * std::sqrt(2.0 * std::numbers::pi) * b.width;
    const double inv = 1.0 / (2.0 * b.width * b.width);
    for (std::size_t r = 0; r < side; ++r) {
      const double dq = image.coordinate(r) - cq;
      for (std::size_t c = 0; c < side; ++c) {
        const double dp = image.coordinate(c) - cp;
        px(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += weight * std::exp(-(dp * dp + dq * dq) * inv);
      }
    }
  }
  return image;
}

/// Bilinear sample at fractional (row, col); outside the grid reads 0.
inline double sample_bilinear(const ProjectionImage& image, double row, double col) {
  const auto n = static_cast<long>(image.side());
  const double fr = std::floor(row), fc = std::floor(col);
  const long r0 = static_cast<long>(fr), c0 = static_cast<long>(fc);
  if (r0 < -1 || c0 < -1 || r0 >= n || c0 >= n) return 0.0;
  const double tr = row - fr, tc = col - fc;
  const auto& px = image.pixels();
  auto at = [&](long r, long c) { return (r < 0 || c < 0 || r >= n || c >= n) ? 0.0 : px(r, c); };
  return (1.0 - tr) * ((1.0 - tc) * at(r0, c0) + tc * at(r0, c0 + 1)) +
         tr * ((1.0 - tc) * at(r0 + 1, c0) + tc * at(r0 + 1, c0 + 1));
}

/// (R(g) I)(p, q) = I(g^-1 (p, q)).
inline ProjectionImage rotate_image(const ProjectionImage& image, const UnitComplex& g) {
  const std::size_t side = image.side();
  ProjectionImage out(side, image.extent());
  const double inv_spacing = 1.0 / image.spacing();
  const double c = g.re(), s = g.im();
  auto& px = out.pixels();
  for (std::size_t r = 0; r < side; ++r) {
    const double q = image.coordinate(r);
    for (std::size_t col = 0; col < side; ++col) {
      const double p = image.coordinate(col);
      // g^-1 (p, q) = (c p + s q, -s p + c q).
      const double sp = c * p + s * q;
      const double sq = -s * p + c * q;
      px(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) =
          sample_bilinear(image, (sq + image.extent()) * inv_spacing - 0.5, (sp + image.extent()) * inv_spacing - 0.5);
    }
  }
  return out;
}

struct Alignment {
  double distance = 0.0;
  /// argmin over g of ||R(g) I1 - I2||.
  UnitComplex rotation;
};

inline constexpr std::size_t kDefaultAlignmentAngles = 72;

inline void check_alignment_inputs(const ProjectionImage& a, const ProjectionImage& b, std::size_t n_angles) {
  if (!a.same_grid(b)) throw ShapeMismatch("invariant_distance: images live on different grids");
  if (n_angles < 4) throw DomainError("invariant_distance: n_angles must be at least 4");
}

inline UnitComplex grid_rotation(std::size_t k, std::size_t n_angles) {
  return UnitComplex::from_angle(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_angles));
}

/// n_angles rotated copies of an image, flattened into the rows of a matrix.
class RotationStack {
 public:
  RotationStack(const ProjectionImage& image, std::size_t n_angles)
      : n_angles_(n_angles), rows_(static_cast<Eigen::Index>(n_angles), image.pixels().size()),
        sq_norms_(static_cast<Eigen::Index>(n_angles)) {
    for (std::size_t k = 0; k < n_angles; ++k) {
      const ProjectionImage rotated = rotate_image(image, grid_rotation(k, n_angles));
      rows_.row(static_cast<Eigen::Index>(k)) = rotated.pixels().reshaped<Eigen::RowMajor>().transpose();
      sq_norms_[static_cast<Eigen::Index>(k)] = rotated.pixels().squaredNorm();
    }
  }

  std::size_t angles() const { return n_angles_; }

  /// Squared distances ||R(g_k) I - other||^2 for every grid angle.
  Eigen::VectorXd squared_distances(const ProjectionImage& other) const {
    const Eigen::VectorXd flat = other.pixels().reshaped<Eigen::RowMajor>();
    Eigen::VectorXd d = sq_norms_ - 2.0 * (rows_ * flat);
    d.array() += flat.squaredNorm();
    return d.cwiseMax(0.0);
  }

 private:
  std::size_t n_angles_;
  Eigen::MatrixXd rows_;
  Eigen::VectorXd sq_norms_;
};

/// Grid minimum of the squared distances (smallest angle wins ties), then an
/// optional parabolic refinement through the neighbors. The reported
/// distance is always recomputed at the reported rotation.
inline Alignment finish_alignment(const ProjectionImage& a, const ProjectionImage& b, const Eigen::VectorXd& sq,
                                  bool refine) {
  const auto n = static_cast<std::size_t>(sq.size());
  // Values closer than the rounding level of the expansion are ties.
  const double tie = 1e-12 * (a.pixels().squaredNorm() + b.pixels().squaredNorm());
  std::size_t best = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (sq[static_cast<Eigen::Index>(k)] < sq[static_cast<Eigen::Index>(best)] - tie) best = k;
  }
  UnitComplex g = grid_rotation(best, n);
  double dist = (rotate_image(a, g).pixels() - b.pixels()).norm();
  if (refine) {
    const double left = sq[static_cast<Eigen::Index>((best + n - 1) % n)];
    const double mid = sq[static_cast<Eigen::Index>(best)];
    const double right = sq[static_cast<Eigen::Index>((best + 1) % n)];
    const double curvature = left - 2.0 * mid + right;
    if (curvature > 0.0) {
      const double offset = std::clamp(0.5 * (left - right) / curvature, -0.5, 0.5);
      const double angle = 2.0 * std::numbers::pi * (static_cast<double>(best) + offset) / static_cast<double>(n);
      const UnitComplex refined = UnitComplex::from_angle(angle);
      const double refined_dist = (rotate_image(a, refined).pixels() - b.pixels()).norm();
      if (refined_dist < dist) {
        g = refined;
        dist = refined_dist;
      }
    }
  }
  return {dist, g};
}

/// min over n_angles uniformly spaced g of ||R(g) I1 - I2||, and its argmin.
inline Alignment invariant_distance(const ProjectionImage& a, const ProjectionImage& b,
                                    std::size_t n_angles = kDefaultAlignmentAngles, bool refine = false) {
  check_alignment_inputs(a, b, n_angles);
  return finish_alignment(a, b, RotationStack(a, n_angles).squared_distances(b), refine);
}

/// Adds white Gaussian noise of variance ||I||^2 / (snr * side^2).
template <class URBG>
ProjectionImage add_noise(const ProjectionImage& image, double snr, URBG& rng) {
  if (!(snr > 0.0)) throw DomainError("add_noise: snr must be positive");
  const double side = static_cast<double>(image.side());
  const double sigma = image.norm() / std::sqrt(snr * side * side);
  ProjectionImage out = image;
  std::normal_distribution<double> normal(0.0, sigma);
  for (auto& v : out.pixels().reshaped()) v += normal(rng);
  return out;
}

/// Alignment of one unordered pair i < j.
struct PairAlignment {
  std::size_t i = 0;
  std::size_t j = 0;
  Alignment alignment;
};

/// All-pairs alignments in (i, j) lexicographic order.
inline std::vector<PairAlignment> align_all_pairs(std::span<const ProjectionImage> images,
                                                  std::size_t n_angles = kDefaultAlignmentAngles, bool refine = true,
                                                  unsigned threads = 1) {
  const std::size_t n = images.size();
  if (n < 2) throw DomainError("align_all_pairs: need at least two images");
  for (const auto& im : images) check_alignment_inputs(images[0], im, n_angles);
  std::vector<std::vector<PairAlignment>> rows(n);
  parallel_for(n, threads, [&](std::size_t i) {
    if (i + 1 == n) return;
    const RotationStack stack(images[i], n_angles);
    auto& row = rows[i];
    row.reserve(n - i - 1);
    for (std::size_t j = i + 1; j < n; ++j) {
      row.push_back({i, j, finish_alignment(images[i], images[j], stack.squared_distances(images[j]), refine)});
    }
  });
  std::vector<PairAlignment> out;
  out.reserve(n * (n - 1) / 2);
  for (auto& row : rows) out.insert(out.end(), row.begin(), row.end());
  return out;
}

/// Distance quantile at `fraction` of all pairs: the epsilon whose graph
/// keeps about that fraction of pairs.
inline double calibrate_epsilon(std::span<const PairAlignment> pairs, double fraction) {
  if (pairs.empty()) throw DomainError("calibrate_epsilon: no pairs");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("calibrate_epsilon: fraction must lie in (0, 1]");
  std::vector<double> d;
  d.reserve(pairs.size());
  for (const auto& p : pairs) d.push_back(p.alignment.distance);
  std::sort(d.begin(), d.end());
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(d.size()))) - 1;
  return d[std::min(k, d.size() - 1)];
}

/// Edge {i, j}, i < j, with the empirical transport rotation stored at (i, j).
struct ImageEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  double distance = 0.0;
  UnitComplex rotation;
};

class ImageGraph {
 public:
  ImageGraph(std::size_t n, double epsilon, std::vector<ImageEdge> edges)
      : n_(n), epsilon_(epsilon), edges_(std::move(edges)) {
    for (const auto& e : edges_) {
      if (!(e.i < e.j) || e.j >= n_) throw DomainError("ImageGraph: edges must be ordered pairs inside the graph");
    }
  }

  std::size_t size() const { return n_; }
  double epsilon() const { return epsilon_; }
  const std::vector<ImageEdge>& edges() const { return edges_; }

  /// Empirical transport rotation at (a, b); (b, a) is its exact inverse.
  UnitComplex rotation(std::size_t a, std::size_t b) const {
    const std::size_t lo = std::min(a, b), hi = std::max(a, b);
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), std::make_pair(lo, hi), [](const ImageEdge& e, const auto& key) {
      return std::make_pair(e.i, e.j) < key;
    });
    if (it == edges_.end() || it->i != lo || it->j != hi) throw DomainError("ImageGraph: no edge between these images");
    return a < b ? it->rotation : it->rotation.inverse();
  }

  TransportMatrix transport_matrix(double h) const {
    std::vector<TransportEdge> t;
    t.reserve(edges_.size());
    for (const auto& e : edges_) t.push_back({e.i, e.j, e.rotation});
    return TransportMatrix::from_edges(n_, h, t);
  }

 private:
  std::size_t n_;
  double epsilon_;
  std::vector<ImageEdge> edges_;  // sorted by (i, j)
};

/// Keeps pairs with distance <= epsilon. The stored rotation at (i, j) is
/// the inverse of the aligning rotation of I_i onto I_j, which approximates
/// the geometric transport T(x_i, x_j).
inline ImageGraph build_image_graph(std::size_t n, std::span<const PairAlignment> pairs, double epsilon) {
  std::vector<ImageEdge> edges;
  for (const auto& p : pairs) {
    if (p.alignment.distance <= epsilon) edges.push_back({p.i, p.j, p.alignment.distance, p.alignment.rotation.inverse()});
  }
  std::sort(edges.begin(), edges.end(), [](const ImageEdge& a, const ImageEdge& b) {
    return std::make_pair(a.i, a.j) < std::make_pair(b.i, b.j);
  });
  return ImageGraph(n, epsilon, std::move(edges));
}

inline ImageGraph build_image_graph(std::span<const ProjectionImage> images, double epsilon,
                                    std::size_t n_angles = kDefaultAlignmentAngles, unsigned threads = 1) {
  const auto pairs = align_all_pairs(images, n_angles, true, threads);
  return build_image_graph(images.size(), pairs, epsilon);
}

struct ImagingDataset {
  std::vector<Frame> frames;
  std::vector<ProjectionImage> clean;
  std::vector<ProjectionImage> images;
};

/// Haar frames drawn from `seed`, their projections, and (for finite snr)
/// noisy copies. Image i draws noise from its own stream seeded by (seed, i).
inline ImagingDataset generate_imaging_dataset(const Density& density, std::size_t n, std::size_t side, double extent,
                                               double snr, std::uint64_t seed, unsigned threads = 1) {
  ImagingDataset data;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) data.frames.push_back(sample_haar_frame(rng));
  data.clean.assign(n, ProjectionImage(side, extent));
  data.images.assign(n, ProjectionImage(side, extent));
  parallel_for(n, threads, [&](std::size_t i) {
    data.clean[i] = xray_project(density, data.frames[i], side, extent);
    if (std::isfinite(snr)) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(std::uint64_t(i) >> 32)};
      std::mt19937_64 noise_rng(seq);
      data.images[i] = add_noise(data.clean[i], snr, noise_rng);
    } else {
      data.images[i] = data.clean[i];
    }
  });
  return data;
}

}  // namespace cryo
