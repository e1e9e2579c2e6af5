#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cryo/intrinsic.hpp"
#include "cryo/spectral.hpp"
#include "test_support.hpp"

namespace {

using namespace cryo;
using cryo::testing::haar_frames;

/// The 24 rotations of the cube: signed permutation matrices with det +1.
std::vector<Mat3> cube_rotations() {
  std::vector<Mat3> out;
  std::array<int, 3> perm = {0, 1, 2};
  do {
    for (int signs = 0; signs < 8; ++signs) {
      Mat3 m = Mat3::Zero();
      for (int r = 0; r < 3; ++r) m(r, perm[r]) = (signs >> r) & 1 ? -1.0 : 1.0;
      if (m.determinant() > 0) out.push_back(m);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

/// Orbit of a frame and an in-plane copy of it under the cube group. The
/// group acts irreducibly on C^3, so sum_i delta_i delta_i^* = (2N/3) I and
/// the model built from the delta vectors is exact.
std::vector<Frame> orbit_frames(const Frame& seed_frame, const UnitComplex& twist) {
  std::vector<Frame> out;
  for (const Mat3& g : cube_rotations()) out.push_back(act_left(Rotation3::unchecked(g), seed_frame));
  for (const Mat3& g : cube_rotations()) out.push_back(act_left(Rotation3::unchecked(g), act_right(seed_frame, twist)));
  return out;
}

IntrinsicModel exact_model(const std::vector<Frame>& frames) {
  IntrinsicModel model;
  model.n = frames.size();
  model.scale = static_cast<double>(frames.size());
  model.basis.resize(static_cast<Eigen::Index>(frames.size()), 3);
  const double norm = std::sqrt(2.0 * static_cast<double>(frames.size()) / 3.0);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    model.basis.row(static_cast<Eigen::Index>(i)) = delta(frames[i]).conjugate().transpose() / norm;
  }
  model.eigenvalues = Eigen::Vector3d(1.0, 1.0, 1.0);
  return model;
}

Frame generic_frame() {
  std::mt19937_64 rng(99);
  return sample_haar_frame(rng);
}

TEST(ExactModel, EstimatesAreExactInnerProducts) {
  const auto frames = orbit_frames(generic_frame(), UnitComplex::from_angle(0.9));
  const IntrinsicModel model = exact_model(frames);
  const Eigen::MatrixXcd gram = model.basis.adjoint() * model.basis;
  ASSERT_LT((gram - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (std::size_t j = 0; j < frames.size(); ++j) {
      const auto expected = hermitian_product(delta(frames[i]), delta(frames[j]));
      EXPECT_LT(std::abs(pairwise_phi_inner(model, i, j) - expected), 1e-12);
      EXPECT_NEAR(estimate_viewing_inner(model, i, j), frames[i].e3().dot(frames[j].e3()), 1e-12);
    }
  }
  EXPECT_LT(median_viewing_error(model, frames), 1e-12);
}

TEST(ExactModel, SameDirectionPairCarriesConjugateOffset) {
  const UnitComplex g = UnitComplex::from_angle(0.9);
  const auto frames = orbit_frames(generic_frame(), g);
  const IntrinsicModel model = exact_model(frames);
  // Frame 24 is frame 0 turned in-plane by g.
  EXPECT_LT(std::abs(pairwise_phi_inner(model, 0, 24) - 2.0 * g.conj().value()), 1e-12);
}

TEST(ClassifyEdges, SameDirectionEdgesAreNeighbors) {
  const auto frames = orbit_frames(generic_frame(), UnitComplex::from_angle(2.0));
  const IntrinsicModel model = exact_model(frames);
  std::vector<GraphEdge> edges;
  for (std::size_t i = 0; i < 24; ++i) edges.push_back({i, i + 24});
  for (double threshold : {-0.5, 0.0, 0.9, 0.999999}) {
    const EdgeLabeling labels = classify_edges(model, edges, threshold);
    ASSERT_EQ(labels.labels.size(), 24u);
    for (const auto& l : labels.labels) EXPECT_TRUE(l.is_neighbor);
    EXPECT_FALSE(labels.precision.has_value());
  }
}

TEST(ClassifyEdges, LabelsFollowThresholdAndScoreAgainstTruth) {
  const auto frames = orbit_frames(generic_frame(), UnitComplex::from_angle(2.0));
  const IntrinsicModel model = exact_model(frames);
  std::vector<GraphEdge> edges;
  std::vector<bool> truth;
  const double threshold = 0.5;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (std::size_t j = i + 1; j < frames.size(); ++j) {
      edges.push_back({i, j});
      // Deliberately wrong truth on every fifth edge.
      const bool inside = frames[i].e3().dot(frames[j].e3()) >= threshold;
      truth.push_back(edges.size() % 5 == 0 ? !inside : inside);
    }
  }
  const EdgeLabeling labels = classify_edges(model, edges, threshold, &truth);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& l = labels.labels[e];
    EXPECT_EQ(l.is_neighbor, l.estimate >= threshold);
    EXPECT_EQ(*l.is_true_neighbor, static_cast<bool>(truth[e]));
    tp += l.is_neighbor && truth[e];
    fp += l.is_neighbor && !truth[e];
    fn += !l.is_neighbor && truth[e];
  }
  EXPECT_DOUBLE_EQ(*labels.precision, static_cast<double>(tp) / static_cast<double>(tp + fp));
  EXPECT_DOUBLE_EQ(*labels.recall, static_cast<double>(tp) / static_cast<double>(tp + fn));
  EXPECT_LT(*labels.precision, 1.0);
}

TEST(ClassifyEdges, EmptyEdgeListAndErrors) {
  const auto frames = orbit_frames(generic_frame(), UnitComplex::from_angle(1.0));
  const IntrinsicModel model = exact_model(frames);
  const std::vector<GraphEdge> none;
  const std::vector<bool> no_truth;
  const EdgeLabeling empty = classify_edges(model, none, 0.5, &no_truth);
  EXPECT_TRUE(empty.labels.empty());
  EXPECT_EQ(*empty.precision, 1.0);
  EXPECT_EQ(*empty.recall, 1.0);
  const std::vector<GraphEdge> one = {{0, 1}};
  EXPECT_THROW(classify_edges(model, one, 1.0), DomainError);
  EXPECT_THROW(classify_edges(model, one, -1.0), DomainError);
  EXPECT_THROW(classify_edges(model, one, 0.5, &no_truth), ShapeMismatch);
  const std::vector<GraphEdge> outside = {{0, 48}};
  EXPECT_THROW(classify_edges(model, outside, 0.5), DomainError);
}

TEST(ClassifyEdges, ClampingIsCounted) {
  IntrinsicModel model;
  model.n = 2;
  model.scale = 2.0;
  model.basis = Eigen::MatrixXcd::Zero(2, 3);
  // |phi_01| = 2 * 2/3 * 1.8 = 2.4 exceeds 2.
  model.basis(0, 0) = std::sqrt(1.8);
  model.basis(1, 0) = std::sqrt(1.8);
  const std::vector<GraphEdge> edges = {{0, 1}};
  const EdgeLabeling labels = classify_edges(model, edges, 0.0);
  EXPECT_EQ(labels.clamp_count, 1u);
  EXPECT_EQ(labels.labels[0].estimate, 1.0);
  EXPECT_NEAR(estimate_viewing_inner_raw(model, 0, 1), 1.4, 1e-12);
}

class SimulatedModel : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    frames_ = new std::vector<Frame>(haar_frames(2000, 1));
    auto& f = *frames_;
    f[1] = act_right(f[0], offset());
    const Mat3 quarter = Eigen::AngleAxisd(std::numbers::pi / 2, f[0].e1()).toRotationMatrix();
    f[2] = act_left(Rotation3::unchecked(quarter), f[0]);
    matrix_ = new TransportMatrix(build_transport_matrix(f, 0.3));
    model_ = new IntrinsicModel(intrinsic_model(*matrix_, EigenSolverKind::Lanczos));
  }
  static void TearDownTestSuite() {
    delete model_;
    delete matrix_;
    delete frames_;
  }
  static UnitComplex offset() { return UnitComplex::from_angle(1.0); }

  static std::vector<Frame>* frames_;
  static TransportMatrix* matrix_;
  static IntrinsicModel* model_;
};

std::vector<Frame>* SimulatedModel::frames_ = nullptr;
TransportMatrix* SimulatedModel::matrix_ = nullptr;
IntrinsicModel* SimulatedModel::model_ = nullptr;

TEST_F(SimulatedModel, TopThreeSeparatedFromFourth) {
  const auto& m = *model_;
  EXPECT_GT(m.eigenvalues[2] / m.fourth_eigenvalue, 1.2);
  EXPECT_GT(m.lambda0(), m.fourth_eigenvalue);
  EXPECT_LT(m.lambda0(), m.eigenvalues[2]);
  const double lambda1 = eigenvalue_numeric(1, 0.3);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(m.eigenvalues[k] / lambda1, 1.0, 0.1) << k;
  const Eigen::MatrixXcd gram = m.basis.adjoint() * m.basis;
  EXPECT_LT((gram - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(m.scale, 2000.0);
}

TEST_F(SimulatedModel, DiagonalIsNearTwo) {
  std::vector<double> diag;
  for (std::size_t i = 0; i < 2000; ++i) {
    const auto v = pairwise_phi_inner(*model_, i, i);
    EXPECT_EQ(v.imag(), 0.0);
    diag.push_back(v.real());
  }
  std::nth_element(diag.begin(), diag.begin() + 1000, diag.end());
  EXPECT_NEAR(diag[1000], 2.0, 0.1);
}

TEST_F(SimulatedModel, HermitianSymmetryIsExact) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, 1999);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t i = pick(rng), j = pick(rng);
    EXPECT_EQ(pairwise_phi_inner(*model_, i, j), std::conj(pairwise_phi_inner(*model_, j, i)));
    EXPECT_EQ(estimate_viewing_inner(*model_, i, j), estimate_viewing_inner(*model_, j, i));
  }
}

TEST_F(SimulatedModel, EstimatesDependOnlyOnTheEigenspace) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Matrix3cd a;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a(r, c) = {n(rng), n(rng)};
  const Eigen::Matrix3cd unitary = Eigen::HouseholderQR<Eigen::Matrix3cd>(a).householderQ();
  IntrinsicModel mixed = *model_;
  mixed.basis = model_->basis * unitary;
  std::uniform_int_distribution<std::size_t> pick(0, 1999);
  for (int k = 0; k < 2000; ++k) {
    const std::size_t i = pick(rng), j = pick(rng);
    EXPECT_NEAR(estimate_viewing_inner(mixed, i, j), estimate_viewing_inner(*model_, i, j), 1e-12);
  }
}

TEST_F(SimulatedModel, DenseSolverGivesTheSameEstimates) {
  const IntrinsicModel dense = intrinsic_model(*matrix_, EigenSolverKind::Dense);
  for (std::size_t i = 0; i < 2000; i += 37) {
    for (std::size_t j = 0; j < 2000; j += 41) {
      EXPECT_NEAR(estimate_viewing_inner(dense, i, j), estimate_viewing_inner(*model_, i, j), 1e-8);
    }
  }
}

TEST_F(SimulatedModel, PlantedSameDirectionPair) {
  const auto v = pairwise_phi_inner(*model_, 0, 1);
  const double expected_angle = offset().conj().angle();
  EXPECT_NEAR(std::arg(v), expected_angle, 0.1);
  EXPECT_NEAR(std::abs(v), 2.0, 0.4);
}

TEST_F(SimulatedModel, PlantedOrthogonalPair) {
  ASSERT_NEAR((*frames_)[0].e3().dot((*frames_)[2].e3()), 0.0, 1e-12);
  EXPECT_NEAR(estimate_viewing_inner(*model_, 0, 2), 0.0, 0.1);
}

TEST_F(SimulatedModel, SelfEstimatesAreNearOne) {
  std::vector<double> self;
  for (std::size_t i = 0; i < 2000; ++i) self.push_back(estimate_viewing_inner(*model_, i, i));
  std::nth_element(self.begin(), self.begin() + 1000, self.end());
  EXPECT_NEAR(self[1000], 1.0, 0.05);
}

TEST_F(SimulatedModel, MedianErrorCalibration) {
  // Frozen from the calibration sweep on this dataset.
  EXPECT_NEAR(median_viewing_error(*model_, *frames_), 0.0984, 0.002);
}

TEST(IntrinsicModel, DegenerateGraphHasNoGap) {
  std::mt19937_64 rng(1);
  const auto frames = haar_frames(10, 1);
  EXPECT_THROW(intrinsic_model(build_transport_matrix(frames, 0.05)), NoSpectralGap);
  const auto three = haar_frames(3, 1);
  EXPECT_THROW(intrinsic_model(build_transport_matrix(three, 1.0)), NoSpectralGap);
}

TEST(IntrinsicModel, MedianErrorShrinksWithN) {
  double small = 0.0, large = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f1 = haar_frames(1000, seed);
    const auto f2 = haar_frames(4000, seed);
    small += median_viewing_error(intrinsic_model(build_transport_matrix(f1, 0.3), EigenSolverKind::Lanczos), f1);
    large += median_viewing_error(intrinsic_model(build_transport_matrix(f2, 0.3), EigenSolverKind::Lanczos), f2);
  }
  EXPECT_LE(large, small);
}

TEST(GeometricDataset, NoOutliersReproducesTheCleanMatrix) {
  std::mt19937_64 rng(5);
  const GeometricDataset data = generate_geometric_dataset(500, 0.3, 0.0, rng);
  EXPECT_EQ(data.matrix.dense(), build_transport_matrix(data.frames, 0.3).dense());
  EXPECT_EQ(data.outlier_count, 0u);
  EXPECT_EQ(data.edges.size(), data.matrix.edge_count());
  EXPECT_TRUE(std::all_of(data.is_true_edge.begin(), data.is_true_edge.end(), [](bool b) { return b; }));
  std::mt19937_64 again(5);
  for (const auto& x : data.frames) EXPECT_EQ(x.matrix(), sample_haar_frame(again).matrix());
}

TEST(GeometricDataset, PlantedOutlierFraction) {
  std::mt19937_64 rng(6);
  const GeometricDataset data = generate_geometric_dataset(2000, 0.25, 0.2, rng);
  const double fraction = static_cast<double>(data.outlier_count) / static_cast<double>(data.edges.size());
  EXPECT_NEAR(fraction, 0.2, 0.01);
  EXPECT_EQ(data.edges.size(), data.matrix.edge_count());
  std::size_t outliers = 0;
  for (std::size_t e = 0; e < data.edges.size(); ++e) {
    const auto [i, j] = data.edges[e];
    const bool in_cap = data.frames[i].e3().dot(data.frames[j].e3()) > 1.0 - 0.25;
    EXPECT_EQ(static_cast<bool>(data.is_true_edge[e]), in_cap);
    outliers += !data.is_true_edge[e];
    EXPECT_EQ(data.matrix.entry(j, i), std::conj(data.matrix.entry(i, j)));
    EXPECT_NEAR(std::abs(data.matrix.entry(i, j)), 1.0 / 2000.0, 1e-15);
  }
  EXPECT_EQ(outliers, data.outlier_count);
}

TEST(GeometricDataset, RejectsBadFractions) {
  std::mt19937_64 rng(7);
  EXPECT_THROW(generate_geometric_dataset(100, 0.3, 1.0, rng), DomainError);
  EXPECT_THROW(generate_geometric_dataset(100, 0.3, -0.1, rng), DomainError);
  EXPECT_THROW(generate_geometric_dataset(1, 0.3, 0.0, rng), DomainError);
  EXPECT_THROW(generate_geometric_dataset(20, 1.5, 0.9, rng), DomainError);
}

TEST(GeometricDataset, HeavyOutliersCalibration) {
  // Half of all edges planted; frozen from the calibration sweep.
  std::mt19937_64 rng(1);
  const GeometricDataset data = generate_geometric_dataset(2000, 0.25, 0.5, rng);
  const IntrinsicModel model = intrinsic_model(data.matrix, EigenSolverKind::Lanczos);
  EXPECT_NEAR(median_viewing_error(model, data.frames), 0.134, 0.01);
}

}  // namespace
