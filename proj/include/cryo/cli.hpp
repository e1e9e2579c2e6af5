#pragma once

// Experiment runners behind the command-line tool. Each writes its report to
// a stream and embeds the resolved configuration.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cryo/config.hpp"
#include "cryo/errors.hpp"
#include "cryo/image_io.hpp"
#include "cryo/imaging.hpp"
#include "cryo/intrinsic.hpp"
#include "cryo/operator_sim.hpp"
#include "cryo/spectral.hpp"

namespace cryo {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitNumericalFailure = 3;

/// Serializes JSON with every floating-point number printed by %.17g.
inline void write_json(std::ostream& os, const nlohmann::json& j, int indent = 2, int depth = 0) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << pad << nlohmann::json(key).dump() << ": ";
        write_json(os, value, indent, depth + 1);
      }
      os << '\n' << close_pad << '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) os << ",\n";
        os << pad;
        write_json(os, j[k], indent, depth + 1);
      }
      os << '\n' << close_pad << ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      // JSON has no infinities or NaN.
      if (!std::isfinite(v)) {
        os << "null";
      } else {
        os << format_double(v);
      }
      return;
    }
    default:
      os << j.dump();
  }
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [k, v] : config_entries(c)) out[k] = v;
  return out;
}

inline void write_config_comments(std::ostream& os, const ExperimentConfig& c) {
  for (const auto& [k, v] : config_entries(c)) os << "# " << k << " = " << v << '\n';
}

inline EigenSolverKind solver_kind(const std::string& name) {
  if (name == "dense") return EigenSolverKind::Dense;
  if (name == "lanczos") return EigenSolverKind::Lanczos;
  return EigenSolverKind::Auto;
}

/// Eigenvalue curves: one CSV row per (n, h), or a single JSON document.
/// The exact coefficient table (n <= the exact-order cap) is part of the
/// JSON document and is written next to a CSV file as <out>.coefficients.json.
inline int run_spectrum(const ExperimentConfig& c, std::ostream& os, std::ostream* coefficients = nullptr) {
  const std::vector<double> grid = parse_h_grid(c.h_grid);
  const int exact_n = std::min(c.n_max, kDefaultExactOrderCap);
  const auto polys = eigenvalue_polynomials(exact_n);

  nlohmann::json coeffs = nlohmann::json::array();
  for (int n = 1; n <= exact_n; ++n) {
    const auto& p = polys[static_cast<std::size_t>(n - 1)];
    nlohmann::json row = {{"n", n}, {"polynomial", p.to_string("h")}};
    nlohmann::json terms = nlohmann::json::array();
    for (std::size_t k = 0; k < p.coefficients().size(); ++k) terms.push_back(p.coefficients()[k].get_str());
    row["coefficients"] = terms;
    coeffs.push_back(row);
  }

  struct Row {
    int n;
    double h, lambda, quad, bound, gap;
  };
  std::vector<Row> rows;
  rows.reserve(grid.size() * static_cast<std::size_t>(c.n_max));
  std::vector<std::vector<double>> per_h;
  per_h.reserve(grid.size());
  for (double h : grid) per_h.push_back(eigenvalue_sequence(c.n_max + 1, h));
  for (int n = 1; n <= c.n_max; ++n) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double h = grid[g];
      const auto& seq = per_h[g];
      const double lambda = seq[static_cast<std::size_t>(n - 1)];
      rows.push_back({n, h, lambda, quadratic_approx(n, h), eigenvalue_upper_bound(n, h),
                      lambda - seq[static_cast<std::size_t>(n)]});
    }
  }

  if (c.format == "csv") {
    write_config_comments(os, c);
    os << "n,h,lambda,quadratic_approx,upper_bound,gap\n";
    for (const auto& r : rows) {
      os << r.n << ',' << format_double(r.h) << ',' << format_double(r.lambda) << ',' << format_double(r.quad) << ','
         << format_double(r.bound) << ',' << format_double(r.gap) << '\n';
    }
    if (coefficients) {
      write_json(*coefficients, {{"config", config_json(c)}, {"coefficients", coeffs}});
      *coefficients << '\n';
    }
  } else {
    nlohmann::json out = {{"config", config_json(c)}, {"coefficients", coeffs}};
    nlohmann::json table = nlohmann::json::array();
    for (const auto& r : rows) {
      table.push_back({{"n", r.n}, {"h", r.h}, {"lambda", r.lambda}, {"quadratic_approx", r.quad},
                       {"upper_bound", r.bound}, {"gap", r.gap}});
    }
    out["rows"] = table;
    write_json(os, out);
    os << '\n';
  }
  return kExitSuccess;
}

/// Spectrum of the transport matrix on Haar-random frames.
inline int run_simulate(const ExperimentConfig& c, std::ostream& os) {
  std::mt19937_64 rng(c.seed);
  std::vector<Frame> frames;
  frames.reserve(c.n_frames);
  for (std::size_t i = 0; i < c.n_frames; ++i) frames.push_back(sample_haar_frame(rng));
  const TransportMatrix m = build_transport_matrix(frames, c.h, c.threads);
  const SpectrumReport report = spectrum(m, c.k, solver_kind(c.solver));

  const double pairs = static_cast<double>(c.n_frames) * static_cast<double>(c.n_frames - 1) / 2.0;
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& cl : report.clusters) clusters.push_back({{"mean", cl.mean}, {"multiplicity", cl.multiplicity}});
  nlohmann::json predicted = nlohmann::json::array();
  const auto predicted_values = eigenvalue_sequence(static_cast<int>(std::max<std::size_t>(report.clusters.size(), 1)), c.h);
  for (std::size_t n = 1; n <= report.clusters.size(); ++n) {
    predicted.push_back({{"n", n}, {"lambda", predicted_values[n - 1]}, {"multiplicity", 2 * n + 1}});
  }
  nlohmann::json out = {{"config", config_json(c)},
                        {"n", c.n_frames},
                        {"h", c.h},
                        {"seed", c.seed},
                        {"edge_fraction", static_cast<double>(m.edge_count()) / pairs},
                        {"eigenvalues", std::vector<double>(report.eigenvalues)},
                        {"clusters", clusters},
                        {"gaps", report.gaps},
                        {"tolerance", report.tolerance},
                        {"predicted", predicted},
                        {"kernel_residual_weight0", kernel_residual(m, frames, 0)}};
  write_json(os, out);
  os << '\n';
  return kExitSuccess;
}

/// Intrinsic classification of a synthetic graph with planted outliers.
inline int run_classify(const ExperimentConfig& c, std::ostream& os) {
  std::mt19937_64 rng(c.seed);
  const GeometricDataset data = generate_geometric_dataset(c.n_frames, c.h, c.outlier_frac, rng, c.threads);
  const IntrinsicModel model = intrinsic_model(data.matrix, solver_kind(c.solver));
  const double threshold = c.decision_threshold();
  const EdgeLabeling labels = classify_edges(model, data.edges, threshold, &data.is_true_edge);

  if (c.format == "csv") {
    write_config_comments(os, c);
    os << "i,j,estimate,truth,is_neighbor,is_true_edge\n";
    for (const auto& l : labels.labels) {
      const double truth = data.frames[l.i].viewing_direction().dot(data.frames[l.j].viewing_direction());
      os << l.i << ',' << l.j << ',' << format_double(l.estimate) << ',' << format_double(truth) << ','
         << (l.is_neighbor ? 1 : 0) << ',' << (l.is_true_neighbor.value_or(false) ? 1 : 0) << '\n';
    }
    return kExitSuccess;
  }
  nlohmann::json out = {{"config", config_json(c)},
                        {"n", c.n_frames},
                        {"h", c.h},
                        {"outlier_frac", c.outlier_frac},
                        {"seed", c.seed},
                        {"threshold", threshold},
                        {"edge_count", data.edges.size()},
                        {"outlier_count", data.outlier_count},
                        {"median_abs_error", median_viewing_error(model, data.frames)},
                        {"precision", *labels.precision},
                        {"recall", *labels.recall},
                        {"clamp_count", labels.clamp_count},
                        {"eigenvalues", {model.eigenvalues[0], model.eigenvalues[1], model.eigenvalues[2],
                                         model.fourth_eigenvalue}}};
  write_json(os, out);
  os << '\n';
  return kExitSuccess;
}

/// Median over pairs with viewing angle <= max_angle_deg of the angular
/// difference in degrees between the empirical rotation inverse(argmin)
/// and the geometric transport rotation.
inline double median_rotation_error_deg(std::span<const PairAlignment> pairs, std::span<const Frame> frames,
                                        double max_angle_deg, std::size_t* count = nullptr) {
  const double min_cos = std::cos(max_angle_deg * std::numbers::pi / 180.0);
  std::vector<double> errors;
  for (const auto& p : pairs) {
    if (frames[p.i].viewing_direction().dot(frames[p.j].viewing_direction()) < min_cos) continue;
    const UnitComplex geometric = transport_rotation(frames[p.i], frames[p.j]);
    const UnitComplex empirical = p.alignment.rotation.inverse();
    errors.push_back(std::abs((empirical * geometric.inverse()).angle()) * 180.0 / std::numbers::pi);
  }
  if (count) *count = errors.size();
  if (errors.empty()) return 0.0;
  const auto mid = errors.begin() + static_cast<std::ptrdiff_t>(errors.size() / 2);
  std::nth_element(errors.begin(), mid, errors.end());
  return *mid;
}

/// Projection images, pairwise alignment, thresholded graph and, with
/// end_to_end, intrinsic classification of the graph edges.
inline int run_imaging(const ExperimentConfig& c, std::ostream& os) {
  const Density density = Density::reference_phantom();
  const ImagingDataset data =
      generate_imaging_dataset(density, c.n_frames, c.side, c.extent, c.snr, c.seed, c.threads);
  const auto pairs = align_all_pairs(data.images, c.n_angles, true, c.threads);
  const double epsilon = c.epsilon.value_or(calibrate_epsilon(pairs, c.h / 2.0));
  const ImageGraph graph = build_image_graph(c.n_frames, pairs, epsilon);

  if (!c.images.empty()) write_image_stack(c.images, data.images);
  if (!c.graph.empty()) {
    std::ofstream g(c.graph);
    if (!g) throw InvalidConfig("graph", "cannot open " + c.graph + " for writing");
    write_graph_csv(g, graph);
  }

  const double cap_cos = 1.0 - c.h;
  std::size_t edges_in_cap = 0;
  for (const auto& e : graph.edges()) {
    edges_in_cap += data.frames[e.i].viewing_direction().dot(data.frames[e.j].viewing_direction()) >= cap_cos;
  }
  std::size_t close_pairs = 0;
  const double rotation_error = median_rotation_error_deg(pairs, data.frames, 10.0, &close_pairs);
  nlohmann::json out = {{"config", config_json(c)},
                        {"n", c.n_frames},
                        {"h", c.h},
                        {"seed", c.seed},
                        {"epsilon", epsilon},
                        {"edge_count", graph.edges().size()},
                        {"edges_within_cap_fraction",
                         graph.edges().empty() ? 0.0 : static_cast<double>(edges_in_cap) / static_cast<double>(graph.edges().size())},
                        {"pairs_within_10deg", close_pairs},
                        {"median_rotation_error_deg", rotation_error}};

  int code = kExitSuccess;
  if (c.end_to_end) {
    nlohmann::json cls;
    try {
      const IntrinsicModel model = intrinsic_model(graph.transport_matrix(c.h), solver_kind(c.solver));
      std::vector<GraphEdge> edges;
      std::vector<bool> truth;
      for (const auto& e : graph.edges()) {
        edges.push_back({e.i, e.j});
        truth.push_back(data.frames[e.i].viewing_direction().dot(data.frames[e.j].viewing_direction()) >= cap_cos);
      }
      const EdgeLabeling labels = classify_edges(model, edges, c.decision_threshold(), &truth);
      cls = {{"threshold", c.decision_threshold()},
             {"median_abs_error", median_viewing_error(model, data.frames)},
             {"precision", *labels.precision},
             {"recall", *labels.recall},
             {"clamp_count", labels.clamp_count},
             {"eigenvalues", {model.eigenvalues[0], model.eigenvalues[1], model.eigenvalues[2], model.fourth_eigenvalue}}};
    } catch (const NoSpectralGap& e) {
      cls = {{"error", {{"type", "NoSpectralGap"}, {"message", e.what()}}}};
      code = kExitNumericalFailure;
    }
    out["classification"] = cls;
  }
  write_json(os, out);
  os << '\n';
  return code;
}

}  // namespace cryo
