#pragma once

// Experiment configuration: a flat "key = value" document, '#' starts a
// comment. Command-line flags override file keys; every value is validated
// before any computation starts.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cryo/errors.hpp"
#include "cryo/image_io.hpp"

namespace cryo {

using ConfigMap = std::map<std::string, std::string>;

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfig("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InvalidConfig("line " + std::to_string(line_no), "empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

/// Reads a key = value file, or the embedded "config" object of a JSON
/// report written by a previous run.
inline ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("config", "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || text[first] != '{') return parse_config_text(text);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig("config", std::string("malformed JSON: ") + e.what());
  }
  const nlohmann::json& cfg = doc.contains("config") ? doc["config"] : doc;
  if (!cfg.is_object()) throw InvalidConfig("config", "JSON config must be an object");
  ConfigMap out;
  for (const auto& [key, value] : cfg.items()) {
    if (value.is_string()) {
      out[key] = value.get<std::string>();
    } else if (value.is_boolean()) {
      out[key] = value.get<bool>() ? "true" : "false";
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
      out[key] = value.dump();
    } else if (value.is_number()) {
      out[key] = format_double(value.get<double>());
    } else {
      throw InvalidConfig(key, "unsupported JSON value");
    }
  }
  return out;
}

struct ExperimentConfig {
  std::string subcommand;
  std::uint64_t seed = 42;
  std::size_t n_frames = 2000;
  double h = 0.35;
  int n_max = 4;
  std::string h_grid = "0:2:0.01";
  double outlier_frac = 0.0;
  std::size_t side = 64;
  double extent = 2.0;
  std::size_t n_angles = 72;
  double snr = std::numeric_limits<double>::infinity();
  /// Unset: calibrated from the distance distribution.
  std::optional<double> epsilon;
  /// Unset: 1 - h.
  std::optional<double> threshold;
  std::size_t k = 15;
  std::string solver = "auto";
  std::string out = "-";
  std::string format = "json";
  unsigned threads = 1;
  bool end_to_end = false;
  std::string images;
  std::string graph;

  double decision_threshold() const { return threshold.value_or(1.0 - h); }
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"spectrum", "simulate", "classify", "imaging"};
  return names;
}

inline ExperimentConfig default_config(const std::string& subcommand) {
  ExperimentConfig c;
  c.subcommand = subcommand;
  if (subcommand == "spectrum") {
    c.format = "csv";
  } else if (subcommand == "simulate") {
    c.n_frames = 2000;
    c.h = 0.35;
  } else if (subcommand == "classify") {
    c.n_frames = 2000;
    c.h = 0.25;
    c.outlier_frac = 0.2;
  } else if (subcommand == "imaging") {
    c.n_frames = 200;
    c.h = 0.5;
  } else {
    throw InvalidConfig("subcommand", "unknown subcommand '" + subcommand + "'");
  }
  return c;
}

namespace detail {

inline double parse_real(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || std::isnan(out)) throw InvalidConfig(key, "'" + v + "' is not a real number");
  return out;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw InvalidConfig(key, "'" + v + "' is not a non-negative integer");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidConfig(key, "'" + v + "' is not a boolean");
}

}  // namespace detail

/// Overlays string-valued keys onto a config. Unknown keys are rejected.
inline void apply_config(ExperimentConfig& c, const ConfigMap& values) {
  using namespace detail;
  for (const auto& [key, v] : values) {
    if (key == "subcommand") {
      if (v != c.subcommand) throw InvalidConfig(key, "config is for '" + v + "', running '" + c.subcommand + "'");
    } else if (key == "seed") {
      c.seed = parse_unsigned(key, v);
    } else if (key == "n_frames") {
      c.n_frames = parse_unsigned(key, v);
    } else if (key == "h") {
      c.h = parse_real(key, v);
    } else if (key == "n_max") {
      const auto n = parse_unsigned(key, v);
      if (n > 1'000'000) throw InvalidConfig(key, "must not exceed 1000000");
      c.n_max = static_cast<int>(n);
    } else if (key == "h_grid") {
      c.h_grid = v;
    } else if (key == "outlier_frac") {
      c.outlier_frac = parse_real(key, v);
    } else if (key == "side") {
      c.side = parse_unsigned(key, v);
    } else if (key == "extent") {
      c.extent = parse_real(key, v);
    } else if (key == "n_angles") {
      c.n_angles = parse_unsigned(key, v);
    } else if (key == "snr") {
      c.snr = parse_real(key, v);
    } else if (key == "epsilon") {
      c.epsilon = v == "auto" ? std::nullopt : std::optional<double>(parse_real(key, v));
    } else if (key == "threshold") {
      c.threshold = v == "auto" ? std::nullopt : std::optional<double>(parse_real(key, v));
    } else if (key == "k") {
      c.k = parse_unsigned(key, v);
    } else if (key == "solver") {
      c.solver = v;
    } else if (key == "out") {
      c.out = v;
    } else if (key == "format") {
      c.format = v;
    } else if (key == "threads") {
      const auto t = parse_unsigned(key, v);
      if (t > 1024) throw InvalidConfig(key, "must not exceed 1024");
      c.threads = static_cast<unsigned>(t);
    } else if (key == "end_to_end") {
      c.end_to_end = parse_bool(key, v);
    } else if (key == "images") {
      c.images = v;
    } else if (key == "graph") {
      c.graph = v;
    } else {
      throw InvalidConfig(key, "unknown key");
    }
  }
}

/// "a:b:step" (inclusive, step > 0) or a comma-separated list.
inline std::vector<double> parse_h_grid(const std::string& text) {
  const std::string key = "h_grid";
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(trim(p));
    if (parts.size() != 3) throw InvalidConfig(key, "range must be 'start:stop:step'");
    const double a = detail::parse_real(key, parts[0]);
    const double b = detail::parse_real(key, parts[1]);
    const double step = detail::parse_real(key, parts[2]);
    if (!(step > 0.0) || !(b >= a) || !std::isfinite(a) || !std::isfinite(b)) {
      throw InvalidConfig(key, "range needs start <= stop and a positive step");
    }
    const double count = std::round((b - a) / step);
    if (std::abs(a + count * step - b) > 1e-9 * std::max(1.0, std::abs(b))) {
      throw InvalidConfig(key, "step does not divide the range");
    }
    if (count > 1e7) throw InvalidConfig(key, "too many grid points");
    const auto intervals = static_cast<std::size_t>(count);
    for (std::size_t k = 0; k <= intervals; ++k) {
      // Endpoints are hit exactly.
      out.push_back(intervals == 0 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(intervals));
    }
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(detail::parse_real(key, trim(p)));
  }
  if (out.empty()) throw InvalidConfig(key, "empty grid");
  for (double h : out) {
    if (!(h >= 0.0 && h <= 2.0)) throw InvalidConfig(key, "grid values must lie in [0, 2]");
  }
  return out;
}

inline void validate_config(const ExperimentConfig& c) {
  const std::string& s = c.subcommand;
  if (c.format != "csv" && c.format != "json") throw InvalidConfig("format", "must be csv or json");
  if (c.threads < 1) throw InvalidConfig("threads", "must be at least 1");
  if (c.out.empty()) throw InvalidConfig("out", "empty path");
  if (s == "spectrum") {
    if (c.n_max < 1) throw InvalidConfig("n_max", "must be at least 1");
    parse_h_grid(c.h_grid);
    return;
  }
  if (c.n_frames < 2) throw InvalidConfig("n_frames", "must be at least 2");
  if (!(c.h > 0.0 && c.h <= 2.0)) throw InvalidConfig("h", "must lie in (0, 2]");
  if (c.solver != "auto" && c.solver != "dense" && c.solver != "lanczos") {
    throw InvalidConfig("solver", "must be auto, dense or lanczos");
  }
  if (s == "simulate") {
    if (c.k < 1 || c.k > c.n_frames) throw InvalidConfig("k", "must lie in [1, n_frames]");
  }
  if (s == "classify") {
    if (!(c.outlier_frac >= 0.0 && c.outlier_frac < 1.0)) throw InvalidConfig("outlier_frac", "must lie in [0, 1)");
  }
  if (s == "classify" || s == "imaging") {
    const double t = c.decision_threshold();
    if (!(t > -1.0 && t < 1.0)) throw InvalidConfig("threshold", "must lie in (-1, 1)");
    if (c.n_frames < 4) throw InvalidConfig("n_frames", "classification needs at least 4 frames");
  }
  if (s == "imaging") {
    if (c.side < 8 || c.side % 2 != 0) throw InvalidConfig("side", "must be an even number >= 8");
    if (!(c.extent > 0.0) || !std::isfinite(c.extent)) throw InvalidConfig("extent", "must be positive");
    if (c.n_angles < 4) throw InvalidConfig("n_angles", "must be at least 4");
    if (!(c.snr > 0.0)) throw InvalidConfig("snr", "must be positive");
    if (c.epsilon && !(*c.epsilon >= 0.0)) throw InvalidConfig("epsilon", "must be non-negative");
  }
}

/// The resolved configuration as key = value strings; feeding these back
/// through apply_config reproduces the run.
inline std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
  auto real = [](double v) { return std::isinf(v) ? std::string(v > 0 ? "inf" : "-inf") : format_double(v); };
  std::vector<std::pair<std::string, std::string>> e = {
      {"subcommand", c.subcommand}, {"seed", std::to_string(c.seed)}, {"format", c.format},
      {"out", c.out},               {"threads", std::to_string(c.threads)}};
  const std::string& s = c.subcommand;
  if (s == "spectrum") {
    e.insert(e.end(), {{"n_max", std::to_string(c.n_max)}, {"h_grid", c.h_grid}});
    return e;
  }
  e.insert(e.end(), {{"n_frames", std::to_string(c.n_frames)}, {"h", real(c.h)}, {"solver", c.solver}});
  if (s == "simulate") e.emplace_back("k", std::to_string(c.k));
  if (s == "classify") e.emplace_back("outlier_frac", real(c.outlier_frac));
  if (s == "classify" || s == "imaging") {
    e.emplace_back("threshold", c.threshold ? real(*c.threshold) : "auto");
  }
  if (s == "imaging") {
    e.insert(e.end(), {{"side", std::to_string(c.side)},
                       {"extent", real(c.extent)},
                       {"n_angles", std::to_string(c.n_angles)},
                       {"snr", real(c.snr)},
                       {"epsilon", c.epsilon ? real(*c.epsilon) : "auto"},
                       {"end_to_end", c.end_to_end ? "true" : "false"},
                       {"images", c.images},
                       {"graph", c.graph}});
  }
  return e;
}

}  // namespace cryo
