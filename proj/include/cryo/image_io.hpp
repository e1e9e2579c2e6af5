#pragma once

// Image stacks: little-endian "TCIM" header (magic, version u32, count u32,
// side u32, extent f64) then count * side^2 float64 pixels, row-major.
// Graphs: CSV with header i,j,distance,rot_re,rot_im, one line per edge i < j.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cryo/errors.hpp"
#include "cryo/imaging.hpp"

namespace cryo {

inline constexpr std::array<char, 4> kImageStackMagic = {'T', 'C', 'I', 'M'};
inline constexpr std::uint32_t kImageStackVersion = 1;

namespace detail {

template <class T>
void write_le(std::ostream& os, T value) {
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T read_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw FormatError("image stack: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

}  // namespace detail

inline void write_image_stack(std::ostream& os, std::span<const ProjectionImage> images) {
  if (images.empty()) throw DomainError("write_image_stack: empty stack");
  const auto& first = images.front();
  for (const auto& im : images) {
    if (!im.same_grid(first)) throw ShapeMismatch("write_image_stack: images live on different grids");
  }
  os.write(kImageStackMagic.data(), kImageStackMagic.size());
  detail::write_le<std::uint32_t>(os, kImageStackVersion);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(images.size()));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(first.side()));
  detail::write_le<double>(os, first.extent());
  for (const auto& im : images) {
    for (double v : im.pixels().reshaped<Eigen::RowMajor>()) detail::write_le<double>(os, v);
  }
  if (!os) throw FormatError("write_image_stack: write failed");
}

inline std::vector<ProjectionImage> read_image_stack(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kImageStackMagic) throw FormatError("image stack: bad magic");
  const auto version = detail::read_le<std::uint32_t>(is);
  if (version != kImageStackVersion) throw FormatError("image stack: unsupported version " + std::to_string(version));
  const auto count = detail::read_le<std::uint32_t>(is);
  const auto side = detail::read_le<std::uint32_t>(is);
  const auto extent = detail::read_le<double>(is);
  if (side == 0 || side % 2 != 0 || !(extent > 0.0)) throw FormatError("image stack: invalid grid in header");
  std::vector<ProjectionImage> out;
  out.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    ProjectionImage::Pixels px(side, side);
    for (auto& v : px.reshaped<Eigen::RowMajor>()) v = detail::read_le<double>(is);
    out.emplace_back(side, extent, std::move(px));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("image stack: trailing bytes after pixel data");
  return out;
}

inline void write_image_stack(const std::string& path, std::span<const ProjectionImage> images) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  write_image_stack(os, images);
}

inline std::vector<ProjectionImage> read_image_stack(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  return read_image_stack(is);
}

/// %.17g, enough to round-trip any double. Negative zero prints as 0.
inline std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_graph_csv(std::ostream& os, const ImageGraph& graph) {
  os << "i,j,distance,rot_re,rot_im\n";
  for (const auto& e : graph.edges()) {
    os << e.i << ',' << e.j << ',' << format_double(e.distance) << ',' << format_double(e.rotation.re()) << ','
       << format_double(e.rotation.im()) << '\n';
  }
}

/// Rebuilds a graph on n images; rotations are renormalized to unit modulus.
inline ImageGraph read_graph_csv(std::istream& is, std::size_t n, double epsilon) {
  std::string line;
  if (!std::getline(is, line) || line != "i,j,distance,rot_re,rot_im") throw FormatError("graph csv: bad header");
  std::vector<ImageEdge> edges;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    ImageEdge e;
    double re = 0.0, im = 0.0;
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    if (!(fields >> e.i >> c1 >> e.j >> c2 >> e.distance >> c3 >> re >> c4 >> im) || c1 != ',' || c2 != ',' ||
        c3 != ',' || c4 != ',') {
      throw FormatError("graph csv: malformed line " + std::to_string(line_no));
    }
    e.rotation = UnitComplex(re, im);
    edges.push_back(e);
  }
  std::sort(edges.begin(), edges.end(), [](const ImageEdge& a, const ImageEdge& b) {
    return std::make_pair(a.i, a.j) < std::make_pair(b.i, b.j);
  });
  return ImageGraph(n, epsilon, std::move(edges));
}

}  // namespace cryo
