#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "msmf/error.hpp"

namespace msmf {

using Vector = Eigen::VectorXd;
using ConstPoint = Eigen::Map<const Vector>;
using MutablePoint = Eigen::Map<Vector>;

enum class Provenance { Latent, Noisy, Test };

/// Ordered list of D-dimensional points stored contiguously (row per point).
class PointCloud {
 public:
  explicit PointCloud(std::size_t dim, Provenance provenance = Provenance::Latent,
                      std::uint64_t seed = 0)
      : dim_(dim), provenance_(provenance), seed_(seed) {
    if (dim == 0) throw DomainError("point cloud dimension must be positive");
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return coords_.size() / dim_; }
  bool empty() const noexcept { return coords_.empty(); }
  Provenance provenance() const noexcept { return provenance_; }
  std::uint64_t seed() const noexcept { return seed_; }
  void set_provenance(Provenance p) noexcept { provenance_ = p; }
  void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }

  ConstPoint operator[](std::size_t i) const {
    return ConstPoint(coords_.data() + i * dim_, static_cast<Eigen::Index>(dim_));
  }
  MutablePoint operator[](std::size_t i) {
    return MutablePoint(coords_.data() + i * dim_, static_cast<Eigen::Index>(dim_));
  }

  std::span<const double> coords(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<const double> data() const noexcept { return coords_; }

  /// Resizes to n points; new points are zero.
  void resize(std::size_t n) { coords_.resize(n * dim_, 0.0); }
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }

  void push_back(const Eigen::Ref<const Vector>& p) {
    if (static_cast<std::size_t>(p.size()) != dim_)
      throw DomainError("point has " + std::to_string(p.size()) + " coordinates, expected " +
                        std::to_string(dim_));
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      if (!std::isfinite(p[k])) throw DomainError("point coordinates must be finite");
      coords_.push_back(p[k]);
    }
  }

  friend bool operator==(const PointCloud& a, const PointCloud& b) {
    return a.dim_ == b.dim_ && a.coords_ == b.coords_;
  }

 private:
  std::size_t dim_;
  Provenance provenance_;
  std::uint64_t seed_;
  std::vector<double> coords_;
};

// ---------------------------------------------------------------------------
// Text format:
//   # dim=D count=N
//   x_1 x_2 ... x_D        (one point per line, 17 significant digits)
// ---------------------------------------------------------------------------

/// Shortest-safe decimal form of v with 17 significant digits.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline void write_point_cloud(std::ostream& os, const PointCloud& cloud) {
  os << "# dim=" << cloud.dim() << " count=" << cloud.size() << '\n';
  std::string line;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    line.clear();
    for (std::size_t k = 0; k < cloud.dim(); ++k) {
      if (k) line += ' ';
      line += format_double(cloud[i][static_cast<Eigen::Index>(k)]);
    }
    line += '\n';
    os << line;
  }
}

namespace detail {

inline bool parse_header_field(std::string_view token, std::string_view key, std::size_t& out) {
  if (token.substr(0, key.size()) != key) return false;
  auto digits = token.substr(key.size());
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out);
  return ec == std::errc() && ptr == digits.data() + digits.size();
}

}  // namespace detail

inline PointCloud read_point_cloud(std::istream& is, Provenance provenance = Provenance::Noisy,
                                   const std::string& source = "<stream>") {
  auto fail = [&](std::size_t line_no, const std::string& what) -> ParseError {
    return ParseError(source + ":" + std::to_string(line_no) + ": " + what);
  };

  std::string line;
  if (!std::getline(is, line)) throw fail(1, "missing header");
  std::istringstream header(line);
  std::string hash, dim_tok, count_tok;
  header >> hash >> dim_tok >> count_tok;
  std::size_t dim = 0, count = 0;
  if (hash != "#" || !detail::parse_header_field(dim_tok, "dim=", dim) ||
      !detail::parse_header_field(count_tok, "count=", count) || dim == 0)
    throw fail(1, "expected header '# dim=D count=N'");

  PointCloud cloud(dim, provenance);
  cloud.reserve(count);
  Vector p(static_cast<Eigen::Index>(dim));
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* cur = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t k = 0; k < dim; ++k) {
      while (cur < end && *cur == ' ') ++cur;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cur, end, v);
      if (ec != std::errc() || ptr == cur) throw fail(line_no, "expected " + std::to_string(dim) + " numbers");
      if (!std::isfinite(v)) throw fail(line_no, "non-finite coordinate");
      p[static_cast<Eigen::Index>(k)] = v;
      cur = ptr;
    }
    while (cur < end && *cur == ' ') ++cur;
    if (cur != end) throw fail(line_no, "trailing characters after " + std::to_string(dim) + " coordinates");
    cloud.push_back(p);
  }
  if (cloud.size() != count)
    throw fail(line_no, "header declares " + std::to_string(count) + " points, found " +
                            std::to_string(cloud.size()));
  return cloud;
}

inline PointCloud read_point_cloud(const std::filesystem::path& path,
                                   Provenance provenance = Provenance::Noisy) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open point-cloud file '" + path.string() + "'");
  return read_point_cloud(in, provenance, path.string());
}

inline void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write point-cloud file '" + path.string() + "'");
  write_point_cloud(out, cloud);
  if (!out) throw ParseError("write failed for '" + path.string() + "'");
}

}  // namespace msmf
