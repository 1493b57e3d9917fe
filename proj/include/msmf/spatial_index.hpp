#pragma once

// Uniform hash grid for fixed-radius queries.
//
// Point j lives in cell floor(y_j / cell_size) (per axis). Cells are stored
// in CSR form with their point ids ascending, and looked up through a hash of
// the integer cell coordinates.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "msmf/error.hpp"
#include "msmf/point_cloud.hpp"
#include "msmf/rng.hpp"

namespace msmf {

class SpatialIndex {
 public:
  /// The cloud must outlive the index and stay unmodified.
  SpatialIndex(const PointCloud& cloud, double cell_size)
      : cloud_(&cloud), cell_(cell_size), dim_(cloud.dim()) {
    if (cloud.empty()) throw DomainError("cannot index an empty point cloud");
    if (!(cell_size > 0.0) || !std::isfinite(cell_size))
      throw DomainError("cell size must be positive and finite");
    build();
  }

  const PointCloud& cloud() const noexcept { return *cloud_; }
  double cell_size() const noexcept { return cell_; }
  std::size_t occupied_cells() const noexcept { return cell_begin_.size() - 1; }

  /// Ids j with |y_j - z| <= rho, ascending.
  std::vector<std::size_t> radius_query(const Eigen::Ref<const Vector>& z, double rho) const {
    std::vector<std::uint32_t> ids;
    radius_query(z, rho, ids);
    return {ids.begin(), ids.end()};
  }

  /// Buffer-reusing form of radius_query; `out` is overwritten.
  void radius_query(const Eigen::Ref<const Vector>& z, double rho,
                    std::vector<std::uint32_t>& out) const {
    out.clear();
    if (static_cast<std::size_t>(z.size()) != dim_)
      throw DomainError("query dimension does not match the indexed cloud");
    if (!(rho >= 0.0)) throw DomainError("query radius must be nonnegative");
    const double rho2 = rho * rho;

    std::vector<std::int64_t> lo(dim_), hi(dim_), cur(dim_);
    double combos = 1.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const auto zk = z[static_cast<Eigen::Index>(k)];
      // Widen by one cell when the query edge sits on a cell boundary so that
      // rounding in (z -/+ rho) / cell can never drop a candidate.
      const double a = (zk - rho) / cell_;
      const double b = (zk + rho) / cell_;
      lo[k] = static_cast<std::int64_t>(std::floor(a));
      hi[k] = static_cast<std::int64_t>(std::floor(b));
      if (a - static_cast<double>(lo[k]) < 1e-9) --lo[k];
      if (static_cast<double>(hi[k]) + 1.0 - b < 1e-9) ++hi[k];
      combos *= static_cast<double>(hi[k] - lo[k] + 1);
    }

    auto scan_cell = [&](std::uint32_t cell) {
      for (std::uint32_t p = cell_begin_[cell]; p < cell_begin_[cell + 1]; ++p) {
        const std::uint32_t id = point_ids_[p];
        if (squared_distance(id, z) <= rho2) out.push_back(id);
      }
    };

    if (combos >= static_cast<double>(occupied_cells())) {
      for (std::uint32_t c = 0; c < occupied_cells(); ++c) {
        bool inside = true;
        for (std::size_t k = 0; k < dim_ && inside; ++k) {
          const auto ck = cell_coords_[c * dim_ + k];
          inside = ck >= lo[k] && ck <= hi[k];
        }
        if (inside) scan_cell(c);
      }
    } else {
      cur = lo;
      for (;;) {
        const auto it = lookup_.find(hash(cur.data()));
        if (it != lookup_.end()) {
          for (std::uint32_t c = it->second; c != kNone; c = chain_[c])
            if (std::equal(cur.begin(), cur.end(), cell_coords_.begin() + c * dim_)) {
              scan_cell(c);
              break;
            }
        }
        std::size_t k = 0;
        for (; k < dim_; ++k) {
          if (cur[k] < hi[k]) {
            ++cur[k];
            break;
          }
          cur[k] = lo[k];
        }
        if (k == dim_) break;
      }
    }
    std::sort(out.begin(), out.end());
  }

 private:
  static constexpr std::uint32_t kNone = 0xffffffffu;

  double squared_distance(std::uint32_t id, const Eigen::Ref<const Vector>& z) const {
    const auto p = cloud_->coords(id);
    double s = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double d = p[k] - z[static_cast<Eigen::Index>(k)];
      s += d * d;
    }
    return s;
  }

  std::uint64_t hash(const std::int64_t* c) const noexcept {
    std::uint64_t h = 0x12345678abcdefULL;
    for (std::size_t k = 0; k < dim_; ++k) h = splitmix64(h ^ static_cast<std::uint64_t>(c[k]));
    return h;
  }

  void build() {
    const std::size_t n = cloud_->size();
    if (n >= kNone) throw DomainError("point cloud too large for 32-bit ids");
    std::vector<std::int64_t> coords(n * dim_);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = cloud_->coords(i);
      for (std::size_t k = 0; k < dim_; ++k) {
        const double c = std::floor(p[k] / cell_);
        if (!(std::abs(c) < 4e18)) throw DomainError("coordinate out of range for the grid");
        coords[i * dim_ + k] = static_cast<std::int64_t>(c);
      }
    }
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return std::lexicographical_compare(coords.begin() + a * dim_, coords.begin() + (a + 1) * dim_,
                                          coords.begin() + b * dim_, coords.begin() + (b + 1) * dim_);
    });
    point_ids_ = std::move(order);
    cell_begin_.clear();
    cell_coords_.clear();
    for (std::uint32_t p = 0; p < n; ++p) {
      const auto* c = coords.data() + point_ids_[p] * dim_;
      if (p == 0 || !std::equal(c, c + dim_, cell_coords_.end() - static_cast<std::ptrdiff_t>(dim_))) {
        cell_begin_.push_back(p);
        cell_coords_.insert(cell_coords_.end(), c, c + dim_);
      }
    }
    cell_begin_.push_back(static_cast<std::uint32_t>(n));

    const std::size_t cells = occupied_cells();
    chain_.assign(cells, kNone);
    lookup_.reserve(cells);
    for (std::uint32_t c = 0; c < cells; ++c) {
      auto [it, inserted] = lookup_.try_emplace(hash(cell_coords_.data() + c * dim_), c);
      if (!inserted) {
        chain_[c] = it->second;
        it->second = c;
      }
    }
  }

  const PointCloud* cloud_;
  double cell_;
  std::size_t dim_;
  std::vector<std::int64_t> cell_coords_;  // occupied cells x dim
  std::vector<std::uint32_t> cell_begin_;  // CSR offsets into point_ids_
  std::vector<std::uint32_t> point_ids_;
  std::vector<std::uint32_t> chain_;  // next cell with the same hash
  std::unordered_map<std::uint64_t, std::uint32_t> lookup_;
};

}  // namespace msmf
