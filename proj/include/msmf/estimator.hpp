#pragma once

// Single-step local mean shift
//
//   F(z) = sum_{j in I_z} w_j y_j / sum_{j in I_z} w_j,   w_j = phi_r(y_j - z),
//
// with I_z = { j : |y_j - z| <= sqrt(2) r } and r = c_D sigma.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "msmf/error.hpp"
#include "msmf/kernel.hpp"
#include "msmf/parallel.hpp"
#include "msmf/point_cloud.hpp"
#include "msmf/quadrature.hpp"
#include "msmf/spatial_index.hpp"

namespace msmf {

struct EstimateResult {
  Vector z;
  std::optional<Vector> fz;  // empty when no neighbor carries weight
  std::size_t neighbor_count = 0;
  double weight_sum = 0.0;

  bool has_estimate() const noexcept { return fz.has_value(); }
};

/// Default grid cell for a kernel: the support radius sqrt(2) r.
inline SpatialIndex build_index(const PointCloud& cloud, const KernelConfig& cfg) {
  return SpatialIndex(cloud, cfg.support_radius());
}

/// Weighted local mean over the ball of radius `radius` around z. Sums run in
/// ascending neighbor order with compensation; `weight(dist2)` gives w_j.
/// Neighbors are accumulated as offsets y_j - z.
template <class WeightFn>
EstimateResult local_mean(const SpatialIndex& index, const Eigen::Ref<const Vector>& z,
                          double radius, WeightFn&& weight,
                          std::vector<std::uint32_t>& scratch) {
  const PointCloud& cloud = index.cloud();
  const std::size_t dim = cloud.dim();
  index.radius_query(z, radius, scratch);

  EstimateResult result;
  result.z = z;
  result.neighbor_count = scratch.size();

  CompensatedSum total;
  std::vector<CompensatedSum> moment(dim);
  for (const std::uint32_t j : scratch) {
    const auto y = cloud.coords(j);
    double dist2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = y[k] - z[static_cast<Eigen::Index>(k)];
      dist2 += d * d;
    }
    const double w = weight(dist2);
    if (w == 0.0) continue;
    total.add(w);
    for (std::size_t k = 0; k < dim; ++k) moment[k].add(w * (y[k] - z[static_cast<Eigen::Index>(k)]));
  }
  result.weight_sum = total.value();
  if (result.weight_sum > 0.0) {
    Vector fz = z;
    for (std::size_t k = 0; k < dim; ++k)
      fz[static_cast<Eigen::Index>(k)] += moment[k].value() / result.weight_sum;
    result.fz = std::move(fz);
  }
  return result;
}

namespace detail {

inline EstimateResult kernel_mean(const SpatialIndex& index, const Eigen::Ref<const Vector>& z,
                                  const KernelConfig& cfg, std::vector<std::uint32_t>& scratch) {
  if (static_cast<std::size_t>(cfg.ambient_dim) != index.cloud().dim())
    throw DomainError("kernel dimension does not match the cloud");
  return local_mean(index, z, cfg.support_radius(),
                    [&cfg](double dist2) { return kernel_weight_sq(dist2, cfg); }, scratch);
}

}  // namespace detail

/// F(z). Throws EmptyNeighborhood when no observation carries weight.
inline EstimateResult estimate(const SpatialIndex& index, const Eigen::Ref<const Vector>& z,
                               const KernelConfig& cfg) {
  std::vector<std::uint32_t> scratch;
  EstimateResult result = detail::kernel_mean(index, z, cfg, scratch);
  if (!result.has_estimate())
    throw EmptyNeighborhood("no observation within sqrt(2) r = " +
                            format_double(cfg.support_radius()) + " of the query");
  return result;
}

/// F at every test point, in input order. Empty neighborhoods are recorded in
/// the result (fz unset) and do not stop the batch. Results do not depend on
/// the worker count.
inline std::vector<EstimateResult> estimate_batch(const SpatialIndex& index, const PointCloud& test,
                                                  const KernelConfig& cfg, unsigned workers = 1) {
  if (test.dim() != index.cloud().dim())
    throw DomainError("test points and observations have different dimensions");
  std::vector<EstimateResult> results(test.size());
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, test.size()))));
  std::vector<std::vector<std::uint32_t>> scratch(workers);
  // One contiguous range per worker; each worker owns one scratch buffer.
  parallel_for(workers, workers, [&](std::size_t w) {
    const std::size_t begin = test.size() * w / workers;
    const std::size_t end = test.size() * (w + 1) / workers;
    for (std::size_t i = begin; i < end; ++i)
      results[i] = detail::kernel_mean(index, test[i], cfg, scratch[w]);
  });
  return results;
}

inline std::size_t count_empty(const std::vector<EstimateResult>& results) {
  std::size_t n = 0;
  for (const auto& r : results) n += r.has_estimate() ? 0 : 1;
  return n;
}

/// Estimated points of the non-empty results, in order.
inline PointCloud collect_estimates(const std::vector<EstimateResult>& results, std::size_t dim) {
  PointCloud out(dim, Provenance::Test);
  for (const auto& r : results)
    if (r.has_estimate()) out.push_back(*r.fz);
  return out;
}

}  // namespace msmf
