#pragma once

// Error measurement against an analytic manifold.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "msmf/error.hpp"
#include "msmf/estimator.hpp"
#include "msmf/geometry.hpp"
#include "msmf/kernel.hpp"
#include "msmf/parallel.hpp"
#include "msmf/point_cloud.hpp"
#include "msmf/quadrature.hpp"
#include "msmf/spatial_index.hpp"

namespace msmf {

/// max_i |p_i - pi(p_i)|. Zero for an empty cloud.
inline double sup_distance_to_manifold(const PointCloud& points, const AnalyticManifold& m,
                                       unsigned workers = 1) {
  if (!points.empty() && points.dim() != static_cast<std::size_t>(m.ambient_dim()))
    throw DomainError("point dimension does not match the manifold");
  std::vector<double> dist(points.size());
  parallel_for(points.size(), workers, [&](std::size_t i) {
    const auto p = points[i];
    dist[i] = (p - m.project(p)).norm();
  });
  double best = 0.0;
  for (double d : dist) best = std::max(best, d);
  return best;
}

/// Distance from z to the nearest indexed point (exact: the search radius
/// doubles until a candidate appears, and every point inside it is examined).
inline double nearest_distance(const SpatialIndex& index, const Eigen::Ref<const Vector>& z,
                               std::vector<std::uint32_t>& scratch) {
  const PointCloud& cloud = index.cloud();
  for (double rho = index.cell_size();; rho *= 2.0) {
    index.radius_query(z, rho, scratch);
    if (scratch.empty()) {
      if (!std::isfinite(rho)) throw DomainError("nearest-neighbor search diverged");
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (const std::uint32_t j : scratch) best = std::min(best, (cloud[j] - z).squaredNorm());
    return std::sqrt(best);
  }
}

/// Reverse one-sided distance: max over `reference` of the distance to the
/// nearest point of `index`.
inline double coverage_distance(const PointCloud& reference, const SpatialIndex& index, unsigned workers = 1) {
  std::vector<double> dist(reference.size());
  workers = std::max(1u, workers);
  std::vector<std::vector<std::uint32_t>> scratch(workers);
  parallel_for(workers, workers, [&](std::size_t w) {
    const std::size_t begin = reference.size() * w / workers;
    const std::size_t end = reference.size() * (w + 1) / workers;
    for (std::size_t i = begin; i < end; ++i) dist[i] = nearest_distance(index, reference[i], scratch[w]);
  });
  double best = 0.0;
  for (double d : dist) best = std::max(best, d);
  return best;
}

struct BiasComponents {
  double normal_signed = 0.0;  // along H, positive toward the curvature vector
  double tangential = 0.0;     // norm of the tangent-space part
  double predicted = 0.0;      // (d/2) |H| sigma^2
};

/// Splits e = F(z) - pi(z) at pi(z) into its component along the unit mean
/// curvature direction and its tangent-space norm.
inline BiasComponents bias_decomposition(const AnalyticManifold& m, const Eigen::Ref<const Vector>& z,
                                         const Eigen::Ref<const Vector>& fz, double sigma) {
  if (!m.has_curvature_oracle()) throw Unsupported("bias decomposition needs the curvature oracle (" + m.name() + ")");
  const Vector p = m.project(z);
  const Vector e = fz - p;
  const Vector h = m.mean_curvature_vector(p);
  const double hn = h.norm();
  // Minimal points (H = 0) fall back to the inward normal for the sign convention.
  const Vector dir = hn > 1e-14 ? Vector(h / hn) : Vector(-m.outward_normal(p));
  const TangentFrame frame = m.tangent_frame(p);

  BiasComponents out;
  out.normal_signed = e.dot(dir);
  double t2 = 0.0;
  for (const Vector& t : frame.tangent) t2 += std::pow(e.dot(t), 2);
  out.tangential = std::sqrt(t2);
  out.predicted = 0.5 * m.intrinsic_dim() * hn * sigma * sigma;
  return out;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw DomainError("slope fit needs at least 3 pairs");
  CompensatedSum sx, sy;
  for (const auto& [x, y] : pairs) {
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
      throw DomainError("slope fit needs positive finite values");
    sx.add(std::log(x));
    sy.add(std::log(y));
  }
  const double n = static_cast<double>(pairs.size());
  const double mx = sx.value() / n, my = sy.value() / n;
  CompensatedSum sxy, sxx;
  for (const auto& [x, y] : pairs) {
    const double dx = std::log(x) - mx;
    sxy.add(dx * (std::log(y) - my));
    sxx.add(dx * dx);
  }
  if (!(sxx.value() > 0.0)) throw DomainError("slope fit needs at least two distinct x values");
  return sxy.value() / sxx.value();
}

/// Plain average of the observations within sqrt(2) r of z.
inline EstimateResult baseline_unweighted(const SpatialIndex& index, const Eigen::Ref<const Vector>& z,
                                          const KernelConfig& cfg) {
  std::vector<std::uint32_t> scratch;
  EstimateResult result = local_mean(index, z, cfg.support_radius(), [](double) { return 1.0; }, scratch);
  if (!result.has_estimate())
    throw EmptyNeighborhood("no observation within sqrt(2) r = " + format_double(cfg.support_radius()) +
                            " of the query");
  return result;
}

struct ErrorReport {
  double sigma = 0.0;
  std::size_t n = 0;
  double curvature = 0.0;  // 1 / R for circles and spheres, 1 / minor for the torus, NaN otherwise
  double sup_error = 0.0;
  double mean_normal_bias = std::numeric_limits<double>::quiet_NaN();
  double predicted_bias = std::numeric_limits<double>::quiet_NaN();
  double mean_tangential = std::numeric_limits<double>::quiet_NaN();
  std::size_t trials = 0;  // test points with an estimate
  std::size_t empty_queries = 0;
  std::int64_t runtime_ms = 0;
};

inline double curvature_parameter(const AnalyticManifold& m) {
  switch (m.kind()) {
    case ManifoldKind::Circle:
    case ManifoldKind::Sphere: return 1.0 / m.radius();
    case ManifoldKind::Torus: return 1.0 / m.minor_radius();
    case ManifoldKind::FermatQuartic: break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Summary over one batch. Bias fields stay NaN without a curvature oracle.
inline ErrorReport make_error_report(const AnalyticManifold& m, const std::vector<EstimateResult>& results,
                                     double sigma, std::size_t n, unsigned workers = 1) {
  ErrorReport rep;
  rep.sigma = sigma;
  rep.n = n;
  rep.curvature = curvature_parameter(m);
  rep.empty_queries = count_empty(results);
  rep.trials = results.size() - rep.empty_queries;
  if (rep.trials == 0) throw EmptyNeighborhood("every query had an empty neighborhood");

  std::vector<double> dist(results.size(), 0.0);
  std::vector<BiasComponents> bias(results.size());
  const bool with_bias = m.has_curvature_oracle();
  parallel_for(results.size(), workers, [&](std::size_t i) {
    const auto& r = results[i];
    if (!r.has_estimate()) return;
    dist[i] = (*r.fz - m.project(*r.fz)).norm();
    if (with_bias) bias[i] = bias_decomposition(m, r.z, *r.fz, sigma);
  });

  CompensatedSum normal, tangential, predicted;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].has_estimate()) continue;
    rep.sup_error = std::max(rep.sup_error, dist[i]);
    normal.add(bias[i].normal_signed);
    tangential.add(bias[i].tangential);
    predicted.add(bias[i].predicted);
  }
  if (with_bias) {
    const double t = static_cast<double>(rep.trials);
    rep.mean_normal_bias = normal.value() / t;
    rep.mean_tangential = tangential.value() / t;
    rep.predicted_bias = predicted.value() / t;
  }
  return rep;
}

}  // namespace msmf
