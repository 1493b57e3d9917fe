#pragma once

// Data generation: uniform samples on M, additive isotropic Gaussian noise
// y = x + xi, and test points in the band sigma/2 <= d(z, M) <= 2 sigma.
// Point i of every batch draws from its own stream (seed, i).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>

#include "msmf/error.hpp"
#include "msmf/geometry.hpp"
#include "msmf/kernel.hpp"
#include "msmf/parallel.hpp"
#include "msmf/point_cloud.hpp"
#include "msmf/rng.hpp"

namespace msmf {

struct NoiseConfig {
  double sigma = 0.1;
  double tube_constant = 2.0;  // C in |v| <= C sigma
};

/// Largest admissible noise level sigma_0 = (tau - eps) / (C + sqrt(2) c_D), eps = tau / 2.
inline double noise_upper_bound(const AnalyticManifold& m, double tube_constant = 2.0,
                                const Cutoff& cutoff = Cutoff::hard()) {
  const double tau = m.reach();
  const double eps = 0.5 * tau;
  return (tau - eps) /
         (tube_constant + std::numbers::sqrt2 * bandwidth_constant(m.ambient_dim(), cutoff));
}

/// Throws DomainError unless 0 < sigma <= sigma_0 for the manifold.
inline void check_noise_level(const AnalyticManifold& m, const NoiseConfig& cfg,
                              const Cutoff& cutoff = Cutoff::hard()) {
  if (!(cfg.sigma > 0.0)) throw DomainError("sigma must be positive");
  const double bound = noise_upper_bound(m, cfg.tube_constant, cutoff);
  if (cfg.sigma > bound)
    throw DomainError("sigma " + format_double(cfg.sigma) + " exceeds sigma_0 = " +
                      format_double(bound) + " for " + m.name());
}

inline PointCloud sample_uniform(const AnalyticManifold& m, std::size_t n, std::uint64_t seed,
                                 unsigned workers = 1) {
  if (n == 0) throw DomainError("sample size must be >= 1");
  PointCloud cloud(static_cast<std::size_t>(m.ambient_dim()), Provenance::Latent, seed);
  cloud.resize(n);
  parallel_for(n, workers, [&](std::size_t i) {
    CounterRng rng(seed, i);
    cloud[i] = m.sample(rng);
  });
  return cloud;
}

inline PointCloud add_noise(const PointCloud& latent, const NoiseConfig& cfg, std::uint64_t seed,
                            unsigned workers = 1) {
  if (latent.provenance() != Provenance::Latent)
    throw DomainError("noise can only be added to a latent cloud");
  if (!(cfg.sigma > 0.0)) throw DomainError("sigma must be positive");
  PointCloud noisy = latent;
  noisy.set_provenance(Provenance::Noisy);
  noisy.set_seed(seed);
  const std::size_t dim = latent.dim();
  parallel_for(latent.size(), workers, [&](std::size_t i) {
    CounterRng rng(seed, i);
    auto p = noisy[i];
    for (std::size_t k = 0; k < dim; ++k) p[static_cast<Eigen::Index>(k)] += cfg.sigma * rng.normal();
  });
  return noisy;
}

/// z = x + s u with x uniform on M, s uniform on [sigma/2, 2 sigma], u a
/// uniform unit normal at x.
inline PointCloud sample_test_points(const AnalyticManifold& m, const NoiseConfig& cfg,
                                     std::size_t n0, std::uint64_t seed, unsigned workers = 1) {
  if (!(2.0 * cfg.sigma < m.reach()))
    throw DomainError("test-point band 2 sigma = " + format_double(2.0 * cfg.sigma) +
                      " must stay below the reach " + format_double(m.reach()));
  PointCloud test(static_cast<std::size_t>(m.ambient_dim()), Provenance::Test, seed);
  test.resize(n0);
  parallel_for(n0, workers, [&](std::size_t i) {
    CounterRng rng(seed, i);
    const Vector x = m.sample(rng);
    const double s = rng.uniform(0.5 * cfg.sigma, 2.0 * cfg.sigma);
    test[i] = x + s * m.random_unit_normal(x, rng);
  });
  return test;
}

/// Test points placed on M itself (the zero-offset limit).
inline PointCloud sample_on_manifold_test_points(const AnalyticManifold& m, std::size_t n0,
                                                 std::uint64_t seed, unsigned workers = 1) {
  PointCloud test = sample_uniform(m, n0, seed, workers);
  test.set_provenance(Provenance::Test);
  return test;
}

}  // namespace msmf
