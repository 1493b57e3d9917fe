#pragma once

// One sweep cell: sample latent points, add noise, place test points,
// estimate, and summarize.

#include <chrono>
#include <cstddef>
#include <cstdint>

#include "msmf/error.hpp"
#include "msmf/estimator.hpp"
#include "msmf/geometry.hpp"
#include "msmf/kernel.hpp"
#include "msmf/metrics.hpp"
#include "msmf/point_cloud.hpp"
#include "msmf/rng.hpp"
#include "msmf/sampling.hpp"

namespace msmf {

enum class TestPlacement { Tube, OnManifold };

struct CellSpec {
  double sigma = 0.1;
  std::size_t n = 30000;
  std::size_t n0 = 100;
  std::uint64_t seed = 42;
  Cutoff cutoff = Cutoff::hard();
  TestPlacement placement = TestPlacement::Tube;
  bool measure_input_noise = false;
  unsigned workers = 1;
};

/// Independent seeds for the three random stages of a cell. They depend on
/// the cell seed only, so cells that differ in sigma or N share latent draws.
struct CellSeeds {
  std::uint64_t latent, noise, test;
};

inline CellSeeds cell_seeds(std::uint64_t seed) {
  return {stream_key(seed, 0x6c6174656e74ULL), stream_key(seed, 0x6e6f697365ULL), stream_key(seed, 0x74657374ULL)};
}

struct CellOutcome {
  ErrorReport report;
  double c_d = 0.0;
  double r = 0.0;
  double input_noise_sup = -1.0;  // sup distance of the noisy cloud, when measured
  std::vector<EstimateResult> results;
};

inline CellOutcome run_cell(const AnalyticManifold& m, const CellSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  const CellSeeds seeds = cell_seeds(spec.seed);
  const NoiseConfig noise{spec.sigma, 2.0};

  const PointCloud latent = sample_uniform(m, spec.n, seeds.latent, spec.workers);
  const PointCloud noisy = add_noise(latent, noise, seeds.noise, spec.workers);
  const PointCloud test = spec.placement == TestPlacement::Tube
                              ? sample_test_points(m, noise, spec.n0, seeds.test, spec.workers)
                              : sample_on_manifold_test_points(m, spec.n0, seeds.test, spec.workers);

  const KernelConfig cfg = KernelConfig::make(m.ambient_dim(), spec.sigma, spec.cutoff);
  const SpatialIndex index = build_index(noisy, cfg);

  CellOutcome out;
  out.c_d = cfg.r / spec.sigma;
  out.r = cfg.r;
  out.results = estimate_batch(index, test, cfg, spec.workers);
  out.report = make_error_report(m, out.results, spec.sigma, spec.n, spec.workers);
  if (spec.measure_input_noise) out.input_noise_sup = sup_distance_to_manifold(noisy, m, spec.workers);
  out.report.runtime_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace msmf
