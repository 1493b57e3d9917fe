#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "msmf/experiment.hpp"
#include "msmf/geometry.hpp"
#include "msmf/kernel.hpp"

namespace msmf::cli {

enum ExitCode : int { kOk = 0, kOracleFailure = 1, kConfigError = 2, kMostlyEmpty = 3 };

struct ManifoldSpec {
  std::string kind = "circle";  // circle | sphere | torus | quartic
  std::vector<double> radii;    // circle / sphere; empty picks the default
  double major = 2.0;
  double minor = 1.0;
  int ambient = 0;  // 0 picks the natural dimension
};

/// One manifold per radius (torus and quartic yield exactly one).
std::vector<AnalyticManifold> make_manifolds(const ManifoldSpec& spec);

Cutoff make_cutoff(const std::string& name, double rho0);

struct FitOptions {
  std::string cloud_path;
  std::string test_path;
  std::string out_path;
  double sigma = 0.0;
  std::string cutoff = "hard";
  double rho0 = 0.9;
  unsigned threads = 0;
};

struct SweepOptions {
  ManifoldSpec manifold;
  std::vector<double> sigmas{0.1};
  std::vector<std::size_t> ns{30000};
  std::size_t n0 = 100;
  std::size_t seeds = 1;
  std::uint64_t seed_base = 42;
  std::string cutoff = "hard";
  double rho0 = 0.9;
  std::string placement = "tube";  // tube | manifold
  std::string out_path;            // empty writes to stdout
  unsigned threads = 0;
  bool timing = true;
  double slope_sigma_floor = 0.01;  // sigmas at or below are left out of slope fits
};

struct OracleOptions {
  ManifoldSpec manifold;
  double sigma = 0.05;
  int resolution = 0;
  std::size_t points = 100;
  std::uint64_t seed = 7;
};

struct SampleOptions {
  ManifoldSpec manifold;
  double sigma = 0.1;
  std::size_t n = 30000;
  std::size_t n0 = 100;
  std::uint64_t seed = 42;
  std::string placement = "tube";
  std::string cloud_out;
  std::string test_out;
  unsigned threads = 0;
};

/// Each command reports to `out` / `err` and returns an ExitCode.
int run_fit(const FitOptions& opt, std::ostream& out, std::ostream& err);
int run_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err);
int run_oracle(const OracleOptions& opt, std::ostream& out, std::ostream& err);
int run_sample(const SampleOptions& opt, std::ostream& out, std::ostream& err);

inline constexpr const char* kResultHeader =
    "manifold,sigma,n,n0,seed,c_d,r,sup_error,mean_normal_bias,predicted_bias,mean_tangential,empty_queries,"
    "runtime_ms";

}  // namespace msmf::cli
