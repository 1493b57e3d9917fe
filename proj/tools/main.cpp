#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "msmf/error.hpp"

namespace {

void add_manifold_flags(CLI::App* cmd, msmf::cli::ManifoldSpec& spec, bool repeat_radius) {
  cmd->add_option("--manifold", spec.kind, "circle, sphere, torus or quartic")
      ->check(CLI::IsMember({"circle", "sphere", "torus", "quartic"}))
      ->capture_default_str();
  auto* radius = cmd->add_option("--radius", spec.radii, "circle/sphere radius (default 10 / 5)");
  if (!repeat_radius) radius->expected(1);
  cmd->add_option("--major", spec.major, "torus major radius")->capture_default_str();
  cmd->add_option("--minor", spec.minor, "torus minor radius")->capture_default_str();
  cmd->add_option("--ambient", spec.ambient, "ambient dimension D (default: natural embedding)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace msmf::cli;
  CLI::App app{"Local mean-shift manifold fitting with analytic test manifolds"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "estimate F(z) for each test point from an observed cloud");
  fit_cmd->add_option("--cloud", fit.cloud_path, "observed (noisy) point-cloud file")->required();
  fit_cmd->add_option("--test", fit.test_path, "test point file")->required();
  fit_cmd->add_option("--sigma", fit.sigma, "noise level")->required();
  fit_cmd->add_option("--out", fit.out_path, "estimated point file")->required();
  fit_cmd->add_option("--cutoff", fit.cutoff, "hard or smooth")->capture_default_str();
  fit_cmd->add_option("--rho0", fit.rho0, "smooth cutoff start")->capture_default_str();
  fit_cmd->add_option("--threads", fit.threads, "worker count (0: MSMF_THREADS or all cores)");

  SweepOptions sweep;
  std::vector<double> sigmas;
  std::vector<std::size_t> ns;
  bool no_timing = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "run sigma / N / curvature sweeps and write a result table");
  add_manifold_flags(sweep_cmd, sweep.manifold, true);
  sweep_cmd->add_option("--sigma", sigmas, "noise level (repeatable)");
  sweep_cmd->add_option("--n", ns, "sample size (repeatable)");
  sweep_cmd->add_option("--n0", sweep.n0, "test points per cell")->capture_default_str();
  sweep_cmd->add_option("--seeds", sweep.seeds, "seeds per cell")->capture_default_str();
  sweep_cmd->add_option("--seed", sweep.seed_base, "first seed")->capture_default_str();
  sweep_cmd->add_option("--cutoff", sweep.cutoff, "hard or smooth")->capture_default_str();
  sweep_cmd->add_option("--rho0", sweep.rho0, "smooth cutoff start")->capture_default_str();
  sweep_cmd->add_option("--placement", sweep.placement, "tube or manifold")->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out_path, "result file (default: stdout)");
  sweep_cmd->add_option("--threads", sweep.threads, "worker count (0: MSMF_THREADS or all cores)");
  sweep_cmd->add_flag("--no-timing", no_timing, "write runtime_ms as 0 for byte-stable output");

  OracleOptions oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "check density, score and population-mean expansions");
  add_manifold_flags(oracle_cmd, oracle.manifold, false);
  oracle_cmd->add_option("--sigma", oracle.sigma, "noise level")->capture_default_str();
  oracle_cmd->add_option("--resolution", oracle.resolution, "minimum quadrature nodes per dimension");
  oracle_cmd->add_option("--points", oracle.points, "tube points checked")->capture_default_str();
  oracle_cmd->add_option("--seed", oracle.seed, "seed for the check points")->capture_default_str();

  SampleOptions sample;
  auto* sample_cmd = app.add_subcommand("sample", "write a noisy cloud and test points for fit");
  add_manifold_flags(sample_cmd, sample.manifold, false);
  sample_cmd->add_option("--sigma", sample.sigma, "noise level")->capture_default_str();
  sample_cmd->add_option("--n", sample.n, "observations")->capture_default_str();
  sample_cmd->add_option("--n0", sample.n0, "test points")->capture_default_str();
  sample_cmd->add_option("--seed", sample.seed, "seed")->capture_default_str();
  sample_cmd->add_option("--placement", sample.placement, "tube or manifold")->capture_default_str();
  sample_cmd->add_option("--cloud-out", sample.cloud_out, "noisy cloud file");
  sample_cmd->add_option("--test-out", sample.test_out, "test point file");
  sample_cmd->add_option("--threads", sample.threads, "worker count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (*fit_cmd) return run_fit(fit, std::cout, std::cerr);
    if (*sweep_cmd) {
      if (!sigmas.empty()) sweep.sigmas = sigmas;
      if (!ns.empty()) sweep.ns = ns;
      sweep.timing = !no_timing;
      return run_sweep(sweep, std::cout, std::cerr);
    }
    if (*oracle_cmd) return run_oracle(oracle, std::cout, std::cerr);
    if (*sample_cmd) return run_sample(sample, std::cout, std::cerr);
  } catch (const msmf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
