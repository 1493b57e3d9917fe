#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

#include "msmf/msmf.hpp"

namespace msmf::cli {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

std::string fmt(double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); }

void write_file(const std::string& path, const PointCloud& cloud) {
  write_point_cloud(path, cloud);
}

}  // namespace

std::vector<AnalyticManifold> make_manifolds(const ManifoldSpec& spec) {
  std::vector<AnalyticManifold> out;
  if (spec.kind == "circle" || spec.kind == "sphere") {
    const bool circle = spec.kind == "circle";
    std::vector<double> radii = spec.radii;
    if (radii.empty()) radii.push_back(circle ? 10.0 : 5.0);
    const int D = spec.ambient ? spec.ambient : (circle ? 2 : 3);
    for (double R : radii)
      out.push_back(circle ? AnalyticManifold::circle(R, D) : AnalyticManifold::sphere(R, D));
  } else if (spec.kind == "torus") {
    out.push_back(AnalyticManifold::torus(spec.major, spec.minor, spec.ambient ? spec.ambient : 3));
  } else if (spec.kind == "quartic") {
    if (spec.ambient && spec.ambient != 4) throw DomainError("the quartic lives in D = 4");
    out.push_back(AnalyticManifold::fermat_quartic());
  } else {
    throw DomainError("unknown manifold '" + spec.kind + "' (circle, sphere, torus, quartic)");
  }
  return out;
}

Cutoff make_cutoff(const std::string& name, double rho0) {
  if (name == "hard") return Cutoff::hard();
  if (name == "smooth") return Cutoff::smooth(rho0);
  throw DomainError("unknown cutoff '" + name + "' (hard, smooth)");
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

int run_fit(const FitOptions& opt, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  if (!(opt.sigma > 0.0)) throw DomainError("--sigma must be positive");
  const PointCloud cloud = read_point_cloud(opt.cloud_path, Provenance::Noisy);
  const PointCloud test = read_point_cloud(opt.test_path, Provenance::Test);
  if (cloud.empty()) throw DomainError("observation cloud '" + opt.cloud_path + "' is empty");
  if (cloud.dim() != test.dim())
    throw DomainError("dimension mismatch: cloud has D = " + std::to_string(cloud.dim()) + ", test points D = " +
                      std::to_string(test.dim()));

  const unsigned workers = resolve_workers(opt.threads);
  const KernelConfig cfg =
      KernelConfig::make(static_cast<int>(cloud.dim()), opt.sigma, make_cutoff(opt.cutoff, opt.rho0));
  const SpatialIndex index = build_index(cloud, cfg);
  const auto results = estimate_batch(index, test, cfg, workers);
  const std::size_t empty = count_empty(results);
  write_file(opt.out_path, collect_estimates(results, cloud.dim()));

  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  out << "processed " << test.size() << " points (r = " << fmt(cfg.r) << "), empty neighborhoods " << empty
      << ", wall time " << ms << " ms\n";
  if (2 * empty > test.size()) {
    err << "error: " << empty << " of " << test.size() << " queries had no observation within sqrt(2) r\n";
    return kMostlyEmpty;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int run_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
  const auto manifolds = make_manifolds(opt.manifold);
  const Cutoff cutoff = make_cutoff(opt.cutoff, opt.rho0);
  if (opt.sigmas.empty() || opt.ns.empty()) throw DomainError("need at least one --sigma and one --n");
  if (opt.n0 < 1) throw DomainError("--n0 must be >= 1");
  if (opt.seeds < 1) throw DomainError("--seeds must be >= 1");
  if (opt.placement != "tube" && opt.placement != "manifold")
    throw DomainError("unknown placement '" + opt.placement + "' (tube, manifold)");
  const TestPlacement placement = opt.placement == "tube" ? TestPlacement::Tube : TestPlacement::OnManifold;

  for (const auto& m : manifolds) {
    for (double s : opt.sigmas) {
      if (!(s > 0.0)) throw DomainError("sigma must be positive");
      if (placement == TestPlacement::Tube && !(2.0 * s < m.reach()))
        throw DomainError("sigma " + fmt(s) + " puts test points beyond the reach of " + m.name());
      const double bound = noise_upper_bound(m, 2.0, cutoff);
      if (s > bound)
        err << "warning: sigma " << fmt(s) << " exceeds sigma_0 = " << fmt(bound) << " for " << m.name() << "\n";
    }
    for (std::size_t n : opt.ns)
      if (n < 1) throw DomainError("--n must be >= 1");
  }

  struct Cell {
    std::size_t manifold;
    double sigma;
    std::size_t n;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t mi = 0; mi < manifolds.size(); ++mi)
    for (double s : opt.sigmas)
      for (std::size_t n : opt.ns)
        for (std::size_t k = 0; k < opt.seeds; ++k) cells.push_back({mi, s, n, opt.seed_base + k});

  // Cells run concurrently; each cell is single-threaded and rows are written
  // afterwards in cell order.
  std::vector<CellOutcome> outcomes(cells.size());
  parallel_for(cells.size(), resolve_workers(opt.threads), [&](std::size_t c) {
    CellSpec spec;
    spec.sigma = cells[c].sigma;
    spec.n = cells[c].n;
    spec.n0 = opt.n0;
    spec.seed = cells[c].seed;
    spec.cutoff = cutoff;
    spec.placement = placement;
    outcomes[c] = run_cell(manifolds[cells[c].manifold], spec);
    outcomes[c].results.clear();
  });

  std::ofstream file;
  if (!opt.out_path.empty()) {
    file.open(opt.out_path);
    if (!file) throw DomainError("cannot write result file '" + opt.out_path + "'");
  }
  std::ostream& os = opt.out_path.empty() ? out : file;
  os << kResultHeader << '\n';
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& o = outcomes[c];
    const auto& r = o.report;
    os << manifolds[cells[c].manifold].name() << ',' << fmt(cells[c].sigma) << ',' << cells[c].n << ',' << opt.n0
       << ',' << cells[c].seed << ',' << fmt(o.c_d) << ',' << fmt(o.r) << ',' << fmt(r.sup_error) << ','
       << fmt(r.mean_normal_bias) << ',' << fmt(r.predicted_bias) << ',' << fmt(r.mean_tangential) << ','
       << r.empty_queries << ',' << (opt.timing ? r.runtime_ms : 0) << '\n';
  }

  // Slope rows: median sup_error over seeds against sigma (per N) and against N (per sigma).
  std::map<std::tuple<std::size_t, double, std::size_t>, std::vector<double>> groups;
  for (std::size_t c = 0; c < cells.size(); ++c)
    groups[{cells[c].manifold, cells[c].sigma, cells[c].n}].push_back(outcomes[c].report.sup_error);
  bool excluded = false;
  for (std::size_t mi = 0; mi < manifolds.size(); ++mi) {
    const double cd = bandwidth_constant(manifolds[mi].ambient_dim(), cutoff);
    for (std::size_t n : opt.ns) {
      std::vector<std::pair<double, double>> pairs;
      for (double s : opt.sigmas) {
        if (s <= opt.slope_sigma_floor) {
          excluded = true;
          continue;
        }
        pairs.emplace_back(s, median(groups[{mi, s, n}]));
      }
      std::sort(pairs.begin(), pairs.end());
      pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
      if (pairs.size() < 3) continue;
      os << manifolds[mi].name() << ",*," << n << ',' << opt.n0 << ",slope," << fmt(cd) << ",nan,"
         << fmt(loglog_slope(pairs)) << ",nan,nan,nan,0,0\n";
    }
    for (double s : opt.sigmas) {
      std::vector<std::pair<double, double>> pairs;
      for (std::size_t n : opt.ns) pairs.emplace_back(static_cast<double>(n), median(groups[{mi, s, n}]));
      std::sort(pairs.begin(), pairs.end());
      pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
      if (pairs.size() < 3) continue;
      os << manifolds[mi].name() << ',' << fmt(s) << ",*," << opt.n0 << ",slope," << fmt(cd) << ','
         << fmt(cd * s) << ',' << fmt(loglog_slope(pairs)) << ",nan,nan,nan,0,0\n";
    }
  }
  if (excluded)
    os << "# sigma <= " << fmt(opt.slope_sigma_floor)
       << " left out of sigma slope fits: N is far below the sample size the rate needs there\n";
  if (!os) throw DomainError("write failed for the result file");
  return kOk;
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

int run_oracle(const OracleOptions& opt, std::ostream& out, std::ostream& err) {
  const auto manifolds = make_manifolds(opt.manifold);
  if (manifolds.size() != 1) throw DomainError("oracle runs on a single manifold");
  const AnalyticManifold& m = manifolds.front();
  check_noise_level(m, NoiseConfig{opt.sigma, 2.0});
  if (opt.points < 1) throw DomainError("--points must be >= 1");
  const double sigma = opt.sigma;
  const DensityOracle oracle(m, sigma, opt.resolution);
  const int d = m.intrinsic_dim();

  bool all_pass = true;
  auto report = [&](const std::string& name, double residual, double tol) {
    const bool pass = residual <= tol;
    all_pass = all_pass && pass;
    out << (pass ? "PASS " : "FAIL ") << name << " residual=" << fmt(residual) << " tol=" << fmt(tol) << '\n';
  };

  const PointCloud tube = sample_test_points(m, NoiseConfig{sigma, 2.0}, opt.points, opt.seed);
  const PointCloud on = sample_on_manifold_test_points(m, opt.points, opt.seed + 1);

  // Density against its leading-order expansion in the tube.
  double ratio_dev = 0.0;
  for (std::size_t i = 0; i < tube.size(); ++i)
    ratio_dev = std::max(ratio_dev, std::abs(std::exp(oracle.log_density(tube[i]) -
                                                      log_density_expansion(m, tube[i], sigma)) -
                                             1.0));
  report("density/expansion ratio", ratio_dev, 0.02);

  // Score on M against (d/2) H, relative; inward direction.
  double on_dev = 0.0;
  bool inward = true;
  const std::size_t on_count = std::min<std::size_t>(on.size(), 20);
  for (std::size_t i = 0; i < on_count; ++i) {
    const Vector target = 0.5 * d * m.mean_curvature_vector(on[i]);
    const Vector s = oracle.score(on[i]);
    on_dev = std::max(on_dev, (s - target).norm() / target.norm());
    inward = inward && s.dot(target) > 0.0;
  }
  report("score on manifold vs (d/2)H (relative)", on_dev, 0.10);
  report("score on manifold points inward", inward ? 0.0 : 1.0, 0.0);

  // Normal component of the score at distance sigma outward.
  double normal_dev = 0.0;
  for (std::size_t i = 0; i < on_count; ++i) {
    const Vector nrm = m.outward_normal(on[i]);
    const Vector y = on[i] + sigma * nrm;
    normal_dev = std::max(normal_dev, std::abs(oracle.score(y).dot(nrm) * sigma + 1.0));
  }
  report("score normal component vs -|v|/sigma^2 (relative)", normal_dev, 0.10);

  // Analytic score against central differences of log p.
  double fd_dev = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(tube.size(), 10); ++i) {
    const Vector a = oracle.score(tube[i]);
    fd_dev = std::max(fd_dev, (a - oracle.score_finite_difference(tube[i])).norm() / a.norm());
  }
  report("score vs finite differences (relative)", fd_dev, 1e-5);

  // Population mean on M against pi(z) + (d/2) H sigma^2.
  if (m.ambient_dim() <= 3 && m.kind() != ManifoldKind::Torus) {
    const KernelConfig cfg = KernelConfig::make(m.ambient_dim(), sigma);
    double mu_dev = 0.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(on.size(), 5); ++i) {
      const Vector z = on[i];
      const Vector mu = population_mean(oracle, z, cfg);
      mu_dev = std::max(mu_dev, (mu - z - 0.5 * d * m.mean_curvature_vector(z) * sigma * sigma).norm());
    }
    report("population mean vs pi(z) + (d/2)H sigma^2", mu_dev, 10.0 * sigma * sigma * sigma);
  } else {
    out << "SKIP population mean (no windowed ball rule for " << m.name() << ")\n";
  }

  // Quadrature self-convergence.
  const DensityOracle fine(m, sigma, 2 * oracle.resolution());
  double conv = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(tube.size(), 10); ++i)
    conv = std::max(conv, std::abs(std::expm1(fine.log_density(tube[i]) - oracle.log_density(tube[i]))));
  report("density change under doubled resolution", conv, 1e-10);

  if (!all_pass) err << "one or more oracle checks failed\n";
  return all_pass ? kOk : kOracleFailure;
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

int run_sample(const SampleOptions& opt, std::ostream& out, std::ostream&) {
  const auto manifolds = make_manifolds(opt.manifold);
  if (manifolds.size() != 1) throw DomainError("sample takes a single manifold");
  const AnalyticManifold& m = manifolds.front();
  if (opt.cloud_out.empty() && opt.test_out.empty()) throw DomainError("nothing to write: give --cloud-out or --test-out");
  if (opt.placement != "tube" && opt.placement != "manifold")
    throw DomainError("unknown placement '" + opt.placement + "' (tube, manifold)");
  const unsigned workers = resolve_workers(opt.threads);
  const CellSeeds seeds = cell_seeds(opt.seed);
  if (!opt.cloud_out.empty()) {
    const PointCloud latent = sample_uniform(m, opt.n, seeds.latent, workers);
    write_file(opt.cloud_out, add_noise(latent, NoiseConfig{opt.sigma, 2.0}, seeds.noise, workers));
    out << "wrote " << opt.n << " noisy points to " << opt.cloud_out << '\n';
  }
  if (!opt.test_out.empty()) {
    const PointCloud test = opt.placement == "tube"
                                ? sample_test_points(m, NoiseConfig{opt.sigma, 2.0}, opt.n0, seeds.test, workers)
                                : sample_on_manifold_test_points(m, opt.n0, seeds.test, workers);
    write_file(opt.test_out, test);
    out << "wrote " << opt.n0 << " test points to " << opt.test_out << '\n';
  }
  return kOk;
}

}  // namespace msmf::cli
