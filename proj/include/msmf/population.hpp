#pragma once

// Population-level oracles.
//
//   p_sigma(y) = Vol(M)^-1 (2 pi sigma^2)^(-D/2) int_M exp(-|y - x|^2 / 2 sigma^2) dmu(x)
//   s_sigma(y) = grad log p_sigma(y)
//   mu_z       = int_B phi_r(y - z) y p(y) dy / int_B phi_r(y - z) p(y) dy,  B = B(z, sqrt2 r)
//
// All sums are accumulated in log space with a running maximum so tails far
// beyond the double range (sigma = 0.01 and below) stay finite.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "msmf/error.hpp"
#include "msmf/geometry.hpp"
#include "msmf/kernel.hpp"
#include "msmf/quadrature.hpp"

namespace msmf {

namespace detail {

// Streaming sum of exp(log_w_i) and of exp(log_w_i) * offset_i.
class WeightedAccumulator {
 public:
  explicit WeightedAccumulator(Eigen::Index dim) : moment_(static_cast<std::size_t>(dim)) {}

  template <class Offset>
  void add(double log_w, const Offset& offset) {
    if (log_w == -std::numeric_limits<double>::infinity()) return;
    rescale(log_w);
    const double w = std::exp(log_w - max_);
    total_.add(w);
    for (std::size_t k = 0; k < moment_.size(); ++k)
      moment_[k].add(w * offset[static_cast<Eigen::Index>(k)]);
  }

  void add(double log_w) {
    if (log_w == -std::numeric_limits<double>::infinity()) return;
    rescale(log_w);
    total_.add(std::exp(log_w - max_));
  }

  double log_total() const {
    if (max_ == -std::numeric_limits<double>::infinity()) return max_;
    return max_ + std::log(total_.value());
  }

  /// Weighted mean of the offsets.
  Vector mean() const {
    Vector m(static_cast<Eigen::Index>(moment_.size()));
    const double t = total_.value();
    for (std::size_t k = 0; k < moment_.size(); ++k) m[static_cast<Eigen::Index>(k)] = moment_[k].value() / t;
    return m;
  }

 private:
  void rescale(double log_w) {
    if (log_w <= max_) return;
    if (max_ != -std::numeric_limits<double>::infinity()) {
      const double f = std::exp(max_ - log_w);
      total_.scale(f);
      for (auto& m : moment_) m.scale(f);
    }
    max_ = log_w;
  }

  double max_ = -std::numeric_limits<double>::infinity();
  CompensatedSum total_;
  std::vector<CompensatedSum> moment_;
};

// Terms below exp(-kWindowLogCut) of the peak are skipped in windowed rules.
inline constexpr double kWindowLogCut = 46.0;

}  // namespace detail

class DensityOracle {
 public:
  /// `resolution` is the minimum node count per intrinsic dimension (0 picks
  /// 512 for curves and 256 for surfaces). Node spacing is additionally kept
  /// at or below sigma / 2 in arc length.
  DensityOracle(AnalyticManifold manifold, double sigma, int resolution = 0)
      : m_(std::move(manifold)), sigma_(sigma) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    if (m_.kind() == ManifoldKind::FermatQuartic)
      throw Unsupported("density oracle needs a parametrized manifold (circle, sphere or torus)");
    if (resolution == 0) resolution = m_.intrinsic_dim() == 1 ? 512 : 256;
    if (resolution < 64) throw DomainError("quadrature resolution must be >= 64");
    resolution_ = resolution;
    build_rule();
  }

  const AnalyticManifold& manifold() const noexcept { return m_; }
  double sigma() const noexcept { return sigma_; }
  int resolution() const noexcept { return resolution_; }
  std::size_t node_count() const noexcept { return log_weight_.size(); }

  double log_density(const Eigen::Ref<const Vector>& y) const {
    return integrate(y, false).log_total() + log_normalization();
  }

  double density(const Eigen::Ref<const Vector>& y) const { return std::exp(log_density(y)); }

  /// grad log p by differentiating under the integral:
  /// (E[x | y] - y) / sigma^2 with posterior weights exp(-|y - x|^2 / 2 sigma^2) dmu.
  Vector score(const Eigen::Ref<const Vector>& y) const {
    return integrate(y, true).mean() / (sigma_ * sigma_);
  }

  /// Central differences of log p with step h = step_factor * sigma.
  Vector score_finite_difference(const Eigen::Ref<const Vector>& y, double step_factor = 1e-5) const {
    const double h = step_factor * sigma_;
    Vector g(y.size());
    Vector yp = y, ym = y;
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      yp[k] = y[k] + h;
      ym[k] = y[k] - h;
      g[k] = (log_density(yp) - log_density(ym)) / (2.0 * h);
      yp[k] = ym[k] = y[k];
    }
    return g;
  }

 private:
  double log_normalization() const {
    return -std::log(m_.volume()) - 0.5 * m_.ambient_dim() * std::log(2.0 * std::numbers::pi * sigma_ * sigma_);
  }

  static std::size_t nodes_for_length(double length, double sigma, int resolution) {
    const auto by_spacing = static_cast<std::size_t>(std::ceil(2.0 * length / sigma));
    return std::max<std::size_t>(static_cast<std::size_t>(resolution), by_spacing);
  }

  void build_rule() {
    const double a = m_.radius();
    switch (m_.kind()) {
      case ManifoldKind::Circle: {
        // Periodic trapezoid; node count a multiple of 4 keeps the quarter-turn symmetry.
        std::size_t n = nodes_for_length(2.0 * std::numbers::pi * a, sigma_, resolution_);
        n = (n + 3) / 4 * 4;
        const auto rule = periodic_trapezoid(n);
        angle_ = rule.nodes;
        log_weight_.assign(n, std::log(a * rule.weights[0]));
        break;
      }
      case ManifoldKind::Sphere: {
        // Polar angle measured from the direction of y (the azimuthal integral
        // is then exactly 2 pi): composite Gauss-Legendre in theta.
        const std::size_t n = nodes_for_length(std::numbers::pi * a, sigma_, resolution_);
        const std::size_t panels = (n + 15) / 16;
        const auto rule = composite_gauss_legendre(0.0, std::numbers::pi, panels, 16);
        angle_ = rule.nodes;
        log_weight_.resize(rule.size());
        for (std::size_t i = 0; i < rule.size(); ++i)
          log_weight_[i] = std::log(2.0 * std::numbers::pi * a * a * std::sin(rule.nodes[i]) * rule.weights[i]);
        break;
      }
      case ManifoldKind::Torus: {
        const double b = m_.minor_radius();
        const std::size_t n_theta = nodes_for_length(2.0 * std::numbers::pi * b, sigma_, resolution_);
        const std::size_t n_phi = nodes_for_length(2.0 * std::numbers::pi * (a + b), sigma_, resolution_);
        const auto rt = periodic_trapezoid(n_theta);
        const auto rp = periodic_trapezoid(n_phi);
        const int D = m_.ambient_dim();
        points_.reserve(n_theta * n_phi * static_cast<std::size_t>(D));
        // Azimuth-major so an azimuthal window is one contiguous block per node.
        n_theta_ = n_theta;
        for (std::size_t j = 0; j < n_phi; ++j) {
          for (std::size_t i = 0; i < n_theta; ++i) {
            const double params[2] = {rt.nodes[i], rp.nodes[j]};
            const Vector x = m_.embed(params);
            points_.insert(points_.end(), x.data(), x.data() + D);
            log_weight_.push_back(std::log(b * (a + b * std::cos(rt.nodes[i])) * rt.weights[i] * rp.weights[j]));
          }
        }
        break;
      }
      case ManifoldKind::FermatQuartic: break;
    }
  }

  // log int_M exp(-|y - x|^2 / 2 sigma^2) dmu(x), optionally with the
  // posterior mean of x - y.
  detail::WeightedAccumulator integrate(const Eigen::Ref<const Vector>& y, bool with_mean) const {
    if (y.size() != m_.ambient_dim()) throw DomainError("point dimension does not match the manifold");
    const double inv2s2 = 1.0 / (2.0 * sigma_ * sigma_);
    const Eigen::Index D = y.size();
    detail::WeightedAccumulator acc(D);
    Vector offset(D);
    const double a = m_.radius();

    switch (m_.kind()) {
      case ManifoldKind::Circle: {
        const double s = y.head(2).norm();
        const double extra2 = y.tail(D - 2).squaredNorm();
        const std::size_t n = angle_.size();
        // Window of angles whose squared distance exceeds the minimum by less
        // than 2 sigma^2 * cut: 2 a s (1 - cos delta) <= 2 sigma^2 cut.
        std::size_t first = 0, count = n;
        if (s > 0.0) {
          const double c = 1.0 - detail::kWindowLogCut * sigma_ * sigma_ / (a * s);
          if (c > -1.0) {
            const double delta = std::acos(c);
            const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
            double theta_y = std::atan2(y[1], y[0]);
            if (theta_y < 0) theta_y += 2.0 * std::numbers::pi;
            const auto lo = static_cast<long long>(std::floor((theta_y - delta) / h)) - 1;
            const auto hi = static_cast<long long>(std::ceil((theta_y + delta) / h)) + 1;
            if (hi - lo + 1 < static_cast<long long>(n)) {
              first = static_cast<std::size_t>(((lo % static_cast<long long>(n)) + static_cast<long long>(n)) %
                                               static_cast<long long>(n));
              count = static_cast<std::size_t>(hi - lo + 1);
            }
          }
        }
        for (std::size_t t = 0; t < count; ++t) {
          const std::size_t i = (first + t) % n;
          const double x0 = a * std::cos(angle_[i]), x1 = a * std::sin(angle_[i]);
          const double d0 = x0 - y[0], d1 = x1 - y[1];
          const double lw = log_weight_[i] - (d0 * d0 + d1 * d1 + extra2) * inv2s2;
          if (with_mean) {
            offset[0] = d0;
            offset[1] = d1;
            offset.tail(D - 2) = -y.tail(D - 2);
            acc.add(lw, offset);
          } else {
            acc.add(lw);
          }
        }
        break;
      }
      case ManifoldKind::Sphere: {
        const double s = y.head(3).norm();
        const double extra2 = y.tail(D - 3).squaredNorm();
        const double cut = s > 0.0 ? detail::kWindowLogCut * sigma_ * sigma_ / (a * s) : 3.0;
        Vector axis = Vector::Zero(D);
        if (s > 0.0) axis.head(3) = y.head(3) / s;
        double radial = 0.0;
        for (std::size_t i = 0; i < angle_.size(); ++i) {
          const double ct = std::cos(angle_[i]);
          if (1.0 - ct > cut) break;  // nodes ascend in theta
          // |y - x|^2 = s^2 + a^2 - 2 a s cos(theta) + |y_extra|^2.
          const double gap = a * ct - s;
          const double dist2 = gap * gap + a * a * (1.0 - ct * ct) + extra2;
          const double lw = log_weight_[i] - dist2 * inv2s2;
          if (with_mean) {
            radial = gap;
            offset = radial * axis;
            // Transverse part of E[x] averages out by symmetry; for s = 0 the
            // whole of E[x] does.
            if (s == 0.0) offset.head(3).setZero();
            offset.tail(D - 3) = -y.tail(D - 3);
            acc.add(lw, offset);
          } else {
            acc.add(lw);
          }
        }
        break;
      }
      case ManifoldKind::Torus: {
        const std::size_t n_phi = log_weight_.size() / n_theta_;
        // A node at azimuth offset delta is at least s |sin delta| from y, with
        // s the distance of y from the axis; d0 is the distance to the torus.
        std::size_t first = 0, count = n_phi;
        const double s = y.head(2).norm();
        const double d0 = std::abs(std::hypot(s - a, y[2]) - m_.minor_radius());
        const double reach_sin =
            std::sqrt(d0 * d0 + 2.0 * detail::kWindowLogCut * sigma_ * sigma_) / std::max(s, 1e-300);
        if (reach_sin < 1.0) {
          const double delta = std::asin(reach_sin);
          const double h = 2.0 * std::numbers::pi / static_cast<double>(n_phi);
          double phi_y = std::atan2(y[1], y[0]);
          if (phi_y < 0) phi_y += 2.0 * std::numbers::pi;
          const auto lo = static_cast<long long>(std::floor((phi_y - delta) / h)) - 1;
          const auto hi = static_cast<long long>(std::ceil((phi_y + delta) / h)) + 1;
          const auto np = static_cast<long long>(n_phi);
          if (hi - lo + 1 < np) {
            first = static_cast<std::size_t>(((lo % np) + np) % np);
            count = static_cast<std::size_t>(hi - lo + 1);
          }
        }
        for (std::size_t t = 0; t < count * n_theta_; ++t) {
          const std::size_t i = ((first + t / n_theta_) % n_phi) * n_theta_ + t % n_theta_;
          const auto x = Eigen::Map<const Vector>(points_.data() + i * static_cast<std::size_t>(D), D);
          offset = x - y;
          const double lw = log_weight_[i] - offset.squaredNorm() * inv2s2;
          if (with_mean)
            acc.add(lw, offset);
          else
            acc.add(lw);
        }
        break;
      }
      case ManifoldKind::FermatQuartic: break;
    }
    return acc;
  }

  AnalyticManifold m_;
  double sigma_;
  int resolution_ = 0;
  std::size_t n_theta_ = 1;          // torus nodes per azimuth
  std::vector<double> angle_;       // circle / sphere nodes
  std::vector<double> points_;      // torus nodes, D per node
  std::vector<double> log_weight_;  // log of the quadrature weight times the area element
};

// ---------------------------------------------------------------------------
// Population mean over the kernel ball
// ---------------------------------------------------------------------------

/// Tensor rule over the ball of radius sqrt(2) r: nodes are offsets from z.
struct BallRule {
  std::vector<double> offsets;  // dim per node
  std::vector<double> log_weights;
  int dim = 0;
};

/// D = 1: Gauss-Legendre on [-R, R]. D = 2: radial Gauss-Legendre x angular
/// trapezoid (radial_nodes x angular_nodes). D = 3: radial x polar
/// Gauss-Legendre x azimuthal trapezoid.
inline BallRule ball_rule(int dim, double radius, std::size_t radial_nodes = 0,
                          std::size_t angular_nodes = 0) {
  BallRule rule;
  rule.dim = dim;
  auto push = [&rule](std::initializer_list<double> u, double w) {
    rule.offsets.insert(rule.offsets.end(), u.begin(), u.end());
    rule.log_weights.push_back(std::log(w));
  };
  if (dim == 1) {
    const auto gl = gauss_legendre(radial_nodes ? radial_nodes : 200);
    for (std::size_t i = 0; i < gl.size(); ++i) push({radius * gl.nodes[i]}, radius * gl.weights[i]);
  } else if (dim == 2) {
    const auto gl = gauss_legendre(radial_nodes ? radial_nodes : 200);
    const auto tr = periodic_trapezoid(angular_nodes ? angular_nodes : 256);
    for (std::size_t i = 0; i < gl.size(); ++i) {
      const double rho = 0.5 * radius * (gl.nodes[i] + 1.0);
      const double wr = 0.5 * radius * gl.weights[i] * rho;
      for (std::size_t j = 0; j < tr.size(); ++j)
        push({rho * std::cos(tr.nodes[j]), rho * std::sin(tr.nodes[j])}, wr * tr.weights[j]);
    }
  } else if (dim == 3) {
    const auto gl = gauss_legendre(radial_nodes ? radial_nodes : 64);
    const auto gp = gauss_legendre(angular_nodes ? angular_nodes / 2 : 64);
    const auto tr = periodic_trapezoid(angular_nodes ? angular_nodes : 128);
    for (std::size_t i = 0; i < gl.size(); ++i) {
      const double rho = 0.5 * radius * (gl.nodes[i] + 1.0);
      const double wr = 0.5 * radius * gl.weights[i] * rho * rho;
      for (std::size_t k = 0; k < gp.size(); ++k) {
        const double theta = 0.5 * std::numbers::pi * (gp.nodes[k] + 1.0);
        const double wt = 0.5 * std::numbers::pi * gp.weights[k] * std::sin(theta);
        for (std::size_t j = 0; j < tr.size(); ++j)
          push({rho * std::sin(theta) * std::cos(tr.nodes[j]), rho * std::sin(theta) * std::sin(tr.nodes[j]),
                rho * std::cos(theta)},
               wr * wt * tr.weights[j]);
      }
    }
  } else {
    throw Unsupported("ball quadrature is implemented for D <= 3");
  }
  return rule;
}

/// mu_z for an arbitrary log-density on R^D (D <= 3).
template <class LogDensity>
Vector population_mean(LogDensity&& log_density, const Eigen::Ref<const Vector>& z,
                       const KernelConfig& cfg, const BallRule& rule) {
  const int D = static_cast<int>(z.size());
  if (rule.dim != D || cfg.ambient_dim != D) throw DomainError("dimension mismatch in population_mean");
  const double inv2r2 = 1.0 / (2.0 * cfg.r * cfg.r);
  const double support = cfg.support_radius();
  detail::WeightedAccumulator acc(D);
  Vector y(D);
  for (std::size_t i = 0; i < rule.log_weights.size(); ++i) {
    const auto u = Eigen::Map<const Vector>(rule.offsets.data() + i * static_cast<std::size_t>(D), D);
    const double u2 = u.squaredNorm();
    const double chi = cfg.cutoff(std::sqrt(u2) / support);
    if (chi <= 0.0) continue;
    y = z + u;
    acc.add(rule.log_weights[i] - u2 * inv2r2 + std::log(chi) + log_density(y), u);
  }
  return z + acc.mean();
}

template <class LogDensity>
Vector population_mean(LogDensity&& log_density, const Eigen::Ref<const Vector>& z,
                       const KernelConfig& cfg) {
  return population_mean(std::forward<LogDensity>(log_density), z, cfg,
                         ball_rule(static_cast<int>(z.size()), cfg.support_radius()));
}

/// mu_z for the noisy density of an oracle. Unsupported for D >= 4.
inline Vector population_mean(const DensityOracle& oracle, const Eigen::Ref<const Vector>& z,
                              const KernelConfig& cfg) {
  if (oracle.manifold().ambient_dim() >= 4) throw Unsupported("population mean is implemented for D <= 3");
  return population_mean([&oracle](const Vector& y) { return oracle.log_density(y); }, z, cfg);
}

// ---------------------------------------------------------------------------
// Leading-order expansion of the noisy density
// ---------------------------------------------------------------------------

/// log of (Vol(M) (2 pi sigma^2)^((D-d)/2))^-1 exp(-|v_y|^2 / 2 sigma^2) det(A_y)^(-1/2).
inline double log_density_expansion(const AnalyticManifold& m, const Eigen::Ref<const Vector>& y, double sigma) {
  if (!m.has_curvature_oracle()) throw Unsupported("density expansion needs the curvature oracle");
  const double det = m.shape_determinant(y);  // throws OutOfTube
  const double v2 = (y - m.project(y)).squaredNorm();
  return -std::log(m.volume()) -
         0.5 * (m.ambient_dim() - m.intrinsic_dim()) * std::log(2.0 * std::numbers::pi * sigma * sigma) -
         v2 / (2.0 * sigma * sigma) - 0.5 * std::log(det);
}

inline double density_expansion(const AnalyticManifold& m, const Eigen::Ref<const Vector>& y, double sigma) {
  return std::exp(log_density_expansion(m, y, sigma));
}

/// Leading term of the score: -v_y / sigma^2 + (d/2) H_{pi(y)}.
inline Vector score_expansion(const AnalyticManifold& m, const Eigen::Ref<const Vector>& y, double sigma) {
  const Vector p = m.project(y);
  return -(y - p) / (sigma * sigma) + 0.5 * m.intrinsic_dim() * m.mean_curvature_vector(p);
}

}  // namespace msmf
