#pragma once

// Truncated rotation-invariant Gaussian kernel
//
//   phi_r(u) = (2 pi r^2)^(-D/2) exp(-|u|^2 / 2r^2) chi(|u| / (sqrt(2) r)),
//
// supported on the ball of radius sqrt(2) r, and the bandwidth constant
// c_D = sqrt(A / 2B) that sets r = c_D sigma.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "msmf/error.hpp"
#include "msmf/quadrature.hpp"

namespace msmf {

// ---------------------------------------------------------------------------
// Incomplete gamma function
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr int kGammaMaxIterations = 1000;
inline constexpr double kGammaEpsilon = 1e-17;

// sum_{n>=0} x^n / (s (s+1) ... (s+n)); converges fast for x < s + 1.
inline double gamma_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  for (int n = 1; n < kGammaMaxIterations; ++n) {
    term *= x / (s + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEpsilon) return sum;
  }
  throw DomainError("incomplete gamma series did not converge");
}

// Continued fraction for exp(x) x^(-s) Gamma(s, x) (modified Lentz), x >= s + 1.
inline double gamma_continued_fraction(double s, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIterations; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEpsilon) return h;
  }
  throw DomainError("incomplete gamma continued fraction did not converge");
}

}  // namespace detail

/// Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s).
inline double regularized_lower_gamma(double s, double x) {
  if (!(s > 0.0)) throw DomainError("incomplete gamma requires s > 0, got " + std::to_string(s));
  if (!(x >= 0.0)) throw DomainError("incomplete gamma requires x >= 0, got " + std::to_string(x));
  if (x == 0.0) return 0.0;
  const double log_prefactor = s * std::log(x) - x - std::lgamma(s);
  if (x < s + 1.0) return std::exp(log_prefactor) * detail::gamma_series(s, x);
  return 1.0 - std::exp(log_prefactor) * detail::gamma_continued_fraction(s, x);
}

/// Lower incomplete gamma function gamma(s, x) = int_0^x t^(s-1) e^(-t) dt.
inline double lower_incomplete_gamma(double s, double x) {
  if (!(s > 0.0)) throw DomainError("incomplete gamma requires s > 0, got " + std::to_string(s));
  if (!(x >= 0.0)) throw DomainError("incomplete gamma requires x >= 0, got " + std::to_string(x));
  if (x == 0.0) return 0.0;
  const double log_xs = s * std::log(x) - x;
  if (x < s + 1.0) return std::exp(log_xs) * detail::gamma_series(s, x);
  // Gamma(s) - Gamma(s, x); P >= ~1/2 here so the subtraction is benign.
  return std::tgamma(s) - std::exp(log_xs) * detail::gamma_continued_fraction(s, x);
}

// ---------------------------------------------------------------------------
// Cutoff
// ---------------------------------------------------------------------------

enum class CutoffKind { Hard, Smooth };

/// Radial cutoff chi on t = |u| / (sqrt(2) r): 1 on [0, rho0], 0 on [1, inf).
struct Cutoff {
  CutoffKind kind = CutoffKind::Hard;
  double rho0 = 0.9;

  static Cutoff hard() { return {CutoffKind::Hard, 1.0}; }
  static Cutoff smooth(double rho0 = 0.9) {
    if (!(rho0 > 0.0 && rho0 < 1.0))
      throw DomainError("smooth cutoff needs rho0 in (0, 1), got " + std::to_string(rho0));
    return {CutoffKind::Smooth, rho0};
  }

  double operator()(double t) const noexcept {
    if (kind == CutoffKind::Hard) return t <= 1.0 ? 1.0 : 0.0;
    if (t <= rho0) return 1.0;
    if (t >= 1.0) return 0.0;
    const double s = (t - rho0) / (1.0 - rho0);
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
  }

  std::string name() const { return kind == CutoffKind::Hard ? "hard" : "smooth"; }
};

// ---------------------------------------------------------------------------
// Bandwidth constant
// ---------------------------------------------------------------------------

/// Radial moment int_0^1 rho^k exp(-rho^2) chi(rho) d rho.
inline double radial_moment(int k, const Cutoff& cutoff) {
  if (cutoff.kind == CutoffKind::Hard) return 0.5 * lower_incomplete_gamma(0.5 * (k + 1), 1.0);
  auto integrand = [&](double rho) {
    return std::pow(rho, k) * std::exp(-rho * rho) * cutoff(rho);
  };
  // chi is smooth on each piece; split at rho0 where it stops being identically 1.
  CompensatedSum sum;
  for (const auto& rule : {composite_gauss_legendre(0.0, cutoff.rho0, 8, 32),
                           composite_gauss_legendre(cutoff.rho0, 1.0, 32, 32)})
    for (std::size_t i = 0; i < rule.size(); ++i) sum.add(rule.weights[i] * integrand(rule.nodes[i]));
  return sum.value();
}

/// c_D = sqrt(A / 2B), with A and B the zeroth and second moments of the
/// kernel on the unit ball. For the hard cutoff this is
/// sqrt(D gamma(D/2, 1) / (2 gamma(D/2 + 1, 1))).
inline double bandwidth_constant(int ambient_dim, const Cutoff& cutoff = Cutoff::hard()) {
  if (ambient_dim < 1) throw DomainError("ambient dimension must be >= 1");
  const double d = ambient_dim;
  // A = |S^{D-1}| I_{D-1},  B = |S^{D-1}| I_{D+1} / D.
  return std::sqrt(d * radial_moment(ambient_dim - 1, cutoff) /
                   (2.0 * radial_moment(ambient_dim + 1, cutoff)));
}

/// Kernel moments A = int_B phi_1(sqrt2 u) du and B = int_B (u_1)^2 phi_1(sqrt2 u) du.
struct KernelMoments {
  double zeroth;
  double second;
};

inline KernelMoments kernel_moments(int ambient_dim, const Cutoff& cutoff = Cutoff::hard()) {
  const double d = ambient_dim;
  const double sphere_area = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
  const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * d);
  return {norm * sphere_area * radial_moment(ambient_dim - 1, cutoff),
          norm * sphere_area * radial_moment(ambient_dim + 1, cutoff) / d};
}

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

struct KernelConfig {
  int ambient_dim = 2;
  double sigma = 0.1;
  double r = 0.0;
  Cutoff cutoff;

  /// Bandwidth r = c_D sigma for the given cutoff.
  static KernelConfig make(int ambient_dim, double sigma, Cutoff cutoff = Cutoff::hard()) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    return {ambient_dim, sigma, bandwidth_constant(ambient_dim, cutoff) * sigma, cutoff};
  }

  double support_radius() const noexcept { return std::numbers::sqrt2 * r; }
  double log_normalization() const noexcept {
    return -0.5 * ambient_dim * std::log(2.0 * std::numbers::pi * r * r);
  }
};

inline constexpr double kWeightUnderflow = 1e-300;

/// Kernel value for a squared distance; zero outside the support.
inline double kernel_weight_sq(double dist2, const KernelConfig& cfg) noexcept {
  const double support2 = 2.0 * cfg.r * cfg.r;
  if (dist2 > support2) return 0.0;
  const double chi = cfg.cutoff.kind == CutoffKind::Hard ? 1.0 : cfg.cutoff(std::sqrt(dist2 / support2));
  const double w = std::exp(cfg.log_normalization() - dist2 / (2.0 * cfg.r * cfg.r)) * chi;
  return w < kWeightUnderflow ? 0.0 : w;
}

inline double kernel_weight(const Eigen::Ref<const Eigen::VectorXd>& diff, const KernelConfig& cfg) {
  return kernel_weight_sq(diff.squaredNorm(), cfg);
}

}  // namespace msmf
