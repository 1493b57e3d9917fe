#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "msmf/error.hpp"

namespace msmf {

/// Neumaier-compensated running sum. Order of `add` calls fixes the result.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) noexcept {
    add(v);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }
  void scale(double f) noexcept {
    sum_ *= f;
    comp_ *= f;
  }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Streaming log(sum_i exp(a_i)) without overflow or underflow.
class LogSumExp {
 public:
  void add(double log_term) noexcept {
    if (log_term == -std::numeric_limits<double>::infinity()) return;
    if (log_term > max_) {
      if (max_ != -std::numeric_limits<double>::infinity()) sum_.scale(std::exp(max_ - log_term));
      max_ = log_term;
    }
    sum_.add(std::exp(log_term - max_));
  }
  double value() const noexcept {
    if (max_ == -std::numeric_limits<double>::infinity()) return max_;
    return max_ + std::log(sum_.value());
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  CompensatedSum sum_;
};

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
inline QuadratureRule gauss_legendre(std::size_t n) {
  if (n == 0) throw DomainError("Gauss-Legendre rule needs at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Returns {P_n(x), P_n'(x)}.
  auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = pk;
    }
    const double dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    return std::pair{p1, dp};
  };
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Composite Gauss-Legendre rule on [a, b]: `panels` equal panels of `order` nodes each.
inline QuadratureRule composite_gauss_legendre(double a, double b, std::size_t panels,
                                               std::size_t order = 16) {
  if (panels == 0) throw DomainError("composite rule needs at least one panel");
  const QuadratureRule base = gauss_legendre(order);
  QuadratureRule rule;
  rule.nodes.reserve(panels * order);
  rule.weights.reserve(panels * order);
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    for (std::size_t i = 0; i < order; ++i) {
      rule.nodes.push_back(lo + 0.5 * h * (base.nodes[i] + 1.0));
      rule.weights.push_back(0.5 * h * base.weights[i]);
    }
  }
  return rule;
}

/// Periodic trapezoid rule on [0, 2*pi) with n nodes.
inline QuadratureRule periodic_trapezoid(std::size_t n) {
  if (n == 0) throw DomainError("trapezoid rule needs at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.assign(n, 2.0 * std::numbers::pi / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    rule.nodes[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
  return rule;
}

}  // namespace msmf
