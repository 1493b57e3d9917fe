#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <numbers>

#include "msmf/quadrature.hpp"

namespace {

double integrate(const msmf::QuadratureRule& rule, auto&& f) {
  msmf::CompensatedSum s;
  for (std::size_t i = 0; i < rule.size(); ++i) s.add(rule.weights[i] * f(rule.nodes[i]));
  return s.value();
}

TEST(GaussLegendre, ExactForPolynomialsUpToDegree2nMinus1) {
  for (std::size_t n : {1u, 2u, 5u, 16u, 33u}) {
    const auto rule = msmf::gauss_legendre(n);
    for (std::size_t k = 0; k < 2 * n; ++k) {
      const double exact = k % 2 ? 0.0 : 2.0 / static_cast<double>(k + 1);
      EXPECT_NEAR(integrate(rule, [k](double x) { return std::pow(x, static_cast<double>(k)); }), exact, 1e-14)
          << "n=" << n << " k=" << k;
    }
  }
}

TEST(GaussLegendre, MatchesBoostNodes) {
  // Boost stores the nonnegative half of the 20-point rule.
  const auto& abscissa = boost::math::quadrature::gauss<double, 20>::abscissa();
  const auto& weights = boost::math::quadrature::gauss<double, 20>::weights();
  const auto rule = msmf::gauss_legendre(20);
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    EXPECT_NEAR(rule.nodes[10 + i], abscissa[i], 1e-15);
    EXPECT_NEAR(rule.weights[10 + i], weights[i], 1e-15);
  }
}

TEST(GaussLegendre, LargeOrderStable) {
  const auto rule = msmf::gauss_legendre(200);
  double total = 0.0;
  for (double w : rule.weights) {
    ASSERT_GT(w, 0.0);
    total += w;
  }
  EXPECT_NEAR(total, 2.0, 1e-13);
  EXPECT_NEAR(integrate(rule, [](double x) { return std::exp(x); }), std::exp(1.0) - std::exp(-1.0), 1e-13);
}

TEST(CompositeGaussLegendre, IntegratesOscillatoryFunction) {
  const auto rule = msmf::composite_gauss_legendre(0.0, 10.0, 20, 16);
  EXPECT_NEAR(integrate(rule, [](double x) { return std::sin(7.0 * x); }), (1.0 - std::cos(70.0)) / 7.0, 1e-13);
}

TEST(PeriodicTrapezoid, SpectralForPeriodicIntegrand) {
  const auto rule = msmf::periodic_trapezoid(32);
  const double exact = 2.0 * std::numbers::pi * boost::math::cyl_bessel_i(0, 1.0);
  EXPECT_NEAR(integrate(rule, [](double t) { return std::exp(std::cos(t)); }), exact, 1e-13);
}

TEST(LogSumExp, HandlesExtremeMagnitudes) {
  msmf::LogSumExp lse;
  lse.add(-1000.0);
  lse.add(-1000.0 + std::log(3.0));
  EXPECT_NEAR(lse.value(), -1000.0 + std::log(4.0), 1e-12);

  msmf::LogSumExp big;
  big.add(800.0);
  big.add(800.0);
  EXPECT_NEAR(big.value(), 800.0 + std::log(2.0), 1e-12);

  msmf::LogSumExp empty;
  EXPECT_EQ(empty.value(), -std::numeric_limits<double>::infinity());
}

TEST(CompensatedSum, RecoversCancelledTerms) {
  msmf::CompensatedSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  EXPECT_EQ(s.value(), 2.0);
}

}  // namespace
