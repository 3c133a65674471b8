#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <numbers>

#include "stefan/analytic.hpp"
#include "stefan/harness.hpp"

using namespace stefan;
using namespace stefan::analytic;

namespace {

double e1_quadrature(double x) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([x](double t) { return std::exp(-x * (1.0 + t)) / (1.0 + t); });
}

/// Second-order finite-difference residual of T_t - D lap T at x, t.
double heat_residual(const ReferenceSolution& s, Vec2 x, double t, double h) {
  auto T = [&](Vec2 p, double tt) { return s.phase_temperature(p, tt, Phase::Liquid); };
  const double tt = (T(x, t + h) - T(x, t - h)) / (2.0 * h);
  const double lap = (T(x + Vec2{h, 0}, t) + T(x - Vec2{h, 0}, t) + T(x + Vec2{0, h}, t) + T(x - Vec2{0, h}, t) -
                      4.0 * T(x, t)) /
                     (h * h);
  return tt - lap;
}

}  // namespace

TEST(Erf, MatchesLibm) {
  for (double x = -5.0; x <= 5.0; x += 0.013) {
    EXPECT_NEAR(analytic::erf(x), std::erf(x), 1e-12);
    EXPECT_NEAR(analytic::erfc(x), std::erfc(x), 1e-12 * std::max(1.0, std::erfc(x)));
  }
}

TEST(E1, QuadratureOracle) {
  for (double x : {1e-3, 0.05, 0.5, 1.0, 1.5, 3.0, 10.0, 40.0}) {
    const double q = e1_quadrature(x);
    EXPECT_LE(std::abs(exp_integral_e1(x) - q), 1e-10 * q) << x;
  }
  EXPECT_NEAR(exp_integral_e1(1.0), 0.219383934, 1e-9);
}

TEST(E1, SmallArgumentAsymptote) {
  const double x = 1e-6;
  const double asym = -kEulerGamma - std::log(x);
  EXPECT_LE(std::abs(exp_integral_e1(x) - asym), 1e-5 * asym);
}

TEST(E1, MonotoneAndDomain) {
  EXPECT_LT(exp_integral_e1(2.0), exp_integral_e1(1.0));
  EXPECT_THROW((void)exp_integral_e1(0.0), DomainError);
  EXPECT_THROW((void)exp_integral_e1(-1.0), DomainError);
  for (double x : {0.5, 2.0, 50.0}) EXPECT_NEAR(scaled_e1(x), std::exp(x) * exp_integral_e1(x), 1e-12 * scaled_e1(x));
}

TEST(Frank, GrowthConstant) {
  const double s = frank_parameters(-0.5);
  EXPECT_NEAR(s, 1.56, 0.01);
  EXPECT_LE(std::abs(frank_far_field(s) + 0.5), 1e-10);
  // F2' from the chain rule, checked by central differences.
  const double h = 1e-5;
  EXPECT_NEAR(f2_prime(s), (f2(s + h) - f2(s - h)) / (2.0 * h), 1e-8);
  EXPECT_NEAR(f2_prime(s), -2.0 / s * std::exp(-s * s / 4.0), 1e-14);
}

TEST(Frank, GrowthConstantIncreasesWithUndercooling) {
  const double a = frank_parameters(-0.3);
  const double b = frank_parameters(-0.5);
  const double c = frank_parameters(-0.7);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
  EXPECT_THROW((void)frank_parameters(0.5), Error);
}

TEST(Reference, InterfaceValuesVanish) {
  const ReferenceSolution planar(PlanarStefan{1.0});
  EXPECT_NEAR(reference_temperature(planar, {0.3, 0.1}, 0.3), 0.0, 1e-15);
  const ReferenceSolution crank(CrankLayer{0.9});
  const double t = 0.05;
  EXPECT_NEAR(crank.phase_temperature({0.2, 1.0 - 2.0 * 0.9 * std::sqrt(t)}, t, Phase::Liquid), 0.0, 1e-14);
  EXPECT_NEAR(crank.phase_temperature({0.2, 1.0}, t, Phase::Liquid), 1.0, 1e-14);
}

TEST(Reference, FrankValueFromE1) {
  const double s = 1.56;
  const ReferenceSolution frank(FrankSphere{s, -0.5});
  const double t = 1.3;
  const Vec2 x{0.0, 2.0 * std::sqrt(t)};  // similarity variable 2
  const double expected = -0.5 * (1.0 - exp_integral_e1(1.0) / exp_integral_e1(s * s / 4.0));
  EXPECT_NEAR(reference_temperature(frank, x, t), expected, 1e-13);
  EXPECT_EQ(reference_temperature(frank, {0.1, 0.0}, t), 0.0);
}

TEST(Reference, SatisfiesHeatEquation) {
  const double h = 1e-3;
  const ReferenceSolution planar(PlanarStefan{1.0});
  const ReferenceSolution crank(CrankLayer{0.9});
  const ReferenceSolution frank(FrankSphere{frank_parameters(-0.5), -0.5});
  for (double t : {0.2, 0.5}) {
    EXPECT_LT(std::abs(heat_residual(planar, {t + 0.3, 0.1}, t, h)), 1e-4);
    EXPECT_LT(std::abs(heat_residual(crank, {0.0, 0.9}, t, h)), 1e-4);
  }
  for (double t : {1.2, 2.0}) EXPECT_LT(std::abs(heat_residual(frank, {1.7, 0.9}, t, h)), 1e-4);
}

TEST(Reference, FrankStefanCondition) {
  const double s = frank_parameters(-0.5);
  const ReferenceSolution frank(FrankSphere{s, -0.5});
  for (double t : {1.0, 1.7, 2.5}) {
    const double r = frank.interface_position(t);
    const double h = 1e-6;
    // Liquid gradient into the liquid at the front; v = -St g_L with St = 1.
    const double gl = (-3.0 * frank.phase_temperature({r, 0.0}, t, Phase::Liquid) +
                       4.0 * frank.phase_temperature({r + h, 0.0}, t, Phase::Liquid) -
                       frank.phase_temperature({r + 2.0 * h, 0.0}, t, Phase::Liquid)) /
                      (2.0 * h);
    EXPECT_NEAR(-gl, s / (2.0 * std::sqrt(t)), 1e-6);
  }
}

TEST(Reference, CurvatureFlowRadius) {
  const ReferenceSolution c(CurvatureFlowCircle{0.45});
  EXPECT_NEAR(c.interface_position(0.01), std::sqrt(0.45 * 0.45 - 0.02), 1e-15);
  EXPECT_LT(c.level_set({0.0, 0.0}, 0.01), 0.0);
}

TEST(Reference, CrankStefanNumber) {
  const double st = crank_stefan_number(0.9);
  // Similarity relation: St = sqrt(pi) lambda exp(lambda^2) erf(lambda).
  EXPECT_NEAR(st, std::sqrt(std::numbers::pi) * 0.9 * std::exp(0.81) * std::erf(0.9), 1e-10);
}
