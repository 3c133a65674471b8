#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "stefan/harness.hpp"

using namespace stefan;

namespace {

std::vector<Segment> polygon(int m, auto&& radius) {
  std::vector<Segment> segs;
  for (int k = 0; k < m; ++k) {
    const double a = 2.0 * std::numbers::pi * k / m;
    const double b = 2.0 * std::numbers::pi * (k + 1) / m;
    segs.push_back({radius(a) * Vec2{std::cos(a), std::sin(a)}, radius(b) * Vec2{std::cos(b), std::sin(b)}});
  }
  return segs;
}

}  // namespace

TEST(Measure, ExactCircle) {
  const auto segs = polygon(720, [](double) { return 0.3; });
  EXPECT_NEAR(mean_radius(segs), 0.3, 1e-6);
  EXPECT_LT(radius_stddev(segs), 1e-6);
  EXPECT_NEAR(tip_x(segs), 0.3, 1e-12);
}

TEST(Measure, ArmLengthsOfAStar) {
  // Six-pointed star with tips along pi/2 + k pi/3; one arm is longer.
  auto r = [](double a) {
    double len = 1.0 + 0.5 * std::pow(std::cos(3.0 * (a - std::numbers::pi / 2.0)), 8);
    if (std::abs(a - 7.0 * std::numbers::pi / 6.0) < 0.3) len *= 1.1;
    return len;
  };
  const auto segs = polygon(3600, r);
  ArmOptions opt;
  opt.sectors = 6;
  opt.offset = std::numbers::pi / 2.0;
  const auto arms = arm_lengths(segs, opt);
  ASSERT_EQ(arms.size(), 6u);
  for (int k = 0; k < 6; ++k) {
    if (k == 2)
      EXPECT_NEAR(arms[2], 1.65, 1e-3);
    else
      EXPECT_NEAR(arms[static_cast<std::size_t>(k)], 1.5, 1e-3);
  }
}

TEST(Measure, EmptyInterfaceThrows) {
  const std::vector<Segment> none;
  EXPECT_THROW((void)mean_radius(none), EmptyInterface);
  EXPECT_THROW((void)tip_x(none), EmptyInterface);
  EXPECT_THROW((void)arm_lengths(none), EmptyInterface);
}

TEST(Measure, TipVelocityDifferences) {
  const auto v = tip_x_velocity({0.0, 1.0, 3.0}, {1.0, 2.0, 6.0});
  ASSERT_EQ(v.size(), 2u);
  EXPECT_DOUBLE_EQ(v[0], 1.0);
  EXPECT_DOUBLE_EQ(v[1], 2.0);
}

TEST(Contour, CircleFromLevelSet) {
  LevelSet ls = LevelSet::from(Grid(64, {-0.5, -0.5}, 1.0), [](Vec2 p) { return norm(p) - 0.3; });
  const auto segs = extract_contour(ls);
  EXPECT_NEAR(mean_radius(segs), 0.3, 1e-3);
  EXPECT_LT(radius_stddev(segs), 1e-3);
}

TEST(Contour, AxisAlignedFrontIsVertical) {
  LevelSet ls = LevelSet::from(Grid(32, {0.0, 0.0}, 1.0), [](Vec2 p) { return p.x - 0.4123; });
  const auto segs = extract_contour(ls);
  ASSERT_FALSE(segs.empty());
  for (const Segment& s : segs) {
    EXPECT_NEAR(s.a.x, s.b.x, 1e-12);
    EXPECT_NEAR(s.a.x, 0.4123, 1e-12);
  }
}

TEST(ErrorReport, OrdersAreRatios) {
  ErrorReport r;
  r.grids = {{32, 1e-3, 4e-4, 1e-3}, {64, 2.5e-4, 1e-4, 2.5e-4}, {128, 6e-5, 2e-5, 8e-5}};
  EXPECT_DOUBLE_EQ(r.l1_order(1), 2.0);
  EXPECT_NEAR(r.l1_order(2), std::log2(5.0), 1e-15);
  ErrorReport doubled = r;
  for (auto& g : doubled.grids) {
    g.l1 *= 2.0;
    g.linf *= 2.0;
  }
  for (std::size_t k = 1; k < r.grids.size(); ++k) {
    EXPECT_DOUBLE_EQ(doubled.l1_order(k), r.l1_order(k));
    EXPECT_DOUBLE_EQ(doubled.linf_order(k), r.linf_order(k));
  }
}

TEST(Scenarios, DefaultsValidateAndNameRoundTrip) {
  for (Scenario s : {Scenario::PlanarStefan, Scenario::CrankLayer, Scenario::FrankSphere, Scenario::ShrinkingCircle,
                     Scenario::CrystalGrowth, Scenario::Sixfold, Scenario::TipVelocity}) {
    const CaseConfig c = default_config(s);
    EXPECT_FALSE(validate(c).has_value()) << scenario_name(s);
    EXPECT_EQ(scenario_from_name(scenario_name(s)), s);
  }
  EXPECT_FALSE(scenario_from_name("rayleigh_benard").has_value());
}

TEST(Scenarios, ReferenceParameters) {
  const CaseConfig flower = default_config(Scenario::CrystalGrowth);
  EXPECT_EQ(flower.st, 0.5);
  EXPECT_EQ(flower.t_liquid, -0.5);
  EXPECT_EQ(flower.eps_kappa, 2e-3);
  EXPECT_EQ(flower.eps_v, 2e-3);
  EXPECT_NEAR(flower.interface.value, 1.0 / 15.0, 1e-15);
  EXPECT_EQ(flower.interface.amplitude, 0.3);

  const CaseConfig six = default_config(Scenario::Sixfold);
  EXPECT_EQ(six.domain_min, -2.0);
  EXPECT_EQ(six.domain_max, 2.0);
  EXPECT_EQ(six.t_liquid, -0.8);
  EXPECT_EQ(six.eps_v, 1e-3);
  EXPECT_EQ(six.t_end, 3.6e-2);

  const CaseConfig tip = default_config(Scenario::TipVelocity);
  EXPECT_EQ(tip.domain_min, -400.0);
  EXPECT_EQ(tip.t_liquid, -0.55);

  const CaseConfig frank = default_config(Scenario::FrankSphere);
  EXPECT_EQ(frank.t_start, 1.0);
  EXPECT_NEAR(reference_solution(frank)->interface_position(1.0), 1.56, 0.01);
}

TEST(Scenarios, ValidationRejectsBadValues) {
  CaseConfig c = default_config(Scenario::PlanarStefan);
  c.n = 4;
  EXPECT_TRUE(validate(c).has_value());
  c = default_config(Scenario::PlanarStefan);
  c.st = -1.0;
  EXPECT_TRUE(validate(c).has_value());
  c = default_config(Scenario::PlanarStefan);
  c.eps_kappa = -1.0;
  EXPECT_TRUE(validate(c).has_value());
  EXPECT_THROW((void)run_case(c), ValidationError);
}

TEST(RunCase, PlanarCoarseErrorAndDeterminism) {
  CaseConfig c = default_config(Scenario::PlanarStefan);
  c.n = 32;
  const CaseResult a = run_case(c);
  ASSERT_TRUE(a.errors.has_value());
  EXPECT_LE(a.errors->l1, 3.0 * 1.59e-4);
  const CaseResult b = run_case(c);
  EXPECT_EQ(a.steps, b.steps);
  EXPECT_EQ(a.errors->l1, b.errors->l1);
  EXPECT_EQ(a.errors->linf, b.errors->linf);
  ASSERT_EQ(a.final_interface.size(), b.final_interface.size());
  for (std::size_t k = 0; k < a.final_interface.size(); ++k) {
    EXPECT_EQ(a.final_interface[k].a, b.final_interface[k].a);
    EXPECT_EQ(a.final_interface[k].b, b.final_interface[k].b);
  }
}

TEST(RunCase, SnapshotCadence) {
  CaseConfig c = default_config(Scenario::ShrinkingCircle);
  c.n = 32;
  c.max_steps = 6;
  c.output_every = 2;
  c.write_fields = true;
  std::vector<int> steps;
  const CaseResult r = run_case(c, [&](const Snapshot& s) {
    steps.push_back(s.step);
    EXPECT_FALSE(s.interface.empty());
    EXPECT_FALSE(s.fields.empty());
  });
  EXPECT_EQ(r.steps, 6);
  EXPECT_EQ(steps, (std::vector<int>{0, 2, 4, 6}));
  EXPECT_EQ(r.timeseries.size(), 7u);
}

TEST(ConvergenceSweep, InitialGradientTable) {
  const ErrorReport r = initial_gradient_sweep({32, 64});
  ASSERT_EQ(r.grids.size(), 2u);
  EXPECT_LE(r.grids[0].l1, 3.0 * 3.18e-4);
  EXPECT_GE(r.grids[0].l1, 3.18e-4 / 3.0);
  EXPECT_LE(r.grids[1].l1, 3.0 * 8.04e-5);
  EXPECT_GE(r.grids[1].l1, 8.04e-5 / 3.0);
  EXPECT_NEAR(r.l1_order(1), 2.0, 0.2);
}

TEST(ConvergenceSweep, ThreadedMatchesSerial) {
  CaseConfig c = default_config(Scenario::PlanarStefan);
  c.t_end = 0.01;
  const ErrorReport a = convergence_sweep(c, {16, 32}, 1);
  const ErrorReport b = convergence_sweep(c, {16, 32}, 2);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(a.grids[k].n, b.grids[k].n);
    EXPECT_EQ(a.grids[k].l1, b.grids[k].l1);
    EXPECT_EQ(a.grids[k].linf, b.grids[k].linf);
  }
}
