#include <gtest/gtest.h>

#include <cmath>

#include "stefan/grid.hpp"

using namespace stefan;

namespace {

Grid unit_grid(int n) { return Grid(n, {0.0, 0.0}, 1.0); }

}  // namespace

TEST(Grid, CellCentersAndIndexing) {
  const Grid g(8, {-1.0, 2.0}, 4.0);
  EXPECT_DOUBLE_EQ(g.dx(), 0.5);
  EXPECT_DOUBLE_EQ(g.cell_center(0, 0).x, -0.75);
  EXPECT_DOUBLE_EQ(g.cell_center(7, 3).y, 3.75);
  EXPECT_EQ(g.index(3, 2), 19u);
  EXPECT_EQ(g.unflatten(19), (CellIndex{3, 2}));
  EXPECT_EQ(g.containing_cell({0.1, 2.9}), (CellIndex{2, 1}));
}

TEST(ApplyBc, NeumannConstantFillsGhosts) {
  ScalarField f(unit_grid(8), 5.0);
  f.apply_bc();
  for (int k = -Grid::kGhost; k < 8 + Grid::kGhost; ++k)
    for (int g = 1; g <= Grid::kGhost; ++g) {
      EXPECT_EQ(f(-g, k), 5.0);
      EXPECT_EQ(f(7 + g, k), 5.0);
      EXPECT_EQ(f(k, -g), 5.0);
      EXPECT_EQ(f(k, 7 + g), 5.0);
    }
}

TEST(ApplyBc, DirichletReflection) {
  const Grid g = unit_grid(8);
  ScalarField f(g);
  f.set_boundary(Side::Top, BoundaryRule::dirichlet(1.0));
  f.fill([](Vec2 p) { return p.y; });
  for (int i = 0; i < 8; ++i) {
    EXPECT_NEAR(f(i, 8), 2.0 * 1.0 - f(i, 7), 1e-15);
    EXPECT_NEAR(0.5 * (f(i, 8) + f(i, 7)), 1.0, 1e-15);
  }
}

TEST(ApplyBc, DirichletProfile) {
  const Grid g = unit_grid(4);
  ScalarField f(g, 0.0);
  f.set_boundary(Side::Left, BoundaryRule::dirichlet_profile({1.0, 2.0, 3.0, 4.0}));
  f.apply_bc();
  for (int j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(0.5 * (f(-1, j) + f(0, j)), j + 1.0);
}

TEST(ApplyBc, PeriodicWraps) {
  ScalarField f(unit_grid(4), 0.0, uniform_boundaries(BoundaryRule::periodic()));
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) f(i, j) = i;
  f.apply_bc();
  for (int j = 0; j < 4; ++j) {
    EXPECT_EQ(f(-1, j), 3.0);
    EXPECT_EQ(f(-2, j), 2.0);
    EXPECT_EQ(f(4, j), 0.0);
  }
}

TEST(ApplyBc, LinearExtrapolationReproducesLinear) {
  ScalarField f(unit_grid(8), 0.0, uniform_boundaries(BoundaryRule::linear_extrapolation()));
  f.fill([](Vec2 p) { return 0.3 + 2.0 * p.x - 0.7 * p.y; });
  const Grid& g = f.grid();
  for (int k = -2; k < 10; ++k)
    for (int m : {-2, -1, 8, 9}) {
      const Vec2 a{g.origin().x + (m + 0.5) * g.dx(), g.origin().y + (k + 0.5) * g.dx()};
      const Vec2 b{a.y, a.x};
      EXPECT_NEAR(f(m, k), 0.3 + 2.0 * a.x - 0.7 * a.y, 1e-13);
      EXPECT_NEAR(f(k, m), 0.3 + 2.0 * b.x - 0.7 * b.y, 1e-13);
    }
}

TEST(ApplyBc, IdempotentForEveryRule) {
  const Grid g = unit_grid(8);
  BoundarySet bc{BoundaryRule::dirichlet(0.25), BoundaryRule::neumann_zero(), BoundaryRule::periodic(),
                 BoundaryRule::periodic()};
  for (const BoundarySet& set : {bc, uniform_boundaries(BoundaryRule::linear_extrapolation()),
                                 uniform_boundaries(BoundaryRule::dirichlet(-1.0))}) {
    ScalarField f(g, 0.0, set);
    f.fill([](Vec2 p) { return std::sin(3.0 * p.x) + p.y * p.y; });
    const ScalarField once = f;
    f.apply_bc();
    EXPECT_TRUE(f == once);
    EXPECT_TRUE(apply_bc(once) == once);
  }
}

TEST(Biquadratic, ConstantReproduction) {
  ScalarField f(unit_grid(16), 3.0);
  f.apply_bc();
  for (Vec2 x : {Vec2{0.5, 0.5}, Vec2{0.013, 0.77}, Vec2{0.99, 0.01}}) EXPECT_NEAR(sample_biquadratic(f, x), 3.0, 1e-14);
}

TEST(Biquadratic, QuadraticExactAtCenter) {
  ScalarField f(Grid(16, {-1.0, -1.0}, 2.0));
  f.fill([](Vec2 p) { return p.x * p.x + p.y * p.y; });
  const Vec2 c = f.grid().cell_center(5, 9);
  EXPECT_NEAR(sample_biquadratic(f, c), c.x * c.x + c.y * c.y, 1e-15);
}

TEST(Biquadratic, ReproducesDegreeTwoPolynomials) {
  auto poly = [](Vec2 p) { return 1.0 - 2.0 * p.x + 0.5 * p.y + 3.0 * p.x * p.x - p.x * p.y + 0.25 * p.y * p.y; };
  ScalarField f(Grid(32, {-1.0, -1.0}, 2.0));
  f.fill(poly);
  for (int k = 0; k < 50; ++k) {
    const Vec2 x{-0.9 + 0.036 * k, 0.8 - 0.031 * k};
    const double exact = poly(x);
    EXPECT_LE(std::abs(sample_biquadratic(f, x) - exact), 1e-12 * std::max(1.0, std::abs(exact)));
  }
}

TEST(Biquadratic, WeightsSumToOne) {
  const Grid g(32, {-1.0, -1.0}, 2.0);
  for (int k = 0; k < 200; ++k) {
    const Vec2 x{-0.95 + 0.0095 * k, -0.95 + 0.0093 * ((k * 37) % 200)};
    const BiquadraticStencil s = biquadratic_stencil(g, x);
    double sum = 0.0;
    for (const auto& row : s.weight)
      for (double w : row) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-13);
  }
}

TEST(Biquadratic, CubicErrorThirdOrder) {
  double prev = 0.0;
  for (int n : {16, 32, 64, 128}) {
    ScalarField f(Grid(n, {0.0, 0.0}, 1.0));
    f.fill([](Vec2 p) { return p.x * p.x * p.x; });
    const Grid& g = f.grid();
    double err = 0.0;
    for (int i : {n / 4, n / 2, 3 * n / 4}) {
      const Vec2 x = g.cell_center(i, n / 2) + Vec2{0.3 * g.dx(), 0.0};
      err = std::max(err, std::abs(sample_biquadratic(f, x) - x.x * x.x * x.x));
    }
    if (prev > 0.0) EXPECT_GT(prev / err, 6.0) << "n=" << n;
    prev = err;
  }
}

TEST(Biquadratic, MaskedStencilThrows) {
  const Grid g = unit_grid(8);
  ScalarField f(g, 1.0);
  f.apply_bc();
  CellMask mask(g.cell_count(), 1);
  const Vec2 x = g.cell_center(4, 4);
  EXPECT_NO_THROW((void)sample_biquadratic(f, x, &mask));
  mask[g.index(5, 3)] = 0;
  EXPECT_THROW((void)sample_biquadratic(f, x, &mask), StencilInvalid);
  EXPECT_FALSE(try_sample_biquadratic(f, x, &mask).has_value());
  mask[g.index(5, 3)] = 1;
  EXPECT_FALSE(try_sample_biquadratic(f, g.cell_center(0, 4), &mask).has_value());
}
