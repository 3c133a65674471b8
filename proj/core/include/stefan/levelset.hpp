#pragma once

#include <limits>
#include <vector>

#include "stefan/grid.hpp"

namespace stefan {

/// dt * max|v_n| exceeded dx in an advection step.
class CflViolation : public Error {
 public:
  using Error::Error;
};

/// |grad phi| vanished where a normal or curvature was requested.
class DegenerateGradient : public Error {
 public:
  using Error::Error;
};

/// Signed-distance level set: phi < 0 is the solid, phi > 0 the liquid.
struct LevelSet {
  ScalarField phi;

  /// Ghosts extrapolate linearly on every side.
  explicit LevelSet(ScalarField f);
  LevelSet(ScalarField f, const BoundarySet& bc);

  template <class F>
  static LevelSet from(const Grid& grid, F&& f) {
    ScalarField field(grid);
    field.fill(std::forward<F>(f));
    return LevelSet(std::move(field));
  }

  [[nodiscard]] const Grid& grid() const { return phi.grid(); }
};

namespace ls {

[[nodiscard]] constexpr double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return (a > 0.0) == (a < b) ? a : b;
}

/// Godunov Hamiltonian |grad phi| from one-sided derivatives a = D+ and b = D-
/// per axis; `sign` selects the upwind branch (sign >= 0 takes max(a-^2, b+^2)).
[[nodiscard]] double godunov_hamiltonian(double ax, double bx, double ay, double by, double sign);

/// Distance from node i to the zero crossing between i and i+1, from the
/// quadratic ENO reconstruction of phi0 (phi_m1 .. phi_p2 = nodes i-1 .. i+2).
/// Falls back to the secant root when the curvature term is negligible and is
/// clamped to [1e-6 dx, dx]. The left-side distance follows by reflection.
[[nodiscard]] double subcell_distance(double phi_m1, double phi_0, double phi_p1, double phi_p2, double dx);

}  // namespace ls

/// One TVD RK3 step of phi_t + v_n |grad phi| = 0 with ENO2 upwinding.
[[nodiscard]] LevelSet advect(const LevelSet& level_set, const ScalarField& vn, double dt);

struct RedistanceOptions {
  /// Only cells with |phi0| <= band, or next to such a cell, are updated.
  double band = std::numeric_limits<double>::infinity();
  /// Pin the zero crossing with the sub-cell distance in cells adjacent to it.
  bool subcell_fix = true;
};

/// Pseudo-time iteration of phi_tau + S(phi0)(|grad phi| - 1) = 0.
[[nodiscard]] LevelSet redistance(const LevelSet& level_set, int iterations, double dtau,
                                  const RedistanceOptions& options = {});

/// Iteration count that carries distance information `band_cells` cells out
/// at pseudo-CFL `cfl`, twice over.
[[nodiscard]] int redistance_iterations(double band_cells = 6.0, double cfl = 0.3);

struct NormalField {
  Grid grid;
  std::vector<Vec2> n;  // row-major interior
  CellMask valid;       // 0 where |grad phi| < 1e-14

  [[nodiscard]] Vec2 at(int i, int j) const { return n[grid.index(i, j)]; }
};

/// Central-difference unit normal grad phi / |grad phi| at every cell.
[[nodiscard]] NormalField normal(const LevelSet& level_set);

/// Unit normal at one cell; throws DegenerateGradient.
[[nodiscard]] Vec2 normal_at(const LevelSet& level_set, int i, int j);

/// kappa = div(grad phi / |grad phi|), positive for a solid disk.
/// Cells with a degenerate gradient hold NaN.
[[nodiscard]] ScalarField curvature(const LevelSet& level_set);

}  // namespace stefan
