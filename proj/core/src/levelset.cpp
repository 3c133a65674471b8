#include "stefan/levelset.hpp"

#include <algorithm>
#include <cmath>

namespace stefan {

LevelSet::LevelSet(ScalarField f) : LevelSet(std::move(f), uniform_boundaries(BoundaryRule::linear_extrapolation())) {}

LevelSet::LevelSet(ScalarField f, const BoundarySet& bc) : phi(std::move(f)) {
  phi.set_boundaries(bc);
  phi.apply_bc();
}

namespace ls {

double godunov_hamiltonian(double ax, double bx, double ay, double by, double sign) {
  auto sq = [](double v) { return v * v; };
  double hx, hy;
  if (sign >= 0.0) {
    hx = std::max(sq(std::min(ax, 0.0)), sq(std::max(bx, 0.0)));
    hy = std::max(sq(std::min(ay, 0.0)), sq(std::max(by, 0.0)));
  } else {
    hx = std::max(sq(std::max(ax, 0.0)), sq(std::min(bx, 0.0)));
    hy = std::max(sq(std::max(ay, 0.0)), sq(std::min(by, 0.0)));
  }
  return std::sqrt(hx + hy);
}

double subcell_distance(double phi_m1, double phi_0, double phi_p1, double phi_p2, double dx) {
  const double pxx = minmod(phi_m1 - 2.0 * phi_0 + phi_p1, phi_0 - 2.0 * phi_p1 + phi_p2);
  const double scale = std::max({std::abs(phi_m1), std::abs(phi_0), std::abs(phi_p1), std::abs(phi_p2)});
  double d;
  if (std::abs(pxx) > 1e-10 * scale) {
    const double diff = phi_0 - phi_p1;
    const double disc = std::max(0.0, std::pow(0.5 * pxx - phi_0 - phi_p1, 2) - 4.0 * phi_0 * phi_p1);
    const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    // Same root as dx (1/2 + (diff - sgn sqrt(disc)) / pxx), without the cancellation.
    d = dx * 2.0 * phi_0 / (diff + 0.5 * pxx + sgn * std::sqrt(disc));
  } else {
    d = dx * phi_0 / (phi_0 - phi_p1);
  }
  if (!std::isfinite(d)) d = 0.5 * dx;
  return std::clamp(d, 1e-6 * dx, dx);
}

}  // namespace ls

namespace {

// Undivided second difference along an axis.
inline double second_diff(const ScalarField& f, int i, int j, int axis) {
  return axis == 0 ? f(i + 1, j) - 2.0 * f(i, j) + f(i - 1, j) : f(i, j + 1) - 2.0 * f(i, j) + f(i, j - 1);
}

inline double shifted(const ScalarField& f, int i, int j, int axis, int k) {
  return axis == 0 ? f(i + k, j) : f(i, j + k);
}

struct OneSided {
  double plus;
  double minus;
};

// ENO2 one-sided derivatives; hp / hm are the distances to the (virtual)
// neighbour, with the neighbour value replaced by 0 when a sub-cell crossing
// is active on that side.
inline OneSided eno2(const ScalarField& f, int i, int j, int axis, double dx, double hp, double hm, bool cut_p,
                     bool cut_m) {
  const double u = f(i, j);
  const double dxx0 = second_diff(f, i, j, axis);
  const double dxxp = axis == 0 ? second_diff(f, i + 1, j, 0) : second_diff(f, i, j + 1, 1);
  const double dxxm = axis == 0 ? second_diff(f, i - 1, j, 0) : second_diff(f, i, j - 1, 1);
  const double inv_dx2 = 1.0 / (dx * dx);
  OneSided d;
  if (cut_p) {
    d.plus = -u / hp - 0.5 * hp * ls::minmod(dxx0, dxxp) * inv_dx2;
  } else {
    d.plus = (shifted(f, i, j, axis, 1) - u) / dx - 0.5 * ls::minmod(dxx0, dxxp) / dx;
  }
  if (cut_m) {
    d.minus = u / hm + 0.5 * hm * ls::minmod(dxx0, dxxm) * inv_dx2;
  } else {
    d.minus = (u - shifted(f, i, j, axis, -1)) / dx + 0.5 * ls::minmod(dxx0, dxxm) / dx;
  }
  return d;
}

// Sub-cell data of one interfacial cell, from phi0.
struct Crossing {
  double h[2][2];    // [axis][0 = plus side, 1 = minus side]
  bool cut[2][2];
};

}  // namespace

LevelSet advect(const LevelSet& level_set, const ScalarField& vn, double dt) {
  const Grid& grid = level_set.grid();
  const int n = grid.n();
  const double dx = grid.dx();

  double vmax = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) vmax = std::max(vmax, std::abs(vn(i, j)));
  if (dt * vmax > dx * (1.0 + 1e-12))
    throw CflViolation("advect: dt*max|v| = " + std::to_string(dt * vmax) + " exceeds dx = " + std::to_string(dx));

  auto rhs = [&](const ScalarField& f, std::vector<double>& out) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const double v = vn(i, j);
        if (v == 0.0) {
          out[grid.index(i, j)] = 0.0;
          continue;
        }
        const auto dxs = eno2(f, i, j, 0, dx, dx, dx, false, false);
        const auto dys = eno2(f, i, j, 1, dx, dx, dx, false, false);
        out[grid.index(i, j)] = -v * ls::godunov_hamiltonian(dxs.plus, dxs.minus, dys.plus, dys.minus, v);
      }
    }
  };

  std::vector<double> k(grid.cell_count());
  ScalarField s1 = level_set.phi;
  ScalarField s2 = level_set.phi;
  ScalarField out = level_set.phi;
  const auto& p0 = level_set.phi;

  rhs(p0, k);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (vn(i, j) != 0.0) s1(i, j) = p0(i, j) + dt * k[grid.index(i, j)];
  s1.apply_bc();
  rhs(s1, k);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (vn(i, j) != 0.0) s2(i, j) = 0.75 * p0(i, j) + 0.25 * (s1(i, j) + dt * k[grid.index(i, j)]);
  s2.apply_bc();
  rhs(s2, k);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (vn(i, j) != 0.0) out(i, j) = p0(i, j) / 3.0 + 2.0 / 3.0 * (s2(i, j) + dt * k[grid.index(i, j)]);
  out.apply_bc();
  return LevelSet(std::move(out), level_set.phi.boundaries());
}

LevelSet redistance(const LevelSet& level_set, int iterations, double dtau, const RedistanceOptions& options) {
  const Grid& grid = level_set.grid();
  const int n = grid.n();
  const double dx = grid.dx();
  const ScalarField& phi0 = level_set.phi;
  const std::size_t cells = grid.cell_count();

  std::vector<std::uint8_t> active(cells, 0);
  std::vector<double> smooth_sign(cells, 0.0);
  std::vector<double> branch(cells, 0.0);
  std::vector<double> local_dt(cells, dtau);
  std::vector<Crossing> crossing(cells);

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t c = grid.index(i, j);
      const double p = phi0(i, j);
      // Cells next to the band are included so stale values outside it are
      // pulled in as the interface approaches.
      bool near = false;
      for (int dj = -1; dj <= 1 && !near; ++dj)
        for (int di = -1; di <= 1 && !near; ++di)
          near = grid.inside(i + di, j + dj) && std::abs(phi0(i + di, j + dj)) <= options.band;
      if (!near) continue;
      active[c] = 1;
      smooth_sign[c] = p / std::sqrt(p * p + dx * dx);
      branch[c] = p > 0.0 ? 1.0 : (p < 0.0 ? -1.0 : 0.0);
      Crossing& x = crossing[c];
      double hmin = dx;
      for (int axis = 0; axis < 2; ++axis) {
        x.h[axis][0] = x.h[axis][1] = dx;
        x.cut[axis][0] = x.cut[axis][1] = false;
        if (!options.subcell_fix) continue;
        auto at = [&](int k) { return shifted(phi0, i, j, axis, k); };
        const int pos = axis == 0 ? i : j;
        if (pos + 1 < n && p * at(1) < 0.0) {
          x.cut[axis][0] = true;
          x.h[axis][0] = ls::subcell_distance(at(-1), p, at(1), at(2), dx);
        }
        if (pos - 1 >= 0 && p * at(-1) < 0.0) {
          x.cut[axis][1] = true;
          x.h[axis][1] = ls::subcell_distance(at(1), p, at(-1), at(-2), dx);
        }
        hmin = std::min({hmin, x.h[axis][0], x.h[axis][1]});
      }
      // The sub-cell update behaves like |phi| / h; keep it stable per cell.
      const double s = std::abs(smooth_sign[c]);
      if (hmin < dx && s > 0.0) local_dt[c] = std::min(dtau, 0.5 * hmin / s);
    }
  }

  auto rhs = [&](const ScalarField& f, std::vector<double>& out) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const std::size_t c = grid.index(i, j);
        if (!active[c]) {
          out[c] = 0.0;
          continue;
        }
        const Crossing& x = crossing[c];
        const auto dxs = eno2(f, i, j, 0, dx, x.h[0][0], x.h[0][1], x.cut[0][0], x.cut[0][1]);
        const auto dys = eno2(f, i, j, 1, dx, x.h[1][0], x.h[1][1], x.cut[1][0], x.cut[1][1]);
        const double h = ls::godunov_hamiltonian(dxs.plus, dxs.minus, dys.plus, dys.minus, branch[c]);
        out[c] = -smooth_sign[c] * (h - 1.0);
      }
    }
  };

  ScalarField cur = phi0;
  ScalarField s1 = phi0;
  ScalarField s2 = phi0;
  std::vector<double> k(cells);
  for (int it = 0; it < iterations; ++it) {
    rhs(cur, k);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t c = grid.index(i, j);
        if (active[c]) s1(i, j) = cur(i, j) + local_dt[c] * k[c];
      }
    s1.apply_bc();
    rhs(s1, k);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t c = grid.index(i, j);
        if (active[c]) s2(i, j) = 0.75 * cur(i, j) + 0.25 * (s1(i, j) + local_dt[c] * k[c]);
      }
    s2.apply_bc();
    rhs(s2, k);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t c = grid.index(i, j);
        if (active[c]) cur(i, j) = cur(i, j) / 3.0 + 2.0 / 3.0 * (s2(i, j) + local_dt[c] * k[c]);
      }
    cur.apply_bc();
  }
  return LevelSet(std::move(cur), level_set.phi.boundaries());
}

int redistance_iterations(double band_cells, double cfl) {
  return 2 * static_cast<int>(std::ceil(band_cells / cfl - 1e-9));
}

namespace {

inline Vec2 central_gradient(const ScalarField& f, int i, int j, double dx) {
  return {(f(i + 1, j) - f(i - 1, j)) / (2.0 * dx), (f(i, j + 1) - f(i, j - 1)) / (2.0 * dx)};
}

}  // namespace

NormalField normal(const LevelSet& level_set) {
  const Grid& grid = level_set.grid();
  NormalField out{grid, std::vector<Vec2>(grid.cell_count()), CellMask(grid.cell_count(), 0)};
  for (int j = 0; j < grid.n(); ++j) {
    for (int i = 0; i < grid.n(); ++i) {
      const Vec2 g = central_gradient(level_set.phi, i, j, grid.dx());
      const double m = norm(g);
      if (m < 1e-14) continue;
      out.n[grid.index(i, j)] = g / m;
      out.valid[grid.index(i, j)] = 1;
    }
  }
  return out;
}

Vec2 normal_at(const LevelSet& level_set, int i, int j) {
  const Vec2 g = central_gradient(level_set.phi, i, j, level_set.grid().dx());
  const double m = norm(g);
  if (m < 1e-14)
    throw DegenerateGradient("normal: |grad phi| vanishes at cell (" + std::to_string(i) + "," + std::to_string(j) + ")");
  return g / m;
}

ScalarField curvature(const LevelSet& level_set) {
  const Grid& grid = level_set.grid();
  const ScalarField& f = level_set.phi;
  const double dx = grid.dx();
  ScalarField kappa(grid);
  for (int j = 0; j < grid.n(); ++j) {
    for (int i = 0; i < grid.n(); ++i) {
      const Vec2 g = central_gradient(f, i, j, dx);
      const double m2 = g.x * g.x + g.y * g.y;
      if (std::sqrt(m2) < 1e-14) {
        kappa(i, j) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const double fxx = second_diff(f, i, j, 0) / (dx * dx);
      const double fyy = second_diff(f, i, j, 1) / (dx * dx);
      const double fxy = (f(i + 1, j + 1) - f(i + 1, j - 1) - f(i - 1, j + 1) + f(i - 1, j - 1)) / (4.0 * dx * dx);
      kappa(i, j) = (g.y * g.y * fxx - 2.0 * g.x * g.y * fxy + g.x * g.x * fyy) / (m2 * std::sqrt(m2));
    }
  }
  kappa.apply_bc();
  return kappa;
}

}  // namespace stefan
