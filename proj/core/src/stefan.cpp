#include "stefan/stefan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace stefan {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double AnisotropyModel::operator()(double theta) const {
  switch (kind) {
    case Kind::Isotropic: return base;
    case Kind::Sixfold: {
      const double s = std::sin(3.0 * (theta - 0.5 * std::numbers::pi));
      return base * (1.0 + epsilon * (8.0 / 3.0 * s * s * s * s - 1.0));
    }
    case Kind::Fourfold: return base * (1.0 - 15.0 * epsilon * std::cos(4.0 * theta));
  }
  return base;
}

double AnisotropyModel::max_value() const {
  switch (kind) {
    case Kind::Isotropic: return std::abs(base);
    case Kind::Sixfold: return std::abs(base) * (1.0 + 5.0 / 3.0 * epsilon);
    case Kind::Fourfold: return std::abs(base) * (1.0 + 15.0 * epsilon);
  }
  return std::abs(base);
}

double interface_temperature(double kappa, double vpc_prev, const GibbsThomson& gt, double theta_n) {
  return gt.t_melt - gt.eps_kappa(theta_n) * kappa - gt.eps_v * vpc_prev;
}

double sample_at_centroid(const ScalarField& f, Vec2 x, int i, int j) {
  if (auto v = try_sample_biquadratic(f, x); v && std::isfinite(*v)) return *v;
  return f(i, j);
}

std::vector<double> stefan_velocity(const PhaseProblem& solid, const PhaseProblem& liquid, double st,
                                    double lambda_ratio, VelocityReport* report) {
  const CutGeometry& g = solid.geometry;
  const Grid& grid = g.grid;
  std::vector<double> v(grid.cell_count(), kNaN);
  StencilCounters counters;
  for (std::size_t c : g.interfacial_cells()) {
    const auto [i, j] = grid.unflatten(c);
    auto gradient = [&](const PhaseProblem& p) {
      const auto s = try_gradient_stencil(p.geometry, i, j);
      if (!s) {
        ++counters.missing;
        return 0.0;
      }
      counters.count(s->order);
      return apply_stencil(*s, p.field, p.t_gamma.at(c));
    };
    const double gs = gradient(solid);
    const double gl = gradient(liquid);
    v[c] = -st * (gs + lambda_ratio * gl);
  }
  if (report) report->stencils = counters;
  return v;
}

ExtensionResult extend_velocity(const LevelSet& level_set, const std::vector<double>& v_gamma, const CutGeometry& g,
                                const ExtensionOptions& options) {
  const Grid& grid = level_set.grid();
  const int n = grid.n();
  const double dx = grid.dx();
  const ScalarField& phi = level_set.phi;
  const auto cut_cells = g.interfacial_cells();

  ExtensionResult result{ScalarField(grid), 0.0, 0, true};
  ScalarField& v = result.v;
  double vmax = 0.0;
  for (std::size_t c : cut_cells) {
    v.at(grid.unflatten(c)) = v_gamma[c];
    vmax = std::max(vmax, std::abs(v_gamma[c]));
  }
  v.apply_bc();
  if (cut_cells.empty() || vmax == 0.0) return result;

  const NormalField nf = normal(level_set);
  const double band = options.band_cells * dx;
  std::vector<std::size_t> active;
  std::vector<Vec2> dir;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t c = grid.index(i, j);
      if (g.cut[c] || !(std::abs(phi(i, j)) <= band) || !nf.valid[c]) continue;
      const double s = phi(i, j) > 0.0 ? 1.0 : (phi(i, j) < 0.0 ? -1.0 : 0.0);
      if (s == 0.0) continue;
      active.push_back(c);
      dir.push_back(s * nf.n[c]);
    }
  }

  const double dtau = options.cfl * dx;
  // Enough pseudo-time for information to cross the band twice after the last correction.
  const int min_outer =
      static_cast<int>(std::ceil(2.0 * options.band_cells / options.cfl / options.sweeps_per_correction));
  std::vector<double> next(active.size());
  std::vector<double> eps(cut_cells.size());

  for (int outer = 1; outer <= options.max_outer; ++outer) {
    for (int sweep = 0; sweep < options.sweeps_per_correction; ++sweep) {
      for (std::size_t k = 0; k < active.size(); ++k) {
        const auto [i, j] = grid.unflatten(active[k]);
        const Vec2 a = dir[k];
        const double vx = a.x > 0.0 ? v(i, j) - v(i - 1, j) : v(i + 1, j) - v(i, j);
        const double vy = a.y > 0.0 ? v(i, j) - v(i, j - 1) : v(i, j + 1) - v(i, j);
        next[k] = v(i, j) - dtau / dx * (a.x * vx + a.y * vy);
      }
      for (std::size_t k = 0; k < active.size(); ++k) v.at(grid.unflatten(active[k])) = next[k];
      v.apply_bc();
    }

    // Centroid mismatch of the biquadratic interpolant, removed through the
    // central weight of each cut cell (all cells updated together).
    double max_eps = 0.0;
    std::vector<double> weight(cut_cells.size(), 0.0);
    for (std::size_t k = 0; k < cut_cells.size(); ++k) {
      const std::size_t c = cut_cells[k];
      const auto [i, j] = grid.unflatten(c);
      const Vec2 x = g.centroid[c];
      const auto st = biquadratic_stencil(grid, x);
      const int a = i - st.center.i + 1;
      const int b = j - st.center.j + 1;
      eps[k] = 0.0;
      const auto sampled = try_sample_biquadratic(v, x);
      if (!sampled || a < 0 || a > 2 || b < 0 || b > 2) continue;
      eps[k] = v_gamma[c] - *sampled;
      weight[k] = st.weight[b][a];
      max_eps = std::max(max_eps, std::abs(eps[k]));
    }
    result.outer_iterations = outer;
    result.residual = max_eps / vmax;
    if (result.residual <= options.tolerance && outer >= min_outer) {
      result.converged = true;
      return result;
    }
    for (std::size_t k = 0; k < cut_cells.size(); ++k)
      if (weight[k] != 0.0) v.at(grid.unflatten(cut_cells[k])) += eps[k] / weight[k];
    v.apply_bc();
  }
  result.converged = false;
  return result;
}

namespace {

inline int phase_state(double V) {
  if (V <= kVolumeMin) return 0;
  if (V >= 1.0 - kVolumeMin) return 2;
  return 1;
}

}  // namespace

std::vector<std::size_t> tag_emerging(const CutGeometry& prev, const CutGeometry& now) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < now.volume.size(); ++c)
    if (phase_state(prev.volume[c]) != 1 && phase_state(now.volume[c]) == 1) out.push_back(c);
  return out;
}

std::vector<std::size_t> flipped_cells(const CutGeometry& prev, const CutGeometry& now) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < now.volume.size(); ++c) {
    const int a = phase_state(prev.volume[c]);
    const int b = phase_state(now.volume[c]);
    if ((a == 0 && b == 2) || (a == 2 && b == 0)) out.push_back(c);
  }
  return out;
}

InitCounters& InitCounters::operator+=(const InitCounters& o) {
  quadratic += o.quadratic;
  grid_line += o.grid_line;
  linear += o.linear;
  gamma_only += o.gamma_only;
  return *this;
}

namespace {

// Quadratic through (0, t0), (d1, t1), (d2, t2) evaluated at s.
inline double quadratic_through(double t0, double d1, double t1, double d2, double t2, double s) {
  return t0 * (s - d1) * (s - d2) / (d1 * d2) + t1 * s * (s - d2) / (d1 * (d1 - d2)) +
         t2 * s * (s - d1) / (d2 * (d2 - d1));
}

inline double line_value(const NormalLineSample& l, const ScalarField& f) {
  const Grid& grid = f.grid();
  double v = 0.0;
  for (const auto& [c, w] : l.terms) v += w * f.at(grid.unflatten(c));
  return v;
}

}  // namespace

ScalarField init_emerging(const PhaseProblem& p, const std::vector<std::size_t>& cells, const CellMask& valid,
                          InitCounters* counters) {
  const CutGeometry& g = p.geometry;
  const Grid& grid = g.grid;
  const double dx = grid.dx();
  ScalarField out = p.field;
  InitCounters local;

  for (std::size_t c : cells) {
    const auto [i, j] = grid.unflatten(c);
    const double tg = p.t_gamma.at(c);
    if (!g.cut[c]) {
      out(i, j) = tg;
      ++local.gamma_only;
      continue;
    }
    const Vec2 xg = g.centroid[c];
    const Vec2 nin = -g.normal[c];
    const double s = dot(grid.cell_center(i, j) - xg, nin);

    const auto t1 = try_sample_biquadratic(p.field, xg + dx * nin, &valid);
    const auto t2 = try_sample_biquadratic(p.field, xg + 2.0 * dx * nin, &valid);
    if (t1 && t2) {
      out(i, j) = quadratic_through(tg, dx, *t1, 2.0 * dx, *t2, s);
      ++local.quadratic;
      continue;
    }

    double sum = 0.0;
    int found = 0;
    for (int axis : stencil_axes(nin)) {
      const auto l1 = sample_normal_line(g, i, j, axis, 1, &valid);
      const auto l2 = sample_normal_line(g, i, j, axis, 2, &valid);
      if (!l1 || !l2) continue;
      sum += quadratic_through(tg, l1->d, line_value(*l1, p.field), l2->d, line_value(*l2, p.field), s);
      ++found;
    }
    if (found) {
      out(i, j) = sum / found;
      ++local.grid_line;
      continue;
    }

    if (t1) {
      out(i, j) = tg + (*t1 - tg) * s / dx;
      ++local.linear;
      continue;
    }
    bool linear = false;
    for (int axis : stencil_axes(nin)) {
      if (const auto l1 = sample_normal_line(g, i, j, axis, 1, &valid)) {
        out(i, j) = tg + (line_value(*l1, p.field) - tg) * s / l1->d;
        linear = true;
        break;
      }
    }
    if (linear) {
      ++local.linear;
      continue;
    }
    out(i, j) = tg;
    ++local.gamma_only;
  }
  out.apply_bc();
  if (counters) *counters += local;
  return out;
}

double compute_timestep(const ScalarField& v, double dx, double cfl, std::optional<double> cap) {
  const Grid& grid = v.grid();
  double vmax = 0.0;
  for (int j = 0; j < grid.n(); ++j)
    for (int i = 0; i < grid.n(); ++i)
      if (std::isfinite(v(i, j))) vmax = std::max(vmax, std::abs(v(i, j)));
  double dt = cfl * dx / std::max(vmax, 1e-30);
  if (cap) dt = std::min(dt, *cap);
  return dt;
}

namespace {

CutGeometry initial_geometry(const SimulationState& s) { return compute_geometry(s.level_set, Phase::Solid); }

// Interface length (sum of segment lengths) of a geometry.
double interface_length(const CutGeometry& g) {
  double l = 0.0;
  for (const auto& segs : g.segments)
    for (const auto& s : segs) l += norm(s.b - s.a);
  return l;
}

}  // namespace

Simulation::Simulation(SimulationState state, PhysicalParams physics, NumericalParams numerics,
                       BoundaryUpdate boundary)
    : state_(std::move(state)),
      physics_(physics),
      numerics_(numerics),
      boundary_(std::move(boundary)),
      geo_solid_(initial_geometry(state_)) {}

std::vector<double> Simulation::interface_temperatures(const ScalarField& kappa) const {
  const CutGeometry& g = geo_solid_;
  const Grid& grid = g.grid;
  std::vector<double> tg(grid.cell_count(), kNaN);
  for (std::size_t c : g.interfacial_cells()) {
    const auto [i, j] = grid.unflatten(c);
    const Vec2 x = g.centroid[c];
    const double k = sample_at_centroid(kappa, x, i, j);
    const double v = physics_.gibbs_thomson.eps_v != 0.0 ? sample_at_centroid(state_.v_ext, x, i, j) : 0.0;
    const double theta = std::atan2(g.normal[c].y, g.normal[c].x);
    tg[c] = interface_temperature(std::isfinite(k) ? k : 0.0, v, physics_.gibbs_thomson, theta);
  }
  return tg;
}

StepDiagnostics Simulation::step(double t_end) {
  const Grid& grid = state_.level_set.grid();
  const double dx = grid.dx();
  StepDiagnostics diag;

  // Interface temperature consistent with the current fields.
  const std::vector<double> tg_now = interface_temperatures(curvature(state_.level_set));
  const CutGeometry geo_liquid = geo_solid_.complement();
  PhaseProblem solid{geo_solid_, state_.solid, 1.0, tg_now};
  PhaseProblem liquid{geo_liquid, state_.liquid, physics_.diffusivity_ratio, tg_now};

  // (1) Stefan velocity at the centroids, (2) extension.
  VelocityReport vrep;
  std::vector<double> v_gamma(grid.cell_count(), kNaN);
  if (physics_.st != 0.0) {
    v_gamma = stefan_velocity(solid, liquid, physics_.st, physics_.lambda_ratio, &vrep);
  } else {
    for (std::size_t c : geo_solid_.interfacial_cells()) v_gamma[c] = 0.0;
  }
  diag.stencils = vrep.stencils;
  ExtensionResult ext = extend_velocity(state_.level_set, v_gamma, geo_solid_, numerics_.extension);
  diag.extension_converged = ext.converged;
  diag.extension_residual = ext.residual;

  // (3) timestep and transport of the level set, then redistancing.
  std::optional<double> cap = numerics_.dt_cap;
  if (numerics_.capillary_factor > 0.0 && physics_.st > 0.0) {
    const double ek = physics_.gibbs_thomson.eps_kappa.max_value();
    if (ek > 0.0) {
      const double c = numerics_.capillary_factor * dx * dx * dx / (physics_.st * ek);
      cap = cap ? std::min(*cap, c) : c;
    }
  }
  double dt = compute_timestep(ext.v, dx, numerics_.cfl, cap);
  if (state_.t + dt > t_end) dt = t_end - state_.t;
  if (!(dt > 0.0)) throw Error("step: no time left before t_end");

  LevelSet ls = state_.level_set;
  double vmax = 0.0;
  for (int j = 0; j < grid.n(); ++j)
    for (int i = 0; i < grid.n(); ++i) vmax = std::max(vmax, std::abs(ext.v(i, j)));
  if (vmax > 0.0) ls = advect(ls, ext.v, dt);
  RedistanceOptions ropt;
  ropt.band = numerics_.redistance_band_cells * dx;
  ls = redistance(ls, numerics_.redistance_iterations, numerics_.redistance_cfl * dx, ropt);

  // New geometry; a cell may not jump across the interface in one step.
  CutGeometry geo_new = compute_geometry(ls, Phase::Solid);
  if (const auto flips = flipped_cells(geo_solid_, geo_new); !flips.empty()) {
    const auto ci = grid.unflatten(flips.front());
    throw TimestepViolation("step " + std::to_string(state_.step) + ": cell (" + std::to_string(ci.i) + "," +
                            std::to_string(ci.j) + ") changed phase completely within one step");
  }
  const CutGeometry geo_new_liquid = geo_new.complement();

  // Interface temperature on the new interface with the lagged speed.
  const CutGeometry geo_old = geo_solid_;
  const SimulationState old = state_;
  state_.level_set = ls;
  state_.v_ext = ext.v;
  geo_solid_ = geo_new;
  const std::vector<double> tg_new = interface_temperatures(curvature(ls));

  ScalarField solid_field = old.solid;
  ScalarField liquid_field = old.liquid;
  if (boundary_) boundary_(old.t + dt, solid_field, liquid_field);

  // (5) emerging cells, (6) implicit diffusion of each phase.
  auto advance = [&](const CutGeometry& prev, const CutGeometry& now, const ScalarField& field,
                     double diffusivity, int& emerging) {
    std::vector<std::size_t> init;
    CellMask valid(grid.cell_count(), 0);
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      const bool defined = now.volume[c] > kVolumeMin;
      const bool has_value = std::isfinite(field.at(grid.unflatten(c)));
      if (defined && !has_value) init.push_back(c);
      valid[c] = defined && has_value;
    }
    emerging = static_cast<int>(tag_emerging(prev, now).size());
    PhaseProblem p{now, field, diffusivity, tg_new};
    if (!init.empty()) p.field = init_emerging(p, init, valid, &diag.init);
    DiffusionReport rep;
    ScalarField out = diffuse_implicit(p, dt, numerics_.diffusion, &rep);
    diag.solver_iterations += rep.iterations;
    diag.stencils += rep.stencils;
    return out;
  };
  try {
    state_.solid = advance(geo_old, geo_new, solid_field, 1.0, diag.emerging_solid);
    state_.liquid = advance(geo_old.complement(), geo_new_liquid, liquid_field,
                            physics_.diffusivity_ratio, diag.emerging_liquid);
  } catch (...) {
    state_ = old;
    geo_solid_ = geo_old;
    throw;
  }

  state_.t = old.t + dt;
  state_.step = old.step + 1;

  diag.step = state_.step;
  diag.t = state_.t;
  diag.dt = dt;
  diag.interface_length = interface_length(geo_solid_);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) diag.volume_solid += geo_solid_.volume[c];
  diag.volume_solid *= dx * dx;
  diag.volume_liquid = grid.side() * grid.side() - diag.volume_solid;
  diag.max_speed = vmax;
  diag.interfacial_cells = static_cast<int>(geo_solid_.interfacial_cells().size());
  diag.saddles = geo_solid_.saddle_count;
  return diag;
}

}  // namespace stefan
