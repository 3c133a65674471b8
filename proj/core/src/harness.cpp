#include "stefan/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

namespace stefan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Sides whose temperature is imposed from the reference solution.
std::array<bool, 4> dirichlet_sides(const CaseConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::PlanarStefan: return {true, true, false, false};
    case Scenario::CrankLayer: return {false, false, true, true};
    case Scenario::FrankSphere: return {true, true, true, true};
    default: return {false, false, false, false};
  }
}

// Insulated walls are mirror planes for the level set too.
BoundarySet level_set_boundaries(const CaseConfig& cfg) {
  const auto d = dirichlet_sides(cfg);
  BoundarySet bc;
  for (int s = 0; s < 4; ++s)
    bc[static_cast<std::size_t>(s)] = d[static_cast<std::size_t>(s)] ? BoundaryRule::linear_extrapolation()
                                                                     : BoundaryRule::neumann_zero();
  return bc;
}

LevelSet initial_level_set(const CaseConfig& cfg, const Grid& grid) {
  const InitialInterface& in = cfg.interface;
  const Vec2 shift = reference_shift(cfg);
  ScalarField phi(grid);
  switch (in.kind) {
    case InitialInterface::Kind::Line: phi.fill([&](Vec2 p) { return p.x - shift.x; }); break;
    case InitialInterface::Kind::Layer: phi.fill([&](Vec2 p) { return p.y - in.value; }); break;
    case InitialInterface::Kind::Circle: phi.fill([&](Vec2 p) { return norm(p) - in.value; }); break;
    case InitialInterface::Kind::Flower:
      phi.fill([&](Vec2 p) {
        const double theta = std::atan2(p.y, p.x);
        return dot(p, p) * (1.0 - in.amplitude * std::cos(4.0 * theta)) - in.value;
      });
      break;
  }
  LevelSet ls(std::move(phi), level_set_boundaries(cfg));
  if (in.kind == InitialInterface::Kind::Flower) {
    // The implicit function is far from a distance; redistance over the whole domain.
    const int iterations = static_cast<int>(std::ceil(2.0 * grid.n() / 0.3));
    ls = redistance(ls, iterations, 0.3 * grid.dx());
  }
  return ls;
}

double max_interface_kappa(const Simulation& sim) {
  const CutGeometry& g = sim.solid_geometry();
  const ScalarField kappa = curvature(sim.state().level_set);
  double kmax = 0.0;
  for (std::size_t c : g.interfacial_cells()) {
    const auto [i, j] = g.grid.unflatten(c);
    const double k = sample_at_centroid(kappa, g.centroid[c], i, j);
    if (std::isfinite(k)) kmax = std::max(kmax, k);
  }
  return kmax;
}

double deviation_from_reference(const CaseConfig& cfg, const std::vector<Segment>& segs,
                                 const analytic::ReferenceSolution& ref, double t) {
  const double pos = ref.interface_position(t);
  const Vec2 shift = reference_shift(cfg);
  double e = 0.0;
  for (const Segment& s : segs)
    for (Vec2 p : {s.a, s.b}) {
      double d = 0.0;
      switch (cfg.interface.kind) {
        case InitialInterface::Kind::Line: d = p.x - shift.x - pos; break;
        case InitialInterface::Kind::Layer: d = p.y - pos; break;
        default: d = norm(p) - pos; break;
      }
      e = std::max(e, std::abs(d));
    }
  return e;
}

template <class E>
[[noreturn]] void rethrow_at(const E& e, int step) {
  throw E("step " + std::to_string(step) + ": " + e.what());
}

// Calls f(); solver errors are rethrown with the step index prepended.
template <class F>
auto with_step(int step, F&& f) {
  try {
    return f();
  } catch (const TimestepViolation& e) {
    rethrow_at(e, step);
  } catch (const SolverDiverged& e) {
    rethrow_at(e, step);
  } catch (const CflViolation& e) {
    rethrow_at(e, step);
  } catch (const InsufficientStencil& e) {
    rethrow_at(e, step);
  } catch (const MissingFlux& e) {
    rethrow_at(e, step);
  } catch (const DegenerateGradient& e) {
    rethrow_at(e, step);
  } catch (const StencilInvalid& e) {
    rethrow_at(e, step);
  } catch (const Error& e) {
    rethrow_at(e, step);
  }
}

std::vector<double> covered_as_nan(const ScalarField& f) {
  std::vector<double> out = f.interior();
  for (double& v : out)
    if (!std::isfinite(v)) v = kNaN;
  return out;
}

void emit(const SnapshotSink& sink, const CaseConfig& cfg, const Grid& grid, int step, double t,
          const std::vector<Segment>& segs, const LevelSet& ls, const ScalarField* solid,
          const ScalarField* liquid, const ScalarField* speed) {
  if (!sink) return;
  Snapshot snap;
  snap.step = step;
  snap.t = t;
  snap.grid = &grid;
  snap.interface = segs;
  if (cfg.write_fields) {
    snap.fields.emplace_back("phi", ls.phi.interior());
    if (solid) snap.fields.emplace_back("solid", covered_as_nan(*solid));
    if (liquid) snap.fields.emplace_back("liquid", covered_as_nan(*liquid));
    if (speed) snap.fields.emplace_back("speed", speed->interior());
  }
  sink(snap);
}

bool snapshot_due(const CaseConfig& cfg, int step) { return cfg.output_every > 0 && step % cfg.output_every == 0; }

bool finished(const CaseConfig& cfg, double t, int step) {
  if (cfg.max_steps > 0 && step >= cfg.max_steps) return true;
  return cfg.t_end - t <= 1e-12 * std::max(1.0, std::abs(cfg.t_end));
}

// Level-set-only run with v = -kappa (no temperature fields).
CaseResult run_curvature_flow(const CaseConfig& cfg, const SnapshotSink& sink, CaseResult res) {
  const auto t0 = Clock::now();
  const Grid grid = cfg.grid();
  const double dx = grid.dx();
  const NumericalParams num = cfg.numerics();
  const auto ref = reference_solution(cfg);
  LevelSet ls = initial_level_set(cfg, grid);
  double t = cfg.t_start;
  int step = 0;
  double worst = 0.0;

  auto record = [&](double dt, double vmax, const CutGeometry& g) {
    const auto segs = extract_contour(ls);
    TimeseriesRow row;
    row.step = step;
    row.t = t;
    row.dt = dt;
    row.mean_radius = mean_radius(segs);
    row.radius_stddev = radius_stddev(segs);
    row.tip_x = tip_x(segs);
    row.max_speed = vmax;
    double vol = 0.0;
    double len = 0.0;
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      vol += g.volume[c];
      len += g.alpha_gamma[c];
    }
    row.volume_solid = vol * dx * dx;
    row.interface_length = len * dx;
    res.timeseries.push_back(row);
    if (ref) {
      const double r = ref->interface_position(t);
      worst = std::max(worst, std::abs(row.mean_radius - r) / r);
    }
    if (snapshot_due(cfg, step)) emit(sink, cfg, grid, step, t, segs, ls, nullptr, nullptr, nullptr);
    return segs;
  };

  CutGeometry g = compute_geometry(ls, Phase::Solid);
  record(0.0, 0.0, g);
  while (!finished(cfg, t, step)) {
    with_step(step, [&] {
      const ScalarField kappa = curvature(ls);
      std::vector<double> vg(grid.cell_count(), kNaN);
      for (std::size_t c : g.interfacial_cells()) {
        const auto [i, j] = grid.unflatten(c);
        const double k = sample_at_centroid(kappa, g.centroid[c], i, j);
        vg[c] = -(std::isfinite(k) ? k : 0.0);
      }
      const ExtensionResult ext = extend_velocity(ls, vg, g, num.extension);
      if (!ext.converged) ++res.extension_failures;
      double dt = compute_timestep(ext.v, dx, num.cfl, num.dt_cap);
      dt = std::min(dt, cfg.t_end - t);
      double vmax = 0.0;
      for (int j = 0; j < grid.n(); ++j)
        for (int i = 0; i < grid.n(); ++i) vmax = std::max(vmax, std::abs(ext.v(i, j)));
      ls = advect(ls, ext.v, dt);
      RedistanceOptions ro;
      ro.band = num.redistance_band_cells * dx;
      ls = redistance(ls, num.redistance_iterations, num.redistance_cfl * dx, ro);
      g = compute_geometry(ls, Phase::Solid);
      t += dt;
      ++step;
      res.saddles += g.saddle_count;
      record(dt, vmax, g);
      return 0;
    });
  }
  res.steps = step;
  res.t_final = t;
  res.final_interface = extract_contour(ls);
  if (ref) res.interface_error = worst;
  if (sink && !snapshot_due(cfg, step))
    emit(sink, cfg, grid, step, t, res.final_interface, ls, nullptr, nullptr, nullptr);
  res.runtime_s = seconds_since(t0);
  return res;
}

}  // namespace

std::vector<Segment> extract_contour(const LevelSet& level_set) {
  const Grid& grid = level_set.grid();
  const ScalarField& phi = level_set.phi;
  const int n = grid.n();
  std::vector<Segment> segs;
  auto crossing = [](Vec2 a, Vec2 b, double fa, double fb) { return a + (fa / (fa - fb)) * (b - a); };
  for (int j = 0; j + 1 < n; ++j)
    for (int i = 0; i + 1 < n; ++i) {
      // Corners counter-clockwise from the lower left.
      const std::array<Vec2, 4> x{grid.cell_center(i, j), grid.cell_center(i + 1, j), grid.cell_center(i + 1, j + 1),
                                  grid.cell_center(i, j + 1)};
      const std::array<double, 4> f{phi(i, j), phi(i + 1, j), phi(i + 1, j + 1), phi(i, j + 1)};
      std::array<Vec2, 4> pts{};
      int k = 0;
      for (int e = 0; e < 4; ++e) {
        const int a = e;
        const int b = (e + 1) % 4;
        if ((f[a] < 0.0) != (f[b] < 0.0)) {
          pts[k++] = crossing(x[a], x[b], f[a], f[b]);
        }
      }
      if (k == 2) {
        segs.push_back({pts[0], pts[1]});
      } else if (k == 4) {
        // Saddle: join the crossings around the corners whose sign differs from the center.
        const double center = 0.25 * (f[0] + f[1] + f[2] + f[3]);
        const bool corner0_isolated = (f[0] < 0.0) != (center < 0.0);
        if (corner0_isolated) {
          segs.push_back({pts[3], pts[0]});  // edges 3 and 0 meet at corner 0
          segs.push_back({pts[1], pts[2]});
        } else {
          segs.push_back({pts[0], pts[1]});
          segs.push_back({pts[2], pts[3]});
        }
      }
    }
  return segs;
}

double mean_radius(const std::vector<Segment>& segs, Vec2 center) {
  if (segs.empty()) throw EmptyInterface("mean_radius: no interface");
  double sum = 0.0;
  double w = 0.0;
  for (const Segment& s : segs) {
    const double len = norm(s.b - s.a);
    sum += 0.5 * len * (norm(s.a - center) + norm(s.b - center));
    w += len;
  }
  if (!(w > 0.0)) {
    for (const Segment& s : segs) sum += 0.5 * (norm(s.a - center) + norm(s.b - center));
    return sum / static_cast<double>(segs.size());
  }
  return sum / w;
}

double radius_stddev(const std::vector<Segment>& segs, Vec2 center) {
  const double m = mean_radius(segs, center);
  double sum = 0.0;
  double w = 0.0;
  for (const Segment& s : segs) {
    const double len = norm(s.b - s.a);
    const double da = norm(s.a - center) - m;
    const double db = norm(s.b - center) - m;
    sum += 0.5 * len * (da * da + db * db);
    w += len;
  }
  return w > 0.0 ? std::sqrt(sum / w) : 0.0;
}

double tip_x(const std::vector<Segment>& segs) {
  if (segs.empty()) throw EmptyInterface("tip_x: no interface");
  double x = -std::numeric_limits<double>::infinity();
  for (const Segment& s : segs) x = std::max({x, s.a.x, s.b.x});
  return x;
}

std::vector<double> arm_lengths(const std::vector<Segment>& segs, const ArmOptions& o) {
  if (segs.empty()) throw EmptyInterface("arm_lengths: no interface");
  const double width = 2.0 * std::numbers::pi / o.sectors;
  std::vector<double> len(static_cast<std::size_t>(o.sectors), 0.0);
  for (const Segment& s : segs)
    for (Vec2 p : {s.a, s.b}) {
      const Vec2 d = p - o.center;
      double a = std::atan2(d.y, d.x) - o.offset + 0.5 * width;
      a -= 2.0 * std::numbers::pi * std::floor(a / (2.0 * std::numbers::pi));
      const auto k = std::min(static_cast<std::size_t>(a / width), len.size() - 1);
      len[k] = std::max(len[k], norm(d));
    }
  return len;
}

std::vector<double> tip_x_velocity(const std::vector<double>& t, const std::vector<double>& tip) {
  std::vector<double> v;
  for (std::size_t k = 1; k < std::min(t.size(), tip.size()); ++k)
    v.push_back((tip[k] - tip[k - 1]) / (t[k] - t[k - 1]));
  return v;
}

FieldErrors temperature_errors(const Simulation& sim, const analytic::ReferenceSolution& ref, Vec2 shift) {
  const CutGeometry& gs = sim.solid_geometry();
  const Grid& grid = gs.grid;
  const double t = sim.state().t;
  FieldErrors e;
  double w = 0.0;
  for (int j = 0; j < grid.n(); ++j)
    for (int i = 0; i < grid.n(); ++i) {
      const std::size_t c = grid.index(i, j);
      const Vec2 x = grid.cell_center(i, j) - shift;
      for (Phase p : {Phase::Solid, Phase::Liquid}) {
        const double v = p == Phase::Solid ? gs.volume[c] : 1.0 - gs.volume[c];
        if (v <= kVolumeMin) continue;
        const ScalarField& f = p == Phase::Solid ? sim.state().solid : sim.state().liquid;
        const double err = std::abs(f(i, j) - ref.phase_temperature(x, t, p));
        e.l1 += v * err;
        w += v;
        e.linf = std::max(e.linf, err);
      }
    }
  if (w > 0.0) e.l1 /= w;
  return e;
}

CaseResult run_case(const CaseConfig& cfg, const SnapshotSink& sink) {
  if (auto msg = validate(cfg)) throw ValidationError(*msg);
  CaseResult res;
  res.config = cfg;
  if (cfg.scenario == Scenario::ShrinkingCircle) return run_curvature_flow(cfg, sink, std::move(res));

  const auto t0 = Clock::now();
  const Grid grid = cfg.grid();
  const double dx = grid.dx();
  const auto ref = reference_solution(cfg);
  const Vec2 shift = reference_shift(cfg);
  const auto sides = dirichlet_sides(cfg);

  LevelSet ls = initial_level_set(cfg, grid);
  const CutGeometry geo = compute_geometry(ls, Phase::Solid);
  ScalarField solid(grid, kNaN);
  ScalarField liquid(grid, kNaN);
  for (int j = 0; j < grid.n(); ++j)
    for (int i = 0; i < grid.n(); ++i) {
      const double v = geo.V(i, j);
      const Vec2 x = grid.cell_center(i, j) - shift;
      if (v > kVolumeMin) solid(i, j) = ref ? ref->phase_temperature(x, cfg.t_start, Phase::Solid) : cfg.t_solid;
      if (1.0 - v > kVolumeMin)
        liquid(i, j) = ref ? ref->phase_temperature(x, cfg.t_start, Phase::Liquid) : cfg.t_liquid;
    }

  BoundaryUpdate update;
  if (ref && std::any_of(sides.begin(), sides.end(), [](bool b) { return b; })) {
    update = [&grid, sides, shift, r = *ref](double t, ScalarField& s, ScalarField& l) {
      const int n = grid.n();
      const double lo = grid.origin().x;
      const double hi = lo + grid.side();
      for (int side = 0; side < 4; ++side) {
        if (!sides[static_cast<std::size_t>(side)]) continue;
        std::vector<double> ps(static_cast<std::size_t>(n));
        std::vector<double> pl(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
          const Vec2 c = grid.cell_center(k, k);
          Vec2 x;
          switch (static_cast<Side>(side)) {
            case Side::Left: x = {lo, c.y}; break;
            case Side::Right: x = {hi, c.y}; break;
            case Side::Bottom: x = {c.x, lo}; break;
            case Side::Top: x = {c.x, hi}; break;
          }
          ps[static_cast<std::size_t>(k)] = r.phase_temperature(x - shift, t, Phase::Solid);
          pl[static_cast<std::size_t>(k)] = r.phase_temperature(x - shift, t, Phase::Liquid);
        }
        s.set_boundary(static_cast<Side>(side), BoundaryRule::dirichlet_profile(std::move(ps)));
        l.set_boundary(static_cast<Side>(side), BoundaryRule::dirichlet_profile(std::move(pl)));
      }
    };
    update(cfg.t_start, solid, liquid);
  }
  solid.apply_bc();
  liquid.apply_bc();

  SimulationState state{cfg.t_start, 0, ls, solid, liquid, ScalarField(grid, 0.0)};
  Simulation sim(std::move(state), cfg.physics(), cfg.numerics(), update);

  auto row_of = [&](const StepDiagnostics* d, const std::vector<Segment>& segs, double kmax) {
    TimeseriesRow row;
    row.step = sim.state().step;
    row.t = sim.state().t;
    if (!segs.empty()) {
      row.mean_radius = mean_radius(segs);
      row.radius_stddev = radius_stddev(segs);
      row.tip_x = tip_x(segs);
    }
    row.max_kappa = kmax;
    const CutGeometry& g = sim.solid_geometry();
    double vol = 0.0;
    double len = 0.0;
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      vol += g.volume[c];
      len += g.alpha_gamma[c];
    }
    row.volume_solid = vol * dx * dx;
    row.interface_length = len * dx;
    if (d) {
      row.dt = d->dt;
      row.max_speed = d->max_speed;
    }
    return row;
  };
  auto snapshot = [&](const std::vector<Segment>& segs) {
    const SimulationState& s = sim.state();
    emit(sink, cfg, grid, s.step, s.t, segs, s.level_set, &s.solid, &s.liquid, &s.v_ext);
  };

  const double kappa0 = max_interface_kappa(sim);
  {
    const auto segs = extract_contour(sim.state().level_set);
    res.timeseries.push_back(row_of(nullptr, segs, kappa0));
    if (snapshot_due(cfg, 0)) snapshot(segs);
  }
  bool last_emitted = snapshot_due(cfg, 0);
  while (!finished(cfg, sim.state().t, sim.state().step)) {
    const int step = sim.state().step;
    const StepDiagnostics d = with_step(step, [&] { return sim.step(cfg.t_end); });
    res.stencils += d.stencils;
    res.init += d.init;
    res.saddles += d.saddles;
    if (!d.extension_converged) ++res.extension_failures;
    const auto segs = extract_contour(sim.state().level_set);
    const double kmax = max_interface_kappa(sim);
    res.timeseries.push_back(row_of(&d, segs, kmax));
    last_emitted = snapshot_due(cfg, d.step);
    if (last_emitted) snapshot(segs);
    if (cfg.onset_factor > 0.0 && !res.onset_time && kmax > cfg.onset_factor * kappa0) {
      res.onset_time = sim.state().t;
      break;
    }
  }

  res.steps = sim.state().step;
  res.t_final = sim.state().t;
  res.final_interface = extract_contour(sim.state().level_set);
  if (sink && !last_emitted) snapshot(res.final_interface);
  if (ref) {
    res.errors = temperature_errors(sim, *ref, shift);
    if (!res.final_interface.empty())
      res.interface_error = deviation_from_reference(cfg, res.final_interface, *ref, res.t_final);
  }
  res.runtime_s = seconds_since(t0);
  return res;
}

double ErrorReport::l1_order(std::size_t k) const {
  if (k == 0 || k >= grids.size()) return kNaN;
  return std::log2(grids[k - 1].l1 / grids[k].l1);
}

double ErrorReport::linf_order(std::size_t k) const {
  if (k == 0 || k >= grids.size()) return kNaN;
  return std::log2(grids[k - 1].linf / grids[k].linf);
}

ErrorReport convergence_sweep(const CaseConfig& cfg, const std::vector<int>& grids, int threads) {
  if (!reference_solution(cfg)) throw ValidationError("convergence_sweep: scenario has no reference solution");
  auto one = [&cfg](int n) {
    CaseConfig c = cfg;
    c.n = n;
    const CaseResult r = run_case(c);
    GridResult g;
    g.n = n;
    g.dt = r.timeseries.size() > 1 ? r.timeseries[1].dt : 0.0;
    if (r.errors) {
      g.l1 = r.errors->l1;
      g.linf = r.errors->linf;
    }
    g.interface_error = r.interface_error.value_or(kNaN);
    g.runtime_s = r.runtime_s;
    return g;
  };
  ErrorReport report;
  report.grids.resize(grids.size());
  const std::size_t width = static_cast<std::size_t>(std::max(1, threads));
  for (std::size_t start = 0; start < grids.size(); start += width) {
    std::vector<std::future<GridResult>> batch;
    const std::size_t stop = std::min(grids.size(), start + width);
    for (std::size_t k = start; k < stop; ++k)
      batch.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred, one, grids[k]));
    for (std::size_t k = start; k < stop; ++k) report.grids[k] = batch[k - start].get();
  }
  return report;
}

FieldErrors initial_gradient_error(int n) {
  CaseConfig cfg = default_config(Scenario::PlanarStefan);
  cfg.n = n;
  const Grid grid = cfg.grid();
  const auto ref = *reference_solution(cfg);
  const Vec2 shift = reference_shift(cfg);
  const LevelSet ls = initial_level_set(cfg, grid);
  const CutGeometry gs = compute_geometry(ls, Phase::Solid);
  const CutGeometry gl = gs.complement();
  ScalarField solid(grid, kNaN);
  ScalarField liquid(grid, kNaN);
  for (int j = 0; j < grid.n(); ++j)
    for (int i = 0; i < grid.n(); ++i) {
      const Vec2 x = grid.cell_center(i, j) - shift;
      if (gs.V(i, j) > kVolumeMin) solid(i, j) = ref.phase_temperature(x, 0.0, Phase::Solid);
      if (gl.V(i, j) > kVolumeMin) liquid(i, j) = ref.phase_temperature(x, 0.0, Phase::Liquid);
    }
  solid.apply_bc();
  liquid.apply_bc();
  const std::vector<double> tg(grid.cell_count(), 0.0);
  const PhaseProblem ps{gs, solid, 1.0, tg};
  const PhaseProblem pl{gl, liquid, 1.0, tg};
  const std::vector<double> v = stefan_velocity(ps, pl, cfg.st, cfg.lambda_ratio);
  FieldErrors e;
  double w = 0.0;
  for (std::size_t c : gs.interfacial_cells()) {
    const double err = std::abs(v[c] - 1.0);
    e.l1 += gs.alpha_gamma[c] * err;
    w += gs.alpha_gamma[c];
    e.linf = std::max(e.linf, err);
  }
  if (w > 0.0) e.l1 /= w;
  return e;
}

ErrorReport initial_gradient_sweep(const std::vector<int>& grids) {
  ErrorReport report;
  for (int n : grids) {
    const auto t0 = Clock::now();
    const FieldErrors e = initial_gradient_error(n);
    report.grids.push_back({n, 0.0, e.l1, e.linf, 0.0, seconds_since(t0)});
  }
  return report;
}

}  // namespace stefan
