#include "stefan/acceptance.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <sstream>

#include "stefan/analytic.hpp"
#include "stefan/harness.hpp"

namespace stefan {

namespace {

using Clock = std::chrono::steady_clock;

struct Check {
  std::ostringstream detail;
  bool ok = true;

  void require(bool cond, const std::string& what) {
    if (detail.tellp() > 0) detail << "; ";
    detail << what << (cond ? "" : " [X]");
    ok = ok && cond;
  }
};

std::string fmt(const char* f, double v) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), f, v);
  return buf.data();
}

std::string sci(double v) { return fmt("%.3e", v); }
std::string fix(double v) { return fmt("%.3f", v); }

void log_line(const AcceptanceOptions& o, const std::string& s) {
  if (o.log) *o.log << "  " << s << std::endl;
}

void log_report(const AcceptanceOptions& o, const std::string& label, const ErrorReport& r) {
  for (std::size_t k = 0; k < r.grids.size(); ++k) {
    const GridResult& g = r.grids[k];
    std::string s = label + " n=" + std::to_string(g.n) + " dt=" + sci(g.dt) + " L1=" + sci(g.l1) +
                    " Linf=" + sci(g.linf);
    if (k) s += " order " + fix(r.l1_order(k)) + "/" + fix(r.linf_order(k));
    s += " (" + fmt("%.1f", g.runtime_s) + " s)";
    log_line(o, s);
  }
}

std::string orders(const ErrorReport& r, bool linf = false) {
  std::string s = "{";
  for (std::size_t k = 1; k < r.grids.size(); ++k) s += (k > 1 ? ", " : "") + fix(linf ? r.linf_order(k) : r.l1_order(k));
  return s + "}";
}

const std::vector<int> kGrids{32, 64, 128, 256};

// 1. Jump of the initial gradient, planar front.
void initial_gradient(const AcceptanceOptions& o, Check& c) {
  constexpr std::array<double, 4> published{3.18e-4, 8.04e-5, 2.02e-5, 5.07e-6};
  const ErrorReport r = initial_gradient_sweep(kGrids);
  log_report(o, "gradient", r);
  for (std::size_t k = 0; k < r.grids.size(); ++k) {
    const double ratio = r.grids[k].l1 / published[k];
    c.require(ratio >= 1.0 / 3.0 && ratio <= 3.0,
              "L1(" + std::to_string(r.grids[k].n) + ")=" + sci(r.grids[k].l1) + " vs " + sci(published[k]) + " x3");
  }
  c.require(r.l1_order(3) >= 1.8, "finest order " + fix(r.l1_order(3)) + " >= 1.8");
}

// 2. Planar front, dt ~ dx^2 and fixed dt.
void planar(const AcceptanceOptions& o, Check& c) {
  const CaseConfig cfg = default_config(Scenario::PlanarStefan);
  const ErrorReport r = convergence_sweep(cfg, kGrids, o.threads);
  log_report(o, "planar", r);
  c.require(r.l1_order(3) >= 1.8, "L1 orders " + orders(r) + " finest >= 1.8");
  c.require(r.linf_order(3) >= 1.8, "Linf orders " + orders(r, true) + " finest >= 1.8");

  CaseConfig fixed = cfg;
  fixed.dt = {DtRule::Kind::Fixed, 1e-6};
  fixed.max_steps = 400;
  fixed.t_end = 1.0;
  const ErrorReport rf = convergence_sweep(fixed, kGrids, o.threads);
  log_report(o, "planar dt=1e-6", rf);
  c.require(rf.l1_order(3) >= 1.9, "fixed-dt L1 orders " + orders(rf) + " finest >= 1.9");
}

// 3. Crank melting layer.
void crank(const AcceptanceOptions& o, Check& c) {
  constexpr std::array<double, 3> published{2.37, 2.19, 2.05};
  constexpr double linf_64_128 = 2.17;
  const ErrorReport r = convergence_sweep(default_config(Scenario::CrankLayer), kGrids, o.threads);
  log_report(o, "crank", r);
  for (std::size_t k = 1; k < r.grids.size(); ++k)
    c.require(std::abs(r.l1_order(k) - published[k - 1]) <= 0.35,
              "L1 order " + std::to_string(r.grids[k - 1].n) + "->" + std::to_string(r.grids[k].n) + " " +
                  fix(r.l1_order(k)) + " vs " + fix(published[k - 1]) + " +-0.35");
  c.require(std::abs(r.linf_order(2) - linf_64_128) <= 0.35,
            "Linf order 64->128 " + fix(r.linf_order(2)) + " vs " + fix(linf_64_128) + " +-0.35");
}

// 4. Frank sphere: two sweeps and radius tracking.
void frank(const AcceptanceOptions& o, Check& c) {
  const CaseConfig base = default_config(Scenario::FrankSphere);

  CaseConfig fixed = base;
  fixed.dt = {DtRule::Kind::Fixed, 1e-4};
  fixed.max_steps = 100;
  fixed.t_end = base.t_start + 1.0;
  const ErrorReport rf = convergence_sweep(fixed, kGrids, o.threads);
  log_report(o, "frank dt=1e-4", rf);
  c.require(std::abs(rf.l1_order(3) - 2.0) <= 0.3, "fixed-dt L1 orders " + orders(rf) + " finest 2+-0.3");

  CaseConfig quad = base;
  quad.dt = {DtRule::Kind::Quadratic, 0.2};
  quad.t_end = base.t_start + 0.1;
  const ErrorReport rq = convergence_sweep(quad, kGrids, o.threads);
  log_report(o, "frank dt=0.2dx^2", rq);
  c.require(rq.l1_order(3) >= 1.4 && rq.l1_order(3) <= 2.1,
            "0.2dx^2 L1 orders " + orders(rq) + " finest in [1.4, 2.1]");

  CaseConfig track = base;
  track.n = 256;
  track.dt = {DtRule::Kind::DerivedCfl, 0.0};
  track.t_end = 2.5;
  const CaseResult run = run_case(track);
  constexpr double s_published = 1.56;
  double worst = 0.0;
  for (const TimeseriesRow& row : run.timeseries) {
    if (row.t < 1.2 - 1e-12) continue;
    const double exact = s_published * std::sqrt(row.t);
    worst = std::max(worst, std::abs(row.mean_radius - exact) / exact);
  }
  log_line(o, "frank radius n=256 steps=" + std::to_string(run.steps) + " max rel dev " + sci(worst) + " (" +
                  fmt("%.1f", run.runtime_s) + " s)");
  c.require(worst <= 0.02, "radius vs 1.56 sqrt(t) on [1.2, 2.5] max rel " + sci(worst) + " <= 2%");
}

// 5. Circle under curvature flow.
void shrinking_circle(const AcceptanceOptions& o, Check& c) {
  const CaseConfig cfg = default_config(Scenario::ShrinkingCircle);
  const CaseResult r = run_case(cfg);
  double worst_sd = 0.0;
  for (const TimeseriesRow& row : r.timeseries) worst_sd = std::max(worst_sd, row.radius_stddev / row.mean_radius);
  // Oracle: R' = -1/R integrated independently with RK4 on the recorded step times.
  double r_ode = cfg.interface.value;
  double worst_ode = 0.0;
  for (std::size_t k = 1; k < r.timeseries.size(); ++k) {
    const double h = r.timeseries[k].t - r.timeseries[k - 1].t;
    constexpr int sub = 16;
    const double hs = h / sub;
    for (int s = 0; s < sub; ++s) {
      auto f = [](double R) { return -1.0 / R; };
      const double k1 = f(r_ode);
      const double k2 = f(r_ode + 0.5 * hs * k1);
      const double k3 = f(r_ode + 0.5 * hs * k2);
      const double k4 = f(r_ode + hs * k3);
      r_ode += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    worst_ode = std::max(worst_ode, std::abs(r.timeseries[k].mean_radius - r_ode) / r_ode);
  }
  log_line(o, "circle steps=" + std::to_string(r.steps) + " t=" + sci(r.t_final) + " R=" +
                  fmt("%.5f", r.timeseries.back().mean_radius) + " ode R=" + fmt("%.5f", r_ode));
  c.require(r.steps == 180, "steps " + std::to_string(r.steps) + " == 180");
  c.require(worst_sd < 0.01, "max stddev/mean " + sci(worst_sd) + " < 1%");
  c.require(worst_ode <= 0.01, "max |R - R_ode|/R_ode " + sci(worst_ode) + " <= 1%");
}

// 6. Flower: symmetry and onset ordering.
double rotation_defect(const Grid& g, const std::vector<double>& v) {
  const int n = g.n();
  double scale = 1.0;
  for (double x : v)
    if (std::isfinite(x)) scale = std::max(scale, std::abs(x));
  double worst = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      // (x, y) -> (-y, x)
      const double a = v[g.index(i, j)];
      const double b = v[g.index(n - 1 - j, i)];
      if (std::isnan(a) != std::isnan(b)) return INFINITY;
      if (!std::isnan(a)) worst = std::max(worst, std::abs(a - b));
    }
  return worst / scale;
}

void flower(const AcceptanceOptions& o, Check& c) {
  constexpr double kRoundoff = 1e-9;
  {
    CaseConfig cfg = default_config(Scenario::CrystalGrowth);
    cfg.n = 64;
    cfg.onset_factor = 0.0;
    cfg.write_fields = true;
    double worst = 0.0;
    const CaseResult r = run_case(cfg, [&](const Snapshot& s) {
      for (const auto& [name, values] : s.fields) worst = std::max(worst, rotation_defect(*s.grid, values));
    });
    log_line(o, "flower n=64 to t=" + fix(r.t_final) + " rotation defect " + sci(worst));
    c.require(worst <= kRoundoff, "90 deg rotation defect " + sci(worst) + " <= 1e-9");
  }
  auto onset = [&](int n) {
    CaseConfig cfg = default_config(Scenario::CrystalGrowth);
    cfg.n = n;
    const CaseResult r = run_case(cfg);
    double kmax = 0.0;
    for (const TimeseriesRow& row : r.timeseries) kmax = std::max(kmax, row.max_kappa);
    log_line(o, "flower n=" + std::to_string(n) + " steps=" + std::to_string(r.steps) + " kappa0=" +
                    fix(r.timeseries.front().max_kappa) + " max kappa=" + fix(kmax) +
                    " onset=" + (r.onset_time ? fmt("%.4f", *r.onset_time) : std::string("none")) + " (" +
                    fmt("%.1f", r.runtime_s) + " s)");
    return r.onset_time.value_or(INFINITY);
  };
  const double t64 = onset(64);
  const double t256 = onset(256);
  c.require(t256 < t64, "onset t(256)=" + fix(t256) + " < t(64)=" + fix(t64));
}

// 7. Sixfold anisotropy arms.
void sixfold(const AcceptanceOptions& o, Check& c) {
  const CaseConfig cfg = default_config(Scenario::Sixfold);
  const CaseResult r = run_case(cfg);
  ArmOptions arms;
  arms.sectors = 6;
  arms.offset = M_PI / 2.0;
  const std::vector<double> len = arm_lengths(r.final_interface, arms);
  const auto [lo, hi] = std::minmax_element(len.begin(), len.end());
  const double mean = std::accumulate(len.begin(), len.end(), 0.0) / static_cast<double>(len.size());
  std::string list;
  for (double l : len) list += (list.empty() ? "" : " ") + fmt("%.4f", l);
  log_line(o, "sixfold n=" + std::to_string(cfg.n) + " steps=" + std::to_string(r.steps) + " t=" + fmt("%.4f", r.t_final) +
                  " arms " + list + " (" + fmt("%.1f", r.runtime_s) + " s)");
  const double spread = (*hi - *lo) / mean;
  c.require(spread <= 0.05, "arm spread (max-min)/mean " + fix(100.0 * spread) + "% <= 5%");
  c.require(std::abs(mean - 1.27) <= 0.127, "mean arm " + fmt("%.4f", mean) + " in 1.27 +-10%");
}

// 8. Tip velocity plateau.
void tip_velocity(const AcceptanceOptions& o, Check& c) {
  const CaseConfig cfg = default_config(Scenario::TipVelocity);
  const CaseResult r = run_case(cfg);
  std::vector<double> t;
  std::vector<double> tip;
  for (const TimeseriesRow& row : r.timeseries) {
    t.push_back(row.t);
    tip.push_back(row.tip_x);
  }
  const std::vector<double> v = tip_x_velocity(t, tip);
  // Scaled velocity: V times the mean capillary coefficient (D = 1).
  std::vector<double> vs;
  for (std::size_t k = v.size() / 2; k < v.size(); ++k) vs.push_back(v[k] * cfg.eps_kappa);
  double plateau = NAN;
  double hf = 0.0;
  if (vs.size() >= 8) {
    plateau = std::accumulate(vs.begin(), vs.end(), 0.0) / static_cast<double>(vs.size());
    // High-frequency part: deviation from a centered 5-point moving average.
    double acc = 0.0;
    int cnt = 0;
    for (std::size_t k = 2; k + 2 < vs.size(); ++k) {
      const double avg = (vs[k - 2] + vs[k - 1] + vs[k] + vs[k + 1] + vs[k + 2]) / 5.0;
      acc += (vs[k] - avg) * (vs[k] - avg);
      ++cnt;
    }
    hf = cnt ? std::sqrt(acc / cnt) : 0.0;
  }
  log_line(o, "tip velocity steps=" + std::to_string(r.steps) + " plateau " + sci(plateau) + " hf rms " + sci(hf) +
                  " (" + fmt("%.1f", r.runtime_s) + " s)");
  c.require(plateau >= 1.5e-3 && plateau <= 2.3e-3, "plateau " + sci(plateau) + " in [1.5e-3, 2.3e-3]");
  c.require(hf > 1e-3 * std::abs(plateau), "oscillation rms " + sci(hf) + " > 1e-3 plateau");
}

// 9. Property suites.
double complementarity_defect(const LevelSet& ls) {
  const CutGeometry s = compute_geometry(ls, Phase::Solid);
  const CutGeometry l = compute_geometry(ls, Phase::Liquid);
  double worst = 0.0;
  for (std::size_t k = 0; k < s.volume.size(); ++k) worst = std::max(worst, std::abs(s.volume[k] + l.volume[k] - 1.0));
  for (std::size_t k = 0; k < s.face_x.size(); ++k) worst = std::max(worst, std::abs(s.face_x[k] + l.face_x[k] - 1.0));
  for (std::size_t k = 0; k < s.face_y.size(); ++k) worst = std::max(worst, std::abs(s.face_y[k] + l.face_y[k] - 1.0));
  return worst;
}

double closure_defect(const LevelSet& ls) {
  double worst = 0.0;
  for (Phase p : {Phase::Solid, Phase::Liquid}) {
    const CutGeometry g = compute_geometry(ls, p);
    const int n = g.grid.n();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t c = g.grid.index(i, j);
        const Vec2 ng = g.alpha_gamma[c] > 0.0 ? g.normal[c] : Vec2{0.0, 0.0};
        const double sx = g.ax(i + 1, j) - g.ax(i, j) + g.alpha_gamma[c] * ng.x;
        const double sy = g.ay(i, j + 1) - g.ay(i, j) + g.alpha_gamma[c] * ng.y;
        worst = std::max({worst, std::abs(sx), std::abs(sy)});
      }
  }
  return worst;
}

double gradient_defect(const LevelSet& ls, const std::function<double(Vec2)>& f, const std::function<Vec2(Vec2)>& grad) {
  double worst = 0.0;
  for (Phase p : {Phase::Solid, Phase::Liquid}) {
    const CutGeometry g = compute_geometry(ls, p);
    ScalarField field(g.grid, 0.0);
    const int n = g.grid.n();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) field(i, j) = f(g.grid.cell_center(i, j));
    std::vector<double> tg(g.grid.cell_count(), 0.0);
    for (std::size_t c : g.interfacial_cells()) tg[c] = f(g.centroid[c]);
    PhaseProblem prob{g, field, 1.0, tg};
    for (std::size_t c : g.interfacial_cells()) {
      const auto [i, j] = g.grid.unflatten(c);
      const auto st = try_gradient_stencil(g, i, j);
      if (!st || st->order != GradientStencil::Order::Second) continue;
      const double exact = -dot(grad(g.centroid[c]), g.normal[c]);
      worst = std::max(worst, std::abs(apply_stencil(*st, field, tg[c]) - exact));
    }
  }
  return worst;
}

void properties(const AcceptanceOptions& o, Check& c) {
  const Grid grid(64, {-0.5, -0.5}, 1.0);
  const LevelSet circle = LevelSet::from(grid, [](Vec2 p) { return norm(p - Vec2{0.013, -0.021}) - 0.3137; });
  const LevelSet flower = LevelSet::from(grid, [](Vec2 p) {
    const double r = norm(p);
    const double th = std::atan2(p.y, p.x);
    return r * r * (1.0 - 0.3 * std::cos(4.0 * th)) - 1.0 / 15.0;
  });

  const double comp = std::max(complementarity_defect(circle), complementarity_defect(flower));
  c.require(comp <= 1e-13, "complementarity " + sci(comp) + " <= 1e-13");

  const double clos = std::max(closure_defect(circle), closure_defect(flower));
  c.require(clos <= 1e-12, "Gauss closure " + sci(clos) + " <= 1e-12");

  const double lin = gradient_defect(
      circle, [](Vec2 x) { return 0.7 - 1.3 * x.x + 2.1 * x.y; }, [](Vec2) { return Vec2{-1.3, 2.1}; });
  const double quad = gradient_defect(
      circle, [](Vec2 x) { return 0.2 + x.x - 0.5 * x.y + 1.5 * x.x * x.x - 0.8 * x.x * x.y + 2.2 * x.y * x.y; },
      [](Vec2 x) { return Vec2{1.0 + 3.0 * x.x - 0.8 * x.y, -0.5 - 0.8 * x.x + 4.4 * x.y}; });
  c.require(std::max(lin, quad) <= 1e-10,
            "embedded gradient linear " + sci(lin) + " quadratic " + sci(quad) + " <= 1e-10");

  {
    const Grid g(128, {-0.5, -0.5}, 1.0);
    const LevelSet perturbed = LevelSet::from(g, [](Vec2 p) { return 2.0 * (norm(p) - 0.25); });
    const double dx = g.dx();
    const LevelSet rd = redistance(perturbed, redistance_iterations(10.0, 0.3), 0.3 * dx);
    double worst = 0.0;
    for (int j = 1; j + 1 < g.n(); ++j)
      for (int i = 1; i + 1 < g.n(); ++i) {
        if (std::abs(norm(g.cell_center(i, j)) - 0.25) > 5.0 * dx) continue;
        const double gx = (rd.phi(i + 1, j) - rd.phi(i - 1, j)) / (2.0 * dx);
        const double gy = (rd.phi(i, j + 1) - rd.phi(i, j - 1)) / (2.0 * dx);
        worst = std::max(worst, std::abs(std::hypot(gx, gy) - 1.0));
      }
    c.require(worst < 0.05, "redistanced | |grad phi| - 1 | " + sci(worst) + " < 0.05 in 5dx band");
  }

  {
    // p(x, y) = sum a_kl x^k y^l, k, l <= 2.
    constexpr std::array<std::array<double, 3>, 3> a{{{0.3, -1.1, 0.7}, {2.0, 0.4, -0.9}, {-1.6, 1.2, 0.5}}};
    auto p = [&a](Vec2 x) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s += a[k][l] * std::pow(x.x, k) * std::pow(x.y, l);
      return s;
    };
    const Grid g(32, {-1.0, -1.0}, 2.0);
    ScalarField f(g, 0.0);
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) f(i, j) = p(g.cell_center(i, j));
    double worst = 0.0;
    for (int k = 0; k < 97; ++k) {
      const Vec2 x{-0.9 + 1.8 * std::fmod(0.6180339887 * k, 1.0), -0.9 + 1.8 * std::fmod(0.7548776662 * k + 0.1, 1.0)};
      worst = std::max(worst, std::abs(sample_biquadratic(f, x) - p(x)));
    }
    c.require(worst <= 1e-12, "biquadratic reproduction " + sci(worst) + " <= 1e-12");
  }

  {
    boost::math::quadrature::exp_sinh<double> integrator;
    double worst = 0.0;
    for (double x : {1e-3, 0.05, 0.3, 0.99, 1.0, 1.01, 2.5, 7.0, 20.0, 60.0}) {
      const double q = integrator.integrate([x](double u) { return std::exp(-(x + u)) / (x + u); }, 0.0,
                                            std::numeric_limits<double>::infinity());
      worst = std::max(worst, std::abs(analytic::exp_integral_e1(x) - q) / q);
    }
    c.require(worst <= 1e-10, "E1 vs quadrature rel " + sci(worst) + " <= 1e-10");
  }
  log_line(o, "property suites done");
}

struct Criterion {
  const char* name;
  double budget_s;
  Profile min_profile;
  void (*run)(const AcceptanceOptions&, Check&);
};

const std::array<Criterion, kCriterionCount> kCriteria{{
    {"initial_gradient", 60.0, Profile::Quick, initial_gradient},
    {"planar_stefan", 600.0, Profile::Full, planar},
    {"crank_layer", 600.0, Profile::Full, crank},
    {"frank_sphere", 1200.0, Profile::Full, frank},
    {"shrinking_circle", 120.0, Profile::Quick, shrinking_circle},
    {"crystal_growth", 1800.0, Profile::Full, flower},
    {"sixfold", 2700.0, Profile::Full, sixfold},
    {"tip_velocity", 0.0, Profile::Long, tip_velocity},
    {"properties", 60.0, Profile::Quick, properties},
}};

int rank(Profile p) { return static_cast<int>(p); }

}  // namespace

std::string_view profile_name(Profile p) {
  switch (p) {
    case Profile::Quick: return "quick";
    case Profile::Full: return "full";
    case Profile::Long: return "long";
  }
  return "?";
}

std::optional<Profile> profile_from_name(std::string_view name) {
  for (Profile p : {Profile::Quick, Profile::Full, Profile::Long})
    if (profile_name(p) == name) return p;
  return std::nullopt;
}

int threads_from_env() {
  const char* s = std::getenv("STEFAN_CUT_THREADS");
  if (!s) return 1;
  const int v = std::atoi(s);
  return v > 0 ? v : 1;
}

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  if (id < 1 || id > kCriterionCount) throw ValidationError("criterion id must lie in 1.." + std::to_string(kCriterionCount));
  const Criterion& cr = kCriteria[static_cast<std::size_t>(id - 1)];
  CriterionResult res;
  res.id = id;
  res.name = cr.name;
  res.budget_s = cr.budget_s;
  if (rank(options.profile) < rank(cr.min_profile)) {
    res.status = Status::Skip;
    res.detail = "needs profile " + std::string(profile_name(cr.min_profile));
    return res;
  }
  const auto t0 = Clock::now();
  Check check;
  try {
    cr.run(options, check);
  } catch (const std::exception& e) {
    check.require(false, std::string("error: ") + e.what());
  }
  res.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
  if (cr.budget_s > 0.0)
    check.require(res.runtime_s < cr.budget_s,
                  "runtime " + fmt("%.1f", res.runtime_s) + " s < " + fmt("%.0f", cr.budget_s) + " s");
  res.status = check.ok ? Status::Pass : Status::Fail;
  res.detail = check.detail.str();
  return res;
}

std::string format_result(const CriterionResult& r) {
  const char* tag = r.status == Status::Pass ? "PASS" : r.status == Status::Fail ? "FAIL" : "SKIP";
  std::ostringstream os;
  os << tag << ' ' << r.id << ' ' << r.name << ": " << r.detail;
  if (r.status != Status::Skip) os << " (" << fmt("%.1f", r.runtime_s) << " s)";
  return os.str();
}

}  // namespace stefan
