#include "stefan/cutcell.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace stefan {

CutGeometry::CutGeometry(const Grid& g)
    : grid(g),
      volume(g.cell_count(), 0.0),
      face_x(static_cast<std::size_t>(g.n() + 1) * g.n(), 0.0),
      face_y(static_cast<std::size_t>(g.n() + 1) * g.n(), 0.0),
      alpha_gamma(g.cell_count(), 0.0),
      centroid(g.cell_count()),
      normal(g.cell_count()),
      cut(g.cell_count(), 0),
      segments(g.cell_count()) {}

CellMask CutGeometry::defined_mask() const {
  CellMask m(volume.size());
  for (std::size_t c = 0; c < volume.size(); ++c) m[c] = volume[c] > kVolumeMin;
  return m;
}

std::vector<std::size_t> CutGeometry::interfacial_cells() const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < cut.size(); ++c)
    if (cut[c]) out.push_back(c);
  return out;
}

CutGeometry CutGeometry::complement() const {
  CutGeometry o = *this;
  o.phase = other(phase);
  for (auto& v : o.volume) v = 1.0 - v;
  for (auto& a : o.face_x) a = 1.0 - a;
  for (auto& a : o.face_y) a = 1.0 - a;
  for (auto& n : o.normal) n = -n;
  return o;
}

namespace {

// Fraction of the edge a -> b where phi < 0.
double wet_fraction(double a, double b) {
  const bool ia = a < 0.0;
  const bool ib = b < 0.0;
  if (ia && ib) return 1.0;
  if (!ia && !ib) return 0.0;
  return ia ? a / (a - b) : b / (b - a);
}

double shoelace(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Vec2 p = poly[k];
    const Vec2 q = poly[(k + 1) % poly.size()];
    s += p.x * q.y - q.x * p.y;
  }
  return 0.5 * s;
}

}  // namespace

CutGeometry compute_geometry(const LevelSet& level_set, Phase phase) {
  const Grid& grid = level_set.grid();
  const int n = grid.n();
  const double dx = grid.dx();
  const ScalarField& phi = level_set.phi;

  const std::size_t nv = static_cast<std::size_t>(n + 1);
  std::vector<double> vtx(nv * nv);
  auto vertex = [&](int i, int j) -> double& { return vtx[static_cast<std::size_t>(j) * nv + i]; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      vertex(i, j) = 0.25 * (phi(i - 1, j - 1) + phi(i, j - 1) + phi(i - 1, j) + phi(i, j));

  CutGeometry g(grid);
  g.phase = Phase::Solid;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= n; ++i)
      g.face_x[static_cast<std::size_t>(j) * nv + i] = wet_fraction(vertex(i, j), vertex(i, j + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i < n; ++i)
      g.face_y[static_cast<std::size_t>(j) * n + i] = wet_fraction(vertex(i, j), vertex(i + 1, j));

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t c = grid.index(i, j);
      // Corners counter-clockwise from the lower left; edge k joins corner k and k+1.
      const std::array<Vec2, 4> P = {grid.vertex(i, j), grid.vertex(i + 1, j), grid.vertex(i + 1, j + 1),
                                     grid.vertex(i, j + 1)};
      const std::array<double, 4> v = {vertex(i, j), vertex(i + 1, j), vertex(i + 1, j + 1), vertex(i, j + 1)};
      std::array<bool, 4> in{};
      int count = 0;
      for (int k = 0; k < 4; ++k) count += (in[k] = v[k] < 0.0);
      if (count == 0) continue;
      if (count == 4) {
        g.volume[c] = 1.0;
        continue;
      }

      std::array<Vec2, 4> cross{};
      std::array<bool, 4> has{};
      for (int k = 0; k < 4; ++k) {
        const int m = (k + 1) % 4;
        if (in[k] != in[m]) {
          has[k] = true;
          const double t = v[k] / (v[k] - v[m]);
          cross[k] = P[k] + t * (P[m] - P[k]);
        }
      }
      auto walk = [&](bool solid) {
        std::vector<Vec2> poly;
        for (int k = 0; k < 4; ++k) {
          if (in[k] == solid) poly.push_back(P[k]);
          if (has[k]) poly.push_back(cross[k]);
        }
        return shoelace(poly);
      };

      auto& segs = g.segments[c];
      const bool saddle = in[0] == in[2] && in[1] == in[3] && in[0] != in[1];
      double area;
      if (saddle) {
        ++g.saddle_count;
        const bool center_solid = phi(i, j) < 0.0;
        area = center_solid ? walk(true) : dx * dx - walk(false);
        // Corners whose phase differs from the center are cut off on their own.
        for (int k = 0; k < 4; ++k)
          if (in[k] != center_solid) segs.push_back({cross[(k + 3) % 4], cross[k]});
      } else {
        area = walk(true);
        std::vector<Vec2> pts;
        for (int k = 0; k < 4; ++k)
          if (has[k]) pts.push_back(cross[k]);
        segs.push_back({pts[0], pts[1]});
      }
      g.volume[c] = std::clamp(area / (dx * dx), 0.0, 1.0);

      double length = 0.0;
      Vec2 mid{};
      for (const auto& s : segs) {
        const double l = norm(s.b - s.a);
        length += l;
        mid += l * (0.5 * (s.a + s.b));
      }
      if (!(length > 1e-14 * dx)) {
        segs.clear();
        continue;
      }
      g.cut[c] = 1;
      g.centroid[c] = mid / length;

      // Closure of the cell polygon fixes the interface vector area exactly.
      const Vec2 A{-(g.ax(i + 1, j) - g.ax(i, j)), -(g.ay(i, j + 1) - g.ay(i, j))};
      const double a = norm(A);
      g.alpha_gamma[c] = a;
      if (a > 1e-14) {
        g.normal[c] = A / a;
      } else {
        const Vec2 grad{phi(i + 1, j) - phi(i - 1, j), phi(i, j + 1) - phi(i, j - 1)};
        const double m = norm(grad);
        g.normal[c] = m > 0.0 ? grad / m : Vec2{1.0, 0.0};
      }
    }
  }
  return phase == Phase::Solid ? g : g.complement();
}

std::vector<double> fv_divergence(const CutGeometry& g, const FluxSet& flux) {
  const Grid& grid = g.grid;
  const int n = grid.n();
  const double dx = grid.dx();
  const std::size_t nv = static_cast<std::size_t>(n + 1);
  if (flux.x.size() != g.face_x.size() || flux.y.size() != g.face_y.size() || flux.gamma.size() != grid.cell_count())
    throw MissingFlux("fv_divergence: flux arrays do not match the geometry layout");

  std::vector<double> out(grid.cell_count(), std::nan(""));
  auto face = [&](const std::vector<double>& frac, const std::vector<double>& f, std::size_t k) {
    if (frac[k] == 0.0) return 0.0;
    if (std::isnan(f[k])) throw MissingFlux("fv_divergence: missing flux on a wetted face");
    return frac[k] * f[k];
  };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t c = grid.index(i, j);
      if (!(g.volume[c] > kVolumeMin)) continue;
      double s = face(g.face_x, flux.x, static_cast<std::size_t>(j) * nv + i + 1) -
                 face(g.face_x, flux.x, static_cast<std::size_t>(j) * nv + i) +
                 face(g.face_y, flux.y, static_cast<std::size_t>(j + 1) * n + i) -
                 face(g.face_y, flux.y, static_cast<std::size_t>(j) * n + i);
      if (g.cut[c] && g.alpha_gamma[c] > 0.0) {
        if (std::isnan(flux.gamma[c])) throw MissingFlux("fv_divergence: missing interface flux");
        s += g.alpha_gamma[c] * flux.gamma[c];
      }
      out[c] = s / (g.volume[c] * dx);
    }
  }
  return out;
}

std::optional<NormalLineSample> sample_normal_line(const CutGeometry& g, int i, int j, int axis, int offset,
                                                  const CellMask* valid) {
  const Grid& grid = g.grid;
  const int n = grid.n();
  const double dx = grid.dx();
  const std::size_t c = grid.index(i, j);
  const Vec2 xg = g.centroid[c];
  const Vec2 nin = -g.normal[c];
  if (nin[axis] == 0.0) return std::nullopt;
  const int s = nin[axis] > 0.0 ? 1 : -1;
  const int line = (axis == 0 ? i : j) + s * offset;
  if (line < 0 || line >= n) return std::nullopt;
  const int t = 1 - axis;
  const double coord = grid.origin()[axis] + (line + 0.5) * dx;
  NormalLineSample out;
  out.d = (coord - xg[axis]) / nin[axis];
  if (!(out.d > 0.0)) return std::nullopt;
  const double y = xg[t] + out.d * nin[t];
  const double u = (y - grid.origin()[t]) / dx - 0.5;
  const int mid = static_cast<int>(std::lround(u));
  auto ok_cell = [&](int ci, int cj) {
    if (!grid.inside(ci, cj)) return false;
    return valid ? (*valid)[grid.index(ci, cj)] != 0 : g.defined(ci, cj);
  };
  for (int m : {mid, mid - 1, mid + 1}) {
    bool ok = true;
    for (int q = -1; q <= 1 && ok; ++q) ok = axis == 0 ? ok_cell(line, m + q) : ok_cell(m + q, line);
    if (!ok) continue;
    const auto w = lagrange3(u - m);
    for (int q = -1; q <= 1; ++q) {
      const int ci = axis == 0 ? line : m + q;
      const int cj = axis == 0 ? m + q : line;
      out.terms[q + 1] = {grid.index(ci, cj), w[q + 1]};
    }
    return out;
  }
  return std::nullopt;
}

std::vector<int> stencil_axes(Vec2 n) {
  if (std::abs(std::abs(n.x) - std::abs(n.y)) <= 1e-12) return {0, 1};
  return {std::abs(n.x) > std::abs(n.y) ? 0 : 1};
}

namespace {

std::optional<GradientStencil> second_order(const CutGeometry& g, int i, int j, int axis, const CellMask* valid) {
  const auto l1 = sample_normal_line(g, i, j, axis, 1, valid);
  if (!l1) return std::nullopt;
  const auto l2 = sample_normal_line(g, i, j, axis, 2, valid);
  if (!l2) return std::nullopt;
  const double d1 = l1->d;
  const double d2 = l2->d;
  const double inv = 1.0 / (d2 - d1);
  GradientStencil st;
  st.order = GradientStencil::Order::Second;
  st.gamma_weight = inv * (d1 / d2 - d2 / d1);
  for (const auto& [c, w] : l1->terms) st.terms.emplace_back(c, w * inv * d2 / d1);
  for (const auto& [c, w] : l2->terms) st.terms.emplace_back(c, -w * inv * d1 / d2);
  return st;
}

std::optional<GradientStencil> first_order(const CutGeometry& g, int i, int j, int axis, const CellMask* valid) {
  const auto l1 = sample_normal_line(g, i, j, axis, 1, valid);
  if (!l1) return std::nullopt;
  GradientStencil st;
  st.order = GradientStencil::Order::FirstOrder;
  st.gamma_weight = -1.0 / l1->d;
  for (const auto& [c, w] : l1->terms) st.terms.emplace_back(c, w / l1->d);
  return st;
}

GradientStencil average(const GradientStencil& a, const GradientStencil& b) {
  GradientStencil out;
  out.order = a.order;
  out.gamma_weight = 0.5 * (a.gamma_weight + b.gamma_weight);
  for (const auto& [c, w] : a.terms) out.terms.emplace_back(c, 0.5 * w);
  for (const auto& [c, w] : b.terms) out.terms.emplace_back(c, 0.5 * w);
  return out;
}

}  // namespace

std::optional<GradientStencil> try_gradient_stencil(const CutGeometry& g, int i, int j, const CellMask* valid) {
  const std::size_t c = g.grid.index(i, j);
  if (!g.cut[c]) return std::nullopt;
  const Vec2 xg = g.centroid[c];

  // Near-diagonal normals use both axes so the stencil respects the grid symmetry.
  const auto axes = stencil_axes(g.normal[c]);
  for (auto build : {second_order, first_order}) {
    std::vector<GradientStencil> found;
    for (int axis : axes)
      if (auto s = build(g, i, j, axis, valid)) found.push_back(std::move(*s));
    if (found.size() == 2) return average(found[0], found[1]);
    if (found.size() == 1) return found[0];
  }

  if (valid ? !(*valid)[c] : !g.defined(i, j)) return std::nullopt;
  const double d = norm(g.grid.cell_center(i, j) - xg);
  if (!(d > 1e-12 * g.grid.dx())) return std::nullopt;
  GradientStencil st;
  st.order = GradientStencil::Order::CellCenter;
  st.gamma_weight = -1.0 / d;
  st.terms.emplace_back(c, 1.0 / d);
  return st;
}

GradientStencil gradient_stencil(const CutGeometry& g, int i, int j) {
  if (auto s = try_gradient_stencil(g, i, j)) return *s;
  throw InsufficientStencil("embedded gradient: no usable stencil at cell (" + std::to_string(i) + "," +
                            std::to_string(j) + ")");
}

double apply_stencil(const GradientStencil& s, const ScalarField& field, double t_gamma) {
  const Grid& grid = field.grid();
  double v = s.gamma_weight * t_gamma;
  for (const auto& [c, w] : s.terms) v += w * field.at(grid.unflatten(c));
  return v;
}

double embedded_gradient(const PhaseProblem& p, CellIndex cell) {
  const auto s = gradient_stencil(p.geometry, cell.i, cell.j);
  return apply_stencil(s, p.field, p.t_gamma.at(p.geometry.grid.index(cell.i, cell.j)));
}

void StencilCounters::count(GradientStencil::Order o) {
  switch (o) {
    case GradientStencil::Order::Second: ++second; break;
    case GradientStencil::Order::FirstOrder: ++first_order; break;
    case GradientStencil::Order::CellCenter: ++cell_center; break;
  }
}

StencilCounters& StencilCounters::operator+=(const StencilCounters& o) {
  second += o.second;
  first_order += o.first_order;
  cell_center += o.cell_center;
  missing += o.missing;
  return *this;
}

}  // namespace stefan
