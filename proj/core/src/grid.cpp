#include "stefan/grid.hpp"

#include <algorithm>

namespace stefan {

Grid::Grid(int n, Vec2 origin, double side) : n_(n), origin_(origin), side_(side), dx_(side / n) {
  if (n < 4) throw Error("grid: n must be at least 4, got " + std::to_string(n));
  if (!(side > 0.0)) throw Error("grid: side length must be positive");
}

ScalarField::ScalarField(Grid grid, double fill, BoundarySet bc)
    : grid_(grid),
      stride_(grid.n() + 2 * Grid::kGhost),
      bc_(std::move(bc)),
      data_(static_cast<std::size_t>(stride_) * static_cast<std::size_t>(stride_), fill) {
  set_boundaries(bc_);
}

void ScalarField::set_boundary(Side side, BoundaryRule rule) {
  auto& slot = bc_[static_cast<int>(side)];
  slot = std::move(rule);
  if (slot.kind == BoundaryRule::Kind::Dirichlet && slot.values.size() != 1 &&
      slot.values.size() != static_cast<std::size_t>(grid_.n()))
    throw Error("boundary: Dirichlet profile must have 1 or n values");
}

void ScalarField::set_boundaries(BoundarySet bc) {
  for (int s = 0; s < 4; ++s) set_boundary(static_cast<Side>(s), std::move(bc[s]));
  auto periodic = [&](Side s) { return bc_[static_cast<int>(s)].kind == BoundaryRule::Kind::Periodic; };
  if (periodic(Side::Left) != periodic(Side::Right) || periodic(Side::Bottom) != periodic(Side::Top))
    throw Error("boundary: periodic rules must be set on both opposite sides");
}

std::vector<double> ScalarField::interior() const {
  const int n = grid_.n();
  std::vector<double> out(grid_.cell_count());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out[grid_.index(i, j)] = (*this)(i, j);
  return out;
}

void ScalarField::assign_interior(std::span<const double> values) {
  if (values.size() != grid_.cell_count()) throw Error("field: interior size mismatch");
  const int n = grid_.n();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) (*this)(i, j) = values[grid_.index(i, j)];
  apply_bc();
}

void ScalarField::apply_bc() {
  const int n = grid_.n();
  using Kind = BoundaryRule::Kind;

  // x sides first over interior rows, then y sides over full (ghosted) columns,
  // so corner ghosts are derived from already-filled x ghosts.
  for (int j = 0; j < n; ++j) {
    for (int g = 1; g <= Grid::kGhost; ++g) {
      const auto& left = bc_[static_cast<int>(Side::Left)];
      const auto& right = bc_[static_cast<int>(Side::Right)];
      switch (left.kind) {
        case Kind::Dirichlet: (*this)(-g, j) = 2.0 * left.value_at(j) - (*this)(g - 1, j); break;
        case Kind::NeumannZero: (*this)(-g, j) = (*this)(g - 1, j); break;
        case Kind::Periodic: (*this)(-g, j) = (*this)(n - g, j); break;
        case Kind::LinearExtrapolation:
          (*this)(-g, j) = (*this)(0, j) + g * ((*this)(0, j) - (*this)(1, j));
          break;
      }
      switch (right.kind) {
        case Kind::Dirichlet: (*this)(n - 1 + g, j) = 2.0 * right.value_at(j) - (*this)(n - g, j); break;
        case Kind::NeumannZero: (*this)(n - 1 + g, j) = (*this)(n - g, j); break;
        case Kind::Periodic: (*this)(n - 1 + g, j) = (*this)(g - 1, j); break;
        case Kind::LinearExtrapolation:
          (*this)(n - 1 + g, j) = (*this)(n - 1, j) + g * ((*this)(n - 1, j) - (*this)(n - 2, j));
          break;
      }
    }
  }
  for (int i = -Grid::kGhost; i < n + Grid::kGhost; ++i) {
    // Profiles are indexed by interior cells; corner columns reuse the nearest.
    const int k = std::clamp(i, 0, n - 1);
    for (int g = 1; g <= Grid::kGhost; ++g) {
      const auto& bottom = bc_[static_cast<int>(Side::Bottom)];
      const auto& top = bc_[static_cast<int>(Side::Top)];
      switch (bottom.kind) {
        case Kind::Dirichlet: (*this)(i, -g) = 2.0 * bottom.value_at(k) - (*this)(i, g - 1); break;
        case Kind::NeumannZero: (*this)(i, -g) = (*this)(i, g - 1); break;
        case Kind::Periodic: (*this)(i, -g) = (*this)(i, n - g); break;
        case Kind::LinearExtrapolation:
          (*this)(i, -g) = (*this)(i, 0) + g * ((*this)(i, 0) - (*this)(i, 1));
          break;
      }
      switch (top.kind) {
        case Kind::Dirichlet: (*this)(i, n - 1 + g) = 2.0 * top.value_at(k) - (*this)(i, n - g); break;
        case Kind::NeumannZero: (*this)(i, n - 1 + g) = (*this)(i, n - g); break;
        case Kind::Periodic: (*this)(i, n - 1 + g) = (*this)(i, g - 1); break;
        case Kind::LinearExtrapolation:
          (*this)(i, n - 1 + g) = (*this)(i, n - 1) + g * ((*this)(i, n - 1) - (*this)(i, n - 2));
          break;
      }
    }
  }
}

ScalarField apply_bc(ScalarField f) {
  f.apply_bc();
  return f;
}

BiquadraticStencil biquadratic_stencil(const Grid& grid, Vec2 x) {
  BiquadraticStencil s;
  s.center = grid.containing_cell(x);
  const Vec2 c = grid.cell_center(s.center.i, s.center.j);
  const auto wx = lagrange3((x.x - c.x) / grid.dx());
  const auto wy = lagrange3((x.y - c.y) / grid.dx());
  for (int b = 0; b < 3; ++b)
    for (int a = 0; a < 3; ++a) s.weight[b][a] = wx[a] * wy[b];
  return s;
}

std::optional<double> try_sample_biquadratic(const ScalarField& f, Vec2 x, const CellMask* mask) {
  const Grid& grid = f.grid();
  const auto s = biquadratic_stencil(grid, x);
  const int reach = mask ? 0 : Grid::kGhost - 1;
  double sum = 0.0;
  for (int b = 0; b < 3; ++b) {
    for (int a = 0; a < 3; ++a) {
      const int i = s.center.i + a - 1;
      const int j = s.center.j + b - 1;
      if (i < -reach || j < -reach || i >= grid.n() + reach || j >= grid.n() + reach) return std::nullopt;
      if (mask && !(*mask)[grid.index(i, j)]) return std::nullopt;
      sum += s.weight[b][a] * f(i, j);
    }
  }
  return sum;
}

double sample_biquadratic(const ScalarField& f, Vec2 x, const CellMask* mask) {
  if (auto v = try_sample_biquadratic(f, x, mask)) return *v;
  throw StencilInvalid("biquadratic stencil touches an invalid cell");
}

}  // namespace stefan
