#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stefan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A biquadratic stencil touched a masked-out cell.
class StencilInvalid : public Error {
 public:
  using Error::Error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;

  [[nodiscard]] constexpr double operator[](int axis) const { return axis == 0 ? x : y; }
  [[nodiscard]] constexpr double& operator[](int axis) { return axis == 0 ? x : y; }
};

[[nodiscard]] constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
[[nodiscard]] inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Cell index pair on the uniform grid; interior cells are 0 <= i,j < n.
struct CellIndex {
  int i = 0;
  int j = 0;
  friend constexpr bool operator==(CellIndex, CellIndex) = default;
};

/// Uniform square Cartesian grid of n x n cells.
class Grid {
 public:
  /// Ghost layers allocated around every field (ENO stencils reach i +- 2).
  static constexpr int kGhost = 2;

  Grid(int n, Vec2 origin, double side);

  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] Vec2 origin() const { return origin_; }
  [[nodiscard]] double side() const { return side_; }
  [[nodiscard]] double dx() const { return dx_; }
  [[nodiscard]] std::size_t cell_count() const {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
  }

  [[nodiscard]] Vec2 cell_center(int i, int j) const {
    return {origin_.x + (i + 0.5) * dx_, origin_.y + (j + 0.5) * dx_};
  }
  [[nodiscard]] Vec2 vertex(int i, int j) const {
    return {origin_.x + i * dx_, origin_.y + j * dx_};
  }

  /// Cell whose closed-open box [x_i, x_i + dx) contains p; may lie outside 0..n-1.
  [[nodiscard]] CellIndex containing_cell(Vec2 p) const {
    return {static_cast<int>(std::floor((p.x - origin_.x) / dx_)),
            static_cast<int>(std::floor((p.y - origin_.y) / dx_))};
  }

  [[nodiscard]] bool inside(int i, int j) const { return i >= 0 && j >= 0 && i < n_ && j < n_; }

  /// Row-major interior index (j outer, i inner).
  [[nodiscard]] std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
  }
  [[nodiscard]] CellIndex unflatten(std::size_t k) const {
    return {static_cast<int>(k % static_cast<std::size_t>(n_)),
            static_cast<int>(k / static_cast<std::size_t>(n_))};
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.n_ == b.n_ && a.origin_ == b.origin_ && a.side_ == b.side_;
  }

 private:
  int n_;
  Vec2 origin_;
  double side_;
  double dx_;
};

enum class Side : int { Left = 0, Right = 1, Bottom = 2, Top = 3 };

/// Outer boundary rule for one side of a field.
///
/// Dirichlet data is imposed at the face centers of the boundary cells, either
/// as one constant or as a per-cell profile (ordered by increasing coordinate
/// along the side).
struct BoundaryRule {
  enum class Kind { Dirichlet, NeumannZero, Periodic, LinearExtrapolation };

  Kind kind = Kind::NeumannZero;
  std::vector<double> values;

  static BoundaryRule dirichlet(double value) { return {Kind::Dirichlet, {value}}; }
  static BoundaryRule dirichlet_profile(std::vector<double> profile) {
    return {Kind::Dirichlet, std::move(profile)};
  }
  static BoundaryRule neumann_zero() { return {Kind::NeumannZero, {}}; }
  static BoundaryRule periodic() { return {Kind::Periodic, {}}; }
  /// Ghosts continue the last two interior values linearly (used for level sets).
  static BoundaryRule linear_extrapolation() { return {Kind::LinearExtrapolation, {}}; }

  /// Dirichlet value imposed at boundary cell `k` along the side.
  [[nodiscard]] double value_at(int k) const {
    return values.size() == 1 ? values.front() : values.at(static_cast<std::size_t>(k));
  }
};

using BoundarySet = std::array<BoundaryRule, 4>;

[[nodiscard]] inline BoundarySet uniform_boundaries(const BoundaryRule& rule) {
  return {rule, rule, rule, rule};
}

/// Cell-centered scalar values with kGhost ghost layers per side.
class ScalarField {
 public:
  ScalarField(Grid grid, double fill = 0.0, BoundarySet bc = uniform_boundaries(BoundaryRule::neumann_zero()));

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] const BoundarySet& boundaries() const { return bc_; }
  void set_boundary(Side side, BoundaryRule rule);
  void set_boundaries(BoundarySet bc);

  /// Access including ghosts: -kGhost <= i,j < n + kGhost.
  [[nodiscard]] double operator()(int i, int j) const { return data_[storage_index(i, j)]; }
  [[nodiscard]] double& operator()(int i, int j) { return data_[storage_index(i, j)]; }

  [[nodiscard]] double at(CellIndex c) const { return (*this)(c.i, c.j); }
  [[nodiscard]] double& at(CellIndex c) { return (*this)(c.i, c.j); }

  /// Interior values copied out in row-major order.
  [[nodiscard]] std::vector<double> interior() const;
  void assign_interior(std::span<const double> values);

  /// Fill the ghost layers from the interior and the per-side rules.
  void apply_bc();

  template <class F>
  void fill(F&& f) {
    for (int j = 0; j < grid_.n(); ++j)
      for (int i = 0; i < grid_.n(); ++i) (*this)(i, j) = f(grid_.cell_center(i, j));
    apply_bc();
  }

  friend bool operator==(const ScalarField& a, const ScalarField& b) {
    return a.grid_ == b.grid_ && a.data_ == b.data_;
  }

 private:
  [[nodiscard]] std::size_t storage_index(int i, int j) const {
    return static_cast<std::size_t>(j + Grid::kGhost) * static_cast<std::size_t>(stride_) +
           static_cast<std::size_t>(i + Grid::kGhost);
  }

  Grid grid_;
  int stride_;
  BoundarySet bc_;
  std::vector<double> data_;
};

/// Value-returning form: copy of `f` with its ghosts filled.
[[nodiscard]] ScalarField apply_bc(ScalarField f);

/// Per-cell validity mask over the interior (1 = valid).
using CellMask = std::vector<std::uint8_t>;

/// 1-D quadratic Lagrange weights on nodes {-1, 0, 1} evaluated at offset t.
[[nodiscard]] constexpr std::array<double, 3> lagrange3(double t) {
  return {0.5 * t * (t - 1.0), (1.0 - t) * (1.0 + t), 0.5 * t * (t + 1.0)};
}

/// Weights of the biquadratic interpolant at a point, with the stencil center.
struct BiquadraticStencil {
  CellIndex center;
  std::array<std::array<double, 3>, 3> weight;  // [dj + 1][di + 1]
};

/// Stencil for point x: 3 x 3 cells centred on the cell containing x.
[[nodiscard]] BiquadraticStencil biquadratic_stencil(const Grid& grid, Vec2 x);

/// Biquadratic interpolation of f at x. Without a mask, ghost cells are used as
/// stored; with a mask, every stencil cell must be an interior cell flagged valid.
[[nodiscard]] std::optional<double> try_sample_biquadratic(const ScalarField& f, Vec2 x,
                                                           const CellMask* mask = nullptr);

/// Throwing form of try_sample_biquadratic (StencilInvalid).
[[nodiscard]] double sample_biquadratic(const ScalarField& f, Vec2 x, const CellMask* mask = nullptr);

}  // namespace stefan
