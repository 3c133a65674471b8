#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "stefan/grid.hpp"
#include "stefan/levelset.hpp"

namespace stefan {

/// A required face or interface flux was not supplied (NaN).
class MissingFlux : public Error {
 public:
  using Error::Error;
};

/// Not even the cell-center fallback of the embedded gradient is usable.
class InsufficientStencil : public Error {
 public:
  using Error::Error;
};

/// The linear solve did not reach the residual tolerance.
class SolverDiverged : public Error {
 public:
  using Error::Error;
};

/// Solid is phi < 0, liquid phi >= 0.
enum class Phase { Solid, Liquid };

[[nodiscard]] constexpr Phase other(Phase p) { return p == Phase::Solid ? Phase::Liquid : Phase::Solid; }

/// Cells with V <= kVolumeMin are treated as covered by the solvers.
inline constexpr double kVolumeMin = 1e-6;

struct Segment {
  Vec2 a;
  Vec2 b;
};

/// Cut-cell geometry of one phase.
///
/// Face arrays: x-faces are indexed (i, j) for the face at x_{i-1/2} of row j,
/// i = 0..n; y-faces (i, j) for the face at y_{j-1/2} of column i, j = 0..n.
/// The interface normal points out of the phase.
struct CutGeometry {
  Grid grid;
  Phase phase = Phase::Solid;
  std::vector<double> volume;
  std::vector<double> face_x;
  std::vector<double> face_y;
  std::vector<double> alpha_gamma;  // interface length / dx, 0 off the interface
  std::vector<Vec2> centroid;
  std::vector<Vec2> normal;
  std::vector<std::uint8_t> cut;              // cell contains interface segments
  std::vector<std::vector<Segment>> segments;  // per cell, only for cut cells
  int saddle_count = 0;

  explicit CutGeometry(const Grid& g);

  [[nodiscard]] double V(int i, int j) const { return volume[grid.index(i, j)]; }
  [[nodiscard]] double ax(int i, int j) const {
    return face_x[static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.n() + 1) + static_cast<std::size_t>(i)];
  }
  [[nodiscard]] double ay(int i, int j) const { return face_y[static_cast<std::size_t>(j) * grid.n() + i]; }
  [[nodiscard]] bool interfacial(int i, int j) const { return cut[grid.index(i, j)] != 0; }
  [[nodiscard]] bool defined(int i, int j) const { return grid.inside(i, j) && V(i, j) > kVolumeMin; }

  /// Cells with V > kVolumeMin.
  [[nodiscard]] CellMask defined_mask() const;
  /// Interior indices of cut cells, row-major order.
  [[nodiscard]] std::vector<std::size_t> interfacial_cells() const;

  /// Geometry of the other phase: V, alpha -> 1 - V, 1 - alpha, normal flipped.
  [[nodiscard]] CutGeometry complement() const;
};

/// Marching-squares geometry of `phase` from vertex values averaged from the
/// four surrounding cell centers.
[[nodiscard]] CutGeometry compute_geometry(const LevelSet& level_set, Phase phase);

/// Per-face normal fluxes (component along +x / +y) in the CutGeometry face
/// layout and a per-cell outward interface flux n_Gamma . F.
struct FluxSet {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> gamma;
};

/// (sum of signed face fluxes + alpha_gamma F_gamma) / (V dx); NaN for V <= V_min.
/// Throws MissingFlux when a flux on a wetted face or interface is NaN.
[[nodiscard]] std::vector<double> fv_divergence(const CutGeometry& g, const FluxSet& flux);

/// One phase's diffusion problem. `t_gamma` is indexed per cell and read only
/// at interfacial cells; outer boundary rules are carried by `field`.
struct PhaseProblem {
  CutGeometry geometry;
  ScalarField field;
  double diffusivity = 1.0;
  std::vector<double> t_gamma;
};

/// Linear functional for the normal derivative into the phase at a centroid:
/// dT/dn = gamma_weight * T_Gamma + sum(w * T[cell]).
struct GradientStencil {
  enum class Order { Second, FirstOrder, CellCenter };
  double gamma_weight = 0.0;
  std::vector<std::pair<std::size_t, double>> terms;
  Order order = Order::Second;
};

/// Intersection of the inward normal line through the centroid of cut cell
/// (i, j) with the grid line of cell centers `offset` cells away along `axis`,
/// as a 3-point quadratic interpolation across that line.
struct NormalLineSample {
  double d = 0.0;  // distance from the centroid along the normal
  std::array<std::pair<std::size_t, double>, 3> terms{};
};

/// `valid` overrides the default cell validity (V > V_min) when given.
[[nodiscard]] std::optional<NormalLineSample> sample_normal_line(const CutGeometry& g, int i, int j, int axis,
                                                                 int offset, const CellMask* valid = nullptr);

/// Axes used for normal-line stencils: the dominant component of the normal,
/// or both when the components tie.
[[nodiscard]] std::vector<int> stencil_axes(Vec2 n);

/// Builds the stencil of the embedded Dirichlet gradient at interfacial cell
/// (i, j), degrading to the first-order and cell-center forms when the
/// interpolation lines touch covered cells.
[[nodiscard]] std::optional<GradientStencil> try_gradient_stencil(const CutGeometry& g, int i, int j,
                                                                  const CellMask* valid = nullptr);
[[nodiscard]] GradientStencil gradient_stencil(const CutGeometry& g, int i, int j);

[[nodiscard]] double apply_stencil(const GradientStencil& s, const ScalarField& field, double t_gamma);

/// Normal derivative into the phase at the interface centroid of `cell`.
[[nodiscard]] double embedded_gradient(const PhaseProblem& p, CellIndex cell);

struct StencilCounters {
  int second = 0;
  int first_order = 0;
  int cell_center = 0;
  int missing = 0;

  void count(GradientStencil::Order o);
  StencilCounters& operator+=(const StencilCounters& o);
};

enum class InterfaceCoupling { Implicit, Lagged };

struct DiffusionOptions {
  InterfaceCoupling coupling = InterfaceCoupling::Implicit;
  double tolerance = 1e-8;
  int max_iterations = 10000;
};

struct DiffusionReport {
  int iterations = 0;
  double residual = 0.0;  // relative, of the full discrete equation
  bool direct_fallback = false;
  StencilCounters stencils;
};

/// Backward-Euler step of T_t = D lap T on the phase with Dirichlet data
/// t_gamma on the interface. Covered cells (V <= V_min) are left as NaN.
[[nodiscard]] ScalarField diffuse_implicit(const PhaseProblem& p, double dt, const DiffusionOptions& options = {},
                                           DiffusionReport* report = nullptr);

/// Residual of the discrete step equation for a candidate solution, relative
/// to the right-hand side norm.
[[nodiscard]] double diffusion_residual(const PhaseProblem& p, double dt, const ScalarField& candidate);

}  // namespace stefan
