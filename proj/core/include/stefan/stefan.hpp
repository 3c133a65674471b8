#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "stefan/cutcell.hpp"
#include "stefan/levelset.hpp"

namespace stefan {

/// A cell went from fully covered to fully uncovered (or back) in one step.
class TimestepViolation : public Error {
 public:
  using Error::Error;
};

/// Capillary coefficient as a function of the interface normal angle.
struct AnisotropyModel {
  enum class Kind { Isotropic, Sixfold, Fourfold };
  Kind kind = Kind::Isotropic;
  double base = 0.0;
  double epsilon = 0.0;

  static AnisotropyModel isotropic(double base) { return {Kind::Isotropic, base, 0.0}; }
  static AnisotropyModel sixfold(double base = 1e-3, double epsilon = 0.4) { return {Kind::Sixfold, base, epsilon}; }
  static AnisotropyModel fourfold(double base = 0.5, double epsilon = 0.05) { return {Kind::Fourfold, base, epsilon}; }

  [[nodiscard]] double operator()(double theta) const;
  [[nodiscard]] double max_value() const;
};

struct GibbsThomson {
  double t_melt = 0.0;
  AnisotropyModel eps_kappa;
  double eps_v = 0.0;
};

/// T_m - eps_kappa(theta) kappa - eps_v v.
[[nodiscard]] double interface_temperature(double kappa, double vpc_prev, const GibbsThomson& gt, double theta_n);

/// Per-cell interface quantities (NaN off the interface).
struct InterfaceState {
  std::vector<double> kappa;
  std::vector<double> vpc;
  std::vector<double> t_gamma;
};

struct VelocityReport {
  StencilCounters stencils;
};

/// Normal speed at each interface centroid, positive when the solid grows:
/// v = -St (g_S + lambda g_L) with g_p the derivative into phase p.
[[nodiscard]] std::vector<double> stefan_velocity(const PhaseProblem& solid, const PhaseProblem& liquid, double st,
                                                  double lambda_ratio, VelocityReport* report = nullptr);

struct ExtensionOptions {
  double band_cells = 8.0;
  double cfl = 0.3;
  int sweeps_per_correction = 4;
  int max_outer = 100;
  double tolerance = 1e-8;
};

struct ExtensionResult {
  ScalarField v;
  double residual = 0.0;  // max |mismatch at centroids| / max |vGamma|
  int outer_iterations = 0;
  bool converged = false;
};

/// Extends centroid speeds to a cell field constant along normals, corrected so
/// that its biquadratic interpolant matches vGamma at every centroid.
[[nodiscard]] ExtensionResult extend_velocity(const LevelSet& level_set, const std::vector<double>& v_gamma,
                                              const CutGeometry& g, const ExtensionOptions& options = {});

/// Cells newly cut this step: V_prev in {0, 1} and V_now strictly between
/// (thresholded by V_min).
[[nodiscard]] std::vector<std::size_t> tag_emerging(const CutGeometry& prev, const CutGeometry& now);

/// Cells of the phase that flipped covered <-> uncovered in one step.
[[nodiscard]] std::vector<std::size_t> flipped_cells(const CutGeometry& prev, const CutGeometry& now);

struct InitCounters {
  int quadratic = 0;
  int grid_line = 0;
  int linear = 0;
  int gamma_only = 0;

  InitCounters& operator+=(const InitCounters& o);
};

/// Fills the tagged cells of p.field from a quadratic through
/// (0, T_Gamma), (dx, T(P1)), (2dx, T(P2)) along the inward normal, evaluated
/// at the projection of the cell center. `valid` flags cells holding usable
/// values.
[[nodiscard]] ScalarField init_emerging(const PhaseProblem& p, const std::vector<std::size_t>& cells,
                                        const CellMask& valid, InitCounters* counters = nullptr);

/// cfl dx / max(|v|, 1e-30), optionally capped.
[[nodiscard]] double compute_timestep(const ScalarField& v, double dx, double cfl,
                                      std::optional<double> cap = std::nullopt);

struct PhysicalParams {
  double st = 1.0;
  double lambda_ratio = 1.0;       // conductivity ratio liquid/solid
  double diffusivity_ratio = 1.0;  // D_L / D_S
  GibbsThomson gibbs_thomson;
};

struct NumericalParams {
  double cfl = 0.5;
  double redistance_band_cells = 6.0;
  double redistance_cfl = 0.3;
  int redistance_iterations = 40;
  ExtensionOptions extension;
  DiffusionOptions diffusion;
  /// Upper bound on dt from the scenario's rule (fixed or c dx^2); none = CFL only.
  std::optional<double> dt_cap;
  /// Extra stability bound on dt from the explicit curvature term (0 = off).
  double capillary_factor = 0.0;
};

struct SimulationState {
  double t = 0.0;
  int step = 0;
  LevelSet level_set;
  ScalarField solid;
  ScalarField liquid;
  ScalarField v_ext;  // extended speed from the last step (lagged kinetic term)
};

struct StepDiagnostics {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  double interface_length = 0.0;
  double volume_solid = 0.0;
  double volume_liquid = 0.0;
  double max_speed = 0.0;
  int interfacial_cells = 0;
  int saddles = 0;
  int emerging_solid = 0;
  int emerging_liquid = 0;
  StencilCounters stencils;
  InitCounters init;
  bool extension_converged = true;
  double extension_residual = 0.0;
  int solver_iterations = 0;
};

/// Sets Dirichlet boundary data of both phase fields for time t.
using BoundaryUpdate = std::function<void(double t, ScalarField& solid, ScalarField& liquid)>;

class Simulation {
 public:
  Simulation(SimulationState state, PhysicalParams physics, NumericalParams numerics, BoundaryUpdate boundary = {});

  /// One global step; dt is limited so that t does not pass t_end.
  StepDiagnostics step(double t_end);

  [[nodiscard]] const SimulationState& state() const { return state_; }
  [[nodiscard]] const CutGeometry& solid_geometry() const { return geo_solid_; }
  [[nodiscard]] CutGeometry liquid_geometry() const { return geo_solid_.complement(); }
  [[nodiscard]] const PhysicalParams& physics() const { return physics_; }
  [[nodiscard]] const NumericalParams& numerics() const { return numerics_; }

  /// Interface temperature at every cut cell of the current geometry.
  [[nodiscard]] std::vector<double> interface_temperatures(const ScalarField& kappa) const;

 private:
  SimulationState state_;
  PhysicalParams physics_;
  NumericalParams numerics_;
  BoundaryUpdate boundary_;
  CutGeometry geo_solid_;
};

/// Centroid value of a cell field sampled biquadratically, NaN-safe.
[[nodiscard]] double sample_at_centroid(const ScalarField& f, Vec2 x, int i, int j);

}  // namespace stefan
