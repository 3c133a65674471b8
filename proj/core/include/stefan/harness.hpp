#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stefan/analytic.hpp"
#include "stefan/stefan.hpp"

namespace stefan {

/// No interface segments to measure.
class EmptyInterface : public Error {
 public:
  using Error::Error;
};

/// A config value outside its admissible range.
class ValidationError : public Error {
 public:
  using Error::Error;
};

enum class Scenario { PlanarStefan, CrankLayer, FrankSphere, ShrinkingCircle, CrystalGrowth, Sixfold, TipVelocity };

[[nodiscard]] std::string_view scenario_name(Scenario s);
[[nodiscard]] std::optional<Scenario> scenario_from_name(std::string_view name);

struct InitialInterface {
  enum class Kind { Line, Circle, Flower, Layer };
  Kind kind = Kind::Line;
  /// Line: x position. Circle: radius. Layer: height of the solid top.
  /// Flower: the constant c in r^2 (1 - a cos 4 theta) - c.
  double value = 0.0;
  /// Flower only: the amplitude a.
  double amplitude = 0.3;
  /// Move a line to the nearest column of cell centers.
  bool snap_to_centers = false;
};

struct DtRule {
  enum class Kind { DerivedCfl, Fixed, Linear, Quadratic };
  Kind kind = Kind::DerivedCfl;
  double value = 0.0;  // dt for Fixed, c in c dx for Linear, c in c dx^2 for Quadratic

  [[nodiscard]] std::optional<double> cap(double dx) const;
};

struct CaseConfig {
  Scenario scenario = Scenario::PlanarStefan;
  int n = 32;
  double domain_min = -0.5;  // square [domain_min, domain_max]^2
  double domain_max = 0.5;

  double st = 1.0;
  double lambda_ratio = 1.0;
  double diffusivity_ratio = 1.0;
  double t_melt = 0.0;
  double eps_kappa = 0.0;
  double eps_v = 0.0;
  AnisotropyModel::Kind anisotropy = AnisotropyModel::Kind::Isotropic;
  double anisotropy_strength = 0.0;

  InitialInterface interface;
  double t_liquid = 0.0;  // initial liquid temperature where no reference exists
  double t_solid = 0.0;

  double t_start = 0.0;
  double t_end = 0.1;
  int max_steps = 0;  // 0 = until t_end
  DtRule dt;
  double cfl = 0.5;
  double capillary_factor = 0.0;
  double extension_tolerance = 1e-12;
  InterfaceCoupling coupling = InterfaceCoupling::Implicit;

  /// Snapshot every this many steps (0 = final state only).
  int output_every = 0;
  bool write_fields = false;
  /// Stop once max kappa on the interface exceeds this multiple of its
  /// initial value (0 = never).
  double onset_factor = 0.0;

  [[nodiscard]] Grid grid() const;
  [[nodiscard]] AnisotropyModel anisotropy_model() const;
  [[nodiscard]] PhysicalParams physics() const;
  [[nodiscard]] NumericalParams numerics() const;
};

/// Parameters of each scenario's reference configuration.
[[nodiscard]] CaseConfig default_config(Scenario s);

/// First violated constraint of the config, if any.
[[nodiscard]] std::optional<std::string> validate(const CaseConfig& cfg);

/// Exact solution of the scenario, if it has one.
[[nodiscard]] std::optional<analytic::ReferenceSolution> reference_solution(const CaseConfig& cfg);

/// Offset added to the reference coordinates (a snapped planar front).
[[nodiscard]] Vec2 reference_shift(const CaseConfig& cfg);

/// Zero contour of the cell-centered level set, by linear interpolation along
/// the lines joining cell centers.
[[nodiscard]] std::vector<Segment> extract_contour(const LevelSet& level_set);

enum class InterfaceMeasure { MeanRadius, RadiusStddev, TipX, ArmLengths };

struct ArmOptions {
  int sectors = 6;
  double offset = 0.0;  // direction of the first arm, radians
  Vec2 center{0.0, 0.0};
};

/// Segment-length weighted mean and standard deviation of |x - center| over
/// segment end points.
[[nodiscard]] double mean_radius(const std::vector<Segment>& segs, Vec2 center = {0.0, 0.0});
[[nodiscard]] double radius_stddev(const std::vector<Segment>& segs, Vec2 center = {0.0, 0.0});
/// Largest x over all segment end points.
[[nodiscard]] double tip_x(const std::vector<Segment>& segs);
/// Largest radial extent in each sector of width 2 pi / sectors centered on
/// offset + k 2 pi / sectors.
[[nodiscard]] std::vector<double> arm_lengths(const std::vector<Segment>& segs, const ArmOptions& options = {});
/// Forward differences of tip positions; one entry less than the input.
[[nodiscard]] std::vector<double> tip_x_velocity(const std::vector<double>& t, const std::vector<double>& tip);

struct TimeseriesRow {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  double mean_radius = 0.0;
  double radius_stddev = 0.0;
  double tip_x = 0.0;
  double max_kappa = 0.0;
  double volume_solid = 0.0;
  double interface_length = 0.0;
  double max_speed = 0.0;
};

struct Snapshot {
  int step = 0;
  double t = 0.0;
  const Grid* grid = nullptr;
  std::vector<Segment> interface;
  /// Only filled when the config asks for fields; covered cells are NaN.
  std::vector<std::pair<std::string, std::vector<double>>> fields;
};

using SnapshotSink = std::function<void(const Snapshot&)>;

struct FieldErrors {
  double l1 = 0.0;
  double linf = 0.0;
};

struct CaseResult {
  CaseConfig config;
  int steps = 0;
  double t_final = 0.0;
  double runtime_s = 0.0;
  std::vector<TimeseriesRow> timeseries;
  std::vector<Segment> final_interface;
  std::optional<FieldErrors> errors;
  /// |interface position - exact| at the end, when a reference exists.
  std::optional<double> interface_error;
  /// Time at which the onset criterion first held.
  std::optional<double> onset_time;
  StencilCounters stencils;
  InitCounters init;
  int extension_failures = 0;
  int saddles = 0;
};

/// Runs a scenario to its end time. Errors from the solver are rethrown as
/// the same type with the step index in the message.
[[nodiscard]] CaseResult run_case(const CaseConfig& cfg, const SnapshotSink& sink = {});

/// V-weighted L1 and max error of both phase fields against the reference,
/// over cells with V > V_min in each phase.
[[nodiscard]] FieldErrors temperature_errors(const Simulation& sim, const analytic::ReferenceSolution& ref,
                                             Vec2 shift = {0.0, 0.0});

struct GridResult {
  int n = 0;
  double dt = 0.0;  // first step's dt
  double l1 = 0.0;
  double linf = 0.0;
  double interface_error = 0.0;
  double runtime_s = 0.0;
};

struct ErrorReport {
  std::vector<GridResult> grids;

  /// log2(e[k-1] / e[k]) for k >= 1.
  [[nodiscard]] double l1_order(std::size_t k) const;
  [[nodiscard]] double linf_order(std::size_t k) const;
};

/// Runs `cfg` on every grid size with its dt rule. Up to `threads` grids run
/// concurrently.
[[nodiscard]] ErrorReport convergence_sweep(const CaseConfig& cfg, const std::vector<int>& grids, int threads = 1);

/// Error of the t = 0 Stefan velocity of the planar case (exact value V = 1)
/// from the embedded gradients of the initial field: alpha_Gamma weighted
/// mean and max over interfacial cells.
[[nodiscard]] FieldErrors initial_gradient_error(int n);
[[nodiscard]] ErrorReport initial_gradient_sweep(const std::vector<int>& grids);

}  // namespace stefan
