#include <algorithm>
#include <array>
#include <cmath>

#include "stefan/harness.hpp"

namespace stefan {

namespace {

constexpr std::array<std::pair<Scenario, std::string_view>, 7> kNames{{
    {Scenario::PlanarStefan, "planar_stefan"},
    {Scenario::CrankLayer, "crank_layer"},
    {Scenario::FrankSphere, "frank_sphere"},
    {Scenario::ShrinkingCircle, "shrinking_circle"},
    {Scenario::CrystalGrowth, "crystal_growth"},
    {Scenario::Sixfold, "sixfold"},
    {Scenario::TipVelocity, "tip_velocity"},
}};

constexpr double kCrankLambda = 0.9;
constexpr double kFrankUndercooling = -0.5;

}  // namespace

std::string_view scenario_name(Scenario s) {
  for (const auto& [id, name] : kNames)
    if (id == s) return name;
  return "unknown";
}

std::optional<Scenario> scenario_from_name(std::string_view name) {
  for (const auto& [id, n] : kNames)
    if (n == name) return id;
  return std::nullopt;
}

std::optional<double> DtRule::cap(double dx) const {
  switch (kind) {
    case Kind::DerivedCfl: return std::nullopt;
    case Kind::Fixed: return value;
    case Kind::Linear: return value * dx;
    case Kind::Quadratic: return value * dx * dx;
  }
  return std::nullopt;
}

Grid CaseConfig::grid() const {
  return Grid(n, {domain_min, domain_min}, domain_max - domain_min);
}

AnisotropyModel CaseConfig::anisotropy_model() const {
  return {anisotropy, eps_kappa, anisotropy == AnisotropyModel::Kind::Isotropic ? 0.0 : anisotropy_strength};
}

PhysicalParams CaseConfig::physics() const {
  PhysicalParams p;
  p.st = st;
  p.lambda_ratio = lambda_ratio;
  p.diffusivity_ratio = diffusivity_ratio;
  p.gibbs_thomson = {t_melt, anisotropy_model(), eps_v};
  return p;
}

NumericalParams CaseConfig::numerics() const {
  NumericalParams p;
  p.cfl = cfl;
  p.dt_cap = dt.cap((domain_max - domain_min) / n);
  p.capillary_factor = capillary_factor;
  p.extension.tolerance = extension_tolerance;
  p.diffusion.coupling = coupling;
  return p;
}

CaseConfig default_config(Scenario s) {
  CaseConfig c;
  c.scenario = s;
  switch (s) {
    case Scenario::PlanarStefan:
      c.n = 32;
      c.domain_min = -0.5;
      c.domain_max = 0.5;
      c.interface = {InitialInterface::Kind::Line, 0.0, 0.0, true};
      c.t_end = 0.05;
      c.dt = {DtRule::Kind::Quadratic, 1.6384};
      break;
    case Scenario::CrankLayer:
      c.n = 32;
      c.domain_min = 0.0;
      c.domain_max = 1.0;
      c.st = analytic::crank_stefan_number(kCrankLambda);
      c.t_start = 0.03;
      c.t_end = 0.1;
      c.interface = {InitialInterface::Kind::Layer, 1.0 - 2.0 * kCrankLambda * std::sqrt(c.t_start)};
      c.dt = {DtRule::Kind::Quadratic, 10.24};
      break;
    case Scenario::FrankSphere:
      c.n = 64;
      c.domain_min = -4.0;
      c.domain_max = 4.0;
      c.t_start = 1.0;
      c.t_end = 1.01;
      c.interface = {InitialInterface::Kind::Circle, analytic::frank_parameters(kFrankUndercooling)};
      c.t_liquid = kFrankUndercooling;
      c.dt = {DtRule::Kind::Fixed, 1e-4};
      break;
    case Scenario::ShrinkingCircle:
      c.n = 128;
      c.domain_min = -0.5;
      c.domain_max = 0.5;
      c.interface = {InitialInterface::Kind::Circle, 0.45};
      c.t_end = 1.0;
      c.max_steps = 180;
      c.dt = {DtRule::Kind::Quadratic, 0.4};
      break;
    case Scenario::CrystalGrowth:
      c.n = 128;
      c.domain_min = -2.0;
      c.domain_max = 2.0;
      c.st = 0.5;
      c.eps_kappa = 2e-3;
      c.eps_v = 2e-3;
      c.interface = {InitialInterface::Kind::Flower, 1.0 / 15.0, 0.3};
      c.t_liquid = -0.5;
      c.t_end = 0.8;
      c.capillary_factor = 0.1;
      c.onset_factor = 3.0;
      break;
    case Scenario::Sixfold:
      c.n = 512;
      c.domain_min = -2.0;
      c.domain_max = 2.0;
      c.eps_kappa = 1e-3;
      c.anisotropy = AnisotropyModel::Kind::Sixfold;
      c.anisotropy_strength = 0.4;
      c.eps_v = 1e-3;
      c.interface = {InitialInterface::Kind::Circle, 0.1};
      c.t_liquid = -0.8;
      c.t_end = 3.6e-2;
      c.capillary_factor = 0.1;
      c.output_every = 0;
      break;
    case Scenario::TipVelocity:
      c.n = 512;
      c.domain_min = -400.0;
      c.domain_max = 400.0;
      c.eps_kappa = 0.5;
      c.anisotropy = AnisotropyModel::Kind::Fourfold;
      c.anisotropy_strength = 0.05;
      c.interface = {InitialInterface::Kind::Circle, 8.0};
      c.t_liquid = -0.55;
      c.t_end = 2000.0;
      c.capillary_factor = 0.1;
      break;
  }
  return c;
}

std::optional<std::string> validate(const CaseConfig& c) {
  if (c.n < 8) return "n must be at least 8";
  if (!(c.domain_max > c.domain_min)) return "domain_max must exceed domain_min";
  if (!(c.st >= 0.0)) return "St must be non-negative";
  if (!(c.lambda_ratio > 0.0)) return "lambda_ratio must be positive";
  if (!(c.diffusivity_ratio > 0.0)) return "diffusivity_ratio must be positive";
  if (!(c.eps_kappa >= 0.0)) return "epsilon_kappa must be non-negative";
  if (!(c.eps_v >= 0.0)) return "epsilon_v must be non-negative";
  if (!(c.anisotropy_strength >= 0.0)) return "anisotropy strength must be non-negative";
  if (!(c.t_end > c.t_start)) return "t_end must exceed t_start";
  if (c.max_steps < 0) return "max_steps must be non-negative";
  if (c.dt.kind != DtRule::Kind::DerivedCfl && !(c.dt.value > 0.0)) return "dt value must be positive";
  if (!(c.cfl > 0.0 && c.cfl <= 1.0)) return "cfl must lie in (0, 1]";
  if (!(c.capillary_factor >= 0.0)) return "capillary_factor must be non-negative";
  if (!(c.extension_tolerance > 0.0)) return "extension_tolerance must be positive";
  if (c.output_every < 0) return "output_every must be non-negative";
  if (!(c.onset_factor >= 0.0)) return "onset_factor must be non-negative";
  const double half = 0.5 * (c.domain_max - c.domain_min);
  switch (c.interface.kind) {
    case InitialInterface::Kind::Circle:
      if (!(c.interface.value > 0.0 && c.interface.value < half)) return "circle radius must fit in the domain";
      break;
    case InitialInterface::Kind::Flower:
      if (!(c.interface.value > 0.0)) return "flower constant must be positive";
      if (!(c.interface.amplitude >= 0.0 && c.interface.amplitude < 1.0)) return "flower amplitude must lie in [0, 1)";
      break;
    case InitialInterface::Kind::Line:
    case InitialInterface::Kind::Layer:
      if (!(c.interface.value > c.domain_min && c.interface.value < c.domain_max))
        return "interface position must lie inside the domain";
      break;
  }
  if (c.scenario == Scenario::FrankSphere && !(c.t_liquid > -1.0 && c.t_liquid < 0.0))
    return "Frank undercooling must lie in (-1, 0)";
  return std::nullopt;
}

std::optional<analytic::ReferenceSolution> reference_solution(const CaseConfig& c) {
  using analytic::ReferenceSolution;
  switch (c.scenario) {
    case Scenario::PlanarStefan: return ReferenceSolution(analytic::PlanarStefan{1.0});
    case Scenario::CrankLayer:
      return ReferenceSolution(analytic::CrankLayer{(1.0 - c.interface.value) / (2.0 * std::sqrt(c.t_start))});
    case Scenario::FrankSphere:
      return ReferenceSolution(analytic::FrankSphere{analytic::frank_parameters(c.t_liquid), c.t_liquid});
    case Scenario::ShrinkingCircle: return ReferenceSolution(analytic::CurvatureFlowCircle{c.interface.value});
    default: return std::nullopt;
  }
}

Vec2 reference_shift(const CaseConfig& c) {
  if (c.interface.kind != InitialInterface::Kind::Line) return {0.0, 0.0};
  double x0 = c.interface.value;
  if (c.interface.snap_to_centers) {
    const Grid g = c.grid();
    const int i = std::clamp(static_cast<int>(std::floor((x0 - g.origin().x) / g.dx())), 0, g.n() - 1);
    x0 = g.cell_center(i, 0).x;
  }
  return {x0, 0.0};
}

}  // namespace stefan
