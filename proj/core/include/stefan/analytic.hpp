#pragma once

#include <variant>

#include "stefan/cutcell.hpp"
#include "stefan/grid.hpp"

namespace stefan {

/// Argument outside the domain of a special function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The root bracket of a transcendental relation holds no sign change.
class NoRoot : public Error {
 public:
  using Error::Error;
};

namespace analytic {

inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Error function: power series with a Gaussian factor for |x| < 3, continued
/// fraction for erfc beyond.
[[nodiscard]] double erf(double x);
[[nodiscard]] double erfc(double x);

/// E1(x) = int_1^inf exp(-x t)/t dt; series for x <= 1, continued fraction above.
[[nodiscard]] double exp_integral_e1(double x);
/// exp(x) * E1(x), finite for large x.
[[nodiscard]] double scaled_e1(double x);

/// Similarity profile of the 2-D Frank solution and its derivative.
[[nodiscard]] double f2(double s);
[[nodiscard]] double f2_prime(double s);

/// Growth constant S of R = S sqrt(t) for far-field undercooling t_inf in (-1, 0).
[[nodiscard]] double frank_parameters(double t_inf);

/// 1/2 S F2(S) / F2'(S), the far-field temperature implied by S.
[[nodiscard]] double frank_far_field(double s);

/// Stefan number that makes the Crank layer with growth constant lambda exact.
[[nodiscard]] double crank_stefan_number(double lambda);

/// Liquid on x > V t with T = -1 + exp(-V (x - V t)); solid at 0.
struct PlanarStefan {
  double velocity = 1.0;
};

/// Liquid layer above y = 1 - 2 lambda sqrt(t), T = 1 at y = 1; solid at 0.
struct CrankLayer {
  double lambda = 0.9;
};

/// Solid disk of radius S sqrt(t) centred at the origin in undercooled liquid.
struct FrankSphere {
  double s = 1.56;
  double t_inf = -0.5;
};

/// Circle shrinking under v = -kappa: R^2 = R0^2 - 2 t.
struct CurvatureFlowCircle {
  double r0 = 0.45;
};

class ReferenceSolution {
 public:
  using Variant = std::variant<PlanarStefan, CrankLayer, FrankSphere, CurvatureFlowCircle>;

  explicit ReferenceSolution(Variant v) : v_(v) {}

  [[nodiscard]] const Variant& variant() const { return v_; }

  /// Front coordinate: x for planar, y for the layer, radius for the disks.
  [[nodiscard]] double interface_position(double t) const;

  /// Exact temperature; the phase is decided by the interface position.
  [[nodiscard]] double temperature(Vec2 x, double t) const;

  /// Branch of `phase` evaluated at x, continued smoothly past the interface.
  [[nodiscard]] double phase_temperature(Vec2 x, double t, Phase phase) const;

  /// Signed distance to the exact interface, negative in the solid.
  [[nodiscard]] double level_set(Vec2 x, double t) const;

 private:
  Variant v_;
};

}  // namespace analytic

/// Evaluates the reference solution to build its outer Dirichlet data.
[[nodiscard]] double reference_temperature(const analytic::ReferenceSolution& sol, Vec2 x, double t);

}  // namespace stefan
