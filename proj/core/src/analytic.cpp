#include "stefan/analytic.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace stefan {
namespace analytic {

namespace {

// Modified Lentz evaluation of erfc(x) exp(x^2) sqrt(pi) for x >= 3:
// erfc = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
double erfc_continued_fraction(double x) {
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    const double a = 0.5 * k;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x * x) / (std::sqrt(std::numbers::pi) * f);
}

// erf(x) = 2/sqrt(pi) exp(-x^2) sum 2^k x^(2k+1) / (1*3*...*(2k+1)); all terms positive.
double erf_series(double x) {
  double term = x;
  double sum = x;
  const double x2 = x * x;
  for (int k = 1; k < 500; ++k) {
    term *= 2.0 * x2 / (2.0 * k + 1.0);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x2) * sum;
}

}  // namespace

double erf(double x) {
  if (std::isnan(x)) return x;
  const double a = std::abs(x);
  const double v = a < 3.0 ? erf_series(a) : 1.0 - erfc_continued_fraction(a);
  return x < 0.0 ? -v : v;
}

double erfc(double x) {
  if (std::isnan(x)) return x;
  if (x >= 3.0) return erfc_continued_fraction(x);
  return 1.0 - erf(x);
}

double exp_integral_e1(double x) {
  if (!(x > 0.0)) throw DomainError("exp_integral_e1: argument must be positive");
  if (x <= 1.0) {
    // -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    double sum = 0.0;
    double fact_term = 1.0;  // (-x)^k / k!
    for (int k = 1; k < 100; ++k) {
      fact_term *= -x / k;
      const double t = fact_term / k;
      sum += t;
      if (std::abs(t) < 1e-18 * std::abs(sum)) break;
    }
    return -kEulerGamma - std::log(x) - sum;
  }
  return std::exp(-x) * scaled_e1(x);
}

double scaled_e1(double x) {
  if (!(x > 0.0)) throw DomainError("scaled_e1: argument must be positive");
  if (x <= 1.0) return std::exp(x) * exp_integral_e1(x);
  // Continued fraction 1/(x+1- 1/(x+3- 4/(x+5- ...))), modified Lentz.
  constexpr double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h;
}

double f2(double s) { return exp_integral_e1(0.25 * s * s); }

double f2_prime(double s) {
  if (!(s > 0.0)) throw DomainError("f2_prime: argument must be positive");
  return -(2.0 / s) * std::exp(-0.25 * s * s);
}

double frank_far_field(double s) {
  // 1/2 S F2 / F2' = -S^2/4 exp(S^2/4) E1(S^2/4), written without overflow.
  const double z = 0.25 * s * s;
  return -z * scaled_e1(z);
}

double frank_parameters(double t_inf) {
  if (!(t_inf > -1.0 && t_inf < 0.0)) throw NoRoot("frank_parameters: undercooling must lie in (-1, 0)");
  auto f = [t_inf](double s) { return frank_far_field(s) - t_inf; };
  double lo = 1e-6;
  double hi = 100.0;
  if (f(lo) * f(hi) > 0.0) throw NoRoot("frank_parameters: no sign change in the bracket");
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (a + b);
}

double crank_stefan_number(double lambda) {
  return lambda * std::sqrt(std::numbers::pi) * erf(lambda) * std::exp(lambda * lambda);
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double ReferenceSolution::interface_position(double t) const {
  return std::visit(overloaded{
                        [t](const PlanarStefan& p) { return p.velocity * t; },
                        [t](const CrankLayer& c) { return 1.0 - 2.0 * c.lambda * std::sqrt(t); },
                        [t](const FrankSphere& f) { return f.s * std::sqrt(t); },
                        [t](const CurvatureFlowCircle& c) { return std::sqrt(std::max(0.0, c.r0 * c.r0 - 2.0 * t)); },
                    },
                    v_);
}

double ReferenceSolution::level_set(Vec2 x, double t) const {
  const double front = interface_position(t);
  return std::visit(overloaded{
                        [&](const PlanarStefan&) { return x.x - front; },
                        [&](const CrankLayer&) { return x.y - front; },
                        [&](const FrankSphere&) { return norm(x) - front; },
                        [&](const CurvatureFlowCircle&) { return norm(x) - front; },
                    },
                    v_);
}

double ReferenceSolution::phase_temperature(Vec2 x, double t, Phase phase) const {
  if (phase == Phase::Solid) return 0.0;
  return std::visit(overloaded{
                        [&](const PlanarStefan& p) { return -1.0 + std::exp(-p.velocity * (x.x - p.velocity * t)); },
                        [&](const CrankLayer& c) { return 1.0 - erf((1.0 - x.y) / (2.0 * std::sqrt(t))) / erf(c.lambda); },
                        [&](const FrankSphere& f) {
                          const double s = norm(x) / std::sqrt(t);
                          return f.t_inf * (1.0 - f2(s) / f2(f.s));
                        },
                        [&](const CurvatureFlowCircle&) { return 0.0; },
                    },
                    v_);
}

double ReferenceSolution::temperature(Vec2 x, double t) const {
  return phase_temperature(x, t, level_set(x, t) < 0.0 ? Phase::Solid : Phase::Liquid);
}

}  // namespace analytic

double reference_temperature(const analytic::ReferenceSolution& sol, Vec2 x, double t) { return sol.temperature(x, t); }

}  // namespace stefan
