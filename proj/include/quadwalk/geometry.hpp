#pragma once

#include <optional>
#include <vector>

#include "quadwalk/measure.hpp"

namespace quadwalk {

/// Solver tolerances for the convex-geometry routines, kept in one place.
struct GeomConfig {
  double newton_tol = 1e-12;
  double angle_tol = 1e-8;   // admissible angle between grad phi(a(q)) and q
  int max_iter = 100;
  double axis_tol = 1e-9;    // angular threshold for critical-direction classification
};

/// A point of the spectral curve {phi = 1} together with its outward normal.
struct SpectralPoint {
  Vec2 a = Vec2::Zero();
  Vec2 q = Vec2::Zero();
  double gradient_norm = 0.0;
};

enum class DirectionClass { Critical10, Critical01, Interior };

DirectionClass classify_direction(const Vec2& q, double axis_tol = 1e-9);

double phi(const JumpMeasure& mu, const Vec2& a);
Vec2 grad_phi(const JumpMeasure& mu, const Vec2& a);
Mat2 hessian_phi(const JumpMeasure& mu, const Vec2& a);

/// Global minimizer of phi (Newton with backtracking; phi is strictly convex
/// and coercive for measures passing (H1)).
Vec2 min_point(const JumpMeasure& mu, const GeomConfig& cfg = {});

/// The unique point of {phi = 1} whose outward normal is q, computed as
/// argmax of a.q over {phi <= 1}: bisection from min_point along q, then
/// Newton on the stationarity system {grad phi = lambda q, phi = 1}.
SpectralPoint a_of_q(const JumpMeasure& mu, const Vec2& q, const GeomConfig& cfg = {});

/// Value of the convex conjugate (log phi)^*; +infinity is encoded in value.
struct RateValue {
  double value = 0.0;
  std::optional<Vec2> argmax;  // set when the supremum is attained
  bool finite() const { return std::isfinite(value); }
};

RateValue legendre(const JumpMeasure& mu, const Vec2& v, const GeomConfig& cfg = {});

enum class PathConstraint { None, HalfPlane1, HalfPlane2, Quadrant };

/// Integrated conjugate cost of a piecewise-linear path given as (t, x)
/// breakpoints with strictly increasing times. Paths violating the
/// constraint set return +infinity.
double pathwise_rate(const JumpMeasure& mu, const std::vector<std::pair<double, Vec2>>& path,
                     PathConstraint constraint, const GeomConfig& cfg = {});

/// a(w).w + a(q-w).(q-w) - eps*|w|, with a(v) := a(v/|v|). Requires w != 0
/// and w != q.
double lambda_eps(const JumpMeasure& mu, const Vec2& q, const Vec2& w, double eps,
                  const GeomConfig& cfg = {});

}  // namespace quadwalk
