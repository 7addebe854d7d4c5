#pragma once

#include <string>

#include "quadwalk/boundary.hpp"

namespace quadwalk {

/// A straight ray of lattice targets z_n ~ r*q used by the limit experiments.
struct RaySpec {
  Vec2 q = Vec2(1.0, 1.0).normalized();
  std::vector<double> radii{20.0, 30.0, 40.0, 60.0};

  /// Componentwise round, then clamp to >= 1 (keeps z_n in the quadrant
  /// without disturbing z_n/|z_n| -> q).
  Point project(double r) const;
};

struct ConvRow {
  double radius = 0.0;
  Point zn;
  double observed = 0.0;
  double target = 0.0;
  double relative_gap = 0.0;
};

struct ConvergenceReport {
  std::string experiment;
  std::vector<ConvRow> rows;
  bool trend_ok = false;     // smoothed gaps non-increasing over the last three
  double final_gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;         // trend_ok && final_gap <= tolerance
  double truncation_error = 0.0;
  bool used_log_domain = false;
};

struct LimitsOptions {
  int margin = 40;
  double log_domain_floor = 1e-250;
  bool force_log_domain = false;
  double trend_eps = 1e-9;
  double trunc_check_margin = 40;  // extra margin of the self-check solve
};

/// Martin kernel of the quadrant-killed walk against the h-ratio target
/// (one report per test point).
std::vector<ConvergenceReport> martin_kernel_convergence(const JumpMeasure& mu, const RaySpec& ray,
                                                    const std::vector<Point>& test_points,
                                                    Point z0, double tol_final,
                                                    const LimitsOptions& opts = {});

/// Free-walk Martin kernel against exp(a(q).z).
std::vector<ConvergenceReport> ney_spitzer_check(const JumpMeasure& mu, const RaySpec& ray,
                                                 const std::vector<Point>& test_points,
                                                 Point z0, double tol_final,
                                                 const LimitsOptions& opts = {});

struct LogRateReport {
  ConvergenceReport raw;              // observed = -log G / |z_n| per radius
  std::vector<double> pair_slopes;    // consecutive-radii slope estimates
  double richardson3 = 0.0;           // 3-point estimate removing the c*log r term
  double rich_gap = 0.0;              // relative gap of richardson3 vs a(q).q
  bool pass = false;
};

/// Log-asymptotics of G_kind along the ray; the verdict uses the 3-point
/// log-corrected Richardson estimate from the last three radii (the raw
/// value at finite radius carries a polynomial-prefactor bias).
LogRateReport log_asymptotics(const JumpMeasure& mu, WalkKind kind, const RaySpec& ray,
                              Point z_fixed, double tol, const LimitsOptions& opts = {});

/// e^{-a(q).w} G(z+w, z_n)/G(z, z_n) -> 1 for displacements w in the period
/// sublattice; also asserts the return-time gcd of the half-plane walk
/// equals the 2D period.
ConvergenceReport ratio_limit_check(const JumpMeasure& mu, WalkKind kind, const RaySpec& ray,
                                    Point z, Offset w, double tol,
                                    const LimitsOptions& opts = {});

struct XiRecord {
  double xi = 0.0;
  double g_plus = 0.0;
  double ratio = 0.0;
  Point zn;
};

/// Principal part of the renewal equation with exit points trimmed at
/// |S(tau)| >= delta |z_n|; ratio = G_+ / Xi.
XiRecord xi_decomposition(const JumpMeasure& mu, const Vec2& q, double delta, Point z,
                          double radius, const LimitsOptions& opts = {});

struct BoundScan {
  double c_upper = 0.0;       // at the largest radius
  double c_upper_prev = 0.0;  // at the second-largest radius
  double c_lower = 0.0;
  bool stable = false;        // c_upper within a factor 2 across the two radii
  bool bracket_ok = false;    // c_lower <= 1 <= c_upper
};

/// Minimal envelope constants of the Martin kernel over {|z| < delta |z_n|}
/// at the two largest radii (delta = 0.2).
BoundScan uniform_bound_scan(const JumpMeasure& mu, WalkKind kind, const RaySpec& ray,
                             double sigma, const LimitsOptions& opts = {});

/// gcd of the return times of the half-plane walk Z^1_+ (symbolic DP from
/// (0,1)); equals the 2D period of the free walk.
int halfplane_return_gcd(const JumpMeasure& mu, int k_max);

}  // namespace quadwalk
