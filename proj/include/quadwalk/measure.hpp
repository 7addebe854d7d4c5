#pragma once

#include <Eigen/Dense>
#include <compare>
#include <map>
#include <utility>
#include <vector>

#include "quadwalk/errors.hpp"

namespace quadwalk {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// One lattice step of the walk.
struct Offset {
  int dx = 0;
  int dy = 0;
  friend auto operator<=>(const Offset&, const Offset&) = default;
};

/// A lattice site.
struct Point {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Point&, const Point&) = default;
  Point operator+(Offset w) const { return {x + w.dx, y + w.dy}; }
  Point operator+(Point p) const { return {x + p.x, y + p.y}; }
};

/// Finite-support step distribution on Z^2. Entries are kept sorted by
/// offset, every stored mass is strictly positive, and the masses sum to
/// one within 1e-12; construction rejects anything else.
class JumpMeasure {
 public:
  static constexpr double kMassTol = 1e-12;

  static JumpMeasure from_entries(std::vector<std::pair<Offset, double>> entries);

  const std::vector<std::pair<Offset, double>>& entries() const { return entries_; }
  double mass(Offset w) const;
  int max_step() const { return max_step_; }
  int min_dx() const { return min_dx_; }
  int min_dy() const { return min_dy_; }

  /// Step law of coordinate `axis` (0 or 1) under the exponential twist by a.
  std::map<int, double> twisted_marginal(const Vec2& a, int axis) const;

 private:
  JumpMeasure() = default;
  std::vector<std::pair<Offset, double>> entries_;
  int max_step_ = 0;
  int min_dx_ = 0;
  int min_dy_ = 0;
};

struct HypothesisReport {
  bool h1_irreducible = false;
  Vec2 mean = Vec2::Zero();
  bool h2_killed_irreducible = false;
  bool h3_finite_phi = true;  // finite support, so always true here
  std::pair<bool, bool> h4_coordinates_aperiodic{false, false};
  int period_2d = 0;  // 0 when h1 fails and the period is not computed

  bool all() const {
    return h1_irreducible && h2_killed_irreducible && h3_finite_phi &&
           h4_coordinates_aperiodic.first && h4_coordinates_aperiodic.second;
  }
};

struct ValidateOptions {
  int h1_window = 24;   // half-width of the Z^2 reachability window
  int h2_window = 12;   // certified reach/co-reach window in the quadrant
  int h2_search = 40;   // BFS may wander this far while certifying h2_window
  int k_max = 12;       // return-time horizon for period computations
};

Vec2 mean(const JumpMeasure& mu);

/// gcd of {k <= k_max : P_0(S(k) = 0) > 0}, computed by set convolution of
/// the support. Re-checked at 2*k_max; instability or no return is an error.
int period2d(const JumpMeasure& mu, int k_max);

HypothesisReport validate(const JumpMeasure& mu, const ValidateOptions& opts = {});

}  // namespace quadwalk
