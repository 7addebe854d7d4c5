#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <functional>
#include <memory>

#include "quadwalk/processes.hpp"

namespace quadwalk {

/// Inclusive lattice rectangle.
struct Box {
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool contains(Point z) const { return z.x >= x0 && z.x <= x1 && z.y >= y0 && z.y <= y1; }
  Box expanded(int m) const { return {x0 - m, x1 + m, y0 - m, y1 + m}; }
  long long area() const { return static_cast<long long>(x1 - x0 + 1) * (y1 - y0 + 1); }
};

/// Sparse solver for (I - P_a) over box `\cap` domain with hard zero outside
/// the box. One factorization serves Green columns (A g = e_target), value
/// DPs with boundary data (A v = b), and visit counts from a source
/// (A^T n = e_source).
class GreenEngine {
 public:
  GreenEngine(const JumpMeasure& mu, WalkKind kind, const Vec2& a, Box box);

  WalkKind kind() const { return kind_; }
  const Vec2& twist() const { return a_; }
  /// Box clamped to the domain; the node set is exactly this rectangle.
  const Box& rect() const { return rect_; }
  int node_count() const { return n_; }
  int index(Point z) const {
    if (!rect_.contains(z)) return -1;
    return (z.x - rect_.x0) * ny_ + (z.y - rect_.y0);
  }
  Point point(int idx) const {
    return {rect_.x0 + idx / ny_, rect_.y0 + idx % ny_};
  }
  double total_weight() const { return total_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& b) const;
  Eigen::VectorXd column(Point target) const;
  Eigen::VectorXd visits(Point source) const;

  /// v(z) = sum_w p_a(z, z+w) v(z+w) with v given by f_exit at first-step
  /// points outside the domain and by f_leak at in-domain points outside the
  /// box (0 when f_leak is empty).
  Eigen::VectorXd value_dp(const std::function<double(Point)>& f_exit,
                           const std::function<double(Point)>& f_leak = {}) const;

  double residual_inf(const Eigen::VectorXd& x, const Eigen::VectorXd& b) const;

  struct BoundaryStep {
    int node;
    Point to;
    double w;
  };
  const std::vector<BoundaryStep>& exit_steps() const { return exits_; }
  const std::vector<BoundaryStep>& leak_steps() const { return leaks_; }

  static constexpr double kSolveTol = 1e-11;

 private:
  WalkKind kind_;
  Vec2 a_;
  Box rect_;
  int ny_ = 0, n_ = 0;
  double total_ = 0.0;
  Eigen::SparseMatrix<double> A_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
  std::vector<BoundaryStep> exits_, leaks_;

  Eigen::VectorXd refine(Eigen::VectorXd x, const Eigen::VectorXd& b, bool transposed) const;
};

/// One column z -> G(z, target) of a (possibly twisted) Green function.
struct GreenColumn {
  Point target;
  WalkKind kind = WalkKind::Free;
  Vec2 twist = Vec2::Zero();
  Box rect;
  Eigen::VectorXd values;
  double truncation_error = 0.0;
  bool truncation_warning = false;

  bool has(Point z) const { return rect.contains(z); }
  double value(Point z) const;
};

struct GreenOptions {
  int error_margin = 40;    // enlargement used for the truncation estimate
  double trunc_tol = 1e-9;  // warn when the estimate exceeds this
};

GreenColumn green_column(const JumpMeasure& mu, WalkKind kind, const Vec2& a, Point target,
                         Box box, const GreenOptions& opts = {});

/// Ratio G(z, target)/G(z0, target) from one column.
double martin_kernel(const GreenColumn& column, Point z, Point z0);

/// Max relative residual of G^a(z,z') = G(z,z') e^{a.(z'-z)} over sampled
/// pairs; both sides come from independent solves on the same box.
double check_twist_identity(const JumpMeasure& mu, WalkKind kind, const Vec2& a, Box box,
                            int n_pairs, std::uint64_t seed);

enum class RenewalVariant { QuadrantVsFree, QuadrantVsHalfPlane1 };

/// Absolute residual of the renewal identity relating the quadrant-killed
/// Green function to the free (resp. half-plane) one via the exit
/// distribution. `box` is the window for the less-killed walk.
double check_renewal(const JumpMeasure& mu, RenewalVariant variant, Point z, Point target,
                     Box box);

}  // namespace quadwalk
