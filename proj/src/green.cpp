#include "quadwalk/green.hpp"

#include <cmath>
#include <sstream>

#include "quadwalk/boundary.hpp"

namespace quadwalk {

namespace {

Box clamp_to_domain(WalkKind kind, Box box) {
  Box r = box;
  switch (kind) {
    case WalkKind::Free: break;
    case WalkKind::Quadrant: r.x0 = std::max(r.x0, 1); r.y0 = std::max(r.y0, 1); break;
    case WalkKind::HalfPlane1: r.y0 = std::max(r.y0, 1); break;
    case WalkKind::HalfPlane2: r.x0 = std::max(r.x0, 1); break;
  }
  if (r.x0 > r.x1 || r.y0 > r.y1) throw Error("GreenEngine: box does not meet the walk's domain");
  return r;
}

}  // namespace

GreenEngine::GreenEngine(const JumpMeasure& mu, WalkKind kind, const Vec2& a, Box box)
    : kind_(kind), a_(a), rect_(clamp_to_domain(kind, box)) {
  ny_ = rect_.y1 - rect_.y0 + 1;
  n_ = (rect_.x1 - rect_.x0 + 1) * ny_;

  std::vector<std::pair<Offset, double>> steps;
  for (const auto& [w, p] : mu.entries()) {
    double t = p * std::exp(a.x() * w.dx + a.y() * w.dy);
    steps.push_back({w, t});
    total_ += t;
  }
  if (total_ > 1.0 + 1e-12) throw Error("GreenEngine: kernel is super-stochastic (phi(a) > 1)");

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n_) * (steps.size() + 1));
  for (int i = 0; i < n_; ++i) {
    Point z = point(i);
    trip.emplace_back(i, i, 1.0);
    for (const auto& [w, t] : steps) {
      Point to = z + w;
      int j = index(to);
      if (j >= 0) {
        trip.emplace_back(i, j, -t);
      } else if (in_domain(kind_, to)) {
        leaks_.push_back({i, to, t});
      } else {
        exits_.push_back({i, to, t});
      }
    }
  }
  A_.resize(n_, n_);
  A_.setFromTriplets(trip.begin(), trip.end());
  A_.makeCompressed();
  lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  lu_->analyzePattern(A_);
  lu_->factorize(A_);
  if (lu_->info() != Eigen::Success) throw Error("GreenEngine: sparse factorization failed");
}

Eigen::VectorXd GreenEngine::refine(Eigen::VectorXd x, const Eigen::VectorXd& b,
                                    bool transposed) const {
  for (int round = 0; round < 3; ++round) {
    Eigen::VectorXd r = transposed ? Eigen::VectorXd(b - A_.transpose() * x)
                                   : Eigen::VectorXd(b - A_ * x);
    double rn = r.cwiseAbs().maxCoeff();
    if (rn <= kSolveTol) return x;
    if (transposed)
      x += lu_->transpose().solve(r);
    else
      x += lu_->solve(r);
  }
  Eigen::VectorXd r = transposed ? Eigen::VectorXd(b - A_.transpose() * x)
                                 : Eigen::VectorXd(b - A_ * x);
  if (r.cwiseAbs().maxCoeff() > kSolveTol)
    throw Error("GreenEngine: iterative refinement did not reach 1e-11");
  return x;
}

Eigen::VectorXd GreenEngine::solve(const Eigen::VectorXd& b) const {
  return refine(lu_->solve(b), b, false);
}

Eigen::VectorXd GreenEngine::solve_transpose(const Eigen::VectorXd& b) const {
  return refine(lu_->transpose().solve(b), b, true);
}

Eigen::VectorXd GreenEngine::column(Point target) const {
  int i = index(target);
  if (i < 0) throw Error("GreenEngine::column: target outside the solve box");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n_);
  b[i] = 1.0;
  return solve(b);
}

Eigen::VectorXd GreenEngine::visits(Point source) const {
  int i = index(source);
  if (i < 0) throw Error("GreenEngine::visits: source outside the solve box");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n_);
  b[i] = 1.0;
  return solve_transpose(b);
}

Eigen::VectorXd GreenEngine::value_dp(const std::function<double(Point)>& f_exit,
                                      const std::function<double(Point)>& f_leak) const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n_);
  for (const auto& s : exits_) b[s.node] += s.w * f_exit(s.to);
  if (f_leak)
    for (const auto& s : leaks_) b[s.node] += s.w * f_leak(s.to);
  return solve(b);
}

double GreenEngine::residual_inf(const Eigen::VectorXd& x, const Eigen::VectorXd& b) const {
  return (b - A_ * x).cwiseAbs().maxCoeff();
}

double GreenColumn::value(Point z) const {
  if (!rect.contains(z)) {
    std::ostringstream os;
    os << "GreenColumn: point (" << z.x << ", " << z.y << ") outside the stored box";
    throw Error(os.str());
  }
  int ny = rect.y1 - rect.y0 + 1;
  return values[(z.x - rect.x0) * ny + (z.y - rect.y0)];
}

GreenColumn green_column(const JumpMeasure& mu, WalkKind kind, const Vec2& a, Point target,
                         Box box, const GreenOptions& opts) {
  if (!in_domain(kind, target)) throw Error("green_column: target outside the walk's domain");
  GreenEngine eng(mu, kind, a, box);
  GreenColumn col;
  col.target = target;
  col.kind = kind;
  col.twist = a;
  col.rect = eng.rect();
  col.values = eng.column(target);

  GreenEngine big(mu, kind, a, box.expanded(opts.error_margin));
  Eigen::VectorXd gb = big.column(target);
  double err = 0.0;
  for (int i = 0; i < eng.node_count(); ++i) {
    Point z = eng.point(i);
    err = std::max(err, std::abs(col.values[i] - gb[big.index(z)]));
  }
  col.truncation_error = err;
  col.truncation_warning = err > opts.trunc_tol;
  return col;
}

double martin_kernel(const GreenColumn& column, Point z, Point z0) {
  double num = column.value(z);
  double den = column.value(z0);
  if (den < 1e-300)
    throw Error("martin_kernel: denominator underflow; recompute through the twisted (log-domain) route");
  return num / den;
}

double check_twist_identity(const JumpMeasure& mu, WalkKind kind, const Vec2& a, Box box,
                            int n_pairs, std::uint64_t seed) {
  if (kind != WalkKind::Free && kind != WalkKind::HalfPlane1)
    throw Error("check_twist_identity: kind must be Free or HalfPlane1");
  GreenEngine twisted(mu, kind, a, box);
  GreenEngine plain(mu, kind, Vec2::Zero(), box);

  auto rng = stream_rng(seed, 0);
  const Box& r = twisted.rect();
  auto rand_point = [&]() -> Point {
    int x = r.x0 + static_cast<int>(uniform01(rng) * (r.x1 - r.x0 + 1));
    int y = r.y0 + static_cast<int>(uniform01(rng) * (r.y1 - r.y0 + 1));
    return {std::min(x, r.x1), std::min(y, r.y1)};
  };

  double worst = 0.0;
  for (int k = 0; k < n_pairs; ++k) {
    Point zp = rand_point();
    Eigen::VectorXd ga = twisted.column(zp);
    Eigen::VectorXd g0 = plain.column(zp);
    Point z = rand_point();
    double lhs = ga[twisted.index(z)];
    double rhs = g0[plain.index(z)] *
                 std::exp(a.x() * (zp.x - z.x) + a.y() * (zp.y - z.y));
    double denom = std::max(std::abs(lhs), 1e-300);
    worst = std::max(worst, std::abs(lhs - rhs) / denom);
  }
  return worst;
}

double check_renewal(const JumpMeasure& mu, RenewalVariant variant, Point z, Point target,
                     Box box) {
  if (!in_domain(WalkKind::Quadrant, z) || !in_domain(WalkKind::Quadrant, target))
    throw Error("check_renewal: z and target must lie in the quadrant");

  WalkKind outer = variant == RenewalVariant::QuadrantVsFree ? WalkKind::Free : WalkKind::HalfPlane1;
  GreenEngine eng_outer(mu, outer, Vec2::Zero(), box);
  GreenEngine eng_quad(mu, WalkKind::Quadrant, Vec2::Zero(), box);

  Eigen::VectorXd g_outer = eng_outer.column(target);
  Eigen::VectorXd g_quad = eng_quad.column(target);

  ExitDistribution exd = exit_distribution(mu, WalkKind::Quadrant, Vec2::Zero(), z,
                                           eng_quad.rect());
  double correction = 0.0;
  for (const auto& e : exd.weights) {
    if (variant == RenewalVariant::QuadrantVsHalfPlane1 && e.cls != TauClass::Tau1BeforeTau2)
      continue;
    int j = eng_outer.index(e.w);
    if (j >= 0) correction += e.weight * g_outer[j];
  }
  double lhs = g_quad[eng_quad.index(z)];
  double rhs = g_outer[eng_outer.index(z)] - correction;
  return std::abs(lhs - rhs);
}

}  // namespace quadwalk
