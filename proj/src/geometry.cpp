#include "quadwalk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace quadwalk {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

DirectionClass classify_direction(const Vec2& q, double axis_tol) {
  Vec2 u = q.normalized();
  if (std::abs(std::atan2(u.y(), u.x())) < axis_tol) return DirectionClass::Critical10;
  if (std::abs(std::atan2(u.x(), u.y())) < axis_tol) return DirectionClass::Critical01;
  return DirectionClass::Interior;
}

double phi(const JumpMeasure& mu, const Vec2& a) {
  double s = 0.0;
  for (const auto& [w, p] : mu.entries()) s += p * std::exp(a.x() * w.dx + a.y() * w.dy);
  return s;
}

Vec2 grad_phi(const JumpMeasure& mu, const Vec2& a) {
  Vec2 g = Vec2::Zero();
  for (const auto& [w, p] : mu.entries()) {
    double t = p * std::exp(a.x() * w.dx + a.y() * w.dy);
    g += t * Vec2(w.dx, w.dy);
  }
  return g;
}

Mat2 hessian_phi(const JumpMeasure& mu, const Vec2& a) {
  Mat2 h = Mat2::Zero();
  for (const auto& [w, p] : mu.entries()) {
    double t = p * std::exp(a.x() * w.dx + a.y() * w.dy);
    Vec2 z(w.dx, w.dy);
    h += t * z * z.transpose();
  }
  return h;
}

Vec2 min_point(const JumpMeasure& mu, const GeomConfig& cfg) {
  Vec2 a = Vec2::Zero();
  for (int it = 0; it < cfg.max_iter; ++it) {
    Vec2 g = grad_phi(mu, a);
    if (g.norm() <= cfg.newton_tol) return a;
    Mat2 h = hessian_phi(mu, a);
    Vec2 d = h.ldlt().solve(-g);
    double f0 = phi(mu, a);
    double t = 1.0;
    while (t > 1e-14 && phi(mu, a + t * d) > f0) t *= 0.5;
    if (t <= 1e-14) throw Error("min_point: Newton line search stalled");
    a += t * d;
  }
  if (grad_phi(mu, a).norm() > cfg.newton_tol)
    throw Error("min_point: Newton did not reach the requested gradient tolerance");
  return a;
}

SpectralPoint a_of_q(const JumpMeasure& mu, const Vec2& q_in, const GeomConfig& cfg) {
  double qn = q_in.norm();
  if (!(qn > 0.0)) throw Error("a_of_q: q must be nonzero");
  Vec2 q = q_in / qn;

  Vec2 am = min_point(mu, cfg);
  double s_hi = 1.0;
  while (phi(mu, am + s_hi * q) < 1.0) {
    s_hi *= 2.0;
    if (s_hi > 1e8) throw Error("a_of_q: bisection bracket failed (phi never reaches 1)");
  }
  double s_lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    double s = 0.5 * (s_lo + s_hi);
    (phi(mu, am + s * q) < 1.0 ? s_lo : s_hi) = s;
  }
  Vec2 a = am + 0.5 * (s_lo + s_hi) * q;
  double lam = grad_phi(mu, a).dot(q);

  // Newton on F(a, lambda) = (grad phi(a) - lambda q, phi(a) - 1).
  for (int it = 0; it < cfg.max_iter; ++it) {
    Vec2 g = grad_phi(mu, a);
    Eigen::Vector3d F(g.x() - lam * q.x(), g.y() - lam * q.y(), phi(mu, a) - 1.0);
    if (F.cwiseAbs().maxCoeff() <= cfg.newton_tol) break;
    Mat2 h = hessian_phi(mu, a);
    Eigen::Matrix3d J;
    J << h(0, 0), h(0, 1), -q.x(),
         h(1, 0), h(1, 1), -q.y(),
         g.x(),   g.y(),   0.0;
    Eigen::Vector3d d = J.partialPivLu().solve(-F);
    a += Vec2(d.x(), d.y());
    lam += d.z();
  }
  Vec2 g = grad_phi(mu, a);
  double resid = std::max((g - lam * q).norm(), std::abs(phi(mu, a) - 1.0));
  if (resid > 1e-10) {
    std::ostringstream os;
    os.precision(6);
    os << "a_of_q: Newton did not converge, residual " << resid;
    throw Error(os.str());
  }
  SpectralPoint sp;
  sp.a = a;
  sp.q = q;
  sp.gradient_norm = g.norm();
  double angle = std::atan2(g.x() * q.y() - g.y() * q.x(), g.dot(q));
  if (std::abs(angle) > cfg.angle_tol) throw Error("a_of_q: normal direction check failed");
  return sp;
}

namespace {

// Convex hull of the support (monotone chain, integer coordinates).
std::vector<Point> support_hull(const JumpMeasure& mu) {
  std::vector<Point> pts;
  for (const auto& [w, p] : mu.entries()) pts.push_back({w.dx, w.dy});
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;
  auto cross = [](Point o, Point a, Point b) {
    return static_cast<long long>(a.x - o.x) * (b.y - o.y) -
           static_cast<long long>(a.y - o.y) * (b.x - o.x);
  };
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;  // counterclockwise
}

// 1D conjugate sup_t (t*s - log sum m_i e^{t s_i}) for a face-restricted
// measure; s must lie in [min s_i, max s_i].
double conjugate_1d(const std::vector<std::pair<double, double>>& pts, double s) {
  double smin = kInf, smax = -kInf, mmin = 0, mmax = 0;
  for (auto& [si, mi] : pts) {
    if (si < smin) { smin = si; mmin = mi; } else if (si == smin) { mmin += mi; }
    if (si > smax) { smax = si; mmax = mi; } else if (si == smax) { mmax += mi; }
  }
  if (s <= smin + 1e-12) return -std::log(mmin);
  if (s >= smax - 1e-12) return -std::log(mmax);
  double t = 0.0;
  for (int it = 0; it < 200; ++it) {
    double z = 0, z1 = 0, z2 = 0;
    for (auto& [si, mi] : pts) {
      double e = mi * std::exp(t * si);
      z += e; z1 += si * e; z2 += si * si * e;
    }
    double g = s - z1 / z;
    double h = -(z2 / z - (z1 / z) * (z1 / z));
    if (std::abs(g) < 1e-14) break;
    t -= g / h;
  }
  double z = 0;
  for (auto& [si, mi] : pts) z += mi * std::exp(t * si);
  return t * s - std::log(z);
}

}  // namespace

RateValue legendre(const JumpMeasure& mu, const Vec2& v, const GeomConfig& cfg) {
  auto hull = support_hull(mu);
  const double btol = 1e-12;

  if (hull.size() == 1) {
    // Degenerate single-point support cannot pass validation; handle anyway.
    Point z0 = hull[0];
    if (std::abs(v.x() - z0.x) < btol && std::abs(v.y() - z0.y) < btol)
      return {-std::log(mu.mass({z0.x, z0.y})), std::nullopt};
    return {kInf, std::nullopt};
  }

  // Signed position of v relative to each hull edge (positive = inside).
  double worst = kInf;
  std::size_t worst_edge = 0;
  bool collinear_hull = hull.size() == 2;
  for (std::size_t i = 0; i < hull.size() && !collinear_hull; ++i) {
    Point a = hull[i], b = hull[(i + 1) % hull.size()];
    Vec2 e(b.x - a.x, b.y - a.y);
    double len = e.norm();
    double d = (e.x() * (v.y() - a.y) - e.y() * (v.x() - a.x)) / len;
    if (d < worst) { worst = d; worst_edge = i; }
  }
  if (collinear_hull) {
    // Support lies on a line; v must be on it too.
    Point a = hull[0], b = hull[1];
    Vec2 e(b.x - a.x, b.y - a.y);
    double len = e.norm();
    double off = std::abs(e.x() * (v.y() - a.y) - e.y() * (v.x() - a.x)) / len;
    if (off > btol) return {kInf, std::nullopt};
    std::vector<std::pair<double, double>> face;
    for (const auto& [w, p] : mu.entries()) face.push_back({Vec2(w.dx, w.dy).dot(e) / len, p});
    return {conjugate_1d(face, v.dot(e) / len), std::nullopt};
  }

  if (worst < -btol) return {kInf, std::nullopt};

  if (worst <= btol) {
    // v on the relative boundary: reduce to the exposed face.
    Point a = hull[worst_edge], b = hull[(worst_edge + 1) % hull.size()];
    Vec2 e(b.x - a.x, b.y - a.y);
    double len = e.norm();
    Vec2 eu = e / len;
    std::vector<std::pair<double, double>> face;
    for (const auto& [w, p] : mu.entries()) {
      // keep only support points on the edge's line
      double off = eu.x() * (w.dy - a.y) - eu.y() * (w.dx - a.x);
      if (std::abs(off) < 1e-12) face.push_back({Vec2(w.dx, w.dy).dot(eu), p});
    }
    return {conjugate_1d(face, v.dot(eu)), std::nullopt};
  }

  // Interior: Newton on grad log phi(a) = v.
  Vec2 a = Vec2::Zero();
  for (int it = 0; it < cfg.max_iter * 2; ++it) {
    double f = phi(mu, a);
    Vec2 g = grad_phi(mu, a) / f;
    Vec2 r = v - g;
    if (r.norm() <= cfg.newton_tol * (1.0 + v.norm())) break;
    Mat2 hl = hessian_phi(mu, a) / f - g * g.transpose();
    Vec2 d = hl.ldlt().solve(r);
    // backtracking on the concave objective a.v - log phi(a)
    double obj = a.dot(v) - std::log(f);
    double t = 1.0;
    while (t > 1e-14) {
      Vec2 an = a + t * d;
      if (an.dot(v) - std::log(phi(mu, an)) >= obj) break;
      t *= 0.5;
    }
    a += t * d;
  }
  double value = a.dot(v) - std::log(phi(mu, a));
  return {value, a};
}

double pathwise_rate(const JumpMeasure& mu, const std::vector<std::pair<double, Vec2>>& path,
                     PathConstraint constraint, const GeomConfig& cfg) {
  if (path.size() < 2) throw Error("pathwise_rate: need at least two breakpoints");
  for (std::size_t i = 1; i < path.size(); ++i)
    if (!(path[i].first > path[i - 1].first))
      throw Error("pathwise_rate: breakpoint times must be strictly increasing");

  auto ok = [&](const Vec2& x) {
    switch (constraint) {
      case PathConstraint::None: return true;
      case PathConstraint::HalfPlane1: return x.y() >= 0.0;
      case PathConstraint::HalfPlane2: return x.x() >= 0.0;
      case PathConstraint::Quadrant: return x.x() >= 0.0 && x.y() >= 0.0;
    }
    return false;
  };
  // The constraint sets are convex, so checking breakpoints covers segments.
  for (const auto& [t, x] : path)
    if (!ok(x)) return kInf;

  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    double dt = path[i].first - path[i - 1].first;
    Vec2 slope = (path[i].second - path[i - 1].second) / dt;
    RateValue r = legendre(mu, slope, cfg);
    if (!r.finite()) return kInf;
    total += dt * r.value;
  }
  return total;
}

double lambda_eps(const JumpMeasure& mu, const Vec2& q, const Vec2& w, double eps,
                  const GeomConfig& cfg) {
  if (w.norm() < 1e-14) throw Error("lambda_eps: w must be nonzero");
  if ((w - q).norm() < 1e-14) throw Error("lambda_eps: w must differ from q");
  Vec2 aw = a_of_q(mu, w, cfg).a;
  Vec2 aqw = a_of_q(mu, q - w, cfg).a;
  return aw.dot(w) + aqw.dot(q - w) - eps * w.norm();
}

}  // namespace quadwalk
