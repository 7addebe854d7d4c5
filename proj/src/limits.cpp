#include "quadwalk/limits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace quadwalk {

namespace {

double dot(const Vec2& a, Point z) { return a.x() * z.x + a.y() * z.y; }
double norm(Point z) { return std::hypot(static_cast<double>(z.x), static_cast<double>(z.y)); }

Box box_around(const std::vector<Point>& pts, int margin) {
  Box b{pts[0].x, pts[0].x, pts[0].y, pts[0].y};
  for (Point p : pts) {
    b.x0 = std::min(b.x0, p.x);
    b.x1 = std::max(b.x1, p.x);
    b.y0 = std::min(b.y0, p.y);
    b.y1 = std::max(b.y1, p.y);
  }
  return b.expanded(margin);
}

double rel_gap(double observed, double target) {
  double d = std::abs(observed - target);
  return std::abs(target) > 1e-12 ? d / std::abs(target) : d;
}

void finish_report(ConvergenceReport& rep, double tol, double trend_eps) {
  rep.tolerance = tol;
  std::vector<double> smoothed;
  for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i)
    smoothed.push_back(0.5 * (rep.rows[i].relative_gap + rep.rows[i + 1].relative_gap));
  rep.trend_ok = true;
  std::size_t first = smoothed.size() > 3 ? smoothed.size() - 3 : 0;
  for (std::size_t i = first; i + 1 < smoothed.size(); ++i)
    if (smoothed[i + 1] > smoothed[i] * (1.0 + 1e-6) + trend_eps) rep.trend_ok = false;
  rep.final_gap = rep.rows.empty() ? 0.0 : rep.rows.back().relative_gap;
  rep.pass = rep.trend_ok && rep.final_gap <= tol;
}

}  // namespace

Point RaySpec::project(double r) const {
  Vec2 u = q.normalized();
  int x = static_cast<int>(std::lround(r * u.x()));
  int y = static_cast<int>(std::lround(r * u.y()));
  return {std::max(1, x), std::max(1, y)};
}

std::vector<ConvergenceReport> martin_kernel_convergence(const JumpMeasure& mu, const RaySpec& ray,
                                                    const std::vector<Point>& test_points,
                                                    Point z0, double tol_final,
                                                    const LimitsOptions& opts) {
  for (Point z : test_points)
    if (!in_domain(WalkKind::Quadrant, z)) throw Error("theorem1: test points must be in the quadrant");
  if (!in_domain(WalkKind::Quadrant, z0)) throw Error("theorem1: z0 must be in the quadrant");

  std::vector<Point> all(test_points);
  all.push_back(z0);
  Box hw = box_around(all, 0);
  HarmonicFunction h = h_function(mu, ray.q, {1, hw.x1, 1, hw.y1});
  double h0 = h.value(z0);
  if (!(h0 > 0.0)) throw Error("theorem1: h(z0) is not positive");

  std::vector<Point> targets;
  for (double r : ray.radii) targets.push_back(ray.project(r));
  std::vector<Point> cover(all);
  cover.insert(cover.end(), targets.begin(), targets.end());
  GreenEngine eng(mu, WalkKind::Quadrant, Vec2::Zero(), box_around(cover, opts.margin));
  GreenEngine big(mu, WalkKind::Quadrant, Vec2::Zero(),
                  box_around(cover, opts.margin + static_cast<int>(opts.trunc_check_margin)));

  SpectralPoint sp = a_of_q(mu, ray.q);
  std::unique_ptr<GreenEngine> twisted;

  std::vector<ConvergenceReport> reports;
  for (Point z : test_points) {
    std::ostringstream name;
    name << "theorem1 q=(" << ray.q.normalized().x() << "," << ray.q.normalized().y() << ") z=("
         << z.x << "," << z.y << ")";
    ConvergenceReport rep;
    rep.experiment = name.str();
    double target = h.value(z) / h0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      Point zn = targets[i];
      Eigen::VectorXd g = eng.column(zn);
      double gz = g[eng.index(z)], gz0 = g[eng.index(z0)];
      double observed;
      if (opts.force_log_domain || std::min(gz, gz0) < opts.log_domain_floor) {
        rep.used_log_domain = true;
        if (!twisted)
          twisted = std::make_unique<GreenEngine>(mu, WalkKind::Quadrant, sp.a, eng.rect());
        Eigen::VectorXd ga = twisted->column(zn);
        double la = std::log(ga[twisted->index(z)]) - std::log(ga[twisted->index(z0)]);
        observed = std::exp(la + dot(sp.a, z) - dot(sp.a, z0));
      } else {
        observed = gz / gz0;
      }
      Eigen::VectorXd gb = big.column(zn);
      rep.truncation_error =
          std::max({rep.truncation_error, std::abs(gz - gb[big.index(z)]),
                    std::abs(gz0 - gb[big.index(z0)])});
      rep.rows.push_back({ray.radii[i], zn, observed, target, rel_gap(observed, target)});
    }
    finish_report(rep, tol_final, opts.trend_eps);
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::vector<ConvergenceReport> ney_spitzer_check(const JumpMeasure& mu, const RaySpec& ray,
                                                 const std::vector<Point>& test_points,
                                                 Point z0, double tol_final,
                                                 const LimitsOptions& opts) {
  SpectralPoint sp = a_of_q(mu, ray.q);
  std::vector<Point> targets;
  for (double r : ray.radii) targets.push_back(ray.project(r));
  std::vector<Point> cover(test_points);
  cover.push_back(z0);
  cover.insert(cover.end(), targets.begin(), targets.end());
  GreenEngine eng(mu, WalkKind::Free, Vec2::Zero(), box_around(cover, opts.margin));
  std::unique_ptr<GreenEngine> twisted;

  std::vector<ConvergenceReport> reports;
  for (Point z : test_points) {
    std::ostringstream name;
    name << "neyspitzer q=(" << ray.q.normalized().x() << "," << ray.q.normalized().y() << ") z=("
         << z.x << "," << z.y << ")";
    ConvergenceReport rep;
    rep.experiment = name.str();
    double target = std::exp(dot(sp.a, z) - dot(sp.a, z0));
    for (std::size_t i = 0; i < targets.size(); ++i) {
      Point zn = targets[i];
      Eigen::VectorXd g = eng.column(zn);
      double gz = g[eng.index(z)], gz0 = g[eng.index(z0)];
      double observed;
      if (opts.force_log_domain || std::min(gz, gz0) < opts.log_domain_floor) {
        rep.used_log_domain = true;
        if (!twisted) twisted = std::make_unique<GreenEngine>(mu, WalkKind::Free, sp.a, eng.rect());
        Eigen::VectorXd ga = twisted->column(zn);
        double la = std::log(ga[twisted->index(z)]) - std::log(ga[twisted->index(z0)]);
        observed = std::exp(la + dot(sp.a, z) - dot(sp.a, z0));
      } else {
        observed = gz / gz0;
      }
      rep.rows.push_back({ray.radii[i], zn, observed, target, rel_gap(observed, target)});
    }
    finish_report(rep, tol_final, opts.trend_eps);
    reports.push_back(std::move(rep));
  }
  return reports;
}

LogRateReport log_asymptotics(const JumpMeasure& mu, WalkKind kind, const RaySpec& ray,
                              Point z_fixed, double tol, const LimitsOptions& opts) {
  if (ray.radii.size() < 3) throw Error("log_asymptotics: need at least three radii");
  if (!in_domain(kind, z_fixed)) throw Error("log_asymptotics: z_fixed outside the domain");
  SpectralPoint sp = a_of_q(mu, ray.q);
  double rate = sp.a.dot(ray.q.normalized());

  std::vector<Point> targets;
  for (double r : ray.radii) targets.push_back(ray.project(r));
  std::vector<Point> cover(targets);
  cover.push_back(z_fixed);
  GreenEngine eng(mu, kind, Vec2::Zero(), box_around(cover, opts.margin));
  std::unique_ptr<GreenEngine> twisted;

  LogRateReport out;
  out.raw.experiment = std::string("lograte ") + kind_name(kind);
  std::vector<double> ns, ls;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    Point zn = targets[i];
    Eigen::VectorXd g = eng.column(zn);
    double gz = g[eng.index(z_fixed)];
    double logG;
    if (opts.force_log_domain || gz < opts.log_domain_floor) {
      out.raw.used_log_domain = true;
      if (!twisted) twisted = std::make_unique<GreenEngine>(mu, kind, sp.a, eng.rect());
      Eigen::VectorXd ga = twisted->column(zn);
      logG = std::log(ga[twisted->index(z_fixed)]) - (dot(sp.a, zn) - dot(sp.a, z_fixed));
    } else {
      logG = std::log(gz);
    }
    double n = norm(zn);
    double raw = -logG / n;
    ns.push_back(n);
    ls.push_back(-logG);
    out.raw.rows.push_back({ray.radii[i], zn, raw, rate, rel_gap(raw, rate)});
  }
  for (std::size_t i = 0; i + 1 < ns.size(); ++i)
    out.pair_slopes.push_back((ls[i + 1] - ls[i]) / (ns[i + 1] - ns[i]));

  // -log G = rate*n + c*log n + b on the last three radii; solve for rate.
  std::size_t k = ns.size();
  Eigen::Matrix3d M;
  Eigen::Vector3d rhs;
  for (int j = 0; j < 3; ++j) {
    double n = ns[k - 3 + j];
    M.row(j) << n, std::log(n), 1.0;
    rhs[j] = ls[k - 3 + j];
  }
  Eigen::Vector3d coef = M.partialPivLu().solve(rhs);
  out.richardson3 = coef[0];
  out.rich_gap = rel_gap(out.richardson3, rate);
  finish_report(out.raw, tol, opts.trend_eps);
  out.raw.pass = out.raw.trend_ok;  // raw gap carries the prefactor bias
  out.pass = out.raw.trend_ok && out.rich_gap <= tol;
  return out;
}

int halfplane_return_gcd(const JumpMeasure& mu, int k_max) {
  std::set<Point> cur{{0, 1}};
  int g = 0;
  for (int k = 1; k <= k_max; ++k) {
    std::set<Point> next;
    for (Point s : cur)
      for (const auto& [w, p] : mu.entries()) {
        Point t = s + w;
        if (t.y >= 1) next.insert(t);
      }
    cur = std::move(next);
    if (cur.count({0, 1})) g = std::gcd(g, k);
  }
  if (g == 0) throw Error("halfplane_return_gcd: no return within k_max; increase k_max");
  return g;
}

ConvergenceReport ratio_limit_check(const JumpMeasure& mu, WalkKind kind, const RaySpec& ray,
                                    Point z, Offset w, double tol, const LimitsOptions& opts) {
  if (kind != WalkKind::Free && kind != WalkKind::HalfPlane1)
    throw Error("ratio_limit_check: kind must be Free or HalfPlane1");
  int khat = period2d(mu, 12);
  if (w.dx % khat != 0 || w.dy % khat != 0)
    throw Error("ratio_limit_check: displacement must be a multiple of the period");
  if (kind == WalkKind::HalfPlane1 && w.dy != 0)
    throw Error("ratio_limit_check: half-plane displacements must lie in Z x {0}");
  if (halfplane_return_gcd(mu, 12) != khat)
    throw Error("ratio_limit_check: half-plane return gcd differs from the 2D period");

  SpectralPoint sp = a_of_q(mu, ray.q);
  Point zw = z + w;
  if (!in_domain(kind, z) || !in_domain(kind, zw))
    throw Error("ratio_limit_check: base point or displaced point outside the domain");

  std::vector<Point> targets;
  for (double r : ray.radii) targets.push_back(ray.project(r));
  std::vector<Point> cover(targets);
  cover.push_back(z);
  cover.push_back(zw);
  GreenEngine eng(mu, kind, Vec2::Zero(), box_around(cover, opts.margin));
  std::unique_ptr<GreenEngine> twisted;

  ConvergenceReport rep;
  std::ostringstream name;
  name << "ratiolimit " << kind_name(kind) << " w=(" << w.dx << "," << w.dy << ")";
  rep.experiment = name.str();
  double shift = sp.a.x() * w.dx + sp.a.y() * w.dy;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    Point zn = targets[i];
    Eigen::VectorXd g = eng.column(zn);
    double gz = g[eng.index(z)], gzw = g[eng.index(zw)];
    double observed;
    if (opts.force_log_domain || std::min(gz, gzw) < opts.log_domain_floor) {
      rep.used_log_domain = true;
      if (!twisted) twisted = std::make_unique<GreenEngine>(mu, kind, sp.a, eng.rect());
      Eigen::VectorXd ga = twisted->column(zn);
      observed = std::exp(std::log(ga[twisted->index(zw)]) - std::log(ga[twisted->index(z)]));
    } else {
      observed = std::exp(-shift) * gzw / gz;
    }
    rep.rows.push_back({ray.radii[i], zn, observed, 1.0, std::abs(observed - 1.0)});
  }
  finish_report(rep, tol, opts.trend_eps);
  return rep;
}

XiRecord xi_decomposition(const JumpMeasure& mu, const Vec2& q, double delta, Point z,
                          double radius, const LimitsOptions& opts) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("xi_decomposition: delta must be in (0,1)");
  if (!in_domain(WalkKind::Quadrant, z)) throw Error("xi_decomposition: z must be in the quadrant");

  RaySpec ray{q, {radius}};
  Point zn = ray.project(radius);
  DirectionClass cls = classify_direction(q.normalized());
  WalkKind outer = cls == DirectionClass::Interior
                       ? WalkKind::Free
                       : (cls == DirectionClass::Critical10 ? WalkKind::HalfPlane1
                                                            : WalkKind::HalfPlane2);

  std::vector<Point> cover{z, zn, {0, 0}};
  Box obox = box_around(cover, opts.margin);
  GreenEngine eng_outer(mu, outer, Vec2::Zero(), obox);
  GreenEngine eng_quad(mu, WalkKind::Quadrant, Vec2::Zero(), obox);

  Eigen::VectorXd g_outer = eng_outer.column(zn);
  Eigen::VectorXd g_quad = eng_quad.column(zn);

  ExitDistribution exd =
      exit_distribution(mu, WalkKind::Quadrant, Vec2::Zero(), z, eng_quad.rect());
  double trim = delta * norm(zn);
  double corr = 0.0;
  for (const auto& e : exd.weights) {
    if (norm(e.w) >= trim) continue;
    if (cls == DirectionClass::Critical10 && e.cls != TauClass::Tau1BeforeTau2) continue;
    if (cls == DirectionClass::Critical01 && e.cls != TauClass::Tau2AtMostTau1) continue;
    int j = eng_outer.index(e.w);
    if (j >= 0) corr += e.weight * g_outer[j];
  }
  XiRecord rec;
  rec.zn = zn;
  rec.xi = g_outer[eng_outer.index(z)] - corr;
  rec.g_plus = g_quad[eng_quad.index(z)];
  rec.ratio = rec.g_plus / rec.xi;
  return rec;
}

BoundScan uniform_bound_scan(const JumpMeasure& mu, WalkKind kind, const RaySpec& ray,
                             double sigma, const LimitsOptions& opts) {
  if (!(sigma > 0.0)) throw Error("uniform_bound_scan: sigma must be positive");
  if (kind != WalkKind::Free && kind != WalkKind::HalfPlane1)
    throw Error("uniform_bound_scan: kind must be Free or HalfPlane1");
  if (ray.radii.size() < 2) throw Error("uniform_bound_scan: need at least two radii");

  SpectralPoint sp = a_of_q(mu, ray.q);
  Point z0 = kind == WalkKind::Free ? Point{0, 0} : Point{1, 1};
  const double delta = 0.2;

  std::vector<double> radii{ray.radii[ray.radii.size() - 2], ray.radii.back()};
  std::vector<Point> targets{ray.project(radii[0]), ray.project(radii[1])};
  int scan = static_cast<int>(delta * norm(targets[1])) + 1;
  std::vector<Point> cover(targets);
  cover.push_back({-scan, -scan});
  cover.push_back({scan, scan});
  cover.push_back(z0);
  GreenEngine eng(mu, kind, Vec2::Zero(), box_around(cover, opts.margin));

  BoundScan out;
  double uppers[2] = {0.0, 0.0};
  double lowers[2] = {0.0, 0.0};
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd g = eng.column(targets[i]);
    double gz0 = g[eng.index(z0)];
    double up = 0.0, lo = std::numeric_limits<double>::infinity();
    double limit = delta * norm(targets[i]);
    for (int x = -scan; x <= scan; ++x) {
      for (int y = -scan; y <= scan; ++y) {
        Point p{x, y};
        if (!in_domain(kind, p) || norm(p) >= limit) continue;
        int j = eng.index(p);
        if (j < 0) continue;
        double ratio = g[j] / gz0;
        double az = dot(sp.a, p) - dot(sp.a, z0);
        up = std::max(up, ratio / std::exp(az + sigma * norm(p)));
        lo = std::min(lo, ratio / std::exp(az - sigma * norm(p)));
      }
    }
    uppers[i] = up;
    lowers[i] = lo;
  }
  out.c_upper_prev = uppers[0];
  out.c_upper = uppers[1];
  out.c_lower = lowers[1];
  out.stable = uppers[0] <= 2.0 * uppers[1] && uppers[1] <= 2.0 * uppers[0];
  out.bracket_ok = out.c_lower <= 1.0 && 1.0 <= out.c_upper;
  return out;
}

}  // namespace quadwalk
