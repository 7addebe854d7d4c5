#include "oracles.hpp"

#include <cmath>

namespace quadwalk::testing {

SeriesGreen series_green(const JumpMeasure& mu, WalkKind kind, const Vec2& a, Point z,
                         Point target, Box box, int horizon) {
  Box r = box;
  switch (kind) {
    case WalkKind::Free: break;
    case WalkKind::Quadrant: r.x0 = std::max(r.x0, 1); r.y0 = std::max(r.y0, 1); break;
    case WalkKind::HalfPlane1: r.y0 = std::max(r.y0, 1); break;
    case WalkKind::HalfPlane2: r.x0 = std::max(r.x0, 1); break;
  }
  int nx = r.x1 - r.x0 + 1, ny = r.y1 - r.y0 + 1;
  auto at = [&](std::vector<double>& v, int x, int y) -> double& {
    return v[(x - r.x0) * ny + (y - r.y0)];
  };
  std::vector<std::pair<Offset, double>> steps;
  for (const auto& [w, p] : mu.entries())
    steps.push_back({w, p * std::exp(a.x() * w.dx + a.y() * w.dy)});

  std::vector<double> cur(static_cast<std::size_t>(nx) * ny, 0.0);
  at(cur, z.x, z.y) = 1.0;
  SeriesGreen out;
  out.value = (z == target) ? 1.0 : 0.0;
  for (int t = 1; t <= horizon; ++t) {
    std::vector<double> next(cur.size(), 0.0);
    for (int x = r.x0; x <= r.x1; ++x) {
      for (int y = r.y0; y <= r.y1; ++y) {
        double p = at(cur, x, y);
        if (p == 0.0) continue;
        for (const auto& [w, pw] : steps) {
          int tx = x + w.dx, ty = y + w.dy;
          if (tx < r.x0 || tx > r.x1 || ty < r.y0 || ty > r.y1) continue;
          at(next, tx, ty) += p * pw;
        }
      }
    }
    cur.swap(next);
    out.value += at(cur, target.x, target.y);
  }
  for (double p : cur) out.alive_mass += p;
  return out;
}

SeriesExit series_exit(const JumpMeasure& mu, WalkKind kind, const Vec2& a, Point z, Box box,
                       int horizon) {
  Box r = box;
  switch (kind) {
    case WalkKind::Free: break;
    case WalkKind::Quadrant: r.x0 = std::max(r.x0, 1); r.y0 = std::max(r.y0, 1); break;
    case WalkKind::HalfPlane1: r.y0 = std::max(r.y0, 1); break;
    case WalkKind::HalfPlane2: r.x0 = std::max(r.x0, 1); break;
  }
  int ny = r.y1 - r.y0 + 1;
  auto at = [&](std::vector<double>& v, int x, int y) -> double& {
    return v[(x - r.x0) * ny + (y - r.y0)];
  };
  std::vector<std::pair<Offset, double>> steps;
  for (const auto& [w, p] : mu.entries())
    steps.push_back({w, p * std::exp(a.x() * w.dx + a.y() * w.dy)});

  std::vector<double> cur(static_cast<std::size_t>(r.x1 - r.x0 + 1) * ny, 0.0);
  at(cur, z.x, z.y) = 1.0;
  SeriesExit out;
  for (int t = 1; t <= horizon; ++t) {
    std::vector<double> next(cur.size(), 0.0);
    for (int x = r.x0; x <= r.x1; ++x) {
      for (int y = r.y0; y <= r.y1; ++y) {
        double p = at(cur, x, y);
        if (p == 0.0) continue;
        for (const auto& [w, pw] : steps) {
          int tx = x + w.dx, ty = y + w.dy;
          if (!in_domain(kind, {tx, ty})) {
            out.weights[{tx, ty}] += p * pw;
          } else if (tx >= r.x0 && tx <= r.x1 && ty >= r.y0 && ty <= r.y1) {
            at(next, tx, ty) += p * pw;
          }
        }
      }
    }
    cur.swap(next);
  }
  for (double p : cur) out.alive_mass += p;
  return out;
}

double golden_minimize(const std::function<double(double)>& f, double lo, double hi, int iters) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace quadwalk::testing
