#include "quadwalk/measure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace quadwalk {

JumpMeasure JumpMeasure::from_entries(std::vector<std::pair<Offset, double>> entries) {
  if (entries.empty()) throw Error("measure: empty support");
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double sum = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [w, p] = entries[i];
    if (i > 0 && entries[i - 1].first == w) {
      std::ostringstream os;
      os << "measure: duplicate offset (" << w.dx << ", " << w.dy << ")";
      throw Error(os.str());
    }
    if (!(p > 0.0)) {
      std::ostringstream os;
      os << "measure: mass at (" << w.dx << ", " << w.dy << ") must be strictly positive, got " << p;
      throw Error(os.str());
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kMassTol) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), sum);
    std::ostringstream os;
    os << "measure: masses sum to " << std::string(buf, ptr) << ", expected 1 within " << kMassTol;
    throw Error(os.str());
  }
  if (entries.size() == 1 && entries[0].first == Offset{0, 0})
    throw Error("measure: support must not be {(0,0)}");

  JumpMeasure m;
  m.entries_ = std::move(entries);
  for (const auto& [w, p] : m.entries_) {
    m.max_step_ = std::max({m.max_step_, std::abs(w.dx), std::abs(w.dy)});
    m.min_dx_ = std::min(m.min_dx_, w.dx);
    m.min_dy_ = std::min(m.min_dy_, w.dy);
  }
  return m;
}

double JumpMeasure::mass(Offset w) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), w,
                             [](const auto& e, Offset key) { return e.first < key; });
  if (it != entries_.end() && it->first == w) return it->second;
  return 0.0;
}

std::map<int, double> JumpMeasure::twisted_marginal(const Vec2& a, int axis) const {
  std::map<int, double> nu;
  for (const auto& [w, p] : entries_) {
    double t = p * std::exp(a.x() * w.dx + a.y() * w.dy);
    nu[axis == 0 ? w.dx : w.dy] += t;
  }
  return nu;
}

Vec2 mean(const JumpMeasure& mu) {
  Vec2 m = Vec2::Zero();
  for (const auto& [w, p] : mu.entries()) m += p * Vec2(w.dx, w.dy);
  return m;
}

namespace {

// BFS over the step set inside a clipped window; marks reached cells.
// `lo`/`hi` bound both coordinates, `keep` filters admissible states.
template <typename Keep>
std::set<Point> bfs(const std::vector<Offset>& steps, Point start, int lo, int hi, Keep keep) {
  std::set<Point> seen;
  std::vector<Point> queue;
  if (!keep(start)) return seen;
  seen.insert(start);
  queue.push_back(start);
  while (!queue.empty()) {
    Point z = queue.back();
    queue.pop_back();
    for (Offset w : steps) {
      Point t = z + w;
      if (t.x < lo || t.x > hi || t.y < lo || t.y > hi) continue;
      if (!keep(t)) continue;
      if (seen.insert(t).second) queue.push_back(t);
    }
  }
  return seen;
}

// gcd of the 1D return times of the marginal walk, 0 if no return occurred.
int return_gcd_1d(const std::map<int, double>& nu, int k_max) {
  std::set<int> cur{0};
  int g = 0;
  for (int k = 1; k <= k_max; ++k) {
    std::set<int> next;
    for (int s : cur)
      for (const auto& [j, p] : nu) next.insert(s + j);
    cur = std::move(next);
    if (cur.count(0)) g = std::gcd(g, k);
  }
  return g;
}

int period2d_upto(const JumpMeasure& mu, int k_max) {
  std::set<Point> cur{{0, 0}};
  int g = 0;
  for (int k = 1; k <= k_max; ++k) {
    std::set<Point> next;
    for (Point s : cur)
      for (const auto& [w, p] : mu.entries()) next.insert(s + w);
    cur = std::move(next);
    if (cur.count({0, 0})) g = std::gcd(g, k);
  }
  return g;
}

}  // namespace

int period2d(const JumpMeasure& mu, int k_max) {
  if (k_max < 8) throw Error("period2d: k_max must be at least 8");
  int g1 = period2d_upto(mu, k_max);
  if (g1 == 0) throw Error("period2d: no return to the origin within k_max steps; increase k_max");
  int g2 = period2d_upto(mu, 2 * k_max);
  if (g1 != g2) throw Error("period2d: gcd not stable under doubling k_max; increase k_max");
  return g1;
}

HypothesisReport validate(const JumpMeasure& mu, const ValidateOptions& opts) {
  HypothesisReport rep;
  rep.mean = mean(mu);

  std::vector<Offset> steps, rsteps;
  for (const auto& [w, p] : mu.entries()) {
    steps.push_back(w);
    rsteps.push_back({-w.dx, -w.dy});
  }

  // (H1): the free walk is irreducible on Z^2 and the mean is nonzero.
  // Reaching every cell of [-2,2]^2 from the origin certifies that the
  // semigroup generated by the support is all of Z^2.
  {
    auto seen = bfs(steps, {0, 0}, -opts.h1_window, opts.h1_window, [](Point) { return true; });
    bool reach = true;
    for (int x = -2; x <= 2 && reach; ++x)
      for (int y = -2; y <= 2 && reach; ++y) reach = seen.count({x, y}) > 0;
    rep.h1_irreducible = reach && rep.mean.norm() > 1e-14;
  }

  // (H2): reach and co-reach of an h2_window x h2_window block from (1,1)
  // by paths that never leave the quadrant.
  {
    auto keep = [&](Point z) { return z.x >= 1 && z.y >= 1 && z.x <= opts.h2_search && z.y <= opts.h2_search; };
    auto fwd = bfs(steps, {1, 1}, 1, opts.h2_search, keep);
    auto bwd = bfs(rsteps, {1, 1}, 1, opts.h2_search, keep);
    bool ok = true;
    for (int x = 1; x <= opts.h2_window && ok; ++x)
      for (int y = 1; y <= opts.h2_window && ok; ++y)
        ok = fwd.count({x, y}) > 0 && bwd.count({x, y}) > 0;
    rep.h2_killed_irreducible = ok;
  }

  // (H4): each coordinate walk generates Z and has return-time gcd 1.
  {
    Vec2 zero = Vec2::Zero();
    for (int axis = 0; axis < 2; ++axis) {
      auto nu = mu.twisted_marginal(zero, axis);
      int dg = 0;
      for (const auto& [j, p] : nu)
        if (j != 0) dg = std::gcd(dg, std::abs(j));
      bool ap = (dg == 1) && (return_gcd_1d(nu, std::max(16, opts.k_max)) == 1);
      if (axis == 0)
        rep.h4_coordinates_aperiodic.first = ap;
      else
        rep.h4_coordinates_aperiodic.second = ap;
    }
  }

  if (rep.h1_irreducible) rep.period_2d = period2d(mu, opts.k_max);
  return rep;
}

}  // namespace quadwalk
