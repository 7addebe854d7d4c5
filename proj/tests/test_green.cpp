#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "quadwalk/geometry.hpp"
#include "quadwalk/green.hpp"

using namespace quadwalk;
using testing::m1;
using testing::m2;
using testing::series_green;

TEST_CASE("green column equals the truncated series (oracle)") {
  auto rng = stream_rng(2026, 0);
  struct Case {
    JumpMeasure mu;
    WalkKind kind;
    Vec2 a;
  };
  SpectralPoint sp1 = a_of_q(m1(), Vec2(1, 0));
  std::vector<Case> cases{{m1(), WalkKind::Free, Vec2(0, 0)},
                          {m1(), WalkKind::Quadrant, Vec2(0, 0)},
                          {m1(), WalkKind::HalfPlane1, Vec2(0, 0)},
                          {m1(), WalkKind::Free, sp1.a},
                          {m1(), WalkKind::Quadrant, 0.5 * sp1.a},
                          {m2(), WalkKind::Free, Vec2(0, 0)},
                          {m2(), WalkKind::Quadrant, Vec2(0, 0)},
                          {m2(), WalkKind::HalfPlane1, a_of_q(m2(), Vec2(1, 0)).a},
                          {m2(), WalkKind::Quadrant, Vec2(-0.2, -0.1)},
                          {m1(), WalkKind::HalfPlane2, Vec2(0, 0)}};
  for (const auto& c : cases) {
    Box box{-20, 20, -20, 20};
    GreenEngine eng(c.mu, c.kind, c.a, box);
    const Box& r = eng.rect();
    auto rand_in = [&]() -> Point {
      int x = r.x0 + static_cast<int>(uniform01(rng) * (r.x1 - r.x0));
      int y = r.y0 + static_cast<int>(uniform01(rng) * (r.y1 - r.y0));
      return {x, y};
    };
    Point target = rand_in();
    Point z = rand_in();
    Eigen::VectorXd g = eng.column(target);
    auto oracle = series_green(c.mu, c.kind, c.a, z, target, box, 300);
    double gzz = g[eng.index(target)];
    double tail_bound = oracle.alive_mass * gzz + 1e-9;
    CHECK(std::abs(g[eng.index(z)] - oracle.value) <= tail_bound);
    CHECK(gzz >= 1.0);  // t = 0 term
  }
}

TEST_CASE("linear-system residual of every column is at most 1e-11") {
  GreenEngine eng(m1(), WalkKind::Quadrant, Vec2(0, 0), {1, 50, 1, 50});
  for (Point t : std::vector<Point>{{3, 3}, {20, 20}, {49, 1}}) {
    Eigen::VectorXd g = eng.column(t);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(eng.node_count());
    b[eng.index(t)] = 1.0;
    CHECK(eng.residual_inf(g, b) <= 1e-11);
    for (int i = 0; i < eng.node_count(); ++i) CHECK(g[i] >= -1e-14);
  }
}

TEST_CASE("domain monotonicity: more killing, smaller Green values") {
  Box box{-30, 40, -30, 40};
  Point target{8, 8};
  GreenEngine f(m1(), WalkKind::Free, Vec2(0, 0), box);
  GreenEngine h(m1(), WalkKind::HalfPlane1, Vec2(0, 0), box);
  GreenEngine q(m1(), WalkKind::Quadrant, Vec2(0, 0), box);
  Eigen::VectorXd gf = f.column(target), gh = h.column(target), gq = q.column(target);
  for (Point z : std::vector<Point>{{1, 1}, {2, 7}, {10, 3}, {8, 8}, {20, 20}}) {
    CHECK(gq[q.index(z)] <= gh[h.index(z)] + 1e-13);
    CHECK(gh[h.index(z)] <= gf[f.index(z)] + 1e-13);
  }
}

TEST_CASE("far side behind the drift is nearly unreachable") {
  GreenEngine q(m1(), WalkKind::Quadrant, Vec2(0, 0), {1, 60, 1, 60});
  Eigen::VectorXd g = q.column({3, 3});
  CHECK(g[q.index({50, 50})] < 1e-6);
  CHECK(g[q.index({50, 50})] < g[q.index({1, 1})]);
}

TEST_CASE("green_column reports a truncation estimate") {
  GreenOptions opts;
  opts.error_margin = 20;
  GreenColumn col = green_column(m1(), WalkKind::Quadrant, Vec2(0, 0), {10, 10}, {1, 30, 1, 30}, opts);
  CHECK(col.truncation_error >= 0.0);
  CHECK_FALSE(col.truncation_warning);
  GreenColumn big =
      green_column(m1(), WalkKind::Quadrant, Vec2(0, 0), {10, 10}, {1, 50, 1, 50}, opts);
  for (Point z : std::vector<Point>{{1, 1}, {10, 10}, {25, 3}})
    CHECK(std::abs(col.value(z) - big.value(z)) <=
          col.truncation_error + big.truncation_error + 1e-12);
}

TEST_CASE("martin kernel") {
  GreenColumn col = green_column(m1(), WalkKind::Free, Vec2(0, 0), {21, 21}, {-20, 40, -20, 40});
  CHECK(martin_kernel(col, {2, 1}, {2, 1}) == 1.0);
  // on the drift ray a(q) = 0, so the kernel tends to 1
  CHECK(std::abs(martin_kernel(col, {2, 1}, {1, 1}) - 1.0) < 0.1);

  GreenColumn tiny;
  tiny.rect = {0, 0, 0, 1};
  tiny.values = Eigen::VectorXd(2);
  tiny.values << 1.0, 1e-310;
  CHECK_THROWS_AS(martin_kernel(tiny, {0, 0}, {0, 1}), Error);
}

TEST_CASE("free-walk Martin kernel near a boundary direction at radius 60") {
  Vec2 a = a_of_q(m1(), Vec2(1, 0)).a;
  GreenColumn col =
      green_column(m1(), WalkKind::Free, Vec2(0, 0), {60, 1}, {-40, 100, -40, 44}, {});
  double k = martin_kernel(col, {2, 1}, {1, 1});
  double target = std::exp(a.dot(Vec2(1, 0)));
  CHECK(std::abs(k / target - 1.0) <= 0.05);
}

TEST_CASE("twist identity residual") {
  SpectralPoint sp1 = a_of_q(m1(), Vec2(1, 0));
  CHECK(check_twist_identity(m1(), WalkKind::Free, sp1.a, {-20, 20, -20, 20}, 50, 1) <= 1e-9);
  CHECK(check_twist_identity(m1(), WalkKind::Free, Vec2(0, 0), {-15, 15, -15, 15}, 10, 2) <=
        1e-15);
  SpectralPoint sp2 = a_of_q(m2(), Vec2(1, 0));
  CHECK(check_twist_identity(m2(), WalkKind::HalfPlane1, sp2.a, {-20, 20, -20, 20}, 50, 3) <=
        1e-9);
}

TEST_CASE("engine and column input validation") {
  CHECK_THROWS_AS(green_column(m1(), WalkKind::Quadrant, Vec2(0, 0), {0, 3}, {1, 20, 1, 20}),
                  Error);  // target outside the domain
  CHECK_THROWS_AS(green_column(m1(), WalkKind::Quadrant, Vec2(0, 0), {5, 5}, {1, 3, 1, 3}),
                  Error);  // target outside the box
  CHECK_THROWS_AS(GreenEngine(m1(), WalkKind::Quadrant, Vec2(0, 0), {-10, -5, -10, -5}), Error);
  CHECK_THROWS_AS(GreenEngine(m1(), WalkKind::Free, Vec2(1, 1), {-5, 5, -5, 5}), Error);
}

TEST_CASE("renewal equations") {
  Box box{-40, 80, -40, 80};
  CHECK(check_renewal(m1(), RenewalVariant::QuadrantVsFree, {2, 2}, {10, 10}, box) <= 1e-7);
  CHECK(check_renewal(m1(), RenewalVariant::QuadrantVsFree, {1, 1}, {10, 10}, box) <= 1e-7);
  CHECK(check_renewal(m1(), RenewalVariant::QuadrantVsHalfPlane1, {2, 3}, {25, 2}, box) <= 1e-7);
  CHECK(check_renewal(m2(), RenewalVariant::QuadrantVsHalfPlane1, {2, 3}, {25, 2}, box) <= 1e-7);
}
