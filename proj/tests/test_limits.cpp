#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "quadwalk/limits.hpp"

using namespace quadwalk;
using testing::m1;
using testing::m2;

TEST_CASE("ray projection rounds and clamps") {
  RaySpec ray{Vec2(1, 0), {20}};
  CHECK(ray.project(20) == Point{20, 1});
  RaySpec diag{Vec2(1, 1), {20}};
  CHECK(diag.project(20) == Point{14, 14});
}

TEST_CASE("theorem1 driver basics") {
  RaySpec ray{Vec2(1, 1), {10, 15, 20}};
  auto reps = martin_kernel_convergence(m1(), ray, {{2, 3}, {1, 1}}, {1, 1}, 0.2);
  REQUIRE(reps.size() == 2);
  for (const auto& r : reps) {
    REQUIRE(r.rows.size() == 3);
    for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].radius > r.rows[i - 1].radius);
    for (const auto& row : r.rows) CHECK(std::isfinite(row.relative_gap));
  }
  // z = z0: observed and target are exactly one at every radius
  for (const auto& row : reps[1].rows) {
    CHECK(row.observed == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(row.target == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("ney-spitzer on the drift ray has unit target") {
  RaySpec ray{mean(m1()).normalized(), {10, 20, 30}};
  auto reps = ney_spitzer_check(m1(), ray, {{2, 3}}, {0, 0}, 0.2);
  for (const auto& row : reps[0].rows) CHECK(row.target == doctest::Approx(1.0));
  CHECK(reps[0].rows.back().relative_gap < 0.1);
}

TEST_CASE("log-asymptotics targets come from the geometry rate") {
  RaySpec ray{Vec2(1, 0), {20, 30, 40}};
  LogRateReport rep = log_asymptotics(m1(), WalkKind::Free, ray, {1, 1}, 0.2);
  double rate = a_of_q(m1(), Vec2(1, 0)).a.dot(Vec2(1, 0));
  for (const auto& row : rep.raw.rows) CHECK(row.target == doctest::Approx(rate).epsilon(1e-12));
  CHECK(rep.pair_slopes.size() == 2);
  CHECK(std::isfinite(rep.richardson3));
  CHECK(rep.rich_gap < 0.1);
}

TEST_CASE("log rate on the drift ray tends to zero from above") {
  RaySpec ray{Vec2(1, 1).normalized(), {15, 25, 40}};
  LogRateReport rep = log_asymptotics(m1(), WalkKind::Quadrant, ray, {2, 2}, 1.0);
  for (const auto& row : rep.raw.rows) {
    CHECK(std::abs(row.target) < 1e-12);  // a(q).q vanishes on the drift ray
    CHECK(row.observed > 0.0);
  }
  for (std::size_t i = 1; i < rep.raw.rows.size(); ++i)
    CHECK(rep.raw.rows[i].observed < rep.raw.rows[i - 1].observed);
}

TEST_CASE("log-domain fallback reproduces the raw route") {
  RaySpec ray{Vec2(1, 0), {15, 20, 25}};
  LimitsOptions raw_opts;
  LimitsOptions log_opts;
  log_opts.force_log_domain = true;

  auto raw = martin_kernel_convergence(m1(), ray, {{2, 3}}, {1, 1}, 0.5, raw_opts);
  auto vialog = martin_kernel_convergence(m1(), ray, {{2, 3}}, {1, 1}, 0.5, log_opts);
  CHECK(vialog[0].used_log_domain);
  for (std::size_t i = 0; i < raw[0].rows.size(); ++i)
    CHECK(vialog[0].rows[i].observed == doctest::Approx(raw[0].rows[i].observed).epsilon(1e-9));

  auto raw_ns = ney_spitzer_check(m1(), ray, {{0, 3}}, {0, 0}, 0.5, raw_opts);
  auto log_ns = ney_spitzer_check(m1(), ray, {{0, 3}}, {0, 0}, 0.5, log_opts);
  for (std::size_t i = 0; i < raw_ns[0].rows.size(); ++i)
    CHECK(log_ns[0].rows[i].observed == doctest::Approx(raw_ns[0].rows[i].observed).epsilon(1e-9));

  LogRateReport raw_lr = log_asymptotics(m1(), WalkKind::Quadrant, ray, {1, 1}, 0.9, raw_opts);
  LogRateReport log_lr = log_asymptotics(m1(), WalkKind::Quadrant, ray, {1, 1}, 0.9, log_opts);
  for (std::size_t i = 0; i < raw_lr.raw.rows.size(); ++i)
    CHECK(log_lr.raw.rows[i].observed ==
          doctest::Approx(raw_lr.raw.rows[i].observed).epsilon(1e-9));
}

TEST_CASE("ratio limit check") {
  RaySpec ray{Vec2(1, 0), {20, 30}};
  // w = 0 gives exactly one at every radius
  auto rep0 = ratio_limit_check(m1(), WalkKind::Free, ray, {1, 1}, {0, 0}, 0.1);
  for (const auto& row : rep0.rows) CHECK(row.observed == doctest::Approx(1.0).epsilon(1e-14));

  // M1 has period 2: odd displacements are rejected
  CHECK_THROWS_AS(ratio_limit_check(m1(), WalkKind::Free, ray, {1, 1}, {1, 0}, 0.1), Error);
  CHECK_THROWS_AS(ratio_limit_check(m1(), WalkKind::HalfPlane1, ray, {1, 1}, {2, 2}, 0.1), Error);

  // reciprocal consistency: the product of the w and -w observations from
  // shifted bases is exactly one
  auto fwd = ratio_limit_check(m1(), WalkKind::Free, ray, {1, 1}, {2, 0}, 0.1);
  auto bwd = ratio_limit_check(m1(), WalkKind::Free, ray, {3, 1}, {-2, 0}, 0.1);
  for (std::size_t i = 0; i < fwd.rows.size(); ++i)
    CHECK(fwd.rows[i].observed * bwd.rows[i].observed == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("half-plane return gcd equals the period") {
  CHECK(halfplane_return_gcd(m1(), 12) == 2);
  CHECK(halfplane_return_gcd(m2(), 12) == 1);
  CHECK(halfplane_return_gcd(m1(), 12) == period2d(m1(), 12));
  CHECK(halfplane_return_gcd(m2(), 12) == period2d(m2(), 12));
}

TEST_CASE("xi decomposition") {
  XiRecord interior = xi_decomposition(m1(), Vec2(1, 1), 0.3, {2, 2}, 40);
  CHECK(interior.ratio == doctest::Approx(1.0).epsilon(0.05));
  CHECK(interior.g_plus > 0.0);
  CHECK(interior.xi > 0.0);

  XiRecord critical = xi_decomposition(m1(), Vec2(1, 0), 0.3, {2, 2}, 40);
  CHECK(critical.ratio == doctest::Approx(1.0).epsilon(0.1));

  // the other critical branch goes through the lower half-plane walk; by
  // swap symmetry of M1 it mirrors the first one
  XiRecord critical01 = xi_decomposition(m1(), Vec2(0, 1), 0.3, {2, 2}, 40);
  CHECK(critical01.ratio == doctest::Approx(critical.ratio).epsilon(1e-9));

  // nearly-complete trimming still yields a well-defined record
  XiRecord wide = xi_decomposition(m1(), Vec2(1, 1), 0.999, {2, 2}, 20);
  CHECK(std::isfinite(wide.ratio));
  CHECK(wide.ratio == doctest::Approx(1.0).epsilon(0.2));

  CHECK_THROWS_AS(xi_decomposition(m1(), Vec2(1, 1), 1.5, {2, 2}, 20), Error);
}

TEST_CASE("uniform bound scan") {
  RaySpec ray{Vec2(1, 0), {30, 40}};
  for (WalkKind kind : {WalkKind::Free, WalkKind::HalfPlane1}) {
    BoundScan b = uniform_bound_scan(m1(), kind, ray, 0.05);
    CHECK(std::isfinite(b.c_upper));
    CHECK(b.stable);
  }
  // the two-sided bracket through 1 is guaranteed at the origin-offset base,
  // i.e. for the free scan
  BoundScan f = uniform_bound_scan(m1(), WalkKind::Free, ray, 0.05);
  CHECK(f.bracket_ok);
  CHECK(f.c_lower <= 1.0);
  CHECK(f.c_upper >= 1.0);
  CHECK_THROWS_AS(uniform_bound_scan(m1(), WalkKind::Free, ray, 0.0), Error);
}

TEST_CASE("critical-direction target assembled through the half-plane function") {
  // ratio target via h, recomputed via h1 and the exit correction
  HarmonicFunction hc = h_function(m1(), Vec2(1, 0), {1, 4, 1, 4});
  Box window{-30, 10, 1, 60};
  HarmonicFunction h1 = h1_function(m1(), window);
  auto assembled = [&](Point z) {
    ExitDistribution e =
        exit_distribution(m1(), WalkKind::Quadrant, Vec2(0, 0), z, {1, 100, 1, 100});
    double corr = 0.0;
    for (const auto& en : e.weights)
      if (en.cls == TauClass::Tau1BeforeTau2 && window.contains(en.w))
        corr += en.weight * h1.value(en.w);
    return h1.value(z) - corr;
  };
  Point z{2, 3}, z0{1, 1};
  double t_h = hc.value(z) / hc.value(z0);
  double t_s8 = assembled(z) / assembled(z0);
  CHECK(std::abs(t_h - t_s8) <= 1e-6);
}
