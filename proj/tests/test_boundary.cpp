#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "quadwalk/boundary.hpp"
#include "quadwalk/limits.hpp"

using namespace quadwalk;
using testing::m1;
using testing::m2;

namespace {

// For M1 the two coordinate jump chains are independent, so the interior
// harmonic function factorizes: h(x,y) = (1 - (3/7)^x)(1 - (3/7)^y).
double m1_h_interior_closed_form(Point z) {
  double r = 3.0 / 7.0;
  return (1.0 - std::pow(r, z.x)) * (1.0 - std::pow(r, z.y));
}

}  // namespace

TEST_CASE("exit distribution mass accounting") {
  // stochastic twist: no killing, mass + leak = 1
  ExitDistribution e0 = exit_distribution(m1(), WalkKind::Quadrant, Vec2(0, 0), {1, 1},
                                          {1, 120, 1, 120});
  CHECK(std::abs(e0.total_mass() + e0.survival_mass + e0.truncation_leak - 1.0) <= 1e-10);
  CHECK(e0.survival_mass <= 1e-12);

  // substochastic twist: the deficit shows up as survival mass
  ExitDistribution es = exit_distribution(m1(), WalkKind::Quadrant, Vec2(-0.3, -0.2), {2, 2},
                                          {1, 80, 1, 80});
  CHECK(es.survival_mass > 0.1);
  CHECK(std::abs(es.total_mass() + es.survival_mass + es.truncation_leak - 1.0) <= 1e-10);

  // every exit point is outside the domain, within one stencil of it
  int ms = m1().max_step();
  for (const auto& en : e0.weights) {
    CHECK_FALSE(in_domain(WalkKind::Quadrant, en.w));
    CHECK(en.w.x >= 1 - ms);
    CHECK(en.w.y >= 1 - ms);
  }
}

TEST_CASE("untwisted exit mass from the corner is strictly below one") {
  ExitDistribution e = exit_distribution(m1(), WalkKind::Quadrant, Vec2(0, 0), {1, 1},
                                         {1, 150, 1, 150});
  // closed form: 1 - 16/49 by independence of the coordinate chains
  CHECK(e.total_mass() == doctest::Approx(33.0 / 49.0).epsilon(1e-8));
  CHECK(e.total_mass() < 1.0);
}

TEST_CASE("one-step decomposition term of an exit weight") {
  SpectralPoint sp = a_of_q(m1(), Vec2(1, 0));
  Box box{1, 100, 1, 100};
  ExitDistribution e = exit_distribution(m1(), WalkKind::Quadrant, sp.a, {1, 1}, box);
  // only (1,1) steps to (0,1) for M1, so the weight equals
  // G^a((1,1),(1,1)) * mu(-1,0) e^{-a1} exactly
  GreenEngine eng(m1(), WalkKind::Quadrant, sp.a, box);
  double visits_11 = eng.column({1, 1})[eng.index({1, 1})];
  double expect = visits_11 * 0.15 * std::exp(-sp.a.x());
  double got = 0.0;
  for (const auto& en : e.weights)
    if (en.w == Point{0, 1}) got = en.weight;
  CHECK(got == doctest::Approx(expect).epsilon(1e-10));
  CHECK(got >= 0.15 * std::exp(-sp.a.x()));
}

TEST_CASE("boundary expectations: signs, envelope, decay") {
  SpectralPoint sp = a_of_q(m1(), Vec2(1, 0));
  CriticalTailEnvelope env = critical_tail_envelope(m1());
  CHECK(env.delta == doctest::Approx(0.29740655833993468).epsilon(1e-9));

  // closed form for hat_a: phi(x, a2' + delta) = 1 is a quadratic in e^x
  {
    double c = 1.0 - 0.35 * std::exp(sp.a.y() + env.delta) - 0.15 * std::exp(-(sp.a.y() + env.delta));
    double disc = std::sqrt(c * c - 4.0 * 0.35 * 0.15);
    double root = (c - disc) / (2.0 * 0.35);  // left root of the pair, still > min point
    // the right intersection below a(1,0) is the larger root
    double root_hi = (c + disc) / (2.0 * 0.35);
    CHECK(env.hat_a.x() == doctest::Approx(std::log(root_hi)).epsilon(1e-9));
    CHECK(std::log(root) < env.hat_a.x());
    CHECK(env.hat_a.x() < sp.a.x());
  }

  double prev = 1e300;
  for (int x1 : {10, 20, 40}) {
    Point z{x1, 1};
    ExitDistribution e = exit_distribution(m1(), WalkKind::Quadrant, sp.a, z, {1, 140, 1, 100});
    // tau2 exits land exactly on the axis for M1, so S2 weights vanish there
    CHECK(std::abs(boundary_expectation(e, WeightFn::s2(), ExitEvent::Tau2BeforeTau1)) <= 1e-12);
    CHECK(boundary_expectation(e, WeightFn::abs_s2(), ExitEvent::Tau2BeforeTau1) <= 1e-12);

    double s2_tau1 = boundary_expectation(e, WeightFn::s2(), ExitEvent::Tau1BeforeTau2);
    CHECK(s2_tau1 >= 0.0);
    CHECK(s2_tau1 < prev);
    prev = s2_tau1;
    // tail bound through the critical envelope delta and hat_a
    double lhs = boundary_expectation(e, WeightFn::exp_extra(env.delta), ExitEvent::Tau1BeforeTau2);
    CHECK(lhs <= std::exp(env.hat_a.dot(Vec2(z.x, z.y))));
    CHECK(s2_tau1 <= lhs / env.delta);
  }
}

TEST_CASE("critical twist: exit mass plus leak brackets the almost-sure limit") {
  // E_z(e^{a.(S(tau)-z)}; tau < inf) = 1 at a critical twist (exit is a.s.).
  // The hard-zero truncation splits that unit of mass between in-box exits
  // and the diffusive leak; what the solve cannot account for stays tiny.
  SpectralPoint sp = a_of_q(m1(), Vec2(1, 0));
  ExitDistribution e =
      exit_distribution(m1(), WalkKind::Quadrant, sp.a, {3, 3}, {1, 300, 1, 300});
  CHECK(e.total_mass() <= 1.0 + 1e-10);
  CHECK(e.total_mass() + e.truncation_leak >= 1.0 - 1e-6);
  CHECK(e.survival_mass <= 1e-6);
  // in h-units the bracket pins E_z(e^{a.S(tau)}; tau<inf) around e^{a.z}
  double lo = boundary_expectation(e, WeightFn::one(), ExitEvent::TauLtInf);
  double target = std::exp(sp.a.dot(Vec2(3, 3)));
  CHECK(lo <= target * (1.0 + 1e-10));
  CHECK(lo + e.truncation_leak * target >= target * (1.0 - 1e-6));
}

TEST_CASE("boundary expectation stable under box doubling") {
  SpectralPoint sp = a_of_q(m1(), Vec2(1, 0));
  Point z{5, 5};
  ExitDistribution a = exit_distribution(m1(), WalkKind::Quadrant, sp.a, z, {1, 120, 1, 120});
  ExitDistribution b = exit_distribution(m1(), WalkKind::Quadrant, sp.a, z, {1, 240, 1, 240});
  for (auto f : {WeightFn::s2(), WeightFn::one()}) {
    double va = boundary_expectation(a, f, ExitEvent::Tau1BeforeTau2);
    double vb = boundary_expectation(b, f, ExitEvent::Tau1BeforeTau2);
    CHECK(std::abs(va - vb) <= 1e-7);
  }
}

TEST_CASE("interior harmonic function against the M1 closed form") {
  HarmonicFunction h = h_function(m1(), Vec2(1, 1).normalized(), {1, 8, 1, 8});
  CHECK(h.branch == HBranch::Interior);
  CHECK_FALSE(h.bracket_warning);
  CHECK(h.bracket_width <= 1e-7);
  for (Point z : std::vector<Point>{{1, 1}, {2, 3}, {4, 1}, {3, 3}, {8, 8}})
    CHECK(h.value(z) == doctest::Approx(m1_h_interior_closed_form(z)).epsilon(5e-7));
  CHECK(h.value({0, 5}) == 0.0);
  CHECK(h.value({5, 0}) == 0.0);
  CHECK(h.value({-2, 3}) == 0.0);
  for (Point z : std::vector<Point>{{2, 2}, {5, 5}, {7, 3}})
    CHECK(harmonicity_residual(h, m1(), z) <= 1e-7);
  CHECK_THROWS_AS(harmonicity_residual(h, m1(), {8, 8}), Error);  // stencil leaves the window
}

TEST_CASE("critical harmonic function (frozen regression values)") {
  HarmonicFunction h = h_function(m1(), Vec2(1, 0), {1, 12, 1, 12});
  CHECK(h.branch == HBranch::Critical10);
  CHECK_FALSE(h.bracket_warning);
  CHECK(h.value({1, 1}) == doctest::Approx(0.5404399277281372).epsilon(1e-7));
  CHECK(h.value({2, 3}) == doctest::Approx(1.07551557547006).epsilon(1e-7));
  CHECK(h.value({4, 1}) == doctest::Approx(1.2871009762241792).epsilon(1e-7));
  CHECK(h.value({3, 3}) == doctest::Approx(1.3669277758655334).epsilon(1e-7));
  for (Point z : std::vector<Point>{{2, 2}, {5, 5}, {10, 3}})
    CHECK(harmonicity_residual(h, m1(), z) <= 1e-7);
  for (int x = 1; x <= 12; ++x)
    for (int y = 1; y <= 12; ++y) CHECK(h.value({x, y}) > 0.0);
}

TEST_CASE("normalized critical values approach the transverse coordinate") {
  HarmonicFunction h = h_function(m1(), Vec2(1, 0), {1, 40, 1, 4});
  CriticalTailEnvelope env = critical_tail_envelope(m1());
  double prev_gap = 1e300;
  for (int x1 : {10, 20, 40}) {
    Point z{x1, 1};
    double normalized = h.value(z) * std::exp(-h.spectral.a.dot(Vec2(z.x, z.y)));
    double gap = std::abs(normalized - 1.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
    // the defect is controlled by the critical-twist envelope
    double bound = (1.0 / env.delta) * std::exp((env.hat_a - h.spectral.a).dot(Vec2(z.x, z.y)));
    CHECK(gap <= bound + 1e-12);
  }
}

TEST_CASE("swap symmetry of h for the swap-invariant M1") {
  HarmonicFunction ha = h_function(m1(), Vec2(2, 1).normalized(), {1, 6, 1, 6});
  HarmonicFunction hb = h_function(m1(), Vec2(1, 2).normalized(), {1, 6, 1, 6});
  for (int x = 1; x <= 6; ++x)
    for (int y = 1; y <= 6; ++y)
      CHECK(ha.value({x, y}) == doctest::Approx(hb.value({y, x})).epsilon(1e-8));
}

TEST_CASE("half-plane function h1 and the exit-splitting identity") {
  // the window's y-range covers every tau1 exit point of the quadrant box
  // below, so no exit weight is dropped in the identity check
  Box window{-10, 12, 1, 121};
  HarmonicFunction h1 = h1_function(m1(), window);
  CHECK(h1.domain_kind == WalkKind::HalfPlane1);
  CHECK_FALSE(h1.bracket_warning);
  const Vec2 a = h1.spectral.a;

  // M1 has no downward overshoot, so h1(z) = x2 e^{a.z} exactly
  for (Point z : std::vector<Point>{{-5, 2}, {0, 1}, {3, 7}, {10, 40}}) {
    double expect = z.y * std::exp(a.dot(Vec2(z.x, z.y)));
    CHECK(h1.value(z) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(h1.value(z) > 0.0);
  }
  CHECK(h1.value({3, 0}) == 0.0);
  CHECK(h1.value({3, -2}) == 0.0);
  for (Point z : std::vector<Point>{{-5, 3}, {0, 5}, {8, 2}})
    CHECK(harmonicity_residual(h1, m1(), z) <= 1e-7);

  // h1(z) - E_z(h1(S(tau)); tau = tau1 < tau2) = h_{a(1,0)}(z)
  HarmonicFunction hc = h_function(m1(), Vec2(1, 0), {1, 10, 1, 10});
  for (int x = 1; x <= 10; ++x) {
    for (int y = 1; y <= 10; ++y) {
      Point z{x, y};
      ExitDistribution e =
          exit_distribution(m1(), WalkKind::Quadrant, Vec2(0, 0), z, {1, 120, 1, 120});
      double corr = 0.0, dropped = 0.0;
      for (const auto& en : e.weights) {
        if (en.cls != TauClass::Tau1BeforeTau2) continue;
        if (window.contains(en.w))
          corr += en.weight * h1.value(en.w);
        else
          dropped += en.weight;
      }
      CHECK(dropped == 0.0);
      CHECK(std::abs(h1.value(z) - corr - hc.value(z)) <= 1e-7);
    }
  }
}

TEST_CASE("level-hitting profile matches the gambler's-ruin closed form for M1") {
  std::vector<int> ks{1, 2, 4, 8, 16, 32, 64};
  LevelHittingProfile prof = level_hitting_profile(m1(), ks);
  CHECK_FALSE(prof.stability_warning);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    // symmetric +-1 twisted marginal: hit k+1 before 0 from k is k/(k+1)
    CHECK(prof.values[i] == doctest::Approx(ks[i] / (ks[i] + 1.0)).epsilon(1e-12));
    if (i > 0) CHECK(prof.values[i] >= prof.values[i - 1]);
  }
  CHECK(prof.values.back() >= 0.98);

  LevelHittingProfile p2 = level_hitting_profile(m2(), {1, 2, 4, 8, 16});
  for (std::size_t i = 1; i < p2.values.size(); ++i)
    CHECK(p2.values[i] >= p2.values[i - 1] - 1e-12);
  CHECK_FALSE(p2.stability_warning);
}

TEST_CASE("exit distribution input validation") {
  CHECK_THROWS_AS(exit_distribution(m1(), WalkKind::Free, Vec2(0, 0), {1, 1}, {1, 50, 1, 50}),
                  Error);
  CHECK_THROWS_AS(exit_distribution(m1(), WalkKind::Quadrant, Vec2(0, 0), {0, 1}, {1, 50, 1, 50}),
                  Error);
  CHECK_THROWS_AS(h_function(m1(), Vec2(-1, 0.2), {1, 6, 1, 6}), Error);
}

TEST_CASE("a tight box flags the truncation leak") {
  // critical twist from deep inside a tiny box: much of the mass leaves
  // through the artificial sides
  SpectralPoint sp = a_of_q(m1(), Vec2(1, 0));
  BoundaryOptions opts;
  opts.leak_tol = 1e-7;
  ExitDistribution e = exit_distribution(m1(), WalkKind::Quadrant, sp.a, {10, 10},
                                         {1, 20, 1, 20}, opts);
  CHECK(e.leak_warning);
  CHECK(e.truncation_leak > 0.1);
  CHECK(std::abs(e.total_mass() + e.survival_mass + e.truncation_leak - 1.0) <= 1e-10);
}
