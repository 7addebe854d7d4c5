#pragma once

#include <map>

#include "quadwalk/geometry.hpp"
#include "quadwalk/green.hpp"

namespace quadwalk {

/// Exit weights of a killed walk under an exponential twist:
/// weight(w) = E_z(e^{a.(w - z)}; S(tau) = w, tau < infinity), per exit
/// point and tau class, with explicit bookkeeping of what the truncation
/// lost (leaks) and what the substochastic deficit killed (survival_mass).
struct ExitDistribution {
  Point source;
  WalkKind kind = WalkKind::Quadrant;
  Vec2 twist = Vec2::Zero();

  struct Entry {
    Point w;
    TauClass cls;
    double weight;
  };
  std::vector<Entry> weights;
  std::vector<std::pair<Point, double>> leaks;  // in-domain points just off the box
  double survival_mass = 0.0;                   // killed by the per-step deficit 1 - phi(a)
  double truncation_leak = 0.0;                 // sum of leak weights
  bool leak_warning = false;

  double total_mass() const;
};

struct BoundaryOptions {
  double leak_tol = 1e-7;
};

ExitDistribution exit_distribution(const JumpMeasure& mu, WalkKind kind, const Vec2& a, Point z,
                                   Box box, const BoundaryOptions& opts = {});

struct WeightFn {
  enum Kind { One, S1, S2, AbsS2, ExpExtra } kind = One;
  double delta = 0.0;  // used by ExpExtra: f(w) = e^{delta * w2}
  static WeightFn one() { return {One, 0.0}; }
  static WeightFn s1() { return {S1, 0.0}; }
  static WeightFn s2() { return {S2, 0.0}; }
  static WeightFn abs_s2() { return {AbsS2, 0.0}; }
  static WeightFn exp_extra(double d) { return {ExpExtra, d}; }
};

enum class ExitEvent { TauLtInf, Tau1BeforeTau2, Tau2BeforeTau1 };

/// E_z(f(S(tau)) e^{a.S(tau)}; event), reassembled from the exit weights.
double boundary_expectation(const ExitDistribution& exit, WeightFn f, ExitEvent event);

enum class HBranch { Critical10, Critical01, Interior };

/// A harmonic function of the killed walk over a window, assembled from the
/// boundary functional of the matching branch. `values` come from the
/// hard-zero far-side closure; `bracket` is the gap to the capped closure.
class HarmonicFunction {
 public:
  SpectralPoint spectral;
  HBranch branch = HBranch::Interior;
  WalkKind domain_kind = WalkKind::Quadrant;
  Box window;
  Box solve_box;  // final box after automatic margin growth
  double bracket_width = 0.0;
  bool bracket_warning = false;

  /// h(z): stored inside the window, exactly 0 outside the domain,
  /// error otherwise.
  double value(Point z) const;
  double bracket_at(Point z) const;

  // filled by h_function / h1_function
  Box rect;  // window clamped to the domain; storage rectangle
  Eigen::VectorXd h0, hcap;

 private:
  int idx(Point z) const;
};

struct HOptions {
  double bracket_tol = 1e-7;
  int base_margin = 40;
  int max_rounds = 6;
  double growth = 1.6;
};

/// h_a for a = a(q): interior branch e^{a.z} - E_z(e^{a.S(tau)}; tau<inf);
/// critical branches use the coordinate-weighted functionals of the
/// matching axis. Margins grow automatically until the far-side closure
/// bracket is below tolerance (warning if the round budget runs out).
HarmonicFunction h_function(const JumpMeasure& mu, const Vec2& q, Box window,
                            const HOptions& opts = {});

/// The half-plane function x2 e^{a.z} - E_z(S2(tau2) e^{a.S(tau2)}; tau2<inf)
/// on Z x N*, with a = a(1,0).
HarmonicFunction h1_function(const JumpMeasure& mu, Box window, const HOptions& opts = {});

/// | sum_w mu(w) h(z+w) - h(z) | with h = 0 outside the domain; z's stencil
/// must stay inside the trusted window.
double harmonicity_residual(const HarmonicFunction& h, const JumpMeasure& mu, Point z);

/// E_{(0,k)}(e^{a.(S(tau_hat) - (0,k))}; tau_hat < tau2) for a = a(1,0):
/// the twisted second-coordinate walk from k hits exactly k+1 before <= 0.
/// Strip truncated at k+1+strip_delta with a re-solve at twice that.
struct LevelHittingProfile {
  std::vector<double> values;
  bool stability_warning = false;
};
LevelHittingProfile level_hitting_profile(const JumpMeasure& mu, const std::vector<int>& k_list,
                                int strip_delta = 60);

/// delta = half the critical ordinate gap and the boundary point hat_a with
/// hat_a2 = a(1,0)_2 + delta, hat_a1 < a(1,0)_1, used in the tail envelope
/// E_z(e^{a(1,0).S(tau) + delta S2(tau)}; tau1 < tau2) <= e^{hat_a . z}.
struct CriticalTailEnvelope {
  double delta = 0.0;
  Vec2 hat_a = Vec2::Zero();
};
CriticalTailEnvelope critical_tail_envelope(const JumpMeasure& mu);

/// Positive root of E e^{-theta xi} = 1 for a 1D step law with positive
/// drift (the Lundberg down-crossing exponent); 0 when none exists.
double ruin_exponent_down(const std::map<int, double>& nu);

}  // namespace quadwalk
