#include "quadwalk/boundary.hpp"

#include <cmath>
#include <sstream>

namespace quadwalk {

double ExitDistribution::total_mass() const {
  double s = 0.0;
  for (const auto& e : weights) s += e.weight;
  return s;
}

ExitDistribution exit_distribution(const JumpMeasure& mu, WalkKind kind, const Vec2& a, Point z,
                                   Box box, const BoundaryOptions& opts) {
  if (kind == WalkKind::Free)
    throw Error("exit_distribution: the free walk has no exit boundary");
  if (!in_domain(kind, z)) throw Error("exit_distribution: source outside the walk's domain");

  GreenEngine eng(mu, kind, a, box);
  Eigen::VectorXd n = eng.visits(z);

  ExitDistribution out;
  out.source = z;
  out.kind = kind;
  out.twist = a;

  std::map<Point, double> acc;
  for (const auto& s : eng.exit_steps()) acc[s.to] += n[s.node] * s.w;
  out.weights.reserve(acc.size());
  for (const auto& [w, weight] : acc)
    out.weights.push_back({w, classify_exit(w), weight});

  std::map<Point, double> leak;
  for (const auto& s : eng.leak_steps()) leak[s.to] += n[s.node] * s.w;
  double leak_total = 0.0;
  for (const auto& [w, weight] : leak) {
    out.leaks.push_back({w, weight});
    leak_total += weight;
  }
  out.truncation_leak = leak_total;
  out.survival_mass = (1.0 - eng.total_weight()) * n.sum();
  out.leak_warning = leak_total > opts.leak_tol;
  return out;
}

double boundary_expectation(const ExitDistribution& exit, WeightFn f, ExitEvent event) {
  auto in_event = [&](TauClass cls) {
    switch (event) {
      case ExitEvent::TauLtInf: return true;
      case ExitEvent::Tau1BeforeTau2: return cls == TauClass::Tau1BeforeTau2;
      case ExitEvent::Tau2BeforeTau1: return cls == TauClass::Tau2AtMostTau1;
    }
    return false;
  };
  auto weight_of = [&](Point w) -> double {
    switch (f.kind) {
      case WeightFn::One: return 1.0;
      case WeightFn::S1: return w.x;
      case WeightFn::S2: return w.y;
      case WeightFn::AbsS2: return std::abs(w.y);
      case WeightFn::ExpExtra: return std::exp(f.delta * w.y);
    }
    return 0.0;
  };
  double s = 0.0;
  for (const auto& e : exit.weights)
    if (in_event(e.cls)) s += weight_of(e.w) * e.weight;
  // weights carry e^{-a.z}; restore E_z(f(S(tau)) e^{a.S(tau)}; event)
  return s * std::exp(exit.twist.x() * exit.source.x + exit.twist.y() * exit.source.y);
}

double ruin_exponent_down(const std::map<int, double>& nu) {
  auto f = [&](double t) {
    double s = 0.0;
    for (const auto& [j, p] : nu) s += p * std::exp(-t * j);
    return s - 1.0;
  };
  double hi = 1.0;
  while (f(hi) < 0.0 && hi < 256.0) hi *= 2.0;
  if (f(hi) < 0.0) return 0.0;
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  double theta = 0.5 * (lo + hi);
  return theta > 1e-9 ? theta : 0.0;
}

int HarmonicFunction::idx(Point z) const {
  if (!rect.contains(z)) return -1;
  int ny = rect.y1 - rect.y0 + 1;
  return (z.x - rect.x0) * ny + (z.y - rect.y0);
}

double HarmonicFunction::value(Point z) const {
  if (!in_domain(domain_kind, z)) return 0.0;
  int i = idx(z);
  if (i < 0) {
    std::ostringstream os;
    os << "HarmonicFunction: point (" << z.x << ", " << z.y << ") outside the stored window";
    throw Error(os.str());
  }
  return h0[i];
}

double HarmonicFunction::bracket_at(Point z) const {
  if (!in_domain(domain_kind, z)) return 0.0;
  int i = idx(z);
  if (i < 0) throw Error("HarmonicFunction: point outside the stored window");
  return std::abs(h0[i] - hcap[i]);
}

namespace {

struct BranchSpec {
  HBranch branch;
  // base(z): the polynomial factor of the harmonic part (1, x2 or x1)
  std::function<double(Point)> base;
  // f(w): boundary value of the exit functional at first-step exit points
  std::function<double(Point)> f_exit;
  // cap(w): envelope for the unknown functional at far-side leak points
  std::function<double(Point)> cap;
};

BranchSpec make_branch(const JumpMeasure& mu, const SpectralPoint& sp, HBranch branch) {
  const Vec2 a = sp.a;
  double thx = ruin_exponent_down(mu.twisted_marginal(a, 0));
  double thy = ruin_exponent_down(mu.twisted_marginal(a, 1));
  BranchSpec s;
  s.branch = branch;
  switch (branch) {
    case HBranch::Interior:
      s.base = [](Point) { return 1.0; };
      s.f_exit = [](Point) { return 1.0; };
      // the twisted exit probability is bounded by per-coordinate ruin bounds
      s.cap = [thx, thy](Point w) {
        return std::min(1.0, std::exp(-thx * w.x) + std::exp(-thy * w.y));
      };
      break;
    case HBranch::Critical10: {
      // overshoot below the axis vanishes when no jump drops by more than 1
      double overshoot = mu.min_dy() >= -1 ? 0.0 : static_cast<double>(-mu.min_dy() - 1);
      double climb = a.y() < 0.0 ? -1.0 / (a.y() * std::exp(1.0)) : 1e6;
      s.base = [](Point z) { return static_cast<double>(z.y); };
      s.f_exit = [](Point w) { return static_cast<double>(w.y); };
      s.cap = [thx, overshoot, climb](Point w) {
        return (w.y + climb) * std::exp(-thx * w.x) + overshoot;
      };
      break;
    }
    case HBranch::Critical01: {
      double overshoot = mu.min_dx() >= -1 ? 0.0 : static_cast<double>(-mu.min_dx() - 1);
      double climb = a.x() < 0.0 ? -1.0 / (a.x() * std::exp(1.0)) : 1e6;
      s.base = [](Point z) { return static_cast<double>(z.x); };
      s.f_exit = [](Point w) { return static_cast<double>(w.x); };
      s.cap = [thy, overshoot, climb](Point w) {
        return (w.x + climb) * std::exp(-thy * w.y) + overshoot;
      };
      break;
    }
  }
  return s;
}

HarmonicFunction assemble_h(const JumpMeasure& mu, const SpectralPoint& sp, HBranch branch,
                            WalkKind kind, Box window, const HOptions& opts,
                            const std::function<double(Point)>& f_exit_override,
                            const std::function<double(Point)>& cap_override) {
  BranchSpec spec = make_branch(mu, sp, branch);
  const auto& f_exit = f_exit_override ? f_exit_override : spec.f_exit;
  const auto& cap = cap_override ? cap_override : spec.cap;
  const Vec2 a = sp.a;

  int mx = opts.base_margin, my = opts.base_margin;
  int mxl = opts.base_margin;  // left margin, used by half-plane domains
  HarmonicFunction h;
  h.spectral = sp;
  h.branch = branch;
  h.domain_kind = kind;
  h.window = window;

  for (int round = 0;; ++round) {
    Box solve_box{window.x0 - mxl, window.x1 + mx, window.y0 - opts.base_margin,
                  window.y1 + my};
    GreenEngine eng(mu, kind, a, solve_box);
    Eigen::VectorXd v0 = eng.value_dp(f_exit);

    // Split the capped-closure correction by wall so the growth step knows
    // which margin to push.
    Eigen::VectorXd bx = Eigen::VectorXd::Zero(eng.node_count());
    Eigen::VectorXd by = Eigen::VectorXd::Zero(eng.node_count());
    Eigen::VectorXd bl = Eigen::VectorXd::Zero(eng.node_count());
    for (const auto& s : eng.leak_steps()) {
      double c = s.w * cap(s.to);
      if (s.to.x > eng.rect().x1)
        bx[s.node] += c;
      else if (s.to.x < eng.rect().x0)
        bl[s.node] += c;
      else
        by[s.node] += c;
    }
    auto solve_or_zero = [&](const Eigen::VectorXd& b) {
      return b.cwiseAbs().maxCoeff() > 0.0 ? Eigen::VectorXd(eng.solve(b))
                                           : Eigen::VectorXd::Zero(eng.node_count());
    };
    Eigen::VectorXd dx = solve_or_zero(bx);
    Eigen::VectorXd dy = solve_or_zero(by);
    Eigen::VectorXd dl = solve_or_zero(bl);

    Box stor{std::max(window.x0, eng.rect().x0), window.x1, std::max(window.y0, eng.rect().y0),
             window.y1};
    int ny = stor.y1 - stor.y0 + 1;
    int nn = (stor.x1 - stor.x0 + 1) * ny;
    h.rect = stor;
    h.h0.resize(nn);
    h.hcap.resize(nn);
    double worst = 0.0, worst_x = 0.0, worst_y = 0.0, worst_l = 0.0;
    for (int x = stor.x0; x <= stor.x1; ++x) {
      for (int y = stor.y0; y <= stor.y1; ++y) {
        int i = eng.index({x, y});
        int j = (x - stor.x0) * ny + (y - stor.y0);
        double e = std::exp(a.x() * x + a.y() * y);
        double b = spec.base({x, y});
        h.h0[j] = e * (b - v0[i]);
        double gx = std::abs(e * dx[i]), gy = std::abs(e * dy[i]), gl = std::abs(e * dl[i]);
        h.hcap[j] = h.h0[j] - e * (dx[i] + dy[i] + dl[i]);
        worst = std::max(worst, gx + gy + gl);
        worst_x = std::max(worst_x, gx);
        worst_y = std::max(worst_y, gy);
        worst_l = std::max(worst_l, gl);
      }
    }
    h.bracket_width = worst;
    h.solve_box = solve_box;
    bool budget_spent = round >= opts.max_rounds || solve_box.area() > 2'000'000;
    if (worst <= opts.bracket_tol || budget_spent) {
      h.bracket_warning = worst > opts.bracket_tol;
      return h;
    }
    // grow the wall(s) responsible for the current bracket
    if (worst_x > 0.2 * worst) mx = static_cast<int>(mx * opts.growth) + 8;
    if (worst_y > 0.2 * worst) my = static_cast<int>(my * opts.growth) + 8;
    if (worst_l > 0.2 * worst) mxl = static_cast<int>(mxl * opts.growth) + 8;
  }
}

}  // namespace

HarmonicFunction h_function(const JumpMeasure& mu, const Vec2& q, Box window,
                            const HOptions& opts) {
  Vec2 qn = q.normalized();
  if (qn.x() < -1e-12 || qn.y() < -1e-12)
    throw Error("h_function: q must lie in the closed positive quarter circle");
  SpectralPoint sp = a_of_q(mu, qn);
  HBranch branch;
  switch (classify_direction(qn)) {
    case DirectionClass::Critical10: branch = HBranch::Critical10; break;
    case DirectionClass::Critical01: branch = HBranch::Critical01; break;
    default: branch = HBranch::Interior; break;
  }
  return assemble_h(mu, sp, branch, WalkKind::Quadrant, window, opts, {}, {});
}

HarmonicFunction h1_function(const JumpMeasure& mu, Box window, const HOptions& opts) {
  SpectralPoint sp = a_of_q(mu, Vec2(1.0, 0.0));
  // Exit functional over {tau2 < inf} only: f(w) = w2 <= 0 at exits, and
  // |value| at far sides is bounded by the maximal downward overshoot.
  double overshoot = mu.min_dy() >= -1 ? 0.0 : static_cast<double>(-mu.min_dy() - 1);
  auto f_exit = [](Point w) { return static_cast<double>(w.y); };
  auto cap = [overshoot](Point) { return -overshoot; };
  return assemble_h(mu, sp, HBranch::Critical10, WalkKind::HalfPlane1, window, opts, f_exit, cap);
}

double harmonicity_residual(const HarmonicFunction& h, const JumpMeasure& mu, Point z) {
  if (!in_domain(h.domain_kind, z))
    throw Error("harmonicity_residual: z outside the walk's domain");
  double s = 0.0;
  for (const auto& [w, p] : mu.entries()) {
    Point t = z + w;
    if (!in_domain(h.domain_kind, t)) continue;  // h = 0 there
    if (!h.rect.contains(t)) throw Error("harmonicity_residual: stencil exits the trusted window");
    s += p * h.value(t);
  }
  return std::abs(s - h.value(z));
}

namespace {

double level_hit_probability(const std::map<int, double>& nu, int k, int strip_delta) {
  // States 1..k and k+2..k+1+strip_delta; absorb at exactly k+1 (value 1),
  // at <= 0 and above the strip (value 0).
  std::vector<int> states;
  for (int s = 1; s <= k; ++s) states.push_back(s);
  for (int s = k + 2; s <= k + 1 + strip_delta; ++s) states.push_back(s);
  std::map<int, int> idx;
  for (std::size_t i = 0; i < states.size(); ++i) idx[states[i]] = static_cast<int>(i);
  int n = static_cast<int>(states.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    for (const auto& [j, p] : nu) {
      int t = states[i] + j;
      if (t == k + 1) {
        b[i] += p;
      } else {
        auto it = idx.find(t);
        if (it != idx.end()) A(i, it->second) -= p;
      }
    }
  }
  Eigen::VectorXd u = A.partialPivLu().solve(b);
  return u[idx.at(k)];
}

}  // namespace

LevelHittingProfile level_hitting_profile(const JumpMeasure& mu, const std::vector<int>& k_list,
                                int strip_delta) {
  SpectralPoint sp = a_of_q(mu, Vec2(1.0, 0.0));
  auto nu = mu.twisted_marginal(sp.a, 1);
  LevelHittingProfile out;
  for (int k : k_list) {
    if (k < 1) throw Error("level_hitting_profile: k must be positive");
    double v = level_hit_probability(nu, k, strip_delta);
    double v2 = level_hit_probability(nu, k, 2 * strip_delta);
    if (std::abs(v - v2) > 1e-9) out.stability_warning = true;
    out.values.push_back(v);
  }
  return out;
}

CriticalTailEnvelope critical_tail_envelope(const JumpMeasure& mu) {
  SpectralPoint a10 = a_of_q(mu, Vec2(1.0, 0.0));
  SpectralPoint a01 = a_of_q(mu, Vec2(0.0, 1.0));
  CriticalTailEnvelope env;
  env.delta = 0.5 * (a01.a.y() - a10.a.y());
  if (!(env.delta > 0.0)) throw Error("critical_tail_envelope: critical ordinate gap is not positive");
  double target_y = a10.a.y() + env.delta;
  Vec2 am = min_point(mu);
  // right root of phi(x, target_y) = 1 with x < a(1,0)_1
  double lo = am.x(), hi = a10.a.x();
  if (phi(mu, Vec2(lo, target_y)) >= 1.0 || phi(mu, Vec2(hi, target_y)) <= 1.0)
    throw Error("critical_tail_envelope: bracketing failed");
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (phi(mu, Vec2(mid, target_y)) < 1.0 ? lo : hi) = mid;
  }
  env.hat_a = Vec2(0.5 * (lo + hi), target_y);
  return env;
}

}  // namespace quadwalk
