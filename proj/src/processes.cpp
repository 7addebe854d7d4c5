#include "quadwalk/processes.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "quadwalk/geometry.hpp"

namespace quadwalk {

bool in_domain(WalkKind kind, Point z) {
  switch (kind) {
    case WalkKind::Free: return true;
    case WalkKind::Quadrant: return z.x >= 1 && z.y >= 1;
    case WalkKind::HalfPlane1: return z.y >= 1;
    case WalkKind::HalfPlane2: return z.x >= 1;
  }
  return false;
}

const char* kind_name(WalkKind kind) {
  switch (kind) {
    case WalkKind::Free: return "free";
    case WalkKind::Quadrant: return "quadrant";
    case WalkKind::HalfPlane1: return "halfplane1";
    case WalkKind::HalfPlane2: return "halfplane2";
  }
  return "?";
}

TauClass classify_exit(Point w) {
  return w.y <= 0 ? TauClass::Tau2AtMostTau1 : TauClass::Tau1BeforeTau2;
}

TwistedKernel twisted_kernel(const JumpMeasure& mu, const Vec2& a) {
  TwistedKernel k{mu, a, {}, 0.0};
  double total = 0.0;
  for (const auto& [w, p] : mu.entries()) {
    double t = p * std::exp(a.x() * w.dx + a.y() * w.dy);
    k.weights.push_back({w, t});
    total += t;
  }
  k.total = total;
  return k;
}

Vec2 kernel_mean(const TwistedKernel& k) {
  Vec2 m = Vec2::Zero();
  for (const auto& [w, t] : k.weights) m += t * Vec2(w.dx, w.dy);
  return m;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream)));
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace {

struct StepSampler {
  std::vector<double> cum;  // cumulative weights, last = phi(a)
  const std::vector<std::pair<Offset, double>>* weights;

  explicit StepSampler(const TwistedKernel& k) : weights(&k.weights) {
    double s = 0.0;
    for (const auto& [w, t] : k.weights) {
      s += t;
      cum.push_back(s);
    }
  }

  // Returns the step, or nullopt when the substochastic deficit kills.
  std::optional<Offset> draw(std::mt19937_64& rng) const {
    double u = uniform01(rng);
    if (u >= cum.back()) return std::nullopt;
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    return (*weights)[static_cast<std::size_t>(it - cum.begin())].first;
  }
};

}  // namespace

PathSample sample_path(WalkKind kind, const TwistedKernel& kernel, Point z0, int horizon,
                       std::uint64_t seed) {
  if (!in_domain(kind, z0)) throw Error("sample_path: start state outside the walk's domain");
  if (horizon < 1) throw Error("sample_path: horizon must be at least 1");
  if (kernel.total > 1.0 + 1e-12) throw Error("sample_path: kernel is super-stochastic (phi(a) > 1)");

  StepSampler sampler(kernel);
  auto rng = stream_rng(seed, 0);
  PathSample out;
  out.states.push_back(z0);
  Point z = z0;
  for (int t = 1; t <= horizon; ++t) {
    auto step = sampler.draw(rng);
    if (!step) {
      out.stop_reason = StopReason::KilledMass;
      out.stop_time = t;
      return out;
    }
    z = z + *step;
    out.states.push_back(z);
    if (!in_domain(kind, z)) {
      TauClass cls = classify_exit(z);
      out.tau_class = cls;
      out.stop_reason = cls == TauClass::Tau1BeforeTau2 ? StopReason::HitTau1 : StopReason::HitTau2;
      out.stop_time = t;
      return out;
    }
    out.stop_time = t;
  }
  out.stop_reason = StopReason::Horizon;
  return out;
}

McEstimate exit_probability_mc(const TwistedKernel& kernel, Point z0, int horizon,
                               std::uint64_t n_samples, std::uint64_t seed, int threads) {
  if (n_samples == 0) throw Error("exit_probability_mc: n_samples must be positive");
  if (!in_domain(WalkKind::Quadrant, z0))
    throw Error("exit_probability_mc: start state outside the quadrant");
  if (kernel.total > 1.0 + 1e-12)
    throw Error("exit_probability_mc: kernel is super-stochastic (phi(a) > 1)");

  // flattened step table; selection matches StepSampler::draw exactly
  const std::size_t ns = kernel.weights.size();
  std::vector<double> cum(ns);
  std::vector<int> sdx(ns), sdy(ns);
  double acc = 0.0;
  for (std::size_t i = 0; i < ns; ++i) {
    acc += kernel.weights[i].second;
    cum[i] = acc;
    sdx[i] = kernel.weights[i].first.dx;
    sdy[i] = kernel.weights[i].first.dy;
  }
  const double total = acc;

  auto run_range = [&](std::uint64_t lo, std::uint64_t hi) -> std::uint64_t {
    std::uint64_t exits = 0;
    for (std::uint64_t i = lo; i < hi; ++i) {
      auto rng = stream_rng(seed, i + 1);
      int x = z0.x, y = z0.y;
      for (int t = 0; t < horizon; ++t) {
        double u = uniform01(rng);
        if (u >= total) break;  // killed by the substochastic deficit
        std::size_t j = 0;
        while (cum[j] <= u) ++j;
        x += sdx[j];
        y += sdy[j];
        if (x < 1 || y < 1) {
          ++exits;
          break;
        }
      }
    }
    return exits;
  };

  int nt = threads > 0 ? threads
                       : std::min(8u, std::max(1u, std::thread::hardware_concurrency()));
  std::uint64_t exits = 0;
  if (nt <= 1 || n_samples < 1024) {
    exits = run_range(0, n_samples);
  } else {
    std::vector<std::uint64_t> partial(static_cast<std::size_t>(nt), 0);
    std::vector<std::thread> pool;
    std::uint64_t chunk = (n_samples + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
      std::uint64_t lo = t * chunk, hi = std::min<std::uint64_t>(n_samples, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, t, lo, hi] { partial[static_cast<std::size_t>(t)] = run_range(lo, hi); });
    }
    for (auto& th : pool) th.join();
    for (auto e : partial) exits += e;  // integer sum, order independent
  }

  McEstimate est;
  est.n_samples = n_samples;
  est.n_exit = exits;
  est.estimate = static_cast<double>(exits) / static_cast<double>(n_samples);
  est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(n_samples));
  return est;
}

}  // namespace quadwalk
