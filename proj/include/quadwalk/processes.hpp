#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "quadwalk/measure.hpp"

namespace quadwalk {

enum class WalkKind { Free, Quadrant, HalfPlane1, HalfPlane2 };

/// Free: Z^2; Quadrant: N* x N*; HalfPlane1: Z x N*; HalfPlane2: N* x Z.
bool in_domain(WalkKind kind, Point z);
const char* kind_name(WalkKind kind);

enum class StopReason { HitTau1, HitTau2, Horizon, KilledMass };

/// Exit classification; a step leaving both half-planes at once counts as
/// tau2 (the event algebra pairs {tau = tau1 < tau2} with {tau = tau2 <= tau1}).
enum class TauClass { Tau1BeforeTau2, Tau2AtMostTau1 };

TauClass classify_exit(Point exit_state);

/// Step weights mu(z) e^{a.z}; stochastic when phi(a) = 1, substochastic when
/// phi(a) < 1 with the deficit acting as a per-step killing probability.
struct TwistedKernel {
  JumpMeasure base;
  Vec2 a = Vec2::Zero();
  std::vector<std::pair<Offset, double>> weights;  // sorted by offset
  double total = 0.0;                              // = phi(a)
};

TwistedKernel twisted_kernel(const JumpMeasure& mu, const Vec2& a);
Vec2 kernel_mean(const TwistedKernel& k);

struct PathSample {
  std::vector<Point> states;  // includes the start and the final state
  StopReason stop_reason = StopReason::Horizon;
  int stop_time = 0;
  std::optional<TauClass> tau_class;
};

/// Deterministic given (kernel, z0, horizon, seed). The sample stream is
/// mt19937_64 seeded by splitmix64(seed ^ stream index), so per-sample
/// results do not depend on scheduling.
PathSample sample_path(WalkKind kind, const TwistedKernel& kernel, Point z0, int horizon,
                       std::uint64_t seed);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t n_exit = 0;
};

/// Fraction of twisted paths from z0 leaving the quadrant before the horizon;
/// lower-bounds P_z(tau^a < infinity). Bit-identical for any thread count.
McEstimate exit_probability_mc(const TwistedKernel& kernel, Point z0, int horizon,
                               std::uint64_t n_samples, std::uint64_t seed, int threads = 0);

// RNG plumbing (exposed for tests).
std::uint64_t splitmix64(std::uint64_t x);
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream);
double uniform01(std::mt19937_64& rng);

}  // namespace quadwalk
