#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quadwalk/measure.hpp"

namespace quadwalk {

/// Parsed run configuration. Every field has the documented default below;
/// unknown keys are rejected at parse time with the offending line number.
struct RunConfig {
  std::string name = "unnamed";
  std::optional<JumpMeasure> measure;

  Vec2 q = Vec2(1.0, 1.0);                       // direction (normalized on use)
  std::vector<double> radii{20, 30, 40, 60};     // experiment radii
  int margin = 40;                               // solver margin beyond queries
  double delta = 0.3;                            // Xi trimming parameter
  double sigma = 0.05;                           // envelope slack
  std::uint64_t seed = 20260810;                 // root RNG seed
  int threads = 0;                               // 0 = auto
  double htol = 1e-7;                            // harmonic bracket tolerance
  int window = 50;                               // harmonic window edge
  std::string kind = "quadrant";                 // walk kind for mc/green
  std::optional<Vec2> twist;                     // explicit twist; default a(q)
  Point z0{5, 5};                                // mc start state
  int horizon = 10000;                           // mc horizon
  std::uint64_t samples = 100000;                // mc sample count
  Point target{30, 30};                          // green column target
  std::optional<std::vector<int>> box;           // green box: x0 x1 y0 y1
  int sweep = 64;                                // geometry sweep size
  bool force_log_domain = false;

  const JumpMeasure& require_measure() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

}  // namespace quadwalk
