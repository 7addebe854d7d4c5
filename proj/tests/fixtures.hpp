#pragma once

#include "quadwalk/measure.hpp"

namespace quadwalk::testing {

// Four-step walk with drift (0.2, 0.2); period 2.
inline JumpMeasure m1() {
  return JumpMeasure::from_entries({
      {{1, 0}, 0.35}, {{-1, 0}, 0.15}, {{0, 1}, 0.35}, {{0, -1}, 0.15}});
}

// Six-step walk with drift (0.15, 0.15); aperiodic (period 1).
inline JumpMeasure m2() {
  return JumpMeasure::from_entries({{{1, 0}, 0.3},
                                    {{0, 1}, 0.3},
                                    {{-1, -1}, 0.2},
                                    {{1, 1}, 0.1},
                                    {{-1, 0}, 0.05},
                                    {{0, -1}, 0.05}});
}

}  // namespace quadwalk::testing
