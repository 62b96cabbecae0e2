#pragma once

#include <cstdint>
#include <optional>

namespace gridtraffic {

struct SimParams {
  double tick_dt = 1.0 / 24.0;
  double lookahead_horizon = 1.0;     // lane-following planning window, seconds
  double intersection_horizon = 2.0;  // sweep window for crossing checks
  // Optional: promote a vehicle that has waited more than
  // aging_max_wait ticks to top priority at its conflict points.
  bool aging_enabled = false;
  std::int64_t aging_max_wait = 240;
  // Optional: limit per-tick speed change to
  // accel_limit * tick_dt. Unset means instant speed change.
  std::optional<double> accel_limit;
  std::uint64_t seed = 0;

  friend bool operator==(const SimParams&, const SimParams&) = default;
};

// Throws kValidationError naming the offending field.
void validate(const SimParams& params);

}  // namespace gridtraffic
