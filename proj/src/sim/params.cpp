#include "gridtraffic/sim/params.hpp"

#include <cmath>

#include "gridtraffic/core/error.hpp"

namespace gridtraffic {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) {
    throw Error(ErrorCode::kValidationError,
                std::string("params.") + field + " " + what,
                std::string("params.") + field);
  }
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void validate(const SimParams& p) {
  require(positive(p.tick_dt), "tick_dt", "must be positive");
  require(positive(p.lookahead_horizon), "lookahead_horizon", "must be positive");
  require(positive(p.intersection_horizon), "intersection_horizon",
          "must be positive");
  // Per-tick moves apply the fraction tick_dt / lookahead_horizon of a
  // planned move; a fraction above one would extrapolate past the plan.
  require(p.tick_dt <= p.lookahead_horizon, "tick_dt",
          "must not exceed lookahead_horizon");
  require(p.aging_max_wait >= 0, "aging_max_wait", "must be non-negative");
  if (p.accel_limit) {
    require(positive(*p.accel_limit), "accel_limit", "must be positive");
  }
}

}  // namespace gridtraffic
