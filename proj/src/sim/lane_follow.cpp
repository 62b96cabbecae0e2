#include "gridtraffic/sim/lane_follow.hpp"

#include <cmath>

#include "gridtraffic/core/error.hpp"

namespace gridtraffic {

namespace {

bool bad(double v) { return !std::isfinite(v) || v < 0.0; }

}  // namespace

LaneFollowDecision lane_follow(double myspeed, std::optional<Leader> leader,
                               double horizon) {
  if (bad(myspeed) || bad(horizon) ||
      (leader && (bad(leader->dist) || bad(leader->frontspeed)))) {
    throw Error(ErrorCode::kInvalidKinematics,
                "lane_follow needs finite non-negative speeds, gap and horizon");
  }
  const LaneFollowDecision cruise{myspeed * horizon, myspeed};
  if (!leader) return cruise;

  const double closing = myspeed - leader->frontspeed;
  if (closing <= 0.0) return cruise;
  if (leader->dist == 0.0) {
    return {leader->frontspeed * horizon, leader->frontspeed};
  }
  const double t = leader->dist / closing;
  if (t > 0.0 && t < horizon) {
    return {myspeed * t + leader->frontspeed * (horizon - t), leader->frontspeed};
  }
  return cruise;
}

}  // namespace gridtraffic
