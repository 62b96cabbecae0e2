#pragma once

#include <optional>

namespace gridtraffic {

struct Leader {
  double dist = 0.0;        // bumper gap, meters
  double frontspeed = 0.0;  // m/s
};

struct LaneFollowDecision {
  double advance = 0.0;    // meters covered over the horizon
  double new_speed = 0.0;  // speed at the end of the horizon
};

// Lane following over one planning horizon. Without interference the vehicle
// keeps `myspeed`. When the closing time r = dist / (myspeed - frontspeed)
// falls inside (0, horizon) it drives at myspeed for r seconds, then at
// frontspeed for the rest of the horizon, and adopts frontspeed. A zero gap
// with positive closing speed adopts frontspeed immediately.
//
// Throws kInvalidKinematics on negative or non-finite input.
LaneFollowDecision lane_follow(double myspeed, std::optional<Leader> leader,
                               double horizon);

}  // namespace gridtraffic
