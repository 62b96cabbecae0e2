#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "gridtraffic/core/grid.hpp"

namespace gridtraffic {

enum class VehicleClass { kCar, kBus, kPolice };

std::string_view to_string(VehicleClass cls);
std::optional<VehicleClass> parse_vehicle_class(std::string_view name);

// Body length along the route, in meters.
double default_footprint_length(VehicleClass cls);

// Route-bound agent. `arc_pos` is the rear bumper's distance from the route
// start; the body covers arc [arc_pos, arc_pos + footprint_length).
struct Vehicle {
  VehicleId id = 0;
  VehicleClass cls = VehicleClass::kCar;
  RouteId route_id = 0;
  double arc_pos = 0.0;
  double speed = 0.0;
  double desired_speed = 0.0;
  bool active = false;
  double footprint_length = 4.0;
  std::int64_t wait_ticks = 0;

  bool spawned = false;        // false while the spawn is still pending
  bool external_hold = false;  // set by a `hold` command until `release`

  double front() const noexcept { return arc_pos + footprint_length; }
};

}  // namespace gridtraffic
