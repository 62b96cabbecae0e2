#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridtraffic/core/grid.hpp"
#include "gridtraffic/core/vehicle.hpp"
#include "gridtraffic/core/world.hpp"
#include "gridtraffic/sim/engine.hpp"
#include "gridtraffic/sim/params.hpp"

namespace gridtraffic {

struct RouteSpec {
  RouteId id = 0;
  std::vector<Vec2> polyline;
  double lane_width = 3.5;
  double thickness = 0.2;
  double speed_limit = 0.0;
  int priority_rank = 0;

  friend bool operator==(const RouteSpec&, const RouteSpec&) = default;
};

struct SpawnSpec {
  Tick tick = 0;
  RouteId route_id = 0;
  VehicleClass cls = VehicleClass::kCar;
  double desired_speed = 0.0;

  friend bool operator==(const SpawnSpec&, const SpawnSpec&) = default;
};

// Visual intersection area, emitted with the road geometry.
struct PadSpec {
  Vec2 center;
  double width = 0.0;
  double length = 0.0;
  double thickness = 0.1;

  friend bool operator==(const PadSpec&, const PadSpec&) = default;
};

struct Scenario {
  double resolution = 0.0;
  int max_shared_run = 2;
  std::vector<RouteSpec> routes;
  std::vector<SpawnSpec> spawns;
  SimParams params;
  std::vector<PadSpec> intersection_pads;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Parses and validates a scenario document. Unknown fields are rejected.
// Throws kParseError (with line/column), kSchemaError or kValidationError,
// each naming the offending field path.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

// Canonical document with every default written out.
std::string emit_scenario(const Scenario& scenario);

// Lattice walk of a polyline: consecutive nodes differ by one step on exactly
// one axis. `headings` receives the polyline heading for each node.
std::vector<GridCoord> resample_polyline(std::span<const Vec2> polyline,
                                         double resolution,
                                         std::vector<double>* headings = nullptr);

// Resamples, quantizes and registers every route in (priority_rank, id)
// order. Throws kIllegalOverlap / kValidationError.
WorldMap build_world(const Scenario& scenario);

// World plus every scheduled spawn.
Simulation make_simulation(const Scenario& scenario);

// Static geometry document: one entry per segment ordered by
// (route id, seq_index), then the intersection pads.
std::string emit_line_segments(const WorldMap& world, std::span<const PadSpec> pads);

}  // namespace gridtraffic
