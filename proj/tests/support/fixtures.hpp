#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gridtraffic/core/world.hpp"
#include "gridtraffic/scenario/scenario.hpp"

namespace fixture {

inline std::string scenario_path(const std::string& name) {
  return std::string(GT_SCENARIO_DIR) + "/" + name;
}

inline gridtraffic::Scenario load(const std::string& name) {
  return gridtraffic::load_scenario(scenario_path(name));
}

// n nodes starting at `start`, stepping (di, dj) each node.
inline gridtraffic::Route line_route(gridtraffic::RouteId id, gridtraffic::GridCoord start,
                                     int di, int dj, int n, double limit = 10.0,
                                     double lane_width = 3.5, double resolution = 1.0) {
  std::vector<gridtraffic::GridCoord> cells;
  std::vector<double> rot;
  const double heading = std::atan2(static_cast<double>(dj), static_cast<double>(di));
  for (int k = 0; k < n; ++k) {
    cells.push_back({start.i + di * k, start.j + dj * k});
    rot.push_back(heading);
  }
  return gridtraffic::Route::from_cells(id, cells, rot, {lane_width, resolution, 0.2}, limit);
}

// Two perpendicular routes of 21 nodes crossing at (0, 0): route 0 along +x
// (higher priority), route 1 along +y.
inline gridtraffic::WorldMap crossing_world(double limit = 10.0) {
  gridtraffic::WorldMap w(1.0);
  w.register_route(line_route(0, {-10, 0}, 1, 0, 21, limit), 0);
  w.register_route(line_route(1, {0, -10}, 0, 1, 21, limit), 1);
  return w;
}

}  // namespace fixture
