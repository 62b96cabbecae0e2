#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "gridtraffic/core/grid.hpp"

namespace gridtraffic {

struct SegmentScale {
  double lane_width = 0.0;
  double length = 0.0;
  double thickness = 0.0;
};

// One resolution-length slice of a route. Segment k of a route covers arc
// [k*rho, (k+1)*rho) and sits at lattice node `position`.
struct Segment {
  RouteId route_id = 0;
  std::int32_t seq_index = 0;
  GridCoord position;
  std::optional<GridCoord> prev_position;
  std::optional<GridCoord> next_position;
  SegmentScale scale;
  double rotation = 0.0;  // radians, CCW from +x
  double speed_limit = 0.0;
  std::optional<VehicleId> car_id;
};

// Ordered, non-self-overlapping chain of segments. The chain order is
// authoritative; prev/next links are validated against it on construction.
class Route {
 public:
  // Throws kInvalidRoute when the chain, the links, the ids or the speed
  // limits are inconsistent.
  Route(RouteId id, std::vector<Segment> segments);

  // Builds the linked chain from an ordered list of lattice nodes.
  static Route from_cells(RouteId id, std::span<const GridCoord> cells,
                          std::span<const double> rotations, SegmentScale scale,
                          double speed_limit);

  RouteId id() const noexcept { return id_; }
  int priority_rank() const noexcept { return priority_rank_; }
  const std::vector<Segment>& segments() const noexcept { return segments_; }
  std::size_t size() const noexcept { return segments_.size(); }
  const Segment& operator[](std::size_t k) const { return segments_[k]; }

  // Index of the segment at `position`, if any.
  std::optional<std::size_t> index_of(GridCoord position) const;

  // Sum of segment lengths (= size * rho for built worlds).
  double length() const noexcept { return length_; }
  double max_speed_limit() const noexcept { return max_speed_limit_; }

  // Position of arc `arc` along the chain, interpolating between consecutive
  // lattice nodes. Arcs past the last node extrapolate along its heading.
  Vec2 position_at(double arc, double resolution) const;
  double heading_at(double arc, double resolution) const;
  std::size_t segment_index_at(double arc, double resolution) const;

  // Sorted indices of segments sitting on shared points. Filled as routes
  // are registered.
  const std::vector<std::size_t>& shared_indices() const noexcept { return shared_seq_; }

 private:
  friend class WorldMap;

  RouteId id_;
  int priority_rank_ = 0;
  std::vector<Segment> segments_;
  std::unordered_map<GridCoord, std::size_t, GridCoordHash> by_position_;
  std::vector<std::uint32_t> point_index_;  // filled on registration
  std::vector<std::size_t> shared_seq_;
  double length_ = 0.0;
  double max_speed_limit_ = 0.0;
};

struct PointRecord {
  GridCoord position;
  std::vector<RouteId> route_ls;  // earlier = higher crossing priority
  std::optional<VehicleId> car_id;
};

// Quantized world: the point lattice plus the route list. Geometry is fixed
// once routes are registered; only occupancy (car_id) changes afterwards and
// is written by the simulation step alone.
class WorldMap {
 public:
  explicit WorldMap(double resolution, int max_shared_run = 2);

  double resolution() const noexcept { return resolution_; }
  int max_shared_run() const noexcept { return max_shared_run_; }

  // Registers `route`, inserting its id into every touched point's route_ls
  // ordered by (priority_rank, route id). Atomic: on error the world is left
  // unchanged. Throws kDuplicateRoute, kIllegalOverlap.
  void register_route(Route route, int priority_rank);

  bool has_route(RouteId id) const;
  const Route& route(RouteId id) const;  // throws kNoSuchRoute
  std::size_t route_slot(RouteId id) const;  // throws kNoSuchRoute
  const std::vector<Route>& routes() const noexcept { return routes_; }

  // Route lookup path: route id, then position within the route.
  const Segment& segment_by_route(RouteId route_id, GridCoord position) const;
  // World lookup path: point first, then route id when the point is shared.
  const Segment& segment_by_point(GridCoord position,
                                  std::optional<RouteId> route_id = {}) const;

  const PointRecord* find_point(GridCoord position) const;
  const std::vector<PointRecord>& points() const noexcept { return points_; }
  const PointRecord& point(std::uint32_t index) const { return points_[index]; }

  // Index into points() of segment `seq` of the route in slot `slot`.
  std::uint32_t point_index(std::size_t slot, std::size_t seq) const {
    return routes_[slot].point_index_[seq];
  }
  bool is_shared(std::uint32_t point) const {
    return points_[point].route_ls.size() >= 2;
  }
  // Position of `route` in the point's route_ls, or npos.
  std::size_t priority_at(std::uint32_t point, RouteId route) const;

  // Occupancy writes (single writer).
  void occupy(std::size_t slot, std::size_t seq, VehicleId vehicle);
  void vacate(std::size_t slot, std::size_t seq);
  void clear_occupancy();
  std::size_t occupied_count() const noexcept { return occupied_; }

  std::size_t segment_count() const;
  std::size_t shared_point_count() const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  double resolution_;
  int max_shared_run_;
  std::vector<Route> routes_;
  std::unordered_map<RouteId, std::size_t> route_slots_;
  std::vector<PointRecord> points_;
  std::unordered_map<GridCoord, std::uint32_t, GridCoordHash> point_lookup_;
  std::size_t occupied_ = 0;
};

}  // namespace gridtraffic
