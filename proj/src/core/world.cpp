#include "gridtraffic/core/world.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "gridtraffic/core/error.hpp"

namespace gridtraffic {

namespace {

std::string coord_str(GridCoord c) {
  return "(" + std::to_string(c.i) + "," + std::to_string(c.j) + ")";
}

std::string route_str(RouteId id) { return "route " + std::to_string(id); }

}  // namespace

Route::Route(RouteId id, std::vector<Segment> segments)
    : id_(id), segments_(std::move(segments)) {
  if (segments_.empty()) {
    throw Error(ErrorCode::kInvalidRoute, route_str(id) + " has no segments");
  }
  by_position_.reserve(segments_.size());
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const Segment& s = segments_[k];
    const std::string where = route_str(id) + " segment " + std::to_string(k);
    if (s.route_id != id) {
      throw Error(ErrorCode::kInvalidRoute, where + " carries a foreign route id");
    }
    if (s.seq_index != static_cast<std::int32_t>(k)) {
      throw Error(ErrorCode::kInvalidRoute, where + " has seq_index out of order");
    }
    if (!(s.speed_limit > 0.0) || !std::isfinite(s.speed_limit)) {
      throw Error(ErrorCode::kInvalidRoute, where + " needs a positive speed limit");
    }
    if (!(s.scale.length > 0.0)) {
      throw Error(ErrorCode::kInvalidRoute, where + " needs a positive length");
    }
    const std::optional<GridCoord> expect_prev =
        k > 0 ? std::optional(segments_[k - 1].position) : std::nullopt;
    const std::optional<GridCoord> expect_next =
        k + 1 < segments_.size() ? std::optional(segments_[k + 1].position)
                                 : std::nullopt;
    if (s.prev_position != expect_prev || s.next_position != expect_next) {
      throw Error(ErrorCode::kInvalidRoute,
                  where + " links disagree with the chain order");
    }
    if (!by_position_.emplace(s.position, k).second) {
      throw Error(ErrorCode::kInvalidRoute,
                  route_str(id) + " overlaps itself at " + coord_str(s.position));
    }
    length_ += s.scale.length;
    max_speed_limit_ = std::max(max_speed_limit_, s.speed_limit);
  }
}

Route Route::from_cells(RouteId id, std::span<const GridCoord> cells,
                        std::span<const double> rotations, SegmentScale scale,
                        double speed_limit) {
  std::vector<Segment> segs(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    Segment& s = segs[k];
    s.route_id = id;
    s.seq_index = static_cast<std::int32_t>(k);
    s.position = cells[k];
    if (k > 0) s.prev_position = cells[k - 1];
    if (k + 1 < cells.size()) s.next_position = cells[k + 1];
    s.scale = scale;
    s.rotation = k < rotations.size() ? rotations[k] : 0.0;
    s.speed_limit = speed_limit;
  }
  return Route(id, std::move(segs));
}

std::optional<std::size_t> Route::index_of(GridCoord position) const {
  auto it = by_position_.find(position);
  if (it == by_position_.end()) return std::nullopt;
  return it->second;
}

std::size_t Route::segment_index_at(double arc, double resolution) const {
  if (!(arc > 0.0)) return 0;
  auto k = static_cast<std::size_t>(std::floor(arc / resolution));
  while (k > 0 && static_cast<double>(k) * resolution > arc) --k;
  while (static_cast<double>(k + 1) * resolution <= arc) ++k;
  return std::min(k, segments_.size() - 1);
}

Vec2 Route::position_at(double arc, double resolution) const {
  const std::size_t k = segment_index_at(arc, resolution);
  const Vec2 p = world_position(segments_[k].position, resolution);
  const double along = arc - static_cast<double>(k) * resolution;
  if (k + 1 < segments_.size()) {
    const Vec2 q = world_position(segments_[k + 1].position, resolution);
    const double f = along / resolution;
    return Vec2{p.x + (q.x - p.x) * f, p.y + (q.y - p.y) * f};
  }
  const double th = segments_[k].rotation;
  return Vec2{p.x + along * std::cos(th), p.y + along * std::sin(th)};
}

double Route::heading_at(double arc, double resolution) const {
  return segments_[segment_index_at(arc, resolution)].rotation;
}

WorldMap::WorldMap(double resolution, int max_shared_run)
    : resolution_(resolution), max_shared_run_(max_shared_run) {
  if (!std::isfinite(resolution) || resolution <= 0.0) {
    throw Error(ErrorCode::kInvalidCoordinate, "resolution must be positive");
  }
}

void WorldMap::register_route(Route route, int priority_rank) {
  if (route_slots_.count(route.id()) != 0) {
    throw Error(ErrorCode::kDuplicateRoute,
                route_str(route.id()) + " is already registered");
  }

  // Validate overlap runs against every already-registered route before
  // touching any state.
  std::unordered_map<RouteId, int> run;
  for (const Segment& s : route.segments()) {
    std::unordered_map<RouteId, int> next;
    if (const PointRecord* p = find_point(s.position)) {
      for (RouteId other : p->route_ls) {
        auto it = run.find(other);
        const int len = it == run.end() ? 1 : it->second + 1;
        if (len > max_shared_run_) {
          throw Error(ErrorCode::kIllegalOverlap,
                      route_str(route.id()) + " overlaps " + route_str(other) +
                          " on " + std::to_string(len) +
                          " consecutive points ending at " +
                          coord_str(s.position) + " (limit " +
                          std::to_string(max_shared_run_) + ")");
        }
        next.emplace(other, len);
      }
    }
    run = std::move(next);
  }

  route.priority_rank_ = priority_rank;
  const auto slot = routes_.size();
  const RouteId rid = route.id();
  route.point_index_.resize(route.size());
  for (std::size_t k = 0; k < route.size(); ++k) {
    const GridCoord pos = route.segments_[k].position;
    auto [it, inserted] =
        point_lookup_.emplace(pos, static_cast<std::uint32_t>(points_.size()));
    if (inserted) points_.push_back(PointRecord{pos, {}, std::nullopt});
    PointRecord& rec = points_[it->second];
    // Keep route_ls sorted by (priority_rank, id).
    auto pos_it = std::find_if(rec.route_ls.begin(), rec.route_ls.end(),
                               [&](RouteId other) {
                                 const Route& o = routes_[route_slots_.at(other)];
                                 return std::pair(priority_rank, rid) <
                                        std::pair(o.priority_rank(), o.id());
                               });
    rec.route_ls.insert(pos_it, rid);
    route.point_index_[k] = it->second;
    if (rec.route_ls.size() == 2) {
      // The point just became shared; tell the route that was alone on it.
      const RouteId other = rec.route_ls[0] == rid ? rec.route_ls[1] : rec.route_ls[0];
      Route& o = routes_[route_slots_.at(other)];
      const std::size_t ok = *o.index_of(pos);
      o.shared_seq_.insert(std::lower_bound(o.shared_seq_.begin(), o.shared_seq_.end(), ok), ok);
    }
    if (rec.route_ls.size() >= 2) route.shared_seq_.push_back(k);
  }
  route_slots_.emplace(rid, slot);
  routes_.push_back(std::move(route));
}

bool WorldMap::has_route(RouteId id) const { return route_slots_.count(id) != 0; }

std::size_t WorldMap::route_slot(RouteId id) const {
  auto it = route_slots_.find(id);
  if (it == route_slots_.end()) {
    throw Error(ErrorCode::kNoSuchRoute, route_str(id) + " does not exist");
  }
  return it->second;
}

const Route& WorldMap::route(RouteId id) const { return routes_[route_slot(id)]; }

const Segment& WorldMap::segment_by_route(RouteId route_id,
                                          GridCoord position) const {
  const Route& r = route(route_id);
  auto k = r.index_of(position);
  if (!k) {
    throw Error(ErrorCode::kNotOnRoute,
                coord_str(position) + " is not on " + route_str(route_id));
  }
  return r[*k];
}

const Segment& WorldMap::segment_by_point(GridCoord position,
                                          std::optional<RouteId> route_id) const {
  const PointRecord* p = find_point(position);
  if (p == nullptr) {
    throw Error(ErrorCode::kNoSuchPoint, "no point at " + coord_str(position));
  }
  if (!route_id) {
    if (p->route_ls.size() != 1) {
      throw Error(ErrorCode::kAmbiguousPoint,
                  coord_str(position) + " is shared by " +
                      std::to_string(p->route_ls.size()) +
                      " routes; a route id is required");
    }
    route_id = p->route_ls.front();
  } else if (std::find(p->route_ls.begin(), p->route_ls.end(), *route_id) ==
             p->route_ls.end()) {
    throw Error(ErrorCode::kNotOnRoute,
                coord_str(position) + " is not on " + route_str(*route_id));
  }
  const Route& r = route(*route_id);
  return r[*r.index_of(position)];
}

const PointRecord* WorldMap::find_point(GridCoord position) const {
  auto it = point_lookup_.find(position);
  return it == point_lookup_.end() ? nullptr : &points_[it->second];
}

std::size_t WorldMap::priority_at(std::uint32_t point, RouteId route) const {
  const auto& ls = points_[point].route_ls;
  auto it = std::find(ls.begin(), ls.end(), route);
  return it == ls.end() ? npos : static_cast<std::size_t>(it - ls.begin());
}

void WorldMap::occupy(std::size_t slot, std::size_t seq, VehicleId vehicle) {
  Route& r = routes_[slot];
  r.segments_[seq].car_id = vehicle;
  auto& car = points_[r.point_index_[seq]].car_id;
  if (!car) ++occupied_;
  car = vehicle;
}

void WorldMap::vacate(std::size_t slot, std::size_t seq) {
  Route& r = routes_[slot];
  r.segments_[seq].car_id.reset();
  auto& car = points_[r.point_index_[seq]].car_id;
  if (car) --occupied_;
  car.reset();
}

void WorldMap::clear_occupancy() {
  for (Route& r : routes_) {
    for (Segment& s : r.segments_) s.car_id.reset();
  }
  for (PointRecord& p : points_) p.car_id.reset();
  occupied_ = 0;
}

std::size_t WorldMap::segment_count() const {
  std::size_t n = 0;
  for (const Route& r : routes_) n += r.size();
  return n;
}

std::size_t WorldMap::shared_point_count() const {
  return static_cast<std::size_t>(
      std::count_if(points_.begin(), points_.end(),
                    [](const PointRecord& p) { return p.route_ls.size() >= 2; }));
}

}  // namespace gridtraffic
