#include "gridtraffic/sim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <tuple>
#include <utility>

#include "gridtraffic/core/error.hpp"
#include "stepper.hpp"

namespace gridtraffic {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kSpawned: return "spawned";
    case EventKind::kDeactivated: return "deactivated";
    case EventKind::kHeldAtIntersection: return "held_at_intersection";
    case EventKind::kCollision: return "collision";
    case EventKind::kStarvationWarning: return "starvation_warning";
    case EventKind::kCommandRejected: return "command_rejected";
  }
  return "spawned";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (auto k : {EventKind::kSpawned, EventKind::kDeactivated,
                 EventKind::kHeldAtIntersection, EventKind::kCollision,
                 EventKind::kStarvationWarning, EventKind::kCommandRejected}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(CommandKind kind) {
  switch (kind) {
    case CommandKind::kSetDesiredSpeed: return "set_desired_speed";
    case CommandKind::kHold: return "hold";
    case CommandKind::kRelease: return "release";
    case CommandKind::kDespawn: return "despawn";
  }
  return "hold";
}

std::optional<CommandKind> parse_command_kind(std::string_view name) {
  for (auto k : {CommandKind::kSetDesiredSpeed, CommandKind::kHold,
                 CommandKind::kRelease, CommandKind::kDespawn}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

// --- pure queries -------------------------------------------------------

std::optional<Leader> find_leader(const WorldMap& world,
                                  const std::vector<Vehicle>& vehicles,
                                  const Vehicle& v, double range) {
  (void)world;
  const Vehicle* best = nullptr;
  for (const Vehicle& u : vehicles) {
    if (!u.active || u.id == v.id || u.route_id != v.route_id) continue;
    if (u.arc_pos <= v.arc_pos) continue;
    if (best == nullptr || u.arc_pos < best->arc_pos ||
        (u.arc_pos == best->arc_pos && u.id < best->id)) {
      best = &u;
    }
  }
  if (best == nullptr) return std::nullopt;
  const double gap = std::max(0.0, best->arc_pos - v.front());
  if (gap > range) return std::nullopt;
  return Leader{gap, best->speed};
}

namespace {

std::vector<GridCoord> coords(const Route& route, IndexRange r) {
  std::vector<GridCoord> out;
  out.reserve(r.size());
  for (std::size_t k = r.first; k < r.last; ++k) out.push_back(route[k].position);
  return out;
}

IndexRange sweep_range(const WorldMap& world, const Route& route,
                       const Vehicle& v, double speed, double horizon) {
  return samples_closed(v.arc_pos, v.arc_pos + speed * horizon + v.footprint_length,
                        world.resolution(), route.size());
}

IndexRange body_range(const WorldMap& world, const Route& route,
                      const Vehicle& v) {
  return samples_half_open(v.arc_pos, v.front(), world.resolution(), route.size());
}

// Indices of shared segments of `route` inside `r`.
std::span<const std::size_t> shared_in(const Route& route, IndexRange r) {
  const auto& s = route.shared_indices();
  const auto lo = std::lower_bound(s.begin(), s.end(), r.first);
  const auto hi = std::lower_bound(lo, s.end(), r.last);
  return {lo, hi};
}

}  // namespace

std::vector<GridCoord> swept_points(const WorldMap& world, const Vehicle& v,
                                    double horizon) {
  const Route& route = world.route(v.route_id);
  return coords(route, sweep_range(world, route, v, v.speed, horizon));
}

std::vector<GridCoord> footprint_points(const WorldMap& world, const Vehicle& v) {
  const Route& route = world.route(v.route_id);
  return coords(route, body_range(world, route, v));
}

bool precedes(const WorldMap& world, const SimParams& params,
              std::uint32_t point, const Vehicle& u, const Vehicle& v) {
  const bool pu = detail::promoted(params, u);
  const bool pv = detail::promoted(params, v);
  if (pu != pv) return pu;
  const std::size_t ru = world.priority_at(point, u.route_id);
  const std::size_t rv = world.priority_at(point, v.route_id);
  return ru != WorldMap::npos && rv != WorldMap::npos && ru < rv;
}

bool intersection_clear(const WorldMap& world,
                        const std::vector<Vehicle>& vehicles, const Vehicle& v,
                        const SimParams& params) {
  const double h = params.intersection_horizon;
  const std::size_t slot = world.route_slot(v.route_id);
  const Route& route = world.routes()[slot];
  const IndexRange mine = sweep_range(world, route, v, v.speed, h);
  for (std::size_t k = mine.first; k < mine.last; ++k) {
    const std::uint32_t p = world.point_index(slot, k);
    if (!world.is_shared(p)) continue;
    const GridCoord at = world.point(p).position;
    for (const Vehicle& u : vehicles) {
      if (!u.active || u.id == v.id || u.route_id == v.route_id) continue;
      if (!precedes(world, params, p, u, v)) continue;
      const std::size_t uslot = world.route_slot(u.route_id);
      const Route& uroute = world.routes()[uslot];
      const auto uk = uroute.index_of(at);
      if (!uk) continue;
      const IndexRange theirs = sweep_range(world, uroute, u, u.speed, h);
      if (*uk >= theirs.first && *uk < theirs.last) return false;
    }
  }
  return true;
}

// --- occupancy ----------------------------------------------------------

void verify_occupancy(const WorldMap& world, const std::vector<Vehicle>& vehicles) {
  std::size_t owned = 0;
  for (const Vehicle& v : vehicles) {
    if (!v.active) continue;
    const std::size_t slot = world.route_slot(v.route_id);
    const Route& route = world.routes()[slot];
    const IndexRange body = body_range(world, route, v);
    for (std::size_t k = body.first; k < body.last; ++k) {
      const auto& car = world.point(world.point_index(slot, k)).car_id;
      if (!car) {
        throw Error(ErrorCode::kCorruptState,
                    "vehicle " + std::to_string(v.id) +
                        " covers an unoccupied node");
      }
      if (*car == v.id) {
        ++owned;
        continue;
      }
      // Only a colliding vehicle that also covers this node may own it.
      const bool valid = *car >= 0 &&
                         static_cast<std::size_t>(*car) < vehicles.size() &&
                         vehicles[*car].active;
      if (!valid) {
        throw Error(ErrorCode::kCorruptState,
                    "node owned by an unknown or inactive vehicle");
      }
    }
  }
  const std::size_t occupied = world.occupied_count();
  if (occupied != owned) {
    throw Error(ErrorCode::kCorruptState,
                "occupancy map holds " + std::to_string(occupied) +
                    " nodes but vehicle bodies account for " +
                    std::to_string(owned));
  }
}

std::vector<std::pair<VehicleId, VehicleId>> rebuild_occupancy(
    WorldMap& world, const std::vector<Vehicle>& vehicles) {
  world.clear_occupancy();
  std::vector<std::pair<VehicleId, VehicleId>> clashes;
  for (const Vehicle& v : vehicles) {
    if (!v.active) continue;
    const std::size_t slot = world.route_slot(v.route_id);
    const IndexRange body = body_range(world, world.routes()[slot], v);
    for (std::size_t k = body.first; k < body.last; ++k) {
      const auto& car = world.point(world.point_index(slot, k)).car_id;
      if (car && *car != v.id) {
        clashes.emplace_back(std::min(*car, v.id), std::max(*car, v.id));
        continue;
      }
      world.occupy(slot, k, v.id);
    }
  }
  std::sort(clashes.begin(), clashes.end());
  clashes.erase(std::unique(clashes.begin(), clashes.end()), clashes.end());
  return clashes;
}

// --- stepping -----------------------------------------------------------

namespace detail {

double intended_speed(const WorldMap& world, const SimParams& params,
                      const Vehicle& v) {
  return intended_speed(world.route(v.route_id), world.resolution(), params, v);
}

double intended_speed(const Route& route, double resolution, const SimParams& params,
                      const Vehicle& v) {
  if (v.external_hold) return 0.0;
  const double limit = route[route.segment_index_at(v.arc_pos, resolution)].speed_limit;
  double s = std::min(v.desired_speed, limit);
  if (params.accel_limit) s = std::min(s, v.speed + *params.accel_limit * params.tick_dt);
  return std::max(0.0, s);
}

bool promoted(const SimParams& params, const Vehicle& v) {
  return params.aging_enabled && v.wait_ticks > params.aging_max_wait;
}

void Stepper::add_claims(const WorldMap& world, VehicleId id, std::size_t slot,
                         IndexRange range) {
  sweeps_[id] = SweepSpan{slot, range};
  for (std::size_t k : shared_in(world.routes()[slot], range)) {
    const std::uint32_t p = world.point_index(slot, k);
    if (claims_[p].empty()) touched_.push_back(p);
    claims_[p].push_back(id);
  }
}

void Stepper::drop_claims(const WorldMap& world, VehicleId id) {
  const SweepSpan& s = sweeps_[id];
  for (std::size_t k : shared_in(world.routes()[s.slot], s.range)) {
    const std::uint32_t p = world.point_index(s.slot, k);
    auto& c = claims_[p];
    c.erase(std::remove(c.begin(), c.end(), id), c.end());
  }
  sweeps_[id] = SweepSpan{};
}

std::vector<SimEvent> Stepper::run(WorldMap& world, std::vector<Vehicle>& vehicles,
                                   const SimParams& params, Tick tick) {
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    if (vehicles[i].id != static_cast<VehicleId>(i)) {
      throw Error(ErrorCode::kCorruptState, "vehicle ids must match their index");
    }
  }
  verify_occupancy(world, vehicles);

  const double rho = world.resolution();
  const double dt = params.tick_dt;
  const double h_look = params.lookahead_horizon;
  const double h_cross = params.intersection_horizon;
  std::vector<SimEvent> events;

  for (std::uint32_t p : touched_) claims_[p].clear();
  touched_.clear();
  claims_.resize(world.points().size());
  sweeps_.assign(vehicles.size(), SweepSpan{});
  last_on_route_.assign(world.routes().size(), -1);

  order_.clear();
  slot_of_.assign(vehicles.size(), 0);
  for (const Vehicle& v : vehicles) {
    if (!v.active) continue;
    const std::size_t slot = world.route_slot(v.route_id);
    const Route& route = world.routes()[slot];
    slot_of_[v.id] = slot;
    order_.push_back({route.priority_rank(), -v.arc_pos, v.id});
    add_claims(world, v.id, slot,
               sweep_range(world, route, v, intended_speed(route, rho, params, v), h_cross));
  }
  // Front-most first within a route so leaders move before followers.
  std::sort(order_.begin(), order_.end());

  for (const OrderKey& key : order_) {
    Vehicle& v = vehicles[key.id];
    const std::size_t slot = slot_of_[v.id];
    const Route& route = world.routes()[slot];
    const std::size_t n = route.size();
    const double s = intended_speed(route, rho, params, v);

    const IndexRange body = body_range(world, route, v);
    const bool committed = !shared_in(route, body).empty();

    // Crossing check: yield to any higher-priority sweep at a shared node.
    // A vehicle already standing on a shared node never yields; it can only
    // clear the node by moving on.
    const IndexRange sweep = sweep_range(world, route, v, s, h_cross);
    bool near_shared = false;
    bool held = false;
    for (std::size_t k : shared_in(route, sweep)) {
      if (held) break;
      const std::uint32_t p = world.point_index(slot, k);
      near_shared = true;
      if (committed) continue;
      for (VehicleId other : claims_[p]) {
        if (other != v.id && precedes(world, params, p, vehicles[other], v)) {
          held = true;
          break;
        }
      }
    }

    if (held) {
      v.speed = 0.0;
      ++v.wait_ticks;
      events.push_back({tick, EventKind::kHeldAtIntersection, {v.id}});
      if (v.wait_ticks == params.aging_max_wait + 1) {
        events.push_back({tick, EventKind::kStarvationWarning, {v.id}});
      }
      last_on_route_[slot] = v.id;
      continue;
    }

    // Constraints ahead: the same-route leader, and any node of this route
    // held by a vehicle from another route.
    const double range = s * h_look;
    const double front = v.front();
    double hard = std::numeric_limits<double>::infinity();
    std::optional<double> leader_rear;
    std::optional<Leader> leader;
    if (const VehicleId li = last_on_route_[slot]; li >= 0) {
      const Vehicle& ahead = vehicles[li];
      if (ahead.active) {
        leader_rear = ahead.arc_pos;
        const double gap = std::max(0.0, ahead.arc_pos - front);
        hard = gap;
        if (gap <= range) leader = Leader{gap, ahead.speed};
      }
    }
    std::optional<double> obstacle_at;
    const IndexRange ahead = samples_closed(front, front + range, rho, n);
    for (std::size_t k = ahead.first; k < ahead.last; ++k) {
      const auto& car = world.point(world.point_index(slot, k)).car_id;
      if (car && *car != v.id && vehicles[*car].route_id != v.route_id) {
        obstacle_at = static_cast<double>(k) * rho;
        break;
      }
    }
    std::optional<Leader> obstacle;
    if (obstacle_at) {
      const double d = std::max(0.0, *obstacle_at - front);
      obstacle = Leader{d, 0.0};
      hard = std::min(hard, d);
    }

    LaneFollowDecision decision = lane_follow(s, leader, h_look);
    if (obstacle) {
      const LaneFollowDecision alt = lane_follow(s, obstacle, h_look);
      if (std::tie(alt.advance, alt.new_speed) <
          std::tie(decision.advance, decision.new_speed)) {
        decision = alt;
      }
    }

    double advance = decision.advance * (dt / h_look);
    double new_speed = decision.new_speed;
    if (advance > hard) {
      advance = hard;
      new_speed = std::min(new_speed, advance / dt);
    }
    if (params.accel_limit) {
      const double dv = *params.accel_limit * dt;
      new_speed = std::clamp(new_speed, v.speed - dv, v.speed + dv);
    }

    double new_arc = v.arc_pos + advance;
    // Keep the body strictly behind the constraint in floating point so the
    // half-open footprints stay disjoint.
    auto respect = [&](double bound) {
      if (new_arc + v.footprint_length <= bound) return;
      new_arc = std::max(v.arc_pos, bound - v.footprint_length);
      while (new_arc > v.arc_pos && new_arc + v.footprint_length > bound) {
        new_arc = std::nextafter(new_arc, -std::numeric_limits<double>::infinity());
      }
    };
    if (leader_rear) respect(*leader_rear);
    if (obstacle_at) respect(*obstacle_at);

    const IndexRange old_body = body;
    drop_claims(world, v.id);
    if (new_arc >= route.length()) {
      for (std::size_t k = old_body.first; k < old_body.last; ++k) {
        if (world.point(world.point_index(slot, k)).car_id == v.id) world.vacate(slot, k);
      }
      v.arc_pos = route.length();
      v.speed = std::max(0.0, new_speed);
      v.active = false;
      v.wait_ticks = 0;
      events.push_back({tick, EventKind::kDeactivated, {v.id}});
      last_on_route_[slot] = -1;
      continue;
    }

    v.arc_pos = new_arc;
    const double limit = route[route.segment_index_at(new_arc, rho)].speed_limit;
    v.speed = std::max(0.0, std::min({new_speed, v.desired_speed, limit}));
    if (v.external_hold) v.speed = 0.0;
    if (!near_shared) v.wait_ticks = 0;

    const IndexRange new_body = body_range(world, route, v);
    for (std::size_t k = old_body.first; k < std::min(old_body.last, new_body.first); ++k) {
      if (world.point(world.point_index(slot, k)).car_id == v.id) world.vacate(slot, k);
    }
    for (std::size_t k = std::max(old_body.last, new_body.first); k < new_body.last; ++k) {
      if (!world.point(world.point_index(slot, k)).car_id) world.occupy(slot, k, v.id);
    }
    add_claims(world, v.id, slot,
               sweep_range(world, route, v, intended_speed(route, rho, params, v), h_cross));
    last_on_route_[slot] = v.id;
  }

  // Occupancy is maintained incrementally above; any body node owned by a
  // different vehicle is a collision.
  std::vector<std::pair<VehicleId, VehicleId>> clashes;
  for (const OrderKey& key : order_) {
    const Vehicle& v = vehicles[key.id];
    if (!v.active) continue;
    const std::size_t slot = slot_of_[v.id];
    const IndexRange body = body_range(world, world.routes()[slot], v);
    for (std::size_t k = body.first; k < body.last; ++k) {
      const auto& car = world.point(world.point_index(slot, k)).car_id;
      if (!car) {
        world.occupy(slot, k, v.id);
      } else if (*car != v.id) {
        clashes.emplace_back(std::min(*car, v.id), std::max(*car, v.id));
      }
    }
  }
  std::sort(clashes.begin(), clashes.end());
  clashes.erase(std::unique(clashes.begin(), clashes.end()), clashes.end());
  for (const auto& [a, b] : clashes) {
    events.push_back({tick, EventKind::kCollision, {a, b}});
  }
  return events;
}

}  // namespace detail

std::vector<SimEvent> step(WorldMap& world, std::vector<Vehicle>& vehicles,
                           const SimParams& params, Tick tick) {
  detail::Stepper stepper;
  return stepper.run(world, vehicles, params, tick);
}

// --- Simulation ---------------------------------------------------------

Simulation::Simulation(WorldMap world, SimParams params)
    : world_(std::move(world)),
      params_(params),
      stepper_(std::make_unique<detail::Stepper>()) {
  validate(params_);
  world_.clear_occupancy();
}

Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;
Simulation& Simulation::operator=(Simulation&&) noexcept = default;

VehicleId Simulation::spawn(RouteId route_id, VehicleClass cls,
                            double desired_speed, Tick at_tick) {
  if (!world_.has_route(route_id)) {
    throw Error(ErrorCode::kNoSuchRoute,
                "route " + std::to_string(route_id) + " does not exist");
  }
  if (!std::isfinite(desired_speed) || desired_speed < 0.0) {
    throw Error(ErrorCode::kInvalidKinematics, "desired speed must be non-negative");
  }
  Vehicle v;
  v.id = static_cast<VehicleId>(vehicles_.size());
  v.cls = cls;
  v.route_id = route_id;
  v.desired_speed = desired_speed;
  v.footprint_length = default_footprint_length(cls);
  if (v.footprint_length < world_.resolution()) {
    throw Error(ErrorCode::kValidationError,
                "vehicle footprint is shorter than the world resolution");
  }
  vehicles_.push_back(v);
  const Pending entry{std::max<Tick>(at_tick, 0), v.id};
  auto it = std::upper_bound(pending_.begin(), pending_.end(), entry,
                             [](const Pending& a, const Pending& b) {
                               return std::tie(a.at_tick, a.id) < std::tie(b.at_tick, b.id);
                             });
  pending_.insert(it, entry);
  return v.id;
}

void Simulation::submit(Command command) { queue_.push_back(std::move(command)); }

void Simulation::deactivate(Vehicle& v) {
  const std::size_t slot = world_.route_slot(v.route_id);
  const IndexRange body = body_range(world_, world_.routes()[slot], v);
  for (std::size_t k = body.first; k < body.last; ++k) {
    if (world_.point(world_.point_index(slot, k)).car_id == v.id) world_.vacate(slot, k);
  }
  v.active = false;
  v.wait_ticks = 0;
}

std::vector<SimEvent> Simulation::apply_commands(const std::vector<Command>& commands,
                                                 Tick tick) {
  std::vector<SimEvent> events;
  for (const Command& c : commands) {
    const bool known = c.vehicle_id >= 0 &&
                       static_cast<std::size_t>(c.vehicle_id) < vehicles_.size();
    if (!known || !vehicles_[c.vehicle_id].active) {
      events.push_back({tick, EventKind::kCommandRejected, {c.vehicle_id}});
      continue;
    }
    Vehicle& v = vehicles_[c.vehicle_id];
    switch (c.kind) {
      case CommandKind::kSetDesiredSpeed: {
        if (!c.value || !std::isfinite(*c.value) || *c.value < 0.0) {
          events.push_back({tick, EventKind::kCommandRejected, {c.vehicle_id}});
          break;
        }
        v.desired_speed = std::min(*c.value, world_.route(v.route_id).max_speed_limit());
        v.speed = std::min(v.speed, v.desired_speed);
        break;
      }
      case CommandKind::kHold:
        v.external_hold = true;
        v.speed = 0.0;
        break;
      case CommandKind::kRelease:
        v.external_hold = false;
        break;
      case CommandKind::kDespawn:
        deactivate(v);
        events.push_back({tick, EventKind::kDeactivated, {v.id}});
        break;
    }
  }
  return events;
}

void Simulation::materialize_spawns(Tick tick, std::vector<SimEvent>& events) {
  std::vector<std::size_t> blocked;
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->at_tick > tick) break;
    Vehicle& v = vehicles_[it->id];
    const std::size_t slot = world_.route_slot(v.route_id);
    if (std::find(blocked.begin(), blocked.end(), slot) != blocked.end()) {
      ++it;
      continue;
    }
    const Route& route = world_.routes()[slot];
    v.arc_pos = 0.0;
    const IndexRange body = body_range(world_, route, v);
    bool free = true;
    for (std::size_t k = body.first; k < body.last && free; ++k) {
      free = !world_.point(world_.point_index(slot, k)).car_id;
    }
    if (!free) {
      blocked.push_back(slot);  // later spawns on this route wait their turn
      ++it;
      continue;
    }
    v.speed = std::min(v.desired_speed, route[0].speed_limit);
    v.active = true;
    v.spawned = true;
    for (std::size_t k = body.first; k < body.last; ++k) world_.occupy(slot, k, v.id);
    events.push_back({tick, EventKind::kSpawned, {v.id}});
    it = pending_.erase(it);
  }
}

TickReport Simulation::advance() {
  TickReport report;
  report.tick = next_tick_;
  report.commands = std::move(queue_);
  queue_.clear();
  report.events = apply_commands(report.commands, report.tick);
  auto moved = stepper_->run(world_, vehicles_, params_, report.tick);
  report.events.insert(report.events.end(), moved.begin(), moved.end());
  materialize_spawns(report.tick, report.events);
  ++next_tick_;
  return report;
}

}  // namespace gridtraffic
