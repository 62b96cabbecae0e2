#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridtraffic/core/grid.hpp"
#include "gridtraffic/core/vehicle.hpp"
#include "gridtraffic/core/world.hpp"
#include "gridtraffic/sim/lane_follow.hpp"
#include "gridtraffic/sim/params.hpp"

namespace gridtraffic {

namespace detail {
class Stepper;
}

enum class EventKind {
  kSpawned,
  kDeactivated,
  kHeldAtIntersection,
  kCollision,
  kStarvationWarning,
  kCommandRejected,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

struct SimEvent {
  Tick tick = 0;
  EventKind kind = EventKind::kSpawned;
  std::vector<VehicleId> vehicle_ids;  // exactly two for collisions

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

enum class CommandKind { kSetDesiredSpeed, kHold, kRelease, kDespawn };

std::string_view to_string(CommandKind kind);
std::optional<CommandKind> parse_command_kind(std::string_view name);

struct Command {
  CommandKind kind = CommandKind::kHold;
  VehicleId vehicle_id = 0;
  std::optional<double> value;  // required iff kSetDesiredSpeed
  std::string client_tag;

  friend bool operator==(const Command&, const Command&) = default;
};

// --- pure queries -------------------------------------------------------

// Nearest active vehicle ahead of `v` on its own route whose bumper gap is
// within `range`. The gap is leader rear minus follower front, floored at 0.
std::optional<Leader> find_leader(const WorldMap& world,
                                  const std::vector<Vehicle>& vehicles,
                                  const Vehicle& v, double range);

// Lattice nodes of v's route whose arc lies in
// [arc_pos, arc_pos + speed * horizon + footprint_length], in arc order,
// clipped at the route end.
std::vector<GridCoord> swept_points(const WorldMap& world, const Vehicle& v,
                                    double horizon);

// Lattice nodes covered by the body of `v`: arcs in [arc_pos, front).
std::vector<GridCoord> footprint_points(const WorldMap& world, const Vehicle& v);

// True when `u` has strictly higher crossing priority than `v` at `point`
// (an index into world.points()). Aging promotion, when enabled, ranks
// promoted vehicles ahead of all others.
bool precedes(const WorldMap& world, const SimParams& params,
              std::uint32_t point, const Vehicle& u, const Vehicle& v);

// True iff no shared node in v's sweep over the intersection horizon is also
// swept by another active vehicle with strictly higher priority there.
bool intersection_clear(const WorldMap& world,
                        const std::vector<Vehicle>& vehicles, const Vehicle& v,
                        const SimParams& params);

// --- stepping -----------------------------------------------------------

// Advances every active vehicle by one tick in place. Vehicle ids must equal
// their index in `vehicles`. Throws kCorruptState when the occupancy stored
// in `world` disagrees with the vehicle footprints.
std::vector<SimEvent> step(WorldMap& world, std::vector<Vehicle>& vehicles,
                           const SimParams& params, Tick tick);

// Checks stored occupancy against vehicle footprints; throws kCorruptState.
void verify_occupancy(const WorldMap& world, const std::vector<Vehicle>& vehicles);

// Rebuilds occupancy from footprints. Returns vehicle pairs sharing a node.
std::vector<std::pair<VehicleId, VehicleId>> rebuild_occupancy(
    WorldMap& world, const std::vector<Vehicle>& vehicles);

struct TickReport {
  Tick tick = 0;
  std::vector<SimEvent> events;
  std::vector<Command> commands;  // in application order
};

// Owns the world and vehicles and drives ticks: commands at the tick
// boundary, then movement, then pending spawns.
class Simulation {
 public:
  Simulation(WorldMap world, SimParams params);
  ~Simulation();
  Simulation(Simulation&&) noexcept;
  Simulation& operator=(Simulation&&) noexcept;

  // Schedules a vehicle entering `route_id` at tick `at_tick` or the first
  // later tick whose entry cells are free. Returns its id immediately.
  VehicleId spawn(RouteId route_id, VehicleClass cls, double desired_speed,
                  Tick at_tick);

  // Queued; applied in arrival order at the start of the next tick.
  void submit(Command command);

  TickReport advance();

  Tick next_tick() const noexcept { return next_tick_; }
  const WorldMap& world() const noexcept { return world_; }
  WorldMap& mutable_world() noexcept { return world_; }
  const std::vector<Vehicle>& vehicles() const noexcept { return vehicles_; }
  const SimParams& params() const noexcept { return params_; }

 private:
  struct Pending {
    Tick at_tick;
    VehicleId id;
  };

  std::vector<SimEvent> apply_commands(const std::vector<Command>& commands,
                                       Tick tick);
  void materialize_spawns(Tick tick, std::vector<SimEvent>& events);
  void deactivate(Vehicle& v);

  WorldMap world_;
  SimParams params_;
  std::vector<Vehicle> vehicles_;
  std::vector<Pending> pending_;
  std::vector<Command> queue_;
  Tick next_tick_ = 0;
  std::unique_ptr<detail::Stepper> stepper_;
};

}  // namespace gridtraffic
