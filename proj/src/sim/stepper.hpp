#pragma once

#include <cstdint>
#include <vector>

#include "gridtraffic/sim/engine.hpp"

namespace gridtraffic::detail {

// Speed a vehicle tries to drive this tick before interactions: desired speed
// capped by the local speed limit (and the optional acceleration limit).
double intended_speed(const WorldMap& world, const SimParams& params,
                      const Vehicle& v);

double intended_speed(const Route& route, double resolution, const SimParams& params,
                      const Vehicle& v);

bool promoted(const SimParams& params, const Vehicle& v);

// Scratch state reused across ticks so stepping large worlds stays
// allocation-free in steady state.
class Stepper {
 public:
  std::vector<SimEvent> run(WorldMap& world, std::vector<Vehicle>& vehicles,
                            const SimParams& params, Tick tick);

 private:
  struct OrderKey {
    int rank;
    double neg_arc;
    VehicleId id;
    friend auto operator<=>(const OrderKey&, const OrderKey&) = default;
  };

  struct SweepSpan {
    std::size_t slot = 0;
    IndexRange range;
  };

  void add_claims(const WorldMap& world, VehicleId id, std::size_t slot,
                  IndexRange range);
  void drop_claims(const WorldMap& world, VehicleId id);

  std::vector<std::vector<VehicleId>> claims_;  // per point: sweeping vehicles
  std::vector<std::uint32_t> touched_;
  std::vector<SweepSpan> sweeps_;               // per vehicle
  std::vector<OrderKey> order_;
  std::vector<std::size_t> slot_of_;            // per vehicle
  std::vector<VehicleId> last_on_route_;        // per route slot
};

}  // namespace gridtraffic::detail
