#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gridtraffic/core/vehicle.hpp"
#include "gridtraffic/core/world.hpp"
#include "gridtraffic/sim/engine.hpp"
#include "gridtraffic/util/json_writer.hpp"

namespace gridtraffic {

// Published pose of one vehicle. (x, y) is the rear bumper on the route
// centerline, rotation is in degrees CCW from +x.
struct PosePacket {
  VehicleId id = 0;
  bool active = false;
  double x = 0.0;
  double y = 0.0;
  double rotation = 0.0;
  double speed = 0.0;
  RouteId route = 0;
  Tick tick = 0;
  VehicleClass cls = VehicleClass::kCar;

  friend bool operator==(const PosePacket&, const PosePacket&) = default;
};

PosePacket make_pose(const WorldMap& world, const Vehicle& v, Tick tick);

// Every vehicle that has entered the world, in id order. Vehicles that left
// keep their last pose with active=false.
std::vector<PosePacket> snapshot_poses(const WorldMap& world,
                                       const std::vector<Vehicle>& vehicles,
                                       Tick tick);

void write_pose(JsonWriter& w, const PosePacket& p);
void write_event(JsonWriter& w, const SimEvent& e);
void write_command(JsonWriter& w, const Command& c);

std::string encode_pose(const PosePacket& p);
std::string encode_command(const Command& c);

// Strict decoder for command bodies. When `path_vehicle` is given the body
// may omit vehicle_id; if present it must agree. Throws kParseError or
// kSchemaError with field() naming the offending key.
Command decode_command(std::string_view body,
                       std::optional<VehicleId> path_vehicle = {});

}  // namespace gridtraffic
