#pragma once

// Internal: nlohmann-based decoders shared by the protocol and trace code.

#include <string>

#include "gridtraffic/sim/engine.hpp"
#include "gridtraffic/stream/protocol.hpp"
#include "json.hpp"

namespace gridtraffic::detail {

Command command_from_json(const nlohmann::json& j, const std::string& path,
                          std::optional<VehicleId> path_vehicle = {});
PosePacket pose_from_json(const nlohmann::json& j, const std::string& path);
SimEvent event_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace gridtraffic::detail
