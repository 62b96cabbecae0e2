#include "gridtraffic/core/vehicle.hpp"

namespace gridtraffic {

std::string_view to_string(VehicleClass cls) {
  switch (cls) {
    case VehicleClass::kCar: return "car";
    case VehicleClass::kBus: return "bus";
    case VehicleClass::kPolice: return "police";
  }
  return "car";
}

std::optional<VehicleClass> parse_vehicle_class(std::string_view name) {
  if (name == "car") return VehicleClass::kCar;
  if (name == "bus") return VehicleClass::kBus;
  if (name == "police") return VehicleClass::kPolice;
  return std::nullopt;
}

double default_footprint_length(VehicleClass cls) {
  switch (cls) {
    case VehicleClass::kCar: return 4.0;
    case VehicleClass::kBus: return 10.0;
    case VehicleClass::kPolice: return 4.5;
  }
  return 4.0;
}

}  // namespace gridtraffic
