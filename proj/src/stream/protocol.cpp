#include "gridtraffic/stream/protocol.hpp"

#include <cmath>
#include <numbers>

#include "gridtraffic/core/error.hpp"
#include "json_decode.hpp"

namespace gridtraffic {

PosePacket make_pose(const WorldMap& world, const Vehicle& v, Tick tick) {
  const Route& route = world.route(v.route_id);
  const double rho = world.resolution();
  const Vec2 p = route.position_at(v.arc_pos, rho);
  PosePacket out;
  out.id = v.id;
  out.active = v.active;
  out.x = p.x;
  out.y = p.y;
  out.rotation = route.heading_at(v.arc_pos, rho) * 180.0 / std::numbers::pi;
  out.speed = v.active ? v.speed : 0.0;
  out.route = v.route_id;
  out.tick = tick;
  out.cls = v.cls;
  return out;
}

std::vector<PosePacket> snapshot_poses(const WorldMap& world,
                                       const std::vector<Vehicle>& vehicles,
                                       Tick tick) {
  std::vector<PosePacket> out;
  out.reserve(vehicles.size());
  for (const Vehicle& v : vehicles) {
    if (v.spawned) out.push_back(make_pose(world, v, tick));
  }
  return out;
}

void write_pose(JsonWriter& w, const PosePacket& p) {
  w.begin_object()
      .key("id").value(p.id)
      .key("active").value(p.active)
      .key("x").value(p.x)
      .key("y").value(p.y)
      .key("rotation").value(p.rotation)
      .key("speed").value(p.speed)
      .key("route").value(p.route)
      .key("tick").value(static_cast<std::int64_t>(p.tick))
      .key("class").value(to_string(p.cls))
      .end_object();
}

void write_event(JsonWriter& w, const SimEvent& e) {
  w.begin_object()
      .key("tick").value(static_cast<std::int64_t>(e.tick))
      .key("kind").value(to_string(e.kind))
      .key("vehicle_ids").begin_array();
  for (VehicleId id : e.vehicle_ids) w.value(id);
  w.end_array().end_object();
}

void write_command(JsonWriter& w, const Command& c) {
  w.begin_object()
      .key("kind").value(to_string(c.kind))
      .key("vehicle_id").value(c.vehicle_id)
      .key("value");
  if (c.value) {
    w.value(*c.value);
  } else {
    w.null();
  }
  w.key("client_tag").value(c.client_tag).end_object();
}

std::string encode_pose(const PosePacket& p) {
  JsonWriter w;
  write_pose(w, p);
  return w.take();
}

std::string encode_command(const Command& c) {
  JsonWriter w;
  write_command(w, c);
  return w.take();
}

Command decode_command(std::string_view body, std::optional<VehicleId> path_vehicle) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body.begin(), body.end());
  } catch (const nlohmann::json::parse_error&) {
    throw Error(ErrorCode::kParseError, "command body is not valid JSON", "body");
  }
  return detail::command_from_json(j, "", path_vehicle);
}

namespace detail {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kSchemaError, field + ": " + what, field);
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

void only_keys(const json& j, const std::string& path,
               std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(path.empty() ? "body" : path, "expected an object");
  for (const auto& [k, _] : j.items()) {
    bool ok = false;
    for (const char* allowed : keys) ok = ok || k == allowed;
    if (!ok) bad(join(path, k.c_str()), "unknown field");
  }
}

const json& need(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) bad(join(path, key), "missing required field");
  return *it;
}

std::int64_t integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) bad(field, "expected an integer");
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    bad(field, "integer out of range");
  }
  return j.get<std::int64_t>();
}

std::int32_t id32(const json& j, const std::string& field) {
  const auto v = integer(j, field);
  if (v < INT32_MIN || v > INT32_MAX) bad(field, "integer out of range");
  return static_cast<std::int32_t>(v);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) bad(field, "expected a number");
  const double d = j.get<double>();
  if (!std::isfinite(d)) bad(field, "expected a finite number");
  return d;
}

const std::string& text(const json& j, const std::string& field) {
  if (!j.is_string()) bad(field, "expected a string");
  return j.get_ref<const std::string&>();
}

}  // namespace

Command command_from_json(const json& j, const std::string& path,
                          std::optional<VehicleId> path_vehicle) {
  only_keys(j, path, {"kind", "vehicle_id", "value", "client_tag"});
  Command c;
  const std::string kind_field = join(path, "kind");
  const auto kind = parse_command_kind(text(need(j, path, "kind"), kind_field));
  if (!kind) bad(kind_field, "expected set_desired_speed, hold, release or despawn");
  c.kind = *kind;

  const std::string id_field = join(path, "vehicle_id");
  if (auto it = j.find("vehicle_id"); it != j.end()) {
    c.vehicle_id = id32(*it, id_field);
    if (path_vehicle && c.vehicle_id != *path_vehicle) {
      bad(id_field, "does not match the vehicle in the URL");
    }
  } else if (path_vehicle) {
    c.vehicle_id = *path_vehicle;
  } else {
    bad(id_field, "missing required field");
  }

  const std::string value_field = join(path, "value");
  if (auto it = j.find("value"); it != j.end() && !it->is_null()) {
    c.value = number(*it, value_field);
  }
  if (c.kind == CommandKind::kSetDesiredSpeed) {
    if (!c.value) bad(value_field, "required for set_desired_speed");
    if (*c.value < 0.0) bad(value_field, "must be non-negative");
  } else if (c.value) {
    bad(value_field, "only allowed for set_desired_speed");
  }

  if (auto it = j.find("client_tag"); it != j.end()) {
    c.client_tag = text(*it, join(path, "client_tag"));
  }
  return c;
}

PosePacket pose_from_json(const json& j, const std::string& path) {
  only_keys(j, path, {"id", "active", "x", "y", "rotation", "speed", "route", "tick", "class"});
  PosePacket p;
  p.id = id32(need(j, path, "id"), join(path, "id"));
  const json& active = need(j, path, "active");
  if (!active.is_boolean()) bad(join(path, "active"), "expected a boolean");
  p.active = active.get<bool>();
  p.x = number(need(j, path, "x"), join(path, "x"));
  p.y = number(need(j, path, "y"), join(path, "y"));
  p.rotation = number(need(j, path, "rotation"), join(path, "rotation"));
  p.speed = number(need(j, path, "speed"), join(path, "speed"));
  p.route = id32(need(j, path, "route"), join(path, "route"));
  p.tick = integer(need(j, path, "tick"), join(path, "tick"));
  const std::string cls_field = join(path, "class");
  const auto cls = parse_vehicle_class(text(need(j, path, "class"), cls_field));
  if (!cls) bad(cls_field, "unknown vehicle class");
  p.cls = *cls;
  return p;
}

SimEvent event_from_json(const json& j, const std::string& path) {
  only_keys(j, path, {"tick", "kind", "vehicle_ids"});
  SimEvent e;
  e.tick = integer(need(j, path, "tick"), join(path, "tick"));
  const std::string kind_field = join(path, "kind");
  const auto kind = parse_event_kind(text(need(j, path, "kind"), kind_field));
  if (!kind) bad(kind_field, "unknown event kind");
  e.kind = *kind;
  const std::string ids_field = join(path, "vehicle_ids");
  const json& ids = need(j, path, "vehicle_ids");
  if (!ids.is_array()) bad(ids_field, "expected an array");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    e.vehicle_ids.push_back(id32(ids[i], ids_field + "[" + std::to_string(i) + "]"));
  }
  return e;
}

}  // namespace detail

}  // namespace gridtraffic
