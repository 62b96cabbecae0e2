#include "gridtraffic/scenario/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include "gridtraffic/core/error.hpp"
#include "gridtraffic/util/json_writer.hpp"
#include "json.hpp"

namespace gridtraffic {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kSchemaError, field + ": " + what, field);
}

[[noreturn]] void validation_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kValidationError, field + ": " + what, field);
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) schema_error(path.empty() ? "$" : path, "expected an object");
  for (const auto& [k, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      schema_error(join(path, k), "unknown field");
    }
  }
}

const json* member(const json& obj, std::string_view key) {
  auto it = obj.find(std::string(key));
  return it == obj.end() ? nullptr : &*it;
}

const json& required(const json& obj, const std::string& path, std::string_view key) {
  const json* v = member(obj, key);
  if (v == nullptr) schema_error(join(path, key), "missing required field");
  return *v;
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) schema_error(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(field, "expected a finite number");
  return d;
}

std::int64_t as_integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) schema_error(field, "expected an integer");
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(INT64_MAX)) schema_error(field, "integer out of range");
    return static_cast<std::int64_t>(u);
  }
  return v.get<std::int64_t>();
}

double number_or(const json& obj, const std::string& path, std::string_view key,
                 double fallback) {
  const json* v = member(obj, key);
  return v == nullptr ? fallback : as_number(*v, join(path, key));
}

Vec2 as_point(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2) schema_error(field, "expected [x, y]");
  return Vec2{as_number(v[0], index(field, 0)), as_number(v[1], index(field, 1))};
}

int as_int32(const json& v, const std::string& field) {
  const auto i = as_integer(v, field);
  if (i < INT32_MIN || i > INT32_MAX) schema_error(field, "integer out of range");
  return static_cast<int>(i);
}

SimParams parse_params(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"tick_dt", "lookahead_horizon", "intersection_horizon", "aging_enabled",
              "aging_max_wait", "accel_limit", "seed"});
  SimParams p;
  p.tick_dt = number_or(obj, path, "tick_dt", p.tick_dt);
  p.lookahead_horizon = number_or(obj, path, "lookahead_horizon", p.lookahead_horizon);
  p.intersection_horizon =
      number_or(obj, path, "intersection_horizon", p.intersection_horizon);
  if (const json* v = member(obj, "aging_enabled")) {
    if (!v->is_boolean()) schema_error(join(path, "aging_enabled"), "expected a boolean");
    p.aging_enabled = v->get<bool>();
  }
  if (const json* v = member(obj, "aging_max_wait")) {
    p.aging_max_wait = as_integer(*v, join(path, "aging_max_wait"));
  }
  if (const json* v = member(obj, "accel_limit"); v != nullptr && !v->is_null()) {
    p.accel_limit = as_number(*v, join(path, "accel_limit"));
  }
  if (const json* v = member(obj, "seed")) {
    const std::string f = join(path, "seed");
    if (!v->is_number_integer()) schema_error(f, "expected an integer");
    if (!v->is_number_unsigned() && v->get<std::int64_t>() < 0) {
      schema_error(f, "expected a non-negative integer");
    }
    p.seed = v->get<std::uint64_t>();
  }
  return p;
}

RouteSpec parse_route(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"id", "polyline", "lane_width", "thickness", "speed_limit", "priority_rank"});
  RouteSpec r;
  r.id = as_int32(required(obj, path, "id"), join(path, "id"));
  const json& poly = required(obj, path, "polyline");
  const std::string pf = join(path, "polyline");
  if (!poly.is_array()) schema_error(pf, "expected an array of [x, y] points");
  for (std::size_t i = 0; i < poly.size(); ++i) {
    r.polyline.push_back(as_point(poly[i], index(pf, i)));
  }
  r.lane_width = number_or(obj, path, "lane_width", r.lane_width);
  r.thickness = number_or(obj, path, "thickness", r.thickness);
  r.speed_limit = as_number(required(obj, path, "speed_limit"), join(path, "speed_limit"));
  if (const json* v = member(obj, "priority_rank")) {
    r.priority_rank = as_int32(*v, join(path, "priority_rank"));
  }
  return r;
}

SpawnSpec parse_spawn(const json& obj, const std::string& path) {
  check_keys(obj, path, {"tick", "route_id", "class", "desired_speed"});
  SpawnSpec s;
  s.tick = as_integer(required(obj, path, "tick"), join(path, "tick"));
  s.route_id = as_int32(required(obj, path, "route_id"), join(path, "route_id"));
  const json& cls = required(obj, path, "class");
  if (!cls.is_string()) schema_error(join(path, "class"), "expected a string");
  const auto parsed = parse_vehicle_class(cls.get<std::string>());
  if (!parsed) schema_error(join(path, "class"), "expected car, bus or police");
  s.cls = *parsed;
  s.desired_speed =
      as_number(required(obj, path, "desired_speed"), join(path, "desired_speed"));
  return s;
}

PadSpec parse_pad(const json& obj, const std::string& path) {
  check_keys(obj, path, {"center", "width", "length", "thickness"});
  PadSpec p;
  p.center = as_point(required(obj, path, "center"), join(path, "center"));
  p.width = as_number(required(obj, path, "width"), join(path, "width"));
  p.length = as_number(required(obj, path, "length"), join(path, "length"));
  p.thickness = number_or(obj, path, "thickness", p.thickness);
  return p;
}

void validate_scenario(const Scenario& s) {
  if (!(s.resolution > 0.0)) validation_error("resolution", "must be positive");
  if (s.max_shared_run < 1) validation_error("max_shared_run", "must be at least 1");
  std::set<RouteId> ids;
  for (std::size_t i = 0; i < s.routes.size(); ++i) {
    const RouteSpec& r = s.routes[i];
    const std::string path = index("routes", i);
    if (r.id < 0) validation_error(join(path, "id"), "must be non-negative");
    if (!ids.insert(r.id).second) validation_error(join(path, "id"), "duplicate route id");
    if (r.polyline.size() < 2) validation_error(join(path, "polyline"), "needs at least 2 vertices");
    if (!(r.speed_limit > 0.0)) validation_error(join(path, "speed_limit"), "must be positive");
    if (!(r.lane_width > 0.0)) validation_error(join(path, "lane_width"), "must be positive");
    if (r.thickness < 0.0) validation_error(join(path, "thickness"), "must be non-negative");
  }
  for (std::size_t i = 0; i < s.spawns.size(); ++i) {
    const SpawnSpec& sp = s.spawns[i];
    const std::string path = index("spawns", i);
    if (sp.tick < 0) validation_error(join(path, "tick"), "must be non-negative");
    if (ids.count(sp.route_id) == 0) validation_error(join(path, "route_id"), "unknown route");
    if (sp.desired_speed < 0.0) validation_error(join(path, "desired_speed"), "must be non-negative");
    if (default_footprint_length(sp.cls) < s.resolution) {
      validation_error(join(path, "class"), "vehicle is shorter than the resolution");
    }
  }
  for (std::size_t i = 0; i < s.intersection_pads.size(); ++i) {
    const PadSpec& p = s.intersection_pads[i];
    const std::string path = index("intersection_pads", i);
    if (!(p.width > 0.0)) validation_error(join(path, "width"), "must be positive");
    if (!(p.length > 0.0)) validation_error(join(path, "length"), "must be positive");
  }
  validate(s.params);
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is one past the offending character.
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw Error(ErrorCode::kParseError,
                "malformed JSON at line " + std::to_string(line) + ", column " +
                    std::to_string(col),
                {}, line, col);
  }

  check_keys(doc, "",
             {"resolution", "max_shared_run", "routes", "spawns", "params",
              "intersection_pads"});
  Scenario s;
  s.resolution = as_number(required(doc, "", "resolution"), "resolution");
  if (const json* v = member(doc, "max_shared_run")) {
    s.max_shared_run = as_int32(*v, "max_shared_run");
  }
  const json& routes = required(doc, "", "routes");
  if (!routes.is_array()) schema_error("routes", "expected an array");
  for (std::size_t i = 0; i < routes.size(); ++i) {
    s.routes.push_back(parse_route(routes[i], index("routes", i)));
  }
  if (const json* v = member(doc, "spawns")) {
    if (!v->is_array()) schema_error("spawns", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      s.spawns.push_back(parse_spawn((*v)[i], index("spawns", i)));
    }
  }
  if (const json* v = member(doc, "params")) s.params = parse_params(*v, "params");
  if (const json* v = member(doc, "intersection_pads")) {
    if (!v->is_array()) schema_error("intersection_pads", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      s.intersection_pads.push_back(parse_pad((*v)[i], index("intersection_pads", i)));
    }
  }
  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string emit_scenario(const Scenario& s) {
  // Numbers are written with full round-trip precision here (not the fixed
  // six-digit wire format) so parse(emit(s)) == s exactly.
  json doc = json::object();
  doc["resolution"] = s.resolution;
  doc["max_shared_run"] = s.max_shared_run;
  json routes = json::array();
  for (const RouteSpec& r : s.routes) {
    json poly = json::array();
    for (const Vec2& p : r.polyline) poly.push_back({p.x, p.y});
    routes.push_back({{"id", r.id},
                      {"polyline", poly},
                      {"lane_width", r.lane_width},
                      {"thickness", r.thickness},
                      {"speed_limit", r.speed_limit},
                      {"priority_rank", r.priority_rank}});
  }
  doc["routes"] = routes;
  json spawns = json::array();
  for (const SpawnSpec& sp : s.spawns) {
    spawns.push_back({{"tick", sp.tick},
                      {"route_id", sp.route_id},
                      {"class", std::string(to_string(sp.cls))},
                      {"desired_speed", sp.desired_speed}});
  }
  doc["spawns"] = spawns;
  const SimParams& p = s.params;
  doc["params"] = {{"tick_dt", p.tick_dt},
                   {"lookahead_horizon", p.lookahead_horizon},
                   {"intersection_horizon", p.intersection_horizon},
                   {"aging_enabled", p.aging_enabled},
                   {"aging_max_wait", p.aging_max_wait},
                   {"accel_limit", p.accel_limit ? json(*p.accel_limit) : json(nullptr)},
                   {"seed", p.seed}};
  json pads = json::array();
  for (const PadSpec& pad : s.intersection_pads) {
    pads.push_back({{"center", {pad.center.x, pad.center.y}},
                    {"width", pad.width},
                    {"length", pad.length},
                    {"thickness", pad.thickness}});
  }
  doc["intersection_pads"] = pads;
  return doc.dump(2) + "\n";
}

std::vector<GridCoord> resample_polyline(std::span<const Vec2> polyline,
                                         double resolution,
                                         std::vector<double>* headings) {
  std::vector<GridCoord> cells;
  if (headings != nullptr) headings->clear();
  if (polyline.empty()) return cells;

  auto push = [&](GridCoord c, double heading) {
    cells.push_back(c);
    if (headings != nullptr) headings->push_back(heading);
  };

  double first_heading = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vec2 a = polyline[i];
    const Vec2 b = polyline[i + 1];
    if (a.x != b.x || a.y != b.y) {
      first_heading = std::atan2(b.y - a.y, b.x - a.x);
      break;
    }
  }
  push(quantize(polyline[0].x, polyline[0].y, resolution), first_heading);

  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vec2 a = polyline[i];
    const Vec2 b = polyline[i + 1];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len = std::hypot(dx, dy);
    if (len == 0.0) continue;
    const double heading = std::atan2(dy, dx);
    // Perpendicular distance from a lattice node to this polyline piece.
    auto off_line = [&](GridCoord c) {
      const Vec2 w = world_position(c, resolution);
      return std::abs((w.x - a.x) * dy - (w.y - a.y) * dx) / len;
    };
    const auto steps = static_cast<std::size_t>(std::ceil(len / (resolution / 8.0)));
    for (std::size_t s = 1; s <= steps; ++s) {
      const double f = static_cast<double>(s) / static_cast<double>(steps);
      const GridCoord target =
          s == steps ? quantize(b.x, b.y, resolution)
                     : quantize(a.x + dx * f, a.y + dy * f, resolution);
      while (cells.back() != target) {
        const GridCoord last = cells.back();
        const std::int64_t di = target.i - last.i;
        const std::int64_t dj = target.j - last.j;
        const GridCoord step_i{last.i + (di > 0 ? 1 : -1), last.j};
        const GridCoord step_j{last.i, last.j + (dj > 0 ? 1 : -1)};
        if (di != 0 && dj != 0) {
          push(off_line(step_j) < off_line(step_i) ? step_j : step_i, heading);
        } else if (di != 0) {
          push(step_i, heading);
        } else {
          push(step_j, heading);
        }
      }
    }
  }
  return cells;
}

WorldMap build_world(const Scenario& scenario) {
  WorldMap world(scenario.resolution, scenario.max_shared_run);
  std::vector<std::size_t> order(scenario.routes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const RouteSpec& ra = scenario.routes[a];
    const RouteSpec& rb = scenario.routes[b];
    return std::tie(ra.priority_rank, ra.id) < std::tie(rb.priority_rank, rb.id);
  });
  for (std::size_t i : order) {
    const RouteSpec& spec = scenario.routes[i];
    const std::string path = index("routes", i);
    if (!(spec.speed_limit > 0.0)) validation_error(join(path, "speed_limit"), "must be positive");
    std::vector<double> headings;
    const auto cells = resample_polyline(spec.polyline, scenario.resolution, &headings);
    std::optional<Route> route;
    try {
      route.emplace(Route::from_cells(spec.id, cells, headings,
                                      {spec.lane_width, scenario.resolution, spec.thickness},
                                      spec.speed_limit));
    } catch (const Error& e) {
      validation_error(join(path, "polyline"), e.what());
    }
    try {
      world.register_route(std::move(*route), spec.priority_rank);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()), path);
    }
  }
  return world;
}

Simulation make_simulation(const Scenario& scenario) {
  Simulation sim(build_world(scenario), scenario.params);
  for (const SpawnSpec& sp : scenario.spawns) {
    sim.spawn(sp.route_id, sp.cls, sp.desired_speed, sp.tick);
  }
  return sim;
}

std::string emit_line_segments(const WorldMap& world, std::span<const PadSpec> pads) {
  const double rho = world.resolution();
  std::vector<const Route*> routes;
  for (const Route& r : world.routes()) routes.push_back(&r);
  std::sort(routes.begin(), routes.end(),
            [](const Route* a, const Route* b) { return a->id() < b->id(); });

  JsonWriter w;
  w.begin_object().key("segments").begin_array();
  for (const Route* r : routes) {
    for (const Segment& s : r->segments()) {
      const Vec2 p = world_position(s.position, rho);
      w.begin_object()
          .key("route_id").value(s.route_id)
          .key("seq_index").value(s.seq_index)
          .key("position").begin_array().value(p.x).value(p.y).value(0.0).end_array()
          .key("rotation").value(s.rotation * 180.0 / std::numbers::pi)
          .key("scale").begin_array()
          .value(s.scale.lane_width).value(s.scale.length).value(s.scale.thickness)
          .end_array()
          .end_object();
    }
  }
  w.end_array().key("intersections").begin_array();
  for (const PadSpec& pad : pads) {
    w.begin_object()
        .key("position").begin_array().value(pad.center.x).value(pad.center.y).value(0.0).end_array()
        .key("rotation").value(0.0)
        .key("scale").begin_array().value(pad.width).value(pad.length).value(pad.thickness).end_array()
        .end_object();
  }
  w.end_array().end_object();
  return w.take();
}

}  // namespace gridtraffic
