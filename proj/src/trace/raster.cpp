#include "gridtraffic/trace/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gridtraffic/core/error.hpp"
#include "gridtraffic/util/json_writer.hpp"

namespace gridtraffic {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Unit vector for a heading in degrees; exact on multiples of 90 so that
// axis-aligned footprints rasterize without rounding noise.
Vec2 unit(double deg) {
  const double quarter = deg / 90.0;
  const double r = std::round(quarter);
  if (std::abs(quarter - r) < 1e-11) {
    switch (((static_cast<long long>(r) % 4) + 4) % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  const double rad = deg / kRadToDeg;
  return {std::cos(rad), std::sin(rad)};
}

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
Vec2 sub(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 add_scaled(Vec2 a, Vec2 d, double s) { return {a.x + d.x * s, a.y + d.y * s}; }

std::size_t channel_for(VehicleClass cls) {
  switch (cls) {
    case VehicleClass::kCar: return 0;
    case VehicleClass::kBus: return 1;
    case VehicleClass::kPolice: return 2;
  }
  return 0;
}

std::array<Vec2, 4> corners(const OrientedRect& r) {
  const Vec2 h = unit(r.heading);
  const Vec2 n = unit(r.heading + 90.0);
  std::array<Vec2, 4> out;
  int k = 0;
  for (double sa : {-0.5, 0.5}) {
    for (double sb : {-0.5, 0.5}) {
      out[k++] = add_scaled(add_scaled(r.center, h, sa * r.length), n, sb * r.width);
    }
  }
  return out;
}

std::vector<OrientedRect> road_rects(const WorldMap& world) {
  std::vector<const Route*> routes;
  for (const Route& r : world.routes()) routes.push_back(&r);
  std::sort(routes.begin(), routes.end(),
            [](const Route* a, const Route* b) { return a->id() < b->id(); });
  std::vector<OrientedRect> out;
  for (const Route* r : routes) {
    for (const Segment& s : r->segments()) {
      out.push_back({world_position(s.position, world.resolution()),
                     s.rotation * kRadToDeg, s.scale.length, s.scale.lane_width});
    }
  }
  return out;
}

OrientedRect pad_rect(const PadSpec& pad) {
  return {pad.center, 0.0, pad.width, pad.length};
}

struct Bounds {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
  bool any = false;
  void add(Vec2 p) {
    if (!any) {
      min_x = max_x = p.x;
      min_y = max_y = p.y;
      any = true;
      return;
    }
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  void add(const OrientedRect& r) {
    for (Vec2 c : corners(r)) add(c);
  }
};

Bounds scene_bounds(const WorldMap& world, std::span<const PadSpec> pads,
                    const TraceFrame& frame) {
  Bounds b;
  for (const OrientedRect& r : road_rects(world)) b.add(r);
  for (const PadSpec& p : pads) b.add(pad_rect(p));
  for (const PosePacket& p : frame.vehicles) {
    if (p.active) b.add(vehicle_rect(world, p));
  }
  return b;
}

}  // namespace

std::size_t ChannelFrame::count(std::size_t channel) const {
  return static_cast<std::size_t>(
      std::count(channels[channel].begin(), channels[channel].end(), std::uint8_t{1}));
}

std::size_t ChannelFrame::channel_index(std::string_view name) {
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    if (name == kChannelNames[i]) return i;
  }
  return static_cast<std::size_t>(-1);
}

OrientedRect vehicle_rect(const WorldMap& world, const PosePacket& pose) {
  const Route& route = world.route(pose.route);
  const double length = default_footprint_length(pose.cls);
  const Vec2 h = unit(pose.rotation);
  return {add_scaled({pose.x, pose.y}, h, length / 2.0), pose.rotation, length,
          route.size() > 0 ? route[0].scale.lane_width : 0.0};
}

Vec2 cell_center(const ChannelFrame& f, std::size_t row, std::size_t col) {
  const Vec2 up = unit(f.up_heading);
  const Vec2 right = unit(f.up_heading - 90.0);
  const double c = f.cell_size;
  return add_scaled(add_scaled(f.origin, right, (static_cast<double>(col) + 0.5) * c), up,
                    -(static_cast<double>(row) + 0.5) * c);
}

void fill_rect(const ChannelFrame& f, const OrientedRect& rect,
               std::vector<std::uint8_t>& grid) {
  if (f.width == 0 || f.height == 0) return;
  const Vec2 up = unit(f.up_heading);
  const Vec2 right = unit(f.up_heading - 90.0);
  const double c = f.cell_size;
  // Continuous (row, col) of each corner, in units where centers are integers.
  double r_lo = INFINITY, r_hi = -INFINITY, c_lo = INFINITY, c_hi = -INFINITY;
  for (Vec2 p : corners(rect)) {
    const Vec2 d = sub(p, f.origin);
    const double col = dot(d, right) / c - 0.5;
    const double row = -dot(d, up) / c - 0.5;
    r_lo = std::min(r_lo, row);
    r_hi = std::max(r_hi, row);
    c_lo = std::min(c_lo, col);
    c_hi = std::max(c_hi, col);
  }
  const double max_row = static_cast<double>(f.height - 1);
  const double max_col = static_cast<double>(f.width - 1);
  if (r_hi < 0.0 || c_hi < 0.0 || r_lo > max_row || c_lo > max_col) return;
  const auto row0 = static_cast<std::size_t>(std::max(0.0, std::floor(r_lo)));
  const auto row1 = static_cast<std::size_t>(std::min(max_row, std::ceil(r_hi)));
  const auto col0 = static_cast<std::size_t>(std::max(0.0, std::floor(c_lo)));
  const auto col1 = static_cast<std::size_t>(std::min(max_col, std::ceil(c_hi)));

  const Vec2 h = unit(rect.heading);
  const Vec2 n = unit(rect.heading + 90.0);
  const double hl = rect.length / 2.0;
  const double hw = rect.width / 2.0;
  for (std::size_t row = row0; row <= row1; ++row) {
    for (std::size_t col = col0; col <= col1; ++col) {
      const Vec2 d = sub(cell_center(f, row, col), rect.center);
      const double a = dot(d, h);
      const double b = dot(d, n);
      if (a >= -hl && a < hl && b >= -hw && b < hw) grid[row * f.width + col] = 1;
    }
  }
}

ChannelFrame rasterize(const WorldMap& world, std::span<const PadSpec> pads,
                       const TraceFrame& frame, const View& view, double cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw Error(ErrorCode::kValidationError, "cell size must be positive", "cell");
  }
  ChannelFrame f;
  f.cell_size = cell_size;
  if (const auto* bird = std::get_if<BirdView>(&view)) {
    Bounds b;
    if (bird->bounds) {
      b.add(bird->bounds->first);
      b.add(bird->bounds->second);
    } else {
      b = scene_bounds(world, pads, frame);
    }
    const double x0 = std::floor(b.min_x / cell_size) * cell_size;
    const double x1 = std::ceil(b.max_x / cell_size) * cell_size;
    const double y0 = std::floor(b.min_y / cell_size) * cell_size;
    const double y1 = std::ceil(b.max_y / cell_size) * cell_size;
    f.width = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround((x1 - x0) / cell_size)));
    f.height = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround((y1 - y0) / cell_size)));
    f.origin = {x0, y1};
    f.up_heading = 90.0;
  } else {
    const auto& vv = std::get<VehicleView>(view);
    auto it = std::find_if(frame.vehicles.begin(), frame.vehicles.end(),
                           [&](const PosePacket& p) { return p.id == vv.id && p.active; });
    if (it == frame.vehicles.end()) {
      throw Error(ErrorCode::kNoSuchVehicle,
                  "vehicle " + std::to_string(vv.id) + " is not in the frame");
    }
    const OrientedRect subject = vehicle_rect(world, *it);
    f.width = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(vv.window_width / cell_size)));
    f.height = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(vv.window_length / cell_size)));
    f.up_heading = subject.heading;
    const Vec2 up = unit(f.up_heading);
    const Vec2 right = unit(f.up_heading - 90.0);
    f.origin = add_scaled(add_scaled(subject.center, right,
                                     -static_cast<double>(f.width) * cell_size / 2.0),
                          up, static_cast<double>(f.height) * cell_size / 2.0);
  }
  f.channels.assign(kChannelCount, std::vector<std::uint8_t>(f.width * f.height, 0));

  for (const OrientedRect& r : road_rects(world)) fill_rect(f, r, f.channels[3]);
  for (const PadSpec& p : pads) fill_rect(f, pad_rect(p), f.channels[4]);
  for (const PosePacket& p : frame.vehicles) {
    if (p.active) fill_rect(f, vehicle_rect(world, p), f.channels[channel_for(p.cls)]);
  }
  return f;
}

// --- export -------------------------------------------------------------

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, sizeof v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error(ErrorCode::kRenderError, "cannot write " + path);
}

struct ByteReader {
  const std::string& data;
  std::size_t pos = 0;

  void need(std::size_t n) {
    if (pos + n > data.size()) throw Error(ErrorCode::kRenderError, "truncated channel file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos++])) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos++])) << (8 * i);
    double d;
    std::memcpy(&d, &v, sizeof d);
    return d;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

void write_channel_binary(const ChannelFrame& f, const std::string& path) {
  std::string out = "CHFR";
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(f.height));
  put_u32(out, static_cast<std::uint32_t>(f.width));
  put_f64(out, f.cell_size);
  put_f64(out, f.origin.x);
  put_f64(out, f.origin.y);
  put_f64(out, f.up_heading);
  put_u32(out, static_cast<std::uint32_t>(f.channels.size()));
  for (std::size_t i = 0; i < f.channels.size(); ++i) {
    const std::string_view name = kChannelNames[i];
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.append(name);
  }
  for (const auto& ch : f.channels) out.append(ch.begin(), ch.end());
  write_file(path, out);
}

ChannelFrame read_channel_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kRenderError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  ByteReader r{data};
  if (r.bytes(4) != "CHFR") throw Error(ErrorCode::kRenderError, "not a channel file");
  if (r.u32() != 1) throw Error(ErrorCode::kRenderError, "unsupported channel file version");
  ChannelFrame f;
  f.height = r.u32();
  f.width = r.u32();
  f.cell_size = r.f64();
  f.origin.x = r.f64();
  f.origin.y = r.f64();
  f.up_heading = r.f64();
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::string name = r.bytes(r.u32());
    if (i >= kChannelCount || name != kChannelNames[i]) {
      throw Error(ErrorCode::kRenderError, "unexpected channel " + name);
    }
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::string bytes = r.bytes(f.width * f.height);
    f.channels.emplace_back(bytes.begin(), bytes.end());
  }
  return f;
}

std::vector<std::string> write_channel_pgms(const ChannelFrame& f, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kRenderError, "cannot create " + dir + ": " + ec.message());
  std::vector<std::string> paths;
  for (std::size_t i = 0; i < f.channels.size(); ++i) {
    std::string out = "P5\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n255\n";
    for (std::uint8_t v : f.channels[i]) out.push_back(v ? static_cast<char>(255) : '\0');
    const std::string path = (std::filesystem::path(dir) / (std::string(kChannelNames[i]) + ".pgm")).string();
    write_file(path, out);
    paths.push_back(path);
  }
  return paths;
}

// --- svg ----------------------------------------------------------------

namespace {

void svg_rect(std::string& out, const OrientedRect& r, const char* cls, const char* fill,
              const char* stroke = nullptr) {
  out += "<rect class=\"";
  out += cls;
  out += "\" x=\"" + format_fixed6(r.center.x - r.length / 2.0) + "\" y=\"" +
         format_fixed6(r.center.y - r.width / 2.0) + "\" width=\"" + format_fixed6(r.length) +
         "\" height=\"" + format_fixed6(r.width) + "\" transform=\"rotate(" +
         format_fixed6(r.heading) + " " + format_fixed6(r.center.x) + " " +
         format_fixed6(r.center.y) + ")\" fill=\"";
  out += fill;
  out += "\"";
  if (stroke != nullptr) {
    out += " stroke=\"";
    out += stroke;
    out += "\" stroke-width=\"0.3\"";
  }
  out += "/>\n";
}

}  // namespace

std::string svg_document(const WorldMap& world, std::span<const PadSpec> pads,
                         const TraceFrame& frame) {
  Bounds b = scene_bounds(world, pads, frame);
  const double margin = 2.0;
  double x0 = b.min_x - margin, x1 = b.max_x + margin;
  double y0 = b.min_y - margin, y1 = b.max_y + margin;
  if (!b.any) {
    x0 = y0 = 0.0;
    x1 = y1 = 1.0;
  }
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" +
         format_fixed6(x0) + " " + format_fixed6(-y1) + " " + format_fixed6(x1 - x0) + " " +
         format_fixed6(y1 - y0) + "\">\n";
  out += "<rect class=\"background\" x=\"" + format_fixed6(x0) + "\" y=\"" + format_fixed6(-y1) +
         "\" width=\"" + format_fixed6(x1 - x0) + "\" height=\"" + format_fixed6(y1 - y0) +
         "\" fill=\"#e9efe4\"/>\n";
  if (b.any) {
    // World y points up; flip once for the whole scene.
    out += "<g transform=\"scale(1,-1)\">\n";
    for (const OrientedRect& r : road_rects(world)) svg_rect(out, r, "road", "#8c8c8c");
    for (const PadSpec& p : pads) svg_rect(out, pad_rect(p), "intersection", "#4a4a4a");
    for (const PosePacket& p : frame.vehicles) {
      if (!p.active) continue;
      const OrientedRect r = vehicle_rect(world, p);
      switch (p.cls) {
        case VehicleClass::kCar: svg_rect(out, r, "car", "#d62728"); break;
        case VehicleClass::kBus: svg_rect(out, r, "bus", "#1f5fd6"); break;
        case VehicleClass::kPolice: svg_rect(out, r, "police", "#ffffff", "#1f5fd6"); break;
      }
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

void render_svg(const WorldMap& world, std::span<const PadSpec> pads,
                const TraceFrame& frame, const std::string& path) {
  write_file(path, svg_document(world, pads, frame));
}

}  // namespace gridtraffic
