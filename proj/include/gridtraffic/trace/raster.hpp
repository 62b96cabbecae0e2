#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gridtraffic/core/world.hpp"
#include "gridtraffic/scenario/scenario.hpp"
#include "gridtraffic/trace/trace.hpp"

namespace gridtraffic {

// Channel names in storage order. Pedestrians and bicycles are reserved and
// always empty.
inline constexpr const char* kChannelNames[] = {
    "cars", "buses", "police", "roads", "intersections", "pedestrians", "bicycles"};
inline constexpr std::size_t kChannelCount = std::size(kChannelNames);

// Stack of binary grids sharing one oriented raster. Row 0 is the top row.
// `origin` is the world position of the top-left corner of cell (0, 0);
// rows run against `up_heading`, columns along up_heading - 90 degrees.
struct ChannelFrame {
  std::size_t height = 0;
  std::size_t width = 0;
  double cell_size = 1.0;
  Vec2 origin;
  double up_heading = 90.0;  // degrees CCW from +x
  std::vector<std::vector<std::uint8_t>> channels;  // kChannelCount x (height*width)

  std::uint8_t at(std::size_t channel, std::size_t row, std::size_t col) const {
    return channels[channel][row * width + col];
  }
  std::size_t count(std::size_t channel) const;
  static std::size_t channel_index(std::string_view name);  // npos when unknown
};

// Street-light camera. Without explicit bounds the raster covers every road,
// pad and vehicle in the frame, snapped outward to whole cells.
struct BirdView {
  std::optional<std::pair<Vec2, Vec2>> bounds;  // (min, max)
};

// Car camera: centered on the vehicle's body center, heading up.
struct VehicleView {
  VehicleId id = 0;
  double window_width = 40.0;   // meters across
  double window_length = 40.0;  // meters along the heading
};

using View = std::variant<BirdView, VehicleView>;

// Cell centers strictly decide coverage: a cell is set iff its center lies in
// the footprint, with half-open extents [-a/2, a/2) on both local axes.
// Throws kNoSuchVehicle when a vehicle view names a vehicle absent from the
// frame (or inactive in it), kValidationError for a non-positive cell size.
ChannelFrame rasterize(const WorldMap& world, std::span<const PadSpec> pads,
                       const TraceFrame& frame, const View& view, double cell_size);

// Oriented rectangle used for footprints.
struct OrientedRect {
  Vec2 center;
  double heading = 0.0;  // degrees
  double length = 0.0;   // along heading
  double width = 0.0;    // across
};

OrientedRect vehicle_rect(const WorldMap& world, const PosePacket& pose);

// Marks one rectangle into a single grid shaped like `frame`.
void fill_rect(const ChannelFrame& frame, const OrientedRect& rect,
               std::vector<std::uint8_t>& grid);

// World position of the center of cell (row, col).
Vec2 cell_center(const ChannelFrame& frame, std::size_t row, std::size_t col);

// Flat binary export: "CHFR", u32 version, u32 height, u32 width, f64
// cell_size, f64 origin x, f64 origin y, f64 up_heading, u32 channel count,
// then per channel u32 name length + name bytes; then each channel's
// row-major bytes. Little endian. Throws kRenderError on I/O failure.
void write_channel_binary(const ChannelFrame& frame, const std::string& path);
ChannelFrame read_channel_binary(const std::string& path);

// One binary PGM (P5, 0/255) per channel into `dir`, named <channel>.pgm.
// Returns the written paths.
std::vector<std::string> write_channel_pgms(const ChannelFrame& frame,
                                            const std::string& dir);

// Deterministic top-down SVG snapshot. Element order: background, roads by
// (route id, seq), pads, vehicles by id.
std::string svg_document(const WorldMap& world, std::span<const PadSpec> pads,
                         const TraceFrame& frame);
void render_svg(const WorldMap& world, std::span<const PadSpec> pads,
                const TraceFrame& frame, const std::string& path);

}  // namespace gridtraffic
