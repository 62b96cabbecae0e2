#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace gridtraffic {

using RouteId = std::int32_t;
using VehicleId = std::int32_t;
using Tick = std::int64_t;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

// A node of the quantized world lattice. World position is (i, j) * resolution.
struct GridCoord {
  std::int64_t i = 0;
  std::int64_t j = 0;

  friend bool operator==(const GridCoord&, const GridCoord&) = default;
  friend auto operator<=>(const GridCoord&, const GridCoord&) = default;
};

struct GridCoordHash {
  std::size_t operator()(const GridCoord& c) const noexcept {
    const auto a = static_cast<std::uint64_t>(c.i);
    const auto b = static_cast<std::uint64_t>(c.j);
    return std::hash<std::uint64_t>{}(a * 0x9E3779B97F4A7C15ULL ^ (b + 0x632BE59BD9B4E019ULL + (a << 6) + (a >> 2)));
  }
};

// Rounds half away from zero on both axes. Throws kInvalidCoordinate for
// non-finite input or a non-positive resolution.
GridCoord quantize(double x, double y, double resolution);

Vec2 world_position(GridCoord c, double resolution);

// Half-open index range [first, last).
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;

  bool empty() const noexcept { return first >= last; }
  std::size_t size() const noexcept { return empty() ? 0 : last - first; }
};

// Sample indices k in [0, count) with lo <= k*resolution < hi. Comparisons use
// the double product k*resolution so membership agrees exactly with direct
// arc comparisons elsewhere.
IndexRange samples_half_open(double lo, double hi, double resolution,
                             std::size_t count);

// Sample indices k in [0, count) with lo <= k*resolution <= hi.
IndexRange samples_closed(double lo, double hi, double resolution,
                          std::size_t count);

}  // namespace gridtraffic
