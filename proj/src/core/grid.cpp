#include "gridtraffic/core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridtraffic/core/error.hpp"

namespace gridtraffic {

GridCoord quantize(double x, double y, double resolution) {
  if (!std::isfinite(resolution) || resolution <= 0.0) {
    throw Error(ErrorCode::kInvalidCoordinate,
                "resolution must be finite and positive");
  }
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw Error(ErrorCode::kInvalidCoordinate,
                "cannot quantize a non-finite position");
  }
  // std::round rounds halfway cases away from zero on every platform.
  return GridCoord{static_cast<std::int64_t>(std::round(x / resolution)),
                   static_cast<std::int64_t>(std::round(y / resolution))};
}

Vec2 world_position(GridCoord c, double resolution) {
  return Vec2{static_cast<double>(c.i) * resolution,
              static_cast<double>(c.j) * resolution};
}

namespace {

// Smallest k with k*res >= x.
std::int64_t first_at_or_above(double x, double res) {
  auto k = static_cast<std::int64_t>(std::ceil(x / res));
  while (static_cast<double>(k - 1) * res >= x) --k;
  while (static_cast<double>(k) * res < x) ++k;
  return k;
}

// Smallest k with k*res > x.
std::int64_t first_above(double x, double res) {
  auto k = static_cast<std::int64_t>(std::floor(x / res)) + 1;
  while (static_cast<double>(k - 1) * res > x) --k;
  while (static_cast<double>(k) * res <= x) ++k;
  return k;
}

IndexRange clip(std::int64_t first, std::int64_t last, std::size_t count) {
  const auto n = static_cast<std::int64_t>(count);
  first = std::clamp<std::int64_t>(first, 0, n);
  last = std::clamp<std::int64_t>(last, 0, n);
  if (last < first) last = first;
  return IndexRange{static_cast<std::size_t>(first),
                    static_cast<std::size_t>(last)};
}

}  // namespace

IndexRange samples_half_open(double lo, double hi, double resolution,
                             std::size_t count) {
  if (!(hi > lo)) return {};
  return clip(first_at_or_above(lo, resolution),
              first_at_or_above(hi, resolution), count);
}

IndexRange samples_closed(double lo, double hi, double resolution,
                          std::size_t count) {
  if (hi < lo) return {};
  return clip(first_at_or_above(lo, resolution), first_above(hi, resolution),
              count);
}

}  // namespace gridtraffic
