#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <optional>
#include <set>

#include "fixtures.hpp"
#include "gridtraffic/core/error.hpp"
#include "gridtraffic/core/grid.hpp"
#include "gridtraffic/core/vehicle.hpp"
#include "gridtraffic/core/world.hpp"

namespace gt = gridtraffic;
using gt::ErrorCode;
using gt::GridCoord;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const gt::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoError;
}

}  // namespace

TEST(Quantize, Origin) { EXPECT_EQ(gt::quantize(0.0, 0.0, 0.5), (GridCoord{0, 0})); }

TEST(Quantize, RoundsToNearest) {
  EXPECT_EQ(gt::quantize(1.24, -0.74, 0.5), (GridCoord{2, -1}));
}

TEST(Quantize, HalfAwayFromZero) {
  EXPECT_EQ(gt::quantize(0.25, 0.25, 0.5), (GridCoord{1, 1}));
  EXPECT_EQ(gt::quantize(-0.25, -0.75, 0.5), (GridCoord{-1, -2}));
}

TEST(Quantize, RejectsNonFinite) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(code_of([&] { gt::quantize(nan, 0.0, 1.0); }), ErrorCode::kInvalidCoordinate);
  EXPECT_EQ(code_of([&] { gt::quantize(0.0, inf, 1.0); }), ErrorCode::kInvalidCoordinate);
  EXPECT_EQ(code_of([&] { gt::quantize(0.0, 0.0, 0.0); }), ErrorCode::kInvalidCoordinate);
}

TEST(Quantize, IdempotentOnLattice) {
  for (double rho : {0.25, 0.5, 1.0, 0.3, 2.0}) {
    for (std::int64_t i = -40; i <= 40; i += 7) {
      for (std::int64_t j = -40; j <= 40; j += 5) {
        const gt::Vec2 p = gt::world_position({i, j}, rho);
        EXPECT_EQ(gt::quantize(p.x, p.y, rho), (GridCoord{i, j})) << rho;
      }
    }
  }
}

TEST(Samples, HalfOpenAndClosed) {
  auto r = gt::samples_half_open(0.0, 4.0, 1.0, 100);
  EXPECT_EQ(r.first, 0u);
  EXPECT_EQ(r.last, 4u);
  r = gt::samples_closed(0.0, 4.0, 1.0, 100);
  EXPECT_EQ(r.last, 5u);
  r = gt::samples_half_open(0.5, 4.5, 1.0, 100);
  EXPECT_EQ(r.first, 1u);
  EXPECT_EQ(r.last, 5u);
  r = gt::samples_closed(95.0, 120.0, 1.0, 100);  // clipped at the end
  EXPECT_EQ(r.first, 95u);
  EXPECT_EQ(r.last, 100u);
  EXPECT_TRUE(gt::samples_half_open(3.0, 3.0, 1.0, 100).empty());
}

TEST(Samples, AgreesWithDirectComparison) {
  for (double rho : {0.1, 0.3, 0.5, 0.7}) {
    for (int a = 0; a < 60; ++a) {
      const double lo = a * 0.173;
      const double hi = lo + 2.9;
      const auto r = gt::samples_half_open(lo, hi, rho, 1000);
      for (std::size_t k = 0; k < 100; ++k) {
        const double x = static_cast<double>(k) * rho;
        EXPECT_EQ(k >= r.first && k < r.last, x >= lo && x < hi) << rho << " " << k;
      }
    }
  }
}

TEST(Route, ChainMustBeContinuous) {
  std::vector<gt::Segment> segs(2);
  segs[0].position = {0, 0};
  segs[0].next_position = GridCoord{1, 0};
  segs[0].speed_limit = 5.0;
  segs[1].seq_index = 1;
  segs[1].position = {2, 0};  // link says (1, 0)
  segs[1].prev_position = GridCoord{0, 0};
  segs[1].speed_limit = 5.0;
  EXPECT_EQ(code_of([&] { gt::Route r(0, segs); }), ErrorCode::kInvalidRoute);
}

TEST(Route, NoRepeatedPosition) {
  std::vector<GridCoord> cells{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}};
  std::vector<double> rot(cells.size(), 0.0);
  EXPECT_EQ(code_of([&] { gt::Route::from_cells(0, cells, rot, {3.5, 1.0, 0.2}, 5.0); }),
            ErrorCode::kInvalidRoute);
}

TEST(Route, SpeedLimitPositive) {
  EXPECT_EQ(code_of([&] { fixture::line_route(0, {0, 0}, 1, 0, 5, 0.0); }),
            ErrorCode::kInvalidRoute);
}

TEST(Route, PositionAlongChain) {
  gt::WorldMap w(0.5);
  w.register_route(fixture::line_route(0, {0, 0}, 1, 0, 10, 5.0, 3.5, 0.5), 0);
  const gt::Route& r = w.route(0);
  EXPECT_DOUBLE_EQ(r.length(), 5.0);
  const gt::Vec2 p = r.position_at(1.25, 0.5);
  EXPECT_DOUBLE_EQ(p.x, 1.25);
  EXPECT_DOUBLE_EQ(p.y, 0.0);
  // past the last node the heading is extrapolated
  EXPECT_DOUBLE_EQ(r.position_at(5.0, 0.5).x, 5.0);
  EXPECT_EQ(r.segment_index_at(1.25, 0.5), 2u);
}

TEST(SegmentByRoute, StraightRoute) {
  gt::WorldMap w(1.0);
  w.register_route(fixture::line_route(0, {0, 0}, 1, 0, 10), 0);
  EXPECT_EQ(w.segment_by_route(0, {3, 0}).seq_index, 3);
  EXPECT_EQ(code_of([&] { w.segment_by_route(0, {99, 0}); }), ErrorCode::kNotOnRoute);
  EXPECT_EQ(code_of([&] { w.segment_by_route(7, {3, 0}); }), ErrorCode::kNoSuchRoute);
}

TEST(SegmentByRoute, SharedPointReturnsRequestedRoute) {
  gt::WorldMap w(1.0);
  w.register_route(fixture::line_route(0, {0, 5}, 1, 0, 11), 0);
  w.register_route(fixture::line_route(1, {5, 0}, 0, 1, 11), 1);
  EXPECT_EQ(w.segment_by_route(1, {5, 5}).route_id, 1);
  EXPECT_EQ(w.segment_by_route(0, {5, 5}).route_id, 0);
}

TEST(SegmentByPoint, UniqueAmbiguousAndMissing) {
  gt::WorldMap w(1.0);
  w.register_route(fixture::line_route(0, {0, 5}, 1, 0, 11), 0);
  w.register_route(fixture::line_route(1, {5, 0}, 0, 1, 11), 1);
  EXPECT_EQ(w.segment_by_point({2, 5}).route_id, 0);
  EXPECT_EQ(code_of([&] { w.segment_by_point({5, 5}); }), ErrorCode::kAmbiguousPoint);
  EXPECT_EQ(w.segment_by_point({5, 5}, 1).route_id, 1);
  EXPECT_EQ(code_of([&] { w.segment_by_point({50, 50}); }), ErrorCode::kNoSuchPoint);
  EXPECT_EQ(code_of([&] { w.segment_by_point({2, 5}, 1); }), ErrorCode::kNotOnRoute);
}

TEST(RegisterRoute, PerpendicularCrossingSharesOnePoint) {
  gt::WorldMap w(1.0);
  w.register_route(fixture::line_route(0, {0, 5}, 1, 0, 11), 0);
  w.register_route(fixture::line_route(1, {5, 0}, 0, 1, 11), 1);
  std::size_t two = 0, one = 0;
  for (const auto& p : w.points()) {
    if (p.route_ls.size() == 2) ++two;
    if (p.route_ls.size() == 1) ++one;
  }
  EXPECT_EQ(two, 1u);
  EXPECT_EQ(one, 20u);
  EXPECT_EQ(w.shared_point_count(), 1u);
}

TEST(RegisterRoute, Duplicate) {
  gt::WorldMap w(1.0);
  w.register_route(fixture::line_route(0, {0, 0}, 1, 0, 5), 0);
  EXPECT_EQ(code_of([&] { w.register_route(fixture::line_route(0, {0, 3}, 1, 0, 5), 0); }),
            ErrorCode::kDuplicateRoute);
}

TEST(RegisterRoute, ParallelOverlapRejectedAtomically) {
  gt::WorldMap w(1.0);
  w.register_route(fixture::line_route(0, {0, 0}, 1, 0, 10), 0);
  const auto points_before = w.points().size();
  try {
    w.register_route(fixture::line_route(1, {0, 0}, 1, 0, 10), 1);
    FAIL() << "expected IllegalOverlap";
  } catch (const gt::Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIllegalOverlap);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("route 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("route 0"), std::string::npos) << msg;
  }
  EXPECT_FALSE(w.has_route(1));
  EXPECT_EQ(w.points().size(), points_before);
  for (const auto& p : w.points()) EXPECT_EQ(p.route_ls.size(), 1u);
}

TEST(RegisterRoute, ShortMergeWithinLimitAllowed) {
  gt::WorldMap w(1.0, 2);
  w.register_route(fixture::line_route(0, {0, 0}, 1, 0, 10), 0);
  // shares exactly (3,0),(4,0)
  std::vector<GridCoord> cells{{3, -3}, {3, -2}, {3, -1}, {3, 0}, {4, 0}, {4, 1}, {4, 2}};
  std::vector<double> rot(cells.size(), 0.0);
  w.register_route(gt::Route::from_cells(1, cells, rot, {3.5, 1.0, 0.2}, 5.0), 1);
  EXPECT_EQ(w.shared_point_count(), 2u);
  // three in a row exceeds the limit
  gt::WorldMap w2(1.0, 2);
  w2.register_route(fixture::line_route(0, {0, 0}, 1, 0, 10), 0);
  std::vector<GridCoord> c3{{3, -1}, {3, 0}, {4, 0}, {5, 0}, {5, 1}};
  std::vector<double> r3(c3.size(), 0.0);
  EXPECT_EQ(code_of([&] {
              w2.register_route(gt::Route::from_cells(1, c3, r3, {3.5, 1.0, 0.2}, 5.0), 1);
            }),
            ErrorCode::kIllegalOverlap);
}

TEST(RegisterRoute, RouteListOrderedByRankThenId) {
  gt::WorldMap w(1.0);
  w.register_route(fixture::line_route(5, {0, 5}, 1, 0, 11), 2);
  w.register_route(fixture::line_route(3, {5, 0}, 0, 1, 11), 2);
  std::vector<GridCoord> diag{{10, 0}, {9, 0}, {9, 1}, {8, 1}, {8, 2}, {7, 2}, {7, 3}, {6, 3},
                              {6, 4}, {5, 4}, {5, 5}, {4, 5}, {4, 6}};
  // touches (5,5) shared by routes 5 and 3; (5,4) is on route 3 and (4,5)
  // on route 5, so each run stays at 2
  std::vector<double> rot(diag.size(), 0.0);
  w.register_route(gt::Route::from_cells(1, diag, rot, {3.5, 1.0, 0.2}, 5.0), 1);
  const gt::PointRecord* p = w.find_point({5, 5});
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(p->route_ls, (std::vector<gt::RouteId>{1, 3, 5}));
}

TEST(WorldInvariants, RoundTripChainAndRouteLists) {
  const gt::Scenario s = fixture::load("four_way.json");
  const gt::WorldMap w = gt::build_world(s);
  for (const gt::Route& r : w.routes()) {
    // chain closure
    std::optional<GridCoord> at = r[0].position;
    std::size_t visited = 0;
    while (at) {
      const gt::Segment& seg = w.segment_by_route(r.id(), *at);
      EXPECT_EQ(static_cast<std::size_t>(seg.seq_index), visited);
      ++visited;
      at = seg.next_position;
    }
    EXPECT_EQ(visited, r.size());
    for (const gt::Segment& s2 : r.segments()) {
      const gt::Segment& a = w.segment_by_point(s2.position, r.id());
      const gt::Segment& b = w.segment_by_route(r.id(), s2.position);
      EXPECT_EQ(&a, &b);
    }
  }
  for (const gt::PointRecord& p : w.points()) {
    std::set<gt::RouteId> uniq(p.route_ls.begin(), p.route_ls.end());
    EXPECT_EQ(uniq.size(), p.route_ls.size());
    for (gt::RouteId id : p.route_ls) EXPECT_TRUE(w.route(id).index_of(p.position).has_value());
  }
}

TEST(Vehicle, ClassesAndFootprints) {
  EXPECT_EQ(gt::parse_vehicle_class("bus"), gt::VehicleClass::kBus);
  EXPECT_FALSE(gt::parse_vehicle_class("truck").has_value());
  EXPECT_EQ(gt::to_string(gt::VehicleClass::kPolice), "police");
  EXPECT_DOUBLE_EQ(gt::default_footprint_length(gt::VehicleClass::kCar), 4.0);
  EXPECT_GT(gt::default_footprint_length(gt::VehicleClass::kBus),
            gt::default_footprint_length(gt::VehicleClass::kCar));
}
