#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "fixtures.hpp"
#include "gridtraffic/core/error.hpp"
#include "gridtraffic/trace/raster.hpp"
#include "gridtraffic/trace/trace.hpp"
#include "oracles.hpp"

namespace gt = gridtraffic;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kCars = 0, kBuses = 1, kPolice = 2, kRoads = 3;

gt::ChannelFrame blank(std::size_t h, std::size_t w, gt::Vec2 origin, double cell = 1.0) {
  gt::ChannelFrame f;
  f.height = h;
  f.width = w;
  f.cell_size = cell;
  f.origin = origin;
  f.channels.assign(gt::kChannelCount, std::vector<std::uint8_t>(h * w, 0));
  return f;
}

std::size_t ones(const std::vector<std::uint8_t>& g) {
  return static_cast<std::size_t>(std::count(g.begin(), g.end(), 1));
}

gt::PosePacket pose(gt::VehicleId id, gt::RouteId route, double x, double y, double rot,
                    gt::VehicleClass cls = gt::VehicleClass::kCar) {
  gt::PosePacket p;
  p.id = id;
  p.active = true;
  p.x = x;
  p.y = y;
  p.rotation = rot;
  p.route = route;
  p.cls = cls;
  return p;
}

}  // namespace

TEST(Raster, EmptyWorldIsAllZero) {
  const gt::WorldMap w(1.0);
  const gt::BirdView view{std::make_pair(gt::Vec2{0, 0}, gt::Vec2{10, 10})};
  const auto f = gt::rasterize(w, {}, gt::TraceFrame{}, view, 0.5);
  EXPECT_EQ(f.height, 20u);
  EXPECT_EQ(f.width, 20u);
  for (std::size_t c = 0; c < gt::kChannelCount; ++c) EXPECT_EQ(f.count(c), 0u);
}

TEST(Raster, AxisAlignedRectExactCount) {
  const auto f = blank(10, 10, {0, 10});
  std::vector<std::uint8_t> g(100, 0);
  gt::fill_rect(f, {{5.0, 5.0}, 0.0, 4.0, 2.0}, g);
  EXPECT_EQ(ones(g), 8u);
  // rotated by a quarter turn the same rect spans 2 columns and 4 rows
  std::fill(g.begin(), g.end(), 0);
  gt::fill_rect(f, {{5.0, 5.0}, 90.0, 4.0, 2.0}, g);
  EXPECT_EQ(ones(g), 8u);
  EXPECT_EQ(g[3 * 10 + 4], 1);   // center (4.5, 6.5)
  EXPECT_EQ(g[3 * 10 + 6], 0);   // center (6.5, 6.5) outside
}

TEST(Raster, HalfOpenEdges) {
  const auto f = blank(10, 10, {0, 10});
  std::vector<std::uint8_t> g(100, 0);
  // edges land exactly on cell centers: lower edges count, upper edges do not
  gt::fill_rect(f, {{5.5, 5.5}, 0.0, 2.0, 2.0}, g);
  EXPECT_EQ(ones(g), 4u);
}

TEST(Raster, CellCenterGeometry) {
  const auto f = blank(4, 6, {-3.0, 2.0}, 0.5);
  const gt::Vec2 c = gt::cell_center(f, 0, 0);
  EXPECT_DOUBLE_EQ(c.x, -2.75);
  EXPECT_DOUBLE_EQ(c.y, 1.75);
  const gt::Vec2 d = gt::cell_center(f, 3, 5);
  EXPECT_DOUBLE_EQ(d.x, -0.25);
  EXPECT_DOUBLE_EQ(d.y, 0.25);
}

TEST(Raster, ClassesGoToTheirChannels) {
  gt::WorldMap w(1.0);
  w.register_route(fixture::line_route(0, {0, 0}, 1, 0, 60, 10.0, 3.0), 0);
  gt::TraceFrame frame;
  frame.vehicles = {pose(0, 0, 2, 0, 0, gt::VehicleClass::kCar),
                    pose(1, 0, 10, 0, 0, gt::VehicleClass::kBus),
                    pose(2, 0, 30, 0, 0, gt::VehicleClass::kPolice)};
  frame.vehicles.push_back(pose(3, 0, 45, 0, 0));
  frame.vehicles.back().active = false;  // left the world: not drawn
  const auto f = gt::rasterize(w, {}, frame, gt::BirdView{}, 1.0);
  EXPECT_EQ(f.count(kCars), 4u * 3u);
  EXPECT_EQ(f.count(kBuses), 10u * 3u);
  // 4.5 m of police car covers only 4 cell centers along the lane
  EXPECT_EQ(f.count(kPolice), 4u * 3u);
  EXPECT_GT(f.count(kRoads), 0u);
  for (std::size_t k = 0; k < f.width * f.height; ++k) {
    EXPECT_LE(f.channels[kCars][k] + f.channels[kBuses][k] + f.channels[kPolice][k], 1);
  }
  EXPECT_EQ(f.count(gt::ChannelFrame::channel_index("pedestrians")), 0u);
  EXPECT_EQ(f.count(gt::ChannelFrame::channel_index("bicycles")), 0u);
}

TEST(Raster, VehicleViewHeadingUp) {
  gt::WorldMap w(1.0);
  w.register_route(fixture::line_route(0, {0, 0}, 1, 0, 60, 10.0, 3.0), 0);
  gt::TraceFrame frame;
  frame.vehicles = {pose(0, 0, 20, 0, 0), pose(1, 0, 30, 0, 0)};
  const auto f = gt::rasterize(w, {}, frame, gt::VehicleView{0, 40, 40}, 1.0);
  EXPECT_DOUBLE_EQ(f.up_heading, 0.0);
  // subject: 4 rows along the heading, 3 columns across, centered
  std::size_t rmin = f.height, rmax = 0, cmin = f.width, cmax = 0;
  double rsum = 0, csum = 0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < f.height; ++r) {
    for (std::size_t c = 0; c < f.width; ++c) {
      if (!f.at(kCars, r, c)) continue;
      // the leader 10 m ahead lies above
      if (r < 15) continue;
      rmin = std::min(rmin, r), rmax = std::max(rmax, r);
      cmin = std::min(cmin, c), cmax = std::max(cmax, c);
      rsum += r, csum += c, ++n;
    }
  }
  EXPECT_EQ(n, 12u);
  EXPECT_EQ(rmax - rmin + 1, 4u);
  EXPECT_EQ(cmax - cmin + 1, 3u);
  EXPECT_NEAR(rsum / n + 0.5, 20.0, 0.51);
  EXPECT_NEAR(csum / n + 0.5, 20.0, 0.51);
  EXPECT_EQ(f.count(kCars), 24u);
  // missing vehicle
  try {
    gt::rasterize(w, {}, frame, gt::VehicleView{9, 40, 40}, 1.0);
    FAIL();
  } catch (const gt::Error& e) {
    EXPECT_EQ(e.code(), gt::ErrorCode::kNoSuchVehicle);
  }
}

TEST(Raster, BadCellSize) {
  const gt::WorldMap w(1.0);
  try {
    gt::rasterize(w, {}, gt::TraceFrame{}, gt::BirdView{}, 0.0);
    FAIL();
  } catch (const gt::Error& e) {
    EXPECT_EQ(e.code(), gt::ErrorCode::kValidationError);
  }
}

// Random oriented rects: the lattice count stays within the supersampled
// area by less than the perimeter band.
TEST(Raster, RandomRectsAgreeWithSupersampling) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-5.0, 5.0), ang(0.0, 360.0), len(1.0, 12.0);
  const auto f = blank(60, 60, {-30, 30});
  for (int n = 0; n < 30; ++n) {
    const gt::OrientedRect r{{pos(rng), pos(rng)}, ang(rng), len(rng), len(rng) / 2 + 1};
    std::vector<std::uint8_t> g(f.width * f.height, 0);
    gt::fill_rect(f, r, g);
    const double area = oracle::supersampled_cells(
        oracle::make_quad(r.center, r.heading, r.length, r.width), 1.0, 16);
    EXPECT_NEAR(static_cast<double>(ones(g)), area, 2.0 * (r.length + r.width) * 0.5 + 1.0);
  }
}

TEST(Channels, BinaryRoundTripAndPgm) {
  const gt::Scenario s = fixture::load("four_way.json");
  gt::Simulation sim = gt::make_simulation(s);
  const auto run = gt::run_headless(sim, 120, {}, nullptr, true);
  const auto f = gt::rasterize(sim.world(), s.intersection_pads, run.frames.back(),
                               gt::BirdView{}, 0.5);
  const fs::path dir = fs::temp_directory_path() / "gridtraffic_tests" / "channels";
  fs::create_directories(dir);
  gt::write_channel_binary(f, (dir / "frame.chfr").string());
  const auto g = gt::read_channel_binary((dir / "frame.chfr").string());
  EXPECT_EQ(g.height, f.height);
  EXPECT_EQ(g.width, f.width);
  EXPECT_EQ(g.origin, f.origin);
  EXPECT_EQ(g.up_heading, f.up_heading);
  EXPECT_EQ(g.channels, f.channels);
  const auto paths = gt::write_channel_pgms(f, dir.string());
  EXPECT_EQ(paths.size(), gt::kChannelCount);
  EXPECT_EQ(fs::file_size(dir / "cars.pgm"),
            std::string("P5\n").size() + std::to_string(f.width).size() + 1 +
                std::to_string(f.height).size() + 1 + 4 + f.width * f.height);
}

TEST(Channels, GarbageFileRejected) {
  const fs::path p = fs::temp_directory_path() / "gridtraffic_tests" / "junk.chfr";
  fs::create_directories(p.parent_path());
  std::ofstream(p) << "CHFRxx";
  try {
    gt::read_channel_binary(p.string());
    FAIL();
  } catch (const gt::Error& e) {
    EXPECT_EQ(e.code(), gt::ErrorCode::kRenderError);
  }
}

TEST(Svg, EmptyWorldIsBackgroundOnly) {
  const std::string svg = gt::svg_document(gt::WorldMap(1.0), {}, gt::TraceFrame{});
  EXPECT_NE(svg.find("class=\"background\""), std::string::npos);
  EXPECT_EQ(svg.find("class=\"road\""), std::string::npos);
  EXPECT_EQ(svg.find("class=\"car\""), std::string::npos);
}

TEST(Svg, OneCarAndDeterministic) {
  gt::WorldMap w(1.0);
  w.register_route(fixture::line_route(0, {0, 0}, 1, 0, 20, 10.0, 3.0), 0);
  gt::TraceFrame frame;
  frame.vehicles = {pose(0, 0, 3, 0, 0)};
  const std::string a = gt::svg_document(w, {}, frame);
  std::size_t cars = 0;
  for (auto at = a.find("class=\"car\""); at != std::string::npos;
       at = a.find("class=\"car\"", at + 1)) {
    ++cars;
  }
  EXPECT_EQ(cars, 1u);
  EXPECT_EQ(a, gt::svg_document(w, {}, frame));
  try {
    gt::render_svg(w, {}, frame, "/nonexistent_dir/x.svg");
    FAIL();
  } catch (const gt::Error& e) {
    EXPECT_EQ(e.code(), gt::ErrorCode::kRenderError);
  }
}
