#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include "fixtures.hpp"
#include "gridtraffic/core/error.hpp"
#include "gridtraffic/stream/server.hpp"
#include "gridtraffic/trace/trace.hpp"
#include "httplib.h"
#include "json.hpp"

namespace gt = gridtraffic;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

gt::Scenario fast_crossing() {
  gt::Scenario s = fixture::load("crossing.json");
  s.params.tick_dt = 0.01;
  return s;
}

gt::ServerOptions options() {
  gt::ServerOptions o;
  o.port = 0;
  return o;
}

json get_json(httplib::Client& c, const std::string& path, int expect = 200) {
  auto res = c.Get(path);
  EXPECT_TRUE(res) << path;
  if (!res) return {};
  EXPECT_EQ(res->status, expect) << path << " " << res->body;
  return json::parse(res->body);
}

}  // namespace

TEST(Server, PosesAndUnknownCars) {
  gt::StreamServer server(fast_crossing(), options());
  httplib::Client c("127.0.0.1", server.start());
  ASSERT_TRUE(server.wait_for_ticks(5, 5s));
  const json car = get_json(c, "/car00");
  EXPECT_EQ(car["id"], 0);
  EXPECT_EQ(car["active"], true);
  EXPECT_EQ(car["class"], "car");
  get_json(c, "/car07", 404);
  EXPECT_EQ(c.Get("/car7")->status, 404);
  const json state = get_json(c, "/state");
  EXPECT_EQ(state["vehicles"].size(), 2u);
  EXPECT_GE(state["tick"].get<int>(), 4);
}

TEST(Server, LineSegmentsMatchEmitter) {
  const gt::Scenario s = fast_crossing();
  gt::StreamServer server(s, options());
  httplib::Client c("127.0.0.1", server.start());
  auto res = c.Get("/line_segments");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, gt::emit_line_segments(gt::build_world(s), s.intersection_pads));
}

TEST(Server, CommandValidation) {
  gt::StreamServer server(fast_crossing(), options());
  httplib::Client c("127.0.0.1", server.start());
  auto res = c.Post("/car00/command", R"({"kind":"set_desired_speed"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body)["field"], "value");
  res = c.Post("/car00/command", "{oops", "application/json");
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body)["field"], "body");
  res = c.Post("/car42/command", R"({"kind":"hold"})", "application/json");
  EXPECT_EQ(res->status, 404);
  res = c.Post("/car00/command", R"({"kind":"hold","client_tag":"t"})", "application/json");
  EXPECT_EQ(res->status, 202);
}

TEST(Server, ZeroSpeedHoldsPosition) {
  gt::StreamServer server(fast_crossing(), options());
  httplib::Client c("127.0.0.1", server.start());
  ASSERT_TRUE(server.wait_for_ticks(3, 5s));
  auto res = c.Post("/car00/command", R"({"kind":"set_desired_speed","value":0})",
                    "application/json");
  ASSERT_EQ(res->status, 202);
  const auto t0 = server.stats().ticks_published;
  ASSERT_TRUE(server.wait_for_ticks(t0 + 3, 5s));
  const json a = get_json(c, "/car00");
  const auto t1 = server.stats().ticks_published;
  ASSERT_TRUE(server.wait_for_ticks(t1 + 10, 5s));
  const json b = get_json(c, "/car00");
  EXPECT_GT(b["tick"].get<int>(), a["tick"].get<int>());
  EXPECT_EQ(a["x"], b["x"]);
  EXPECT_EQ(b["speed"].get<double>(), 0.0);
}

TEST(Server, HealthAndCorruptState) {
  gt::StreamServer server(fast_crossing(), options());
  httplib::Client c("127.0.0.1", server.start());
  ASSERT_TRUE(server.wait_for_ticks(3, 5s));
  json h = get_json(c, "/healthz");
  EXPECT_EQ(h["status"], "ok");
  EXPECT_EQ(h["mode"], "realtime");
  EXPECT_EQ(h["recording"], false);
  server.corrupt_for_testing();
  for (int k = 0; k < 200 && !server.stats().corrupt; ++k) std::this_thread::sleep_for(5ms);
  ASSERT_TRUE(server.stats().corrupt);
  get_json(c, "/car00", 503);
  get_json(c, "/state", 503);
  h = get_json(c, "/healthz", 503);
  EXPECT_EQ(h["status"], "corrupt");
  EXPECT_EQ(c.Post("/car00/command", R"({"kind":"hold"})", "application/json")->status, 503);
  // line segments are static and stay available
  EXPECT_EQ(c.Get("/line_segments")->status, 200);
  // reset recovers
  EXPECT_EQ(c.Post("/reset", "", "application/json")->status, 202);
  bool ok = false;
  for (int k = 0; k < 400 && !ok; ++k) {
    std::this_thread::sleep_for(5ms);
    ok = c.Get("/healthz")->status == 200;
  }
  EXPECT_TRUE(ok);
  get_json(c, "/car00");
}

TEST(Server, PortInUse) {
  gt::StreamServer a(fast_crossing(), options());
  const int port = a.start();
  gt::ServerOptions o = options();
  o.port = port;
  gt::StreamServer b(fast_crossing(), o);
  try {
    b.start();
    FAIL();
  } catch (const gt::Error& e) {
    EXPECT_EQ(e.code(), gt::ErrorCode::kIoError);
  }
}

TEST(Server, RecordingReplaysIdentically) {
  const gt::Scenario s = fast_crossing();
  const auto path = std::filesystem::temp_directory_path() / "gridtraffic_tests" / "srv.jsonl";
  std::filesystem::create_directories(path.parent_path());
  gt::ServerOptions o = options();
  o.record_path = path.string();
  o.max_ticks = 80;
  {
    gt::StreamServer server(s, o);
    httplib::Client c("127.0.0.1", server.start());
    ASSERT_TRUE(server.wait_for_ticks(10, 5s));
    c.Post("/car01/command", R"({"kind":"set_desired_speed","value":4})", "application/json");
    ASSERT_TRUE(server.wait_for_ticks(30, 5s));
    c.Post("/car00/command", R"({"kind":"hold"})", "application/json");
    ASSERT_TRUE(server.wait_for_ticks(80, 5s));
    server.stop();
  }
  const gt::Trace t = gt::read_trace(path.string());
  EXPECT_EQ(t.frames.size(), 80u);
  EXPECT_EQ(gt::command_log(t).size(), 2u);
  const auto r = gt::verify_trace(t, s);
  EXPECT_TRUE(r.identical) << r.detail;
}
