#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "gridtraffic/scenario/scenario.hpp"

namespace gridtraffic {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 5000;  // 0 picks any free port
  bool realtime = true;
  std::optional<Tick> max_ticks;     // clock idles after this many ticks
  std::string record_path;           // empty: no recording
  std::string scenario_path;         // reloaded by POST /reset when set
};

struct ServerStats {
  Tick ticks_published = 0;
  std::uint64_t missed_ticks = 0;  // published more than one period late
  bool corrupt = false;
  std::optional<std::string> record_error;
};

// HTTP front end over one simulation. A single clock thread owns the engine:
// it drains the command queue at each tick boundary, advances, and publishes
// an immutable snapshot that request handlers read.
class StreamServer {
 public:
  StreamServer(Scenario scenario, ServerOptions options);
  ~StreamServer();
  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;

  // Binds and starts serving. Returns the bound port; throws kIoError when
  // the port is unavailable.
  int start();
  // Stops the clock and the listener and finalizes any recording.
  void stop();

  // Blocks until `ticks` ticks were published, the engine failed, or the
  // timeout passed. Returns true when the count was reached.
  bool wait_for_ticks(Tick ticks, std::chrono::milliseconds timeout);

  ServerStats stats() const;
  int port() const noexcept;

  // Test hook: wipes the engine's occupancy at the next tick boundary so the
  // following step fails its consistency check.
  void corrupt_for_testing();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gridtraffic
