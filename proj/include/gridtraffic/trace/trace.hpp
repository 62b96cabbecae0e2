#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridtraffic/scenario/scenario.hpp"
#include "gridtraffic/sim/engine.hpp"
#include "gridtraffic/stream/protocol.hpp"
#include "gridtraffic/util/checksum.hpp"

namespace gridtraffic {

struct TraceFrame {
  Tick tick = 0;
  std::vector<PosePacket> vehicles;
  std::vector<SimEvent> events;
  std::vector<Command> commands_applied;

  friend bool operator==(const TraceFrame&, const TraceFrame&) = default;
};

// One canonical line, without the trailing newline.
std::string encode_frame(const TraceFrame& frame);

// Frame for the tick just completed by `sim`.
TraceFrame capture_frame(const Simulation& sim, const TickReport& report);

struct TraceFooter {
  std::uint64_t frames = 0;
  std::string checksum;  // FNV-1a 64 over every frame line incl. newline
  std::uint64_t seed = 0;
};

// Line-delimited trace file. Throws kRecordError when the file cannot be
// opened or written; callers decide whether to continue unrecorded.
class TraceWriter {
 public:
  TraceWriter(const std::string& path, std::uint64_t seed);
  ~TraceWriter();
  TraceWriter(const TraceWriter&) = delete;
  TraceWriter& operator=(const TraceWriter&) = delete;

  void write(const TraceFrame& frame);
  // Writes the footer and closes. Idempotent.
  TraceFooter finish();

  std::uint64_t frames() const noexcept { return frames_; }

 private:
  std::string path_;
  std::ofstream out_;
  Fnv1a64 hash_;
  std::uint64_t frames_ = 0;
  std::uint64_t seed_ = 0;
  std::optional<Tick> last_tick_;
  bool finished_ = false;
};

struct Trace {
  std::vector<std::string> lines;  // raw frame lines
  std::vector<TraceFrame> frames;
  TraceFooter footer;
};

// Reads and checks a trace: footer present, frame count and checksum match,
// ticks strictly increasing, every frame well formed. Throws kCorruptTrace
// (or kIoError when the file cannot be read).
Trace read_trace(const std::string& path);

// Commands to inject, keyed by the tick at whose boundary they apply.
using CommandLog = std::map<Tick, std::vector<Command>>;

CommandLog command_log(const Trace& trace);

// Runs `ticks` ticks headless, submitting logged commands at their ticks.
// When `writer` is set every frame is recorded (a failed write drops the
// recording and the run continues; `record_error` receives the message).
struct HeadlessResult {
  std::vector<TraceFrame> frames;  // only kept when keep_frames
  std::map<EventKind, std::uint64_t> event_counts;
  std::optional<std::string> record_error;
};
HeadlessResult run_headless(Simulation& sim, Tick ticks, const CommandLog& log,
                            TraceWriter* writer, bool keep_frames = false);

struct VerifyReport {
  bool identical = false;
  std::optional<Tick> first_divergent_tick;
  std::uint64_t frames = 0;
  std::string detail;
};

// Re-simulates `scenario` (with the trace's seed) applying the recorded
// commands and compares frame by frame.
VerifyReport verify_trace(const Trace& trace, const Scenario& scenario);

}  // namespace gridtraffic
