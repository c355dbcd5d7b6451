#pragma once

// The booth daemon: one RFID swipe runs the seven-camera sequence, spools
// the result and signals progress on two LEDs.

#include <chrono>
#include <cstdint>
#include <functional>
#include <istream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "protobooth/model.hpp"
#include "protobooth/node/camera_rig.hpp"
#include "protobooth/node/clock.hpp"
#include "protobooth/node/spool.hpp"
#include "protobooth/node/uplink.hpp"

namespace protobooth::node {

enum class NodeState { Idle, Capturing, Uploading, Fault };
enum class NodeEvent { Swipe, FramesAcquired, Spooled, Failure, Reset };

std::string_view to_string(NodeState s);
std::string_view to_string(NodeEvent e);

/// The declared transition table. nullopt means the event is not accepted
/// in that state.
std::optional<NodeState> transition(NodeState from, NodeEvent event);

enum class LedMode { Off, On, Blink };

struct LedPattern {
  LedMode busy = LedMode::Off;
  LedMode done = LedMode::Off;
  bool operator==(const LedPattern&) const = default;
};

/// `completed_at_ms` is the end of the most recent successful sequence.
LedPattern led_pattern(NodeState state, std::optional<std::int64_t> completed_at_ms,
                       std::int64_t now_ms, std::chrono::milliseconds notify_interval);

/// "<13-digit ms>-<booth>-<8-digit counter>": unique across booths and
/// lexicographically ordered by creation time within a booth.
CaptureId generate_capture_id(const BoothId& booth_id, std::int64_t clock_ms,
                              std::uint64_t counter);

struct CaptureSession {
  CaptureId capture_id;
  std::int64_t started_ms = 0;
  std::int64_t completed_ms = 0;
};

/// Swipe to spool-complete, in seconds.
double capture_duration(const CaptureSession& session);

struct SwipeOutcome {
  enum class Kind { Captured, Ignored, Fault };
  Kind kind = Kind::Ignored;
  std::optional<CaptureRecord> record;
  std::optional<CaptureSession> session;
  std::string detail;
};

struct NodeOptions {
  BoothId booth_id;
  std::chrono::milliseconds notify_interval{3000};
};

/// A card read with the instant the reader saw it.
struct SwipeEvent {
  CardId card_id;
  std::int64_t received_at_ms = 0;
};

class CaptureNode {
 public:
  using TransitionObserver =
      std::function<void(NodeState from, NodeEvent event, NodeState to)>;

  CaptureNode(NodeOptions options, CameraRig& rig, Spool& spool, Clock& clock);

  /// Swipe now. Ignored unless Idle.
  SwipeOutcome swipe(const CardId& card_id);
  /// Queued swipe: additionally ignored if it arrived while the previous
  /// sequence was still running.
  SwipeOutcome handle(const SwipeEvent& event);

  /// Fault → Idle. No-op in other states.
  void reset();

  /// Waits for any running sequence; never overlaps a capture.
  DeliveryReport flush(Uplink& uplink, FlushOptions options = {});

  NodeState state() const;
  LedPattern leds() const;
  const NodeOptions& options() const { return options_; }

  void set_observer(TransitionObserver observer);

 private:
  void apply(NodeEvent event);
  SwipeOutcome run_sequence(const CardId& card_id);

  NodeOptions options_;
  CameraRig& rig_;
  Spool& spool_;
  Clock& clock_;

  mutable std::mutex state_mu_;
  NodeState state_ = NodeState::Idle;
  std::optional<std::int64_t> completed_at_ms_;
  std::int64_t busy_until_ms_ = 0;
  TransitionObserver observer_;

  std::mutex sequence_mu_;
};

struct ScriptedSwipe {
  double offset_seconds = 0;
  CardId card_id;
};

/// One `<offset_seconds> <card_id>` pair per line; `#` comments allowed.
std::vector<ScriptedSwipe> parse_swipe_script(std::istream& in);

struct SimulationReport {
  std::vector<SwipeOutcome> outcomes;
  int captured = 0;
  int ignored = 0;
  int faults = 0;
  DeliveryReport delivery;
};

/// Replays a script on a simulated clock starting at `epoch_ms`. With an
/// uplink, the spool is flushed after every capture and once more, ignoring
/// backoff, at the end.
SimulationReport run_script(CaptureNode& node, SimulatedClock& clock,
                            const std::vector<ScriptedSwipe>& script,
                            std::int64_t epoch_ms, Uplink* uplink);

}  // namespace protobooth::node
