#include "protobooth/node/capture_node.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "protobooth/error.hpp"

namespace protobooth::node {

std::string_view to_string(NodeState s) {
  switch (s) {
    case NodeState::Idle: return "idle";
    case NodeState::Capturing: return "capturing";
    case NodeState::Uploading: return "uploading";
    case NodeState::Fault: return "fault";
  }
  return "";
}

std::string_view to_string(NodeEvent e) {
  switch (e) {
    case NodeEvent::Swipe: return "swipe";
    case NodeEvent::FramesAcquired: return "frames_acquired";
    case NodeEvent::Spooled: return "spooled";
    case NodeEvent::Failure: return "failure";
    case NodeEvent::Reset: return "reset";
  }
  return "";
}

std::optional<NodeState> transition(NodeState from, NodeEvent event) {
  if (event == NodeEvent::Failure) return NodeState::Fault;
  switch (from) {
    case NodeState::Idle:
      if (event == NodeEvent::Swipe) return NodeState::Capturing;
      break;
    case NodeState::Capturing:
      if (event == NodeEvent::FramesAcquired) return NodeState::Uploading;
      break;
    case NodeState::Uploading:
      if (event == NodeEvent::Spooled) return NodeState::Idle;
      break;
    case NodeState::Fault:
      if (event == NodeEvent::Reset) return NodeState::Idle;
      break;
  }
  return std::nullopt;
}

LedPattern led_pattern(NodeState state, std::optional<std::int64_t> completed_at_ms,
                       std::int64_t now_ms,
                       std::chrono::milliseconds notify_interval) {
  switch (state) {
    case NodeState::Capturing:
    case NodeState::Uploading:
      return {LedMode::On, LedMode::Off};
    case NodeState::Fault:
      return {LedMode::On, LedMode::Blink};
    case NodeState::Idle:
      if (completed_at_ms && now_ms >= *completed_at_ms &&
          now_ms - *completed_at_ms < notify_interval.count()) {
        return {LedMode::Off, LedMode::Blink};
      }
      return {LedMode::Off, LedMode::Off};
  }
  return {};
}

CaptureId generate_capture_id(const BoothId& booth_id, std::int64_t clock_ms,
                              std::uint64_t counter) {
  return fmt::format("{:013d}-{}-{:08d}", clock_ms, booth_id, counter);
}

double capture_duration(const CaptureSession& session) {
  return static_cast<double>(session.completed_ms - session.started_ms) / 1000.0;
}

CaptureNode::CaptureNode(NodeOptions options, CameraRig& rig, Spool& spool,
                         Clock& clock)
    : options_(std::move(options)), rig_(rig), spool_(spool), clock_(clock) {}

void CaptureNode::apply(NodeEvent event) {
  // Caller holds state_mu_.
  auto next = transition(state_, event);
  if (!next) {
    throw std::logic_error(fmt::format("undeclared transition {} --{}-->",
                                       to_string(state_), to_string(event)));
  }
  const NodeState from = state_;
  state_ = *next;
  if (observer_) observer_(from, event, state_);
}

NodeState CaptureNode::state() const {
  std::lock_guard lock(state_mu_);
  return state_;
}

LedPattern CaptureNode::leds() const {
  std::lock_guard lock(state_mu_);
  return led_pattern(state_, completed_at_ms_, clock_.now_ms(),
                     options_.notify_interval);
}

void CaptureNode::set_observer(TransitionObserver observer) {
  std::lock_guard lock(state_mu_);
  observer_ = std::move(observer);
}

void CaptureNode::reset() {
  std::lock_guard lock(state_mu_);
  if (state_ == NodeState::Fault) apply(NodeEvent::Reset);
}

SwipeOutcome CaptureNode::swipe(const CardId& card_id) {
  {
    std::lock_guard lock(state_mu_);
    if (state_ != NodeState::Idle) {
      SwipeOutcome ignored;
      ignored.detail = "swipe ignored: node is " + std::string(to_string(state_));
      return ignored;
    }
    apply(NodeEvent::Swipe);
  }
  std::lock_guard sequence(sequence_mu_);
  return run_sequence(card_id);
}

SwipeOutcome CaptureNode::handle(const SwipeEvent& event) {
  {
    std::lock_guard lock(state_mu_);
    if (event.received_at_ms < busy_until_ms_) {
      SwipeOutcome ignored;
      ignored.detail = "swipe ignored: arrived during the previous sequence";
      return ignored;
    }
  }
  return swipe(event.card_id);
}

SwipeOutcome CaptureNode::run_sequence(const CardId& card_id) {
  auto fail = [&](std::string detail) {
    std::lock_guard lock(state_mu_);
    apply(NodeEvent::Failure);
    busy_until_ms_ = clock_.now_ms();
    SwipeOutcome out;
    out.kind = SwipeOutcome::Kind::Fault;
    out.detail = std::move(detail);
    return out;
  };

  CaptureSession session;
  session.started_ms = clock_.now_ms();

  CaptureRecord record;
  SpoolEntry entry;
  try {
    session.capture_id = generate_capture_id(options_.booth_id, session.started_ms,
                                             spool_.next_counter());
    record.capture_id = session.capture_id;
    record.booth_id = options_.booth_id;
    record.card_id = card_id;
    record.timestamp = session.started_ms / 1000;

    const CaptureContext ctx{options_.booth_id, session.capture_id};
    for (ViewAngle angle : kAllAngles) {
      Frame frame = rig_.acquire(angle, ctx);
      record.views[angle] =
          ImageRef{sha256_hex(frame.bytes), frame.media_type,
                   static_cast<std::int64_t>(frame.bytes.size())};
      entry.images.emplace(angle, std::move(frame.bytes));
    }
  } catch (const RigError& e) {
    return fail(e.what());
  } catch (const Error& e) {
    return fail(e.what());
  }

  {
    std::lock_guard lock(state_mu_);
    apply(NodeEvent::FramesAcquired);
  }

  entry.record = record;
  try {
    spool_.put(entry);
  } catch (const Error& e) {
    return fail(e.what());
  }

  session.completed_ms = clock_.now_ms();
  {
    std::lock_guard lock(state_mu_);
    apply(NodeEvent::Spooled);
    completed_at_ms_ = session.completed_ms;
    busy_until_ms_ = session.completed_ms;
  }

  SwipeOutcome out;
  out.kind = SwipeOutcome::Kind::Captured;
  out.record = std::move(record);
  out.session = session;
  return out;
}

DeliveryReport CaptureNode::flush(Uplink& uplink, FlushOptions options) {
  std::lock_guard sequence(sequence_mu_);
  return flush_spool(spool_, uplink, clock_, options);
}

std::vector<ScriptedSwipe> parse_swipe_script(std::istream& in) {
  std::vector<ScriptedSwipe> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    ScriptedSwipe s;
    if (!(fields >> s.offset_seconds)) {
      std::string rest;
      if (std::istringstream(line) >> rest) {
        throw Error(ErrorCode::kBadRequest,
                    "swipe script line " + std::to_string(lineno) +
                        ": expected '<offset_seconds> <card_id>'");
      }
      continue;
    }
    if (!(fields >> s.card_id) || s.offset_seconds < 0 ||
        !std::isfinite(s.offset_seconds)) {
      throw Error(ErrorCode::kBadRequest,
                  "swipe script line " + std::to_string(lineno) +
                      ": expected '<offset_seconds> <card_id>'");
    }
    out.push_back(std::move(s));
  }
  return out;
}

SimulationReport run_script(CaptureNode& node, SimulatedClock& clock,
                            const std::vector<ScriptedSwipe>& script,
                            std::int64_t epoch_ms, Uplink* uplink) {
  std::vector<ScriptedSwipe> ordered = script;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ScriptedSwipe& a, const ScriptedSwipe& b) {
                     return a.offset_seconds < b.offset_seconds;
                   });
  SimulationReport report;
  auto merge = [&](DeliveryReport d) {
    report.delivery.delivered += d.delivered;
    for (auto& r : d.receipts) report.delivery.receipts.push_back(std::move(r));
    for (auto& e : d.errors) report.delivery.errors.push_back(std::move(e));
  };
  for (const auto& swipe : ordered) {
    const auto at = epoch_ms + static_cast<std::int64_t>(
                                   std::llround(swipe.offset_seconds * 1000.0));
    if (clock.now_ms() < at) clock.set_ms(at);
    auto outcome = node.handle({swipe.card_id, at});
    switch (outcome.kind) {
      case SwipeOutcome::Kind::Captured:
        ++report.captured;
        if (uplink) merge(node.flush(*uplink));
        break;
      case SwipeOutcome::Kind::Ignored: ++report.ignored; break;
      case SwipeOutcome::Kind::Fault:
        ++report.faults;
        node.reset();
        break;
    }
    report.outcomes.push_back(std::move(outcome));
  }
  if (uplink) {
    auto last = node.flush(*uplink, FlushOptions{.ignore_schedule = true});
    report.delivery.deferred = last.deferred;
    report.delivery.rejected = last.rejected;
    merge(std::move(last));
  }
  return report;
}

}  // namespace protobooth::node
