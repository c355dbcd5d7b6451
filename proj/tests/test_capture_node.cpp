#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "protobooth/backend/repository.hpp"
#include "protobooth/error.hpp"
#include "protobooth/node/capture_node.hpp"
#include "test_support.hpp"
#include "uplinks.hpp"

using namespace protobooth;
using namespace protobooth::node;
using protobooth::testing::RepositoryUplink;
using protobooth::testing::TempDir;

namespace {

constexpr std::int64_t kEpochMs = 1509532800000;  // 2017-11-01T10:40:00Z

struct Booth {
  explicit Booth(MockRigOptions rig_options = {}, std::string booth = "booth-1")
      : clock(kEpochMs),
        rig(clock, std::move(rig_options)),
        node(NodeOptions{std::move(booth)}, rig, spool, clock) {}
  SimulatedClock clock;
  MockRig rig;
  MemorySpool spool;
  CaptureNode node;
};

}  // namespace

TEST_CASE("swipe in Idle captures all seven views") {
  Booth b;
  auto out = b.node.swipe("card-42");
  REQUIRE(out.kind == SwipeOutcome::Kind::Captured);
  const auto& rec = *out.record;
  CHECK(rec.views.size() == 7);
  CHECK(rec.booth_id == "booth-1");
  CHECK(rec.card_id == "card-42");
  CHECK(rec.timestamp == kEpochMs / 1000);
  CHECK(validate_capture(rec).empty());
  CHECK(b.spool.size() == 1);
  CHECK(b.node.state() == NodeState::Idle);

  const auto entry = b.spool.entries().front();
  for (ViewAngle a : kAllAngles) {
    CHECK(sha256_hex(entry.images.at(a)) == rec.views.at(a).content_hash);
    CHECK(entry.images.at(a) == mock_frame_bytes("booth-1", rec.capture_id, a));
  }
}

TEST_CASE("a swipe during an active sequence is ignored") {
  SimulatedClock clock(kEpochMs);
  MemorySpool spool;
  CaptureNode* node_ptr = nullptr;
  std::vector<SwipeOutcome> nested;

  struct ReentrantRig : CameraRig {
    MockRig inner;
    std::function<void()> during;
    explicit ReentrantRig(Clock& c) : inner(c) {}
    Frame acquire(ViewAngle a, const CaptureContext& ctx) override {
      if (a == ViewAngle::Right && during) during();
      return inner.acquire(a, ctx);
    }
    Resolution resolution() const override { return inner.resolution(); }
  } rig(clock);

  CaptureNode node(NodeOptions{"booth-1"}, rig, spool, clock);
  node_ptr = &node;
  rig.during = [&] {
    CHECK(node_ptr->state() == NodeState::Capturing);
    CHECK(node_ptr->leds() == LedPattern{LedMode::On, LedMode::Off});
    nested.push_back(node_ptr->swipe("card-other"));
  };
  auto out = node.swipe("card-1");
  CHECK(out.kind == SwipeOutcome::Kind::Captured);
  REQUIRE(nested.size() == 1);
  CHECK(nested[0].kind == SwipeOutcome::Kind::Ignored);
  CHECK(spool.size() == 1);
}

TEST_CASE("rig failure faults the node and spools nothing") {
  MockRigOptions opts;
  opts.failing = {ViewAngle::Top};
  Booth b(opts);
  auto out = b.node.swipe("card-1");
  CHECK(out.kind == SwipeOutcome::Kind::Fault);
  CHECK(out.detail.find("top") != std::string::npos);
  CHECK(b.spool.size() == 0);
  CHECK(b.node.state() == NodeState::Fault);
  CHECK(b.node.leds() == LedPattern{LedMode::On, LedMode::Blink});

  // Swipes are ignored until reset.
  CHECK(b.node.swipe("card-1").kind == SwipeOutcome::Kind::Ignored);
  b.node.reset();
  CHECK(b.node.state() == NodeState::Idle);
  b.rig.options().failing.clear();
  CHECK(b.node.swipe("card-1").kind == SwipeOutcome::Kind::Captured);
}

TEST_CASE("transition table") {
  CHECK(transition(NodeState::Idle, NodeEvent::Swipe) == NodeState::Capturing);
  CHECK(transition(NodeState::Capturing, NodeEvent::FramesAcquired) == NodeState::Uploading);
  CHECK(transition(NodeState::Uploading, NodeEvent::Spooled) == NodeState::Idle);
  CHECK(transition(NodeState::Fault, NodeEvent::Reset) == NodeState::Idle);
  for (auto s : {NodeState::Idle, NodeState::Capturing, NodeState::Uploading, NodeState::Fault})
    CHECK(transition(s, NodeEvent::Failure) == NodeState::Fault);
  CHECK_FALSE(transition(NodeState::Idle, NodeEvent::Spooled).has_value());
  CHECK_FALSE(transition(NodeState::Capturing, NodeEvent::Swipe).has_value());
  CHECK_FALSE(transition(NodeState::Uploading, NodeEvent::Reset).has_value());
  CHECK_FALSE(transition(NodeState::Fault, NodeEvent::Swipe).has_value());
}

TEST_CASE("LED pattern is a function of state and notify timer") {
  using std::chrono::milliseconds;
  const milliseconds notify{3000};
  CHECK(led_pattern(NodeState::Idle, std::nullopt, 0, notify) == LedPattern{LedMode::Off, LedMode::Off});
  CHECK(led_pattern(NodeState::Capturing, std::nullopt, 0, notify) == LedPattern{LedMode::On, LedMode::Off});
  CHECK(led_pattern(NodeState::Uploading, 5, 6, notify) == LedPattern{LedMode::On, LedMode::Off});
  CHECK(led_pattern(NodeState::Fault, 5, 6, notify) == LedPattern{LedMode::On, LedMode::Blink});
  CHECK(led_pattern(NodeState::Idle, 1000, 1000, notify) == LedPattern{LedMode::Off, LedMode::Blink});
  CHECK(led_pattern(NodeState::Idle, 1000, 3999, notify) == LedPattern{LedMode::Off, LedMode::Blink});
  CHECK(led_pattern(NodeState::Idle, 1000, 4000, notify) == LedPattern{LedMode::Off, LedMode::Off});

  Booth b;
  b.node.swipe("c");
  CHECK(b.node.leds() == LedPattern{LedMode::Off, LedMode::Blink});
  b.clock.advance(std::chrono::seconds(5));
  CHECK(b.node.leds() == LedPattern{LedMode::Off, LedMode::Off});
}

TEST_CASE("capture ids") {
  const auto a = generate_capture_id("booth-1", kEpochMs, 1);
  const auto b = generate_capture_id("booth-1", kEpochMs, 2);
  CHECK(a != b);
  CHECK(a < b);
  CHECK(generate_capture_id("booth-1", kEpochMs, 7) !=
        generate_capture_id("booth-2", kEpochMs, 7));
  CHECK(generate_capture_id("booth-1", kEpochMs + 1, 1) > a);
  CHECK(a == "1509532800000-booth-1-00000001");

  SUBCASE("10^4 ids from four booths sharing a clock never collide") {
    std::set<CaptureId> ids;
    std::map<std::string, std::vector<CaptureId>> per_booth;
    std::int64_t ms = kEpochMs;
    for (std::uint64_t counter = 1; counter <= 2500; ++counter) {
      if (counter % 7 == 0) ++ms;  // many ids share a millisecond
      for (const char* booth : {"b1", "b2", "b3", "b4"}) {
        auto id = generate_capture_id(booth, ms, counter);
        ids.insert(id);
        per_booth[booth].push_back(id);
      }
    }
    CHECK(ids.size() == 10000);
    for (const auto& [booth, list] : per_booth)
      CHECK(std::is_sorted(list.begin(), list.end()));
  }
}

TEST_CASE("capture duration") {
  SUBCASE("default mock rig takes about nine seconds") {
    Booth b;
    auto out = b.node.swipe("c");
    const double d = capture_duration(*out.session);
    CHECK(d >= 8.4);
    CHECK(d <= 9.5);
  }
  SUBCASE("zero latency") {
    MockRigOptions opts;
    opts.frame_latency = std::chrono::milliseconds(0);
    opts.setup_latency = std::chrono::milliseconds(0);
    Booth b(opts);
    CHECK(capture_duration(*b.node.swipe("c").session) < 0.1);
  }
  SUBCASE("two-second frames") {
    MockRigOptions opts;
    opts.frame_latency = std::chrono::milliseconds(2000);
    Booth b(opts);
    // 7 frames at the configured latency plus the fixed setup time.
    const double expected = 7 * 2.0 + opts.setup_latency.count() / 1000.0;
    CHECK(capture_duration(*b.node.swipe("c").session) == doctest::Approx(expected));
    CHECK(capture_duration(*b.node.swipe("c").session) == doctest::Approx(14.0).epsilon(0.05));
  }
}

TEST_CASE("mock rig output is deterministic") {
  const auto a = mock_frame_bytes("booth-1", "cap-1", ViewAngle::Front);
  CHECK(a == mock_frame_bytes("booth-1", "cap-1", ViewAngle::Front));
  CHECK(a != mock_frame_bytes("booth-1", "cap-1", ViewAngle::Rear));
  CHECK(a != mock_frame_bytes("booth-2", "cap-1", ViewAngle::Front));
  const std::string text = to_text(a);
  CHECK(text.starts_with("P6\n32 24\n255\n"));
  CHECK(text.find("booth-1|cap-1|front") != std::string::npos);
  CHECK(a.size() == std::string("P6\n32 24\n255\n").size() + 32 * 24 * 3);

  SimulatedClock clock(1000);
  MockRig rig(clock);
  CHECK(rig.resolution().width == 1920);
  CHECK(rig.resolution().height == 1080);
}

TEST_CASE("backoff schedule") {
  using std::chrono::seconds;
  CHECK(backoff_delay(1) == seconds(5));
  CHECK(backoff_delay(2) == seconds(10));
  CHECK(backoff_delay(3) == seconds(20));
  CHECK(backoff_delay(7) == seconds(320));
  CHECK(backoff_delay(8) == seconds(600));
  CHECK(backoff_delay(50) == seconds(600));
}

TEST_CASE("flush_spool delivers or defers without loss") {
  auto repo = backend::Repository::in_memory();
  RepositoryUplink uplink(*repo);
  Booth b;
  for (int i = 0; i < 3; ++i) b.node.swipe("card-" + std::to_string(i));
  REQUIRE(b.spool.size() == 3);

  SUBCASE("server up") {
    auto report = b.node.flush(uplink);
    CHECK(report.delivered == 3);
    CHECK(report.deferred == 0);
    CHECK(b.spool.size() == 0);
    CHECK(repo->capture_count() == 3);
    for (const auto& r : report.receipts) CHECK(r.created);
  }
  SUBCASE("server down") {
    uplink.online = false;
    auto report = b.node.flush(uplink);
    CHECK(report.delivered == 0);
    CHECK(report.deferred == 3);
    const Timestamp now = b.clock.now_seconds();
    for (const auto& e : b.spool.entries()) {
      CHECK(e.attempt_count == 1);
      CHECK(e.next_attempt_at == now + 5);
    }
    // Still backing off: nothing attempted, nothing lost.
    uplink.online = true;
    report = b.node.flush(uplink);
    CHECK(report.delivered == 0);
    CHECK(report.deferred == 3);
    b.clock.advance(std::chrono::seconds(5));
    report = b.node.flush(uplink);
    CHECK(report.delivered == 3);
    CHECK(repo->capture_count() == 3);
  }
  SUBCASE("entries are attempted oldest first") {
    std::vector<CaptureId> order;
    struct Recorder : Uplink {
      std::vector<CaptureId>* order;
      IngestReceipt deliver(const CaptureRecord& r, const ImagePayloads&) override {
        order->push_back(r.capture_id);
        return {r.capture_id, true, 7};
      }
    } recorder;
    recorder.order = &order;
    b.node.flush(recorder);
    CHECK(std::is_sorted(order.begin(), order.end()));
    CHECK(order.size() == 3);
  }
}

TEST_CASE("directory spool persists entries and the counter") {
  TempDir tmp;
  SimulatedClock clock(kEpochMs);
  MockRig rig(clock);
  CaptureId first;
  {
    DirectorySpool spool(tmp / "spool");
    CaptureNode node(NodeOptions{"booth-9"}, rig, spool, clock);
    first = node.swipe("card-1").record->capture_id;
    node.swipe("card-2");
    CHECK(spool.size() == 2);
  }
  // Debris from an interrupted write is cleaned up on open.
  std::filesystem::create_directories(tmp / "spool" / ".stage-junk");
  DirectorySpool reopened(tmp / "spool");
  CHECK_FALSE(std::filesystem::exists(tmp / "spool" / ".stage-junk"));
  auto entries = reopened.entries();
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].record.capture_id == first);
  CHECK(entries[0].images.size() == 7);
  CHECK(std::filesystem::exists(tmp / "spool" / first / "meta.json"));
  CHECK(std::filesystem::exists(tmp / "spool" / first / "rear_left.ppm"));
  CHECK(reopened.next_counter() == 3);

  reopened.reschedule(first, 4, 1234);
  auto again = DirectorySpool(tmp / "spool").entries();
  CHECK(again[0].attempt_count == 4);
  CHECK(again[0].next_attempt_at == 1234);
  reopened.remove(first);
  CHECK(reopened.size() == 1);
}

TEST_CASE("crash between acknowledgement and delete still yields one record") {
  TempDir tmp;
  auto repo = backend::Repository::in_memory();
  RepositoryUplink good(*repo);
  SimulatedClock clock(kEpochMs);
  MockRig rig(clock);
  CaptureId id;
  {
    DirectorySpool spool(tmp / "spool");
    CaptureNode node(NodeOptions{"booth-1"}, rig, spool, clock);
    id = node.swipe("card-1").record->capture_id;

    struct Crash {};
    struct CrashAfterAck : Uplink {
      Uplink* inner;
      IngestReceipt deliver(const CaptureRecord& r, const ImagePayloads& i) override {
        inner->deliver(r, i);
        throw Crash{};
      }
    } crashing;
    crashing.inner = &good;
    CHECK_THROWS_AS(node.flush(crashing), Crash);
    CHECK(spool.size() == 1);
  }
  DirectorySpool restarted(tmp / "spool");
  auto report = flush_spool(restarted, good, clock);
  CHECK(report.delivered == 1);
  REQUIRE(report.receipts.size() == 1);
  CHECK_FALSE(report.receipts[0].created);
  CHECK(restarted.size() == 0);
  CHECK(repo->capture_count() == 1);
  CHECK(repo->capture(id).has_value());
}

TEST_CASE("swipe scripts") {
  std::istringstream in(
      "# offset card\n"
      "0 card-a\n"
      "\n"
      "4.5 card-b   # during the first sequence\n"
      "60 card-c\n");
  auto script = parse_swipe_script(in);
  REQUIRE(script.size() == 3);
  CHECK(script[1].offset_seconds == 4.5);
  CHECK(script[1].card_id == "card-b");

  std::istringstream bad("abc\n");
  CHECK_THROWS_AS(parse_swipe_script(bad), Error);
  std::istringstream missing_card("12\n");
  CHECK_THROWS_AS(parse_swipe_script(missing_card), Error);

  auto repo = backend::Repository::in_memory();
  RepositoryUplink uplink(*repo);
  Booth b;
  auto report = run_script(b.node, b.clock, script, kEpochMs, &uplink);
  CHECK(report.captured == 2);
  CHECK(report.ignored == 1);
  CHECK(report.delivery.delivered == 2);
  CHECK(report.delivery.deferred == 0);
  CHECK(repo->capture_count() == 2);
  CHECK(report.outcomes[1].kind == SwipeOutcome::Kind::Ignored);
}

TEST_CASE("scripted swipes with the server down stay spooled until it returns") {
  auto repo = backend::Repository::in_memory();
  RepositoryUplink uplink(*repo);
  uplink.online = false;
  Booth b;
  std::vector<ScriptedSwipe> script{{0, "a"}, {30, "b"}, {60, "c"}};
  auto report = run_script(b.node, b.clock, script, kEpochMs, &uplink);
  CHECK(report.captured == 3);
  CHECK(report.delivery.delivered == 0);
  CHECK(report.delivery.deferred == 3);
  CHECK(b.spool.size() == 3);

  uplink.online = true;
  auto later = b.node.flush(uplink, FlushOptions{.ignore_schedule = true});
  CHECK(later.delivered == 3);
  CHECK(repo->capture_count() == 3);
}

TEST_CASE("random event sequences stay inside the transition table") {
  std::mt19937_64 rng(5);
  for (int seq = 0; seq < 1000; ++seq) {
    MockRigOptions opts;
    opts.frame_latency = std::chrono::milliseconds(rng() % 1500);
    Booth b(opts, "b" + std::to_string(seq % 3));
    int undeclared = 0;
    b.node.set_observer([&](NodeState from, NodeEvent e, NodeState to) {
      if (transition(from, e) != to) ++undeclared;
    });
    for (int step = 0; step < 12; ++step) {
      switch (rng() % 4) {
        case 0:
          b.rig.options().failing.clear();
          if (rng() % 3 == 0) b.rig.options().failing.insert(kAllAngles[rng() % 7]);
          b.node.swipe("card");
          break;
        case 1: b.node.reset(); break;
        case 2: b.clock.advance(std::chrono::milliseconds(rng() % 20000)); break;
        case 3: {
          auto repo = backend::Repository::in_memory();
          RepositoryUplink up(*repo);
          up.online = rng() % 2;
          b.node.flush(up);
          break;
        }
      }
      for (const auto& e : b.spool.entries()) {
        REQUIRE(e.record.views.size() == 7);
        REQUIRE(e.images.size() == 7);
      }
    }
    REQUIRE(undeclared == 0);
  }
}
