// Acceptance suite: one PASS/FAIL line per release criterion. Every check
// recomputes its expectation independently of the code under test.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "protobooth/analytics/figures.hpp"
#include "protobooth/analytics/fixture.hpp"
#include "protobooth/analytics/jitter.hpp"
#include "protobooth/analytics/render.hpp"
#include "protobooth/analytics/report.hpp"
#include "protobooth/backend/archive.hpp"
#include "protobooth/backend/http_service.hpp"
#include "protobooth/backend/repository.hpp"
#include "protobooth/error.hpp"
#include "protobooth/node/capture_node.hpp"
#include "protobooth/node/uplink.hpp"
#include "test_support.hpp"

using namespace protobooth;
using namespace protobooth::analytics;
using protobooth::testing::make_record;
using protobooth::testing::TempDir;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kFixtureSeed = 42;

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects the first few mismatches of a check.
class Findings {
 public:
  void expect(bool ok, std::string what) {
    if (ok) return;
    ++failures_;
    if (notes_.size() < 3) notes_.push_back(std::move(what));
  }
  Outcome outcome(std::string summary) const {
    if (failures_ == 0) return {true, std::move(summary)};
    std::string detail = fmt::format("{} mismatch(es): ", failures_);
    for (std::size_t i = 0; i < notes_.size(); ++i) detail += (i ? "; " : "") + notes_[i];
    return {false, detail};
  }

 private:
  int failures_ = 0;
  std::vector<std::string> notes_;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<CaptureRecord> shuffled(std::vector<CaptureRecord> v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

std::vector<std::pair<Timestamp, CaptureId>> by_time(const std::vector<CaptureRecord>& caps) {
  std::vector<std::pair<Timestamp, CaptureId>> order;
  for (const auto& c : caps) order.emplace_back(c.timestamp, c.capture_id);
  std::sort(order.begin(), order.end());
  return order;
}

// ---- fixture fidelity -----------------------------------------------------------

Outcome fixture_fidelity() {
  Findings f;
  TempDir dir;
  const auto start = Clock::now();
  auto repo = backend::Repository::open(dir / "repo");
  const auto fx = synthesize_case_fixture(kFixtureSeed);
  const auto loaded = load_fixture(*repo, fx);
  const double elapsed = seconds_since(start);
  f.expect(elapsed < 1.0, fmt::format("took {:.3f} s", elapsed));

  const auto caps = repo->query_captures({});
  f.expect(caps.size() == 82, fmt::format("{} captures", caps.size()));

  // 2017-11-16T00:00Z .. 2018-01-10T00:00Z must be empty; both sides busy.
  constexpr Timestamp kGapStart = 1510790400, kGapEnd = 1515542400;
  int autumn = 0, spring = 0;
  for (const auto& c : caps) {
    f.expect(c.timestamp < kGapStart || c.timestamp >= kGapEnd,
             fmt::format("{} falls in the gap", c.capture_id));
    (c.timestamp < kGapStart ? autumn : spring)++;
  }
  f.expect(autumn > 0 && spring > 0, fmt::format("bursts {}/{}", autumn, spring));

  const auto order = by_time(caps);
  const auto graph = repo->links(loaded.project_id);
  std::set<int> externals, finals;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto cls = graph.class_of(order[k].second);
    if (cls == NodeClass::ExternalTest) externals.insert(static_cast<int>(k + 1));
    if (cls == NodeClass::FinalConcept) finals.insert(static_cast<int>(k + 1));
  }
  f.expect(externals == std::set<int>{5, 17, 29, 60, 63}, "external-test nodes differ");
  f.expect(finals == std::set<int>{82}, "final node is not prototype 82 alone");
  return f.outcome(fmt::format("82 captures ({} autumn / {} spring), externals 5,17,29,60,63, "
                               "final 82, {:.3f} s",
                               autumn, spring, elapsed));
}

// ---- end-to-end capture ---------------------------------------------------------

/// Loses a seeded 10% of deliveries: half before the request is sent, half
/// after the server stored the capture (acknowledgement lost).
class LossyUplink : public node::Uplink {
 public:
  LossyUplink(node::Uplink& inner, std::uint64_t seed) : inner_(inner), rng_(seed) {}
  IngestReceipt deliver(const CaptureRecord& record, const ImagePayloads& images) override {
    const double roll = std::uniform_real_distribution<double>(0, 1)(rng_);
    if (roll < 0.05) {
      ++injected;
      throw node::UplinkError("injected: connection refused");
    }
    auto receipt = inner_.deliver(record, images);
    if (roll < 0.10) {
      ++injected;
      throw node::UplinkError("injected: acknowledgement lost");
    }
    return receipt;
  }
  int injected = 0;

 private:
  node::Uplink& inner_;
  std::mt19937_64 rng_;
};

Outcome end_to_end_capture() {
  Findings f;
  TempDir dir;
  const auto start = Clock::now();
  auto repo = backend::Repository::open(dir / "server");
  backend::HttpService service(*repo);
  const int port = service.bind("127.0.0.1", 0);
  service.start();
  const std::string url = fmt::format("http://127.0.0.1:{}", port);

  constexpr int kBooths = 4, kSwipes = 25;
  std::atomic<int> injected = 0, captured = 0, left_spooled = 0;
  std::vector<std::thread> booths;
  for (int b = 0; b < kBooths; ++b)
    booths.emplace_back([&, b] {
      const std::int64_t epoch = 1509537600000 + b * 7919;
      node::SimulatedClock clock(epoch);
      node::MockRig rig(clock, {.frame_latency = std::chrono::milliseconds(900)});
      node::DirectorySpool spool(dir / fmt::format("spool-{}", b));
      node::CaptureNode booth({.booth_id = fmt::format("booth-{}", b)}, rig, spool, clock);
      node::HttpUplink http(url);
      LossyUplink uplink(http, 1000 + b);

      std::vector<node::ScriptedSwipe> script;
      for (int i = 0; i < kSwipes; ++i)
        script.push_back({i * 45.0, fmt::format("card-{}-{}", b, i % 5)});
      const auto report = node::run_script(booth, clock, script, epoch, &uplink);
      captured += report.captured;
      for (int round = 0; round < 50 && spool.size() > 0; ++round)
        booth.flush(uplink, {.ignore_schedule = true});
      injected += uplink.injected;
      left_spooled += static_cast<int>(spool.size());
    });
  for (auto& t : booths) t.join();
  service.stop();

  const auto caps = repo->query_captures({});
  std::set<CaptureId> ids;
  std::set<std::tuple<BoothId, CardId, Timestamp>> sightings;
  for (const auto& c : caps) {
    ids.insert(c.capture_id);
    sightings.emplace(c.booth_id, c.card_id, c.timestamp);
    f.expect(c.views.size() == 7, fmt::format("{} has {} views", c.capture_id, c.views.size()));
  }
  const auto report = repo->verify();
  const double elapsed = seconds_since(start);
  f.expect(captured == 100, fmt::format("{} captured", captured.load()));
  f.expect(left_spooled == 0, fmt::format("{} still spooled", left_spooled.load()));
  f.expect(caps.size() == 100, fmt::format("server holds {}", caps.size()));
  f.expect(ids.size() == caps.size() && sightings.size() == caps.size(), "duplicates stored");
  f.expect(report.ok(), fmt::format("{} integrity violations", report.violations.size()));
  f.expect(injected > 0, "no failures were injected");
  f.expect(elapsed < 30, fmt::format("took {:.1f} s", elapsed));
  return f.outcome(fmt::format("100 records x 7 views, 0 duplicates, 0 violations, "
                               "{} injected failures, {:.1f} s",
                               injected.load(), elapsed));
}

// ---- state machine ----------------------------------------------------------------

/// Storage that fails on demand, to check that a failed write spools nothing.
class UnreliableSpool : public node::Spool {
 public:
  void put(const node::SpoolEntry& e) override {
    if (fail_next) {
      fail_next = false;
      throw Error(ErrorCode::kStorage, "disk full");
    }
    inner.put(e);
  }
  std::vector<node::SpoolEntry> entries() const override { return inner.entries(); }
  void reschedule(const CaptureId& id, int n, Timestamp at) override {
    inner.reschedule(id, n, at);
  }
  void remove(const CaptureId& id) override { inner.remove(id); }
  std::size_t size() const override { return inner.size(); }
  std::uint64_t next_counter() override { return inner.next_counter(); }

  node::MemorySpool inner;
  bool fail_next = false;
};

class RepositoryUplink : public node::Uplink {
 public:
  explicit RepositoryUplink(backend::Repository& repo) : repo_(repo) {}
  IngestReceipt deliver(const CaptureRecord& r, const ImagePayloads& images) override {
    if (!online) throw node::UplinkError("offline");
    return repo_.ingest_capture(r, images);
  }
  bool online = true;

 private:
  backend::Repository& repo_;
};

bool entry_complete(const node::SpoolEntry& e) {
  if (!validate_capture(e.record).empty()) return false;
  if (e.images.size() != 7) return false;
  for (ViewAngle a : kAllAngles) {
    auto ref = e.record.views.find(a);
    auto img = e.images.find(a);
    if (ref == e.record.views.end() || img == e.images.end()) return false;
    if (sha256_hex(img->second) != ref->second.content_hash) return false;
    if (static_cast<std::int64_t>(img->second.size()) != ref->second.byte_length) return false;
  }
  return true;
}

Outcome state_machine() {
  using node::NodeEvent;
  using node::NodeState;
  // The declared table, restated here.
  const std::set<std::tuple<NodeState, NodeEvent, NodeState>> declared = {
      {NodeState::Idle, NodeEvent::Swipe, NodeState::Capturing},
      {NodeState::Capturing, NodeEvent::FramesAcquired, NodeState::Uploading},
      {NodeState::Capturing, NodeEvent::Failure, NodeState::Fault},
      {NodeState::Uploading, NodeEvent::Spooled, NodeState::Idle},
      {NodeState::Uploading, NodeEvent::Failure, NodeState::Fault},
      {NodeState::Fault, NodeEvent::Reset, NodeState::Idle},
  };

  Findings f;
  std::mt19937_64 rng(31337);
  long transitions = 0, steps = 0;
  int faults = 0;
  constexpr int kSequences = 10000;
  for (int seq = 0; seq < kSequences; ++seq) {
    node::SimulatedClock clock(1509537600000 + seq);
    node::MockRig rig(clock, {.frame_latency = std::chrono::milliseconds(rng() % 1500)});
    UnreliableSpool spool;
    node::CaptureNode booth({.booth_id = fmt::format("b{}", seq % 5)}, rig, spool, clock);
    auto repo = backend::Repository::in_memory();
    RepositoryUplink up(*repo);
    bool escaped = false;
    booth.set_observer([&](NodeState from, NodeEvent e, NodeState to) {
      ++transitions;
      if (!declared.count({from, e, to})) escaped = true;
    });
    const int length = 1 + static_cast<int>(rng() % 16);
    for (int step = 0; step < length; ++step, ++steps) {
      switch (rng() % 6) {
        case 0:
        case 1:
          rig.options().failing.clear();
          if (rng() % 4 == 0) rig.options().failing.insert(kAllAngles[rng() % 7]);
          spool.fail_next = rng() % 5 == 0;
          if (booth.swipe("card").kind == node::SwipeOutcome::Kind::Fault) ++faults;
          spool.fail_next = false;
          break;
        case 2: {
          // A swipe queued a little while ago, maybe during the last sequence.
          const auto now = clock.now_ms();
          booth.handle({"card-q", now - static_cast<std::int64_t>(rng() % 15000)});
          break;
        }
        case 3: booth.reset(); break;
        case 4: clock.advance(std::chrono::milliseconds(rng() % 20000)); break;
        case 5:
          up.online = rng() % 2;
          booth.flush(up, {.ignore_schedule = rng() % 2 == 0});
          break;
      }
      for (const auto& e : spool.entries())
        f.expect(entry_complete(e), fmt::format("partial spool entry {}", e.record.capture_id));
    }
    f.expect(!escaped, fmt::format("sequence {} left the transition table", seq));
  }
  return f.outcome(fmt::format("{} sequences, {} steps, {} transitions, {} faults, "
                               "0 undeclared, 0 partial entries",
                               kSequences, steps, transitions, faults));
}

// ---- idempotency / round trip -----------------------------------------------------------

struct LoadedRepo {
  std::unique_ptr<backend::Repository> repo;
  LoadedFixture loaded;
};

LoadedRepo fixture_repo(bool bulk = true) {
  LoadedRepo r{backend::Repository::in_memory(), {}};
  r.loaded = load_fixture(*r.repo, synthesize_case_fixture(kFixtureSeed, {.inject_bulk = bulk}));
  return r;
}

Outcome idempotency() {
  Findings f;
  auto source = fixture_repo();
  const auto tar = backend::export_raw(*source.repo).to_tar();

  auto once = backend::Repository::in_memory();
  backend::import_archive(*once, backend::Archive::from_tar(tar));
  const auto single = once->snapshot();

  auto repeated = backend::Repository::in_memory();
  backend::import_archive(*repeated, backend::Archive::from_tar(tar));
  std::size_t rewritten = 0;
  for (int i = 0; i < 2; ++i) {
    const auto r = backend::import_archive(*repeated, backend::Archive::from_tar(tar));
    rewritten += r.documents_written + r.blobs_written + r.conflicts;
  }
  f.expect(repeated->snapshot() == single, "archive re-import changed the repository");
  f.expect(rewritten == 0, fmt::format("re-import wrote {} items", rewritten));

  // The capture path as well: every capture delivered three times.
  const auto fx = synthesize_case_fixture(kFixtureSeed, {.inject_bulk = true});
  auto a = backend::Repository::in_memory();
  auto b = backend::Repository::in_memory();
  for (const auto* list : {&fx.captures, &fx.bulk_captures})
    for (const auto& c : *list) {
      a->ingest_capture(c, fx.images.at(c.capture_id));
      for (int i = 0; i < 3; ++i) {
        const auto receipt = b->ingest_capture(c, fx.images.at(c.capture_id));
        f.expect(receipt.created == (i == 0), "dedup receipt wrong");
      }
    }
  f.expect(a->snapshot() == b->snapshot(), "repeated capture ingest changed the repository");
  return f.outcome(fmt::format("{} captures; archive imported 1x vs 3x and captures ingested "
                               "1x vs 3x are deep-equal",
                               source.loaded.captures));
}

Outcome export_import_round_trip() {
  Findings f;
  TempDir dir;
  auto source = fixture_repo();
  const auto archive = backend::export_raw(*source.repo);
  archive.write_directory(dir / "archive");
  std::ofstream(dir / "archive.tar", std::ios::binary) << to_text(archive.to_tar());

  for (const char* name : {"archive", "archive.tar"}) {
    auto target = backend::Repository::open(dir / fmt::format("restored-{}", name));
    const auto report = backend::import_archive(*target, backend::Archive::load(dir / name));
    f.expect(report.conflicts == 0, fmt::format("{}: {} conflicts", name, report.conflicts));
    f.expect(target->snapshot() == source.repo->snapshot(),
             fmt::format("{}: restored repository differs", name));
    const auto v = target->verify();
    f.expect(v.ok(), fmt::format("{}: {} violations", name, v.violations.size()));
    f.expect(backend::export_raw(*target) == archive, fmt::format("{}: re-export differs", name));
  }
  return f.outcome(fmt::format("{} files, directory and tar layouts restore deep-equal, "
                               "verify clean",
                               archive.files.size()));
}

// ---- analytics oracles --------------------------------------------------------------

struct RandomCoded {
  std::vector<CaptureRecord> captures;
  std::vector<CodeAssignment> assignments;
};

RandomCoded random_coded(std::mt19937_64& rng, const CodingScheme& scheme, int round) {
  RandomCoded out;
  const int n = static_cast<int>(rng() % 101);
  for (int i = 0; i < n; ++i) {
    // Narrow time range so equal timestamps (and the id tie-break) occur.
    out.captures.push_back(make_record(fmt::format("r{}-{:03}", round, rng() % 1000 + i * 1000),
                                       1'500'000'000 + static_cast<Timestamp>(rng() % 60)));
    if (rng() % 10 < 7) {
      std::vector<std::string> cats;
      for (const auto& c : scheme.categories)
        if (rng() % 3 == 0) cats.push_back(c);
      out.assignments.push_back(assign_codes(out.captures.back().capture_id, scheme, cats));
    }
  }
  return out;
}

std::map<CaptureId, std::set<std::string>> codes_by_capture(const RandomCoded& inst) {
  std::map<CaptureId, std::set<std::string>> out;
  for (const auto& a : inst.assignments) out[a.capture_id].insert(a.categories.begin(), a.categories.end());
  return out;
}

Outcome analytics_oracles() {
  Findings f;
  std::mt19937_64 rng(8675309);
  const auto schemes = builtin_schemes();
  constexpr int kInstances = 200;

  for (int round = 0; round < kInstances; ++round) {
    const auto& scheme = schemes[round % schemes.size()];
    const auto inst = random_coded(rng, scheme, round);
    const auto codes = codes_by_capture(inst);
    const auto order = by_time(inst.captures);

    // cumulative_usage: distinct categories seen among the first k.
    const auto series = cumulative_usage(shuffled(inst.captures, round), inst.assignments, scheme);
    std::set<std::string> seen;
    bool usage_ok = series.points.size() == order.size();
    for (std::size_t k = 0; usage_ok && k < order.size(); ++k) {
      if (auto it = codes.find(order[k].second); it != codes.end())
        seen.insert(it->second.begin(), it->second.end());
      usage_ok = series.points[k].k == static_cast<int>(k + 1) &&
                 series.points[k].value == static_cast<int>(seen.size());
    }
    f.expect(usage_ok, fmt::format("cumulative_usage instance {}", round));

    // category_matrix column sums: count of captures carrying each label.
    const auto matrix = category_matrix(shuffled(inst.captures, round + 7), inst.assignments, scheme);
    const auto sums = matrix.column_sums();
    bool matrix_ok = sums.size() == scheme.categories.size() && matrix.rows.size() == order.size();
    for (std::size_t c = 0; matrix_ok && c < sums.size(); ++c) {
      int expected = 0;
      for (const auto& [id, cats] : codes) expected += cats.count(scheme.categories[c]) ? 1 : 0;
      matrix_ok = sums[c] == expected;
    }
    f.expect(matrix_ok, fmt::format("category_matrix instance {}", round));
  }

  // Reachability: boolean transitive closure over forward edges.
  for (int round = 0; round < kInstances; ++round) {
    const int n = 1 + static_cast<int>(rng() % 100);
    std::vector<CaptureRecord> caps;
    for (int i = 0; i < n; ++i)
      caps.push_back(make_record(fmt::format("g{:03}", i), 1'500'000'000 + i * 60));
    LinkGraph g;
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    const int edges = static_cast<int>(rng() % (2 * n + 1));
    for (int e = 0; e < edges; ++e) {
      int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      g.edges.insert({caps[a].capture_id, caps[b].capture_id});
      reach[a][b] = true;
    }
    std::optional<int> fin;
    if (rng() % 5 != 0) {
      fin = static_cast<int>(rng() % n);
      g.node_classes[caps[*fin].capture_id] = NodeClass::FinalConcept;
    }
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        if (reach[i][k])
          for (int j = 0; j < n; ++j)
            if (reach[k][j]) reach[i][j] = true;
    auto expected = [&](int i) { return fin && (i == *fin || reach[i][*fin]); };

    const auto layout = layout_graph(g, shuffled(caps, round), 1);
    bool ok = layout.nodes.size() == static_cast<std::size_t>(n);
    for (int i = 0; ok && i < n; ++i)
      ok = layout.nodes[i].capture_id == caps[i].capture_id &&
           layout.nodes[i].reaches_final == expected(i);
    for (const auto& [id, r] : reachability(g)) {
      const int i = std::stoi(id.substr(1));
      ok = ok && r == expected(i);
    }
    f.expect(ok, fmt::format("reachability instance {}", round));
  }

  // detect_bulk: components of the "same card, within window" relation.
  for (int round = 0; round < kInstances; ++round) {
    const int n = static_cast<int>(rng() % 101);
    const std::int64_t window = 1 + static_cast<std::int64_t>(rng() % 600);
    const int threshold = 1 + static_cast<int>(rng() % 10);
    std::vector<CaptureRecord> caps;
    Timestamp t = 1'500'000'000;
    for (int i = 0; i < n; ++i) {
      t += static_cast<Timestamp>(rng() % 400);
      caps.push_back(make_record(fmt::format("b{:03}", i), t, fmt::format("card{}", rng() % 3)));
    }
    std::vector<int> comp(n);
    std::iota(comp.begin(), comp.end(), 0);
    for (bool changed = true; changed;) {
      changed = false;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (comp[j] < comp[i] && caps[i].card_id == caps[j].card_id &&
              std::abs(caps[i].timestamp - caps[j].timestamp) <= window) {
            comp[i] = comp[j];
            changed = true;
          }
    }
    std::map<int, std::set<CaptureId>> groups;
    for (int i = 0; i < n; ++i) groups[comp[i]].insert(caps[i].capture_id);
    std::set<std::set<CaptureId>> expected, actual;
    for (const auto& [c, ids] : groups)
      if (static_cast<int>(ids.size()) > threshold) expected.insert(ids);
    for (const auto& s : detect_bulk(shuffled(caps, round), window, threshold)) {
      actual.emplace(s.capture_ids.begin(), s.capture_ids.end());
      f.expect(s.count == static_cast<int>(s.capture_ids.size()), "bulk count field");
    }
    f.expect(actual == expected, fmt::format("detect_bulk instance {}", round));
  }
  return f.outcome(fmt::format("{} instances each for cumulative_usage, category_matrix, "
                               "reachability, detect_bulk; 0 mismatches",
                               kInstances));
}

// ---- determinism -------------------------------------------------------------------

std::vector<FigureRequest> all_requests(const ProjectId& project) {
  std::vector<FigureRequest> out;
  for (auto kind : {FigureKind::Weekday, FigureKind::Timeline, FigureKind::Usage,
                    FigureKind::Matrix, FigureKind::Graph, FigureKind::Bulk}) {
    FigureRequest r;
    r.kind = kind;
    r.seed = 42;
    out.push_back(r);
    r.project = project;
    out.push_back(r);
  }
  // Graph needs a project; the unscoped graph request is dropped.
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const FigureRequest& r) {
                             return r.kind == FigureKind::Graph && !r.project;
                           }),
            out.end());
  for (const char* scheme : {"materials", "tools", "disciplines"}) {
    FigureRequest r;
    r.kind = FigureKind::Usage;
    r.scheme = scheme;
    r.mode = CumulativeMode::SummedCounts;
    out.push_back(r);
    r.kind = FigureKind::Matrix;
    out.push_back(r);
  }
  FigureRequest tz;
  tz.kind = FigureKind::Weekday;
  tz.timezone = "CET-1CEST,M3.5.0,M10.5.0/3";
  out.push_back(tz);
  return out;
}

std::vector<double> jitters(const FigureData& fig) {
  std::vector<double> out;
  if (auto* w = std::get_if<WeekdayFigure>(&fig))
    for (const auto& p : w->points) out.push_back(p.jitter);
  if (auto* t = std::get_if<TimelineFigure>(&fig))
    for (const auto& p : t->points) out.push_back(p.jitter);
  if (auto* g = std::get_if<GraphLayout>(&fig))
    for (const auto& n : g->nodes) out.push_back(n.y);
  return out;
}

Outcome determinism() {
  Findings f;
  auto first = fixture_repo();

  // A second repository fed the same data in a different order.
  auto fx = synthesize_case_fixture(kFixtureSeed, {.inject_bulk = true});
  fx.bulk_captures = shuffled(fx.bulk_captures, 3);
  std::mt19937_64 rng(11);
  std::shuffle(fx.assignments.begin(), fx.assignments.end(), rng);
  auto second = backend::Repository::in_memory();
  const auto loaded2 = load_fixture(*second, fx);
  f.expect(loaded2.project_id == first.loaded.project_id, "project ids differ");

  std::size_t outputs = 0, points = 0;
  double worst = 0;
  for (const auto& req : all_requests(first.loaded.project_id)) {
    const auto a = compute_figure(*first.repo, req);
    const auto b = compute_figure(*first.repo, req);
    const auto c = compute_figure(*second, req);
    for (double j : jitters(a)) {
      ++points;
      worst = std::max(worst, std::abs(j));
      f.expect(std::abs(j) <= kJitterBound, fmt::format("jitter {} out of bounds", j));
    }
    for (auto format : {RenderFormat::Svg, RenderFormat::Csv, RenderFormat::Json}) {
      const auto bytes = render(a, format);
      ++outputs;
      f.expect(bytes == render(b, format) && bytes == render(c, format),
               fmt::format("{} output differs between runs", to_string(req.kind)));
    }
  }

  // The figure functions themselves, on shuffled input.
  const auto caps = first.repo->query_captures({});
  const auto graph = first.repo->links(first.loaded.project_id);
  const auto projects = first.repo->projects();
  backend::CaptureFilter in_project;
  in_project.project = first.loaded.project_id;
  const auto members = first.repo->query_captures(in_project);
  const auto materials = builtin_schemes().at(0);
  const auto codes = first.repo->assignments(materials.scheme_id);
  const auto base = std::make_tuple(
      render(WeekdayFigure{weekday_scatter(caps, projects, 9)}, RenderFormat::Svg),
      render(TimelineFigure{project_timeline(caps, 9)}, RenderFormat::Svg),
      render(UsageFigure{{cumulative_usage(caps, codes, materials)}}, RenderFormat::Svg),
      render(category_matrix(caps, codes, materials), RenderFormat::Svg),
      render(layout_graph(graph, members, 9), RenderFormat::Svg),
      render(BulkFigure{detect_bulk(caps)}, RenderFormat::Svg));
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto sc = shuffled(caps, s);
    const auto sm = shuffled(members, s);
    auto scodes = codes;
    std::shuffle(scodes.begin(), scodes.end(), rng);
    const auto again = std::make_tuple(
        render(WeekdayFigure{weekday_scatter(sc, projects, 9)}, RenderFormat::Svg),
        render(TimelineFigure{project_timeline(sc, 9)}, RenderFormat::Svg),
        render(UsageFigure{{cumulative_usage(sc, scodes, materials)}}, RenderFormat::Svg),
        render(category_matrix(sc, scodes, materials), RenderFormat::Svg),
        render(layout_graph(graph, sm, 9), RenderFormat::Svg),
        render(BulkFigure{detect_bulk(sc)}, RenderFormat::Svg));
    f.expect(again == base, fmt::format("shuffle {} changed an SVG", s));
  }

  // The jitter function over many keys and seeds.
  std::mt19937_64 keys(77);
  for (int i = 0; i < 100000; ++i) {
    const double j = jitter(keys(), fmt::format("c{}", keys()));
    worst = std::max(worst, std::abs(j));
    f.expect(std::abs(j) <= kJitterBound, fmt::format("jitter {} out of bounds", j));
  }
  return f.outcome(fmt::format("{} renderings identical across runs and shuffled inputs; "
                               "{} plotted + 100000 sampled jitters, max |j| = {:.4f}",
                               outputs, points, worst));
}

// ---- bulk detection ---------------------------------------------------------------------

Outcome bulk_detection() {
  Findings f;
  const auto fx = synthesize_case_fixture(kFixtureSeed, {.inject_bulk = true});
  std::vector<CaptureRecord> all = fx.captures;
  all.insert(all.end(), fx.bulk_captures.begin(), fx.bulk_captures.end());
  const auto span = fx.bulk_captures.back().timestamp - fx.bulk_captures.front().timestamp;
  f.expect(span <= 600, fmt::format("injected burst spans {} s", span));

  const auto sessions = detect_bulk(all);
  f.expect(sessions.size() == 1, fmt::format("{} sessions flagged", sessions.size()));
  if (!sessions.empty()) {
    f.expect(sessions[0].count == 25, fmt::format("count {}", sessions[0].count));
    f.expect(sessions[0].card_id == fx.bulk_card_id, "wrong card flagged");
  }

  std::vector<CaptureRecord> spread;
  constexpr Timestamp kWeek = 7 * 86400;
  for (int i = 0; i < 25; ++i)
    spread.push_back(make_record(fmt::format("w{:02}", i), 1'520'000'000 + i * kWeek / 24,
                                 "card-weekly"));
  const auto none = detect_bulk(spread);
  f.expect(none.empty(), fmt::format("{} sessions in the weekly spread", none.size()));
  return f.outcome(fmt::format("25 captures in {} s flagged (count=25); 25 over one week not "
                               "flagged (window 1800 s, threshold 20)",
                               span));
}

// ---- builtin schemes ---------------------------------------------------------------------

Outcome builtin_scheme_lists() {
  const std::vector<std::pair<std::string, std::vector<std::string>>> expected = {
      {"materials",
       {"foam", "cardboard", "MDF", "wood", "hard plastics", "soft plastics", "metal",
        "electronics", "other"}},
      {"tools",
       {"hand tools", "3D-printer", "laser cutter", "machining", "vacuum former", "computer"}},
      {"disciplines", {"mechanics", "software", "electronics"}},
  };
  Findings f;
  const auto schemes = builtin_schemes();
  f.expect(schemes.size() == expected.size(), fmt::format("{} schemes", schemes.size()));
  for (std::size_t i = 0; i < std::min(schemes.size(), expected.size()); ++i) {
    f.expect(schemes[i].scheme_id == expected[i].first, "scheme id " + schemes[i].scheme_id);
    f.expect(schemes[i].categories == expected[i].second,
             "categories of " + schemes[i].scheme_id);
  }
  return f.outcome("materials 9, tools 6, disciplines 3 — exact strings and order");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"fixture-fidelity", fixture_fidelity},
      {"end-to-end-capture", end_to_end_capture},
      {"state-machine", state_machine},
      {"idempotency", idempotency},
      {"analytics-oracles", analytics_oracles},
      {"determinism", determinism},
      {"bulk-detection", bulk_detection},
      {"builtin-schemes", builtin_scheme_lists},
      {"export-import-round-trip", export_import_round_trip},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    const auto start = Clock::now();
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << fmt::format("{} {} ({:.2f} s): {}", o.pass ? "PASS" : "FAIL", name,
                             seconds_since(start), o.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size())
            << std::endl;
  return failed == 0 ? 0 : 1;
}
