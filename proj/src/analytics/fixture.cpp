#include "protobooth/analytics/fixture.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "protobooth/error.hpp"
#include "protobooth/node/camera_rig.hpp"
#include "protobooth/node/capture_node.hpp"

namespace protobooth::analytics {

namespace {

constexpr Timestamp kAutumnStart = 1506816000;  // 2017-10-01T00:00Z
constexpr int kAutumnDays = 46;                 // through Nov 15
constexpr Timestamp kSpringStart = 1515542400;  // 2018-01-10T00:00Z
constexpr int kSpringDays = 126;                // through May 15
constexpr int kAutumnCaptures = 30;
constexpr Timestamp kBulkStart = 1521036000;    // 2018-03-14T14:00Z
constexpr Timestamp kBulkSpacing = 24;          // 25 captures in under 10 min

constexpr std::array<int, 5> kExternalTests = {5, 17, 29, 60, 63};

using Rng = std::mt19937_64;

int uniform(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Working hours on a day of the burst, mostly on weekdays.
Timestamp working_time(Rng& rng, Timestamp start, int days) {
  for (;;) {
    const Timestamp day = start + static_cast<Timestamp>(uniform(rng, 0, days - 1)) * 86400;
    const int weekday = static_cast<int>((day / 86400 + 3) % 7);  // Monday = 0
    if (weekday >= 5 && uniform(rng, 0, 9) < 8) continue;
    return day + uniform(rng, 8 * 3600, 19 * 3600 + 3599);
  }
}

CaptureRecord make_record(const BoothId& booth, const CardId& card, Timestamp ts,
                          int millis, std::uint64_t counter,
                          std::map<CaptureId, ImagePayloads>& images) {
  CaptureRecord r;
  r.capture_id = node::generate_capture_id(booth, ts * 1000 + millis, counter);
  r.booth_id = booth;
  r.card_id = card;
  r.timestamp = ts;
  auto& payloads = images[r.capture_id];
  for (ViewAngle a : kAllAngles) {
    Bytes bytes = node::mock_frame_bytes(booth, r.capture_id, a);
    r.views[a] = ImageRef{sha256_hex(bytes), node::kMockMediaType,
                          static_cast<std::int64_t>(bytes.size())};
    payloads.emplace(a, std::move(bytes));
  }
  return r;
}

// Random codes for every prototype, then every category still unused is
// given to some prototype so the cumulative curves reach the scheme size.
std::vector<CodeAssignment> code_scheme(Rng& rng, const CodingScheme& scheme,
                                        const std::vector<CaptureRecord>& captures,
                                        int max_per_prototype,
                                        const std::map<int, std::vector<std::string>>& fixed) {
  const int n = static_cast<int>(captures.size());
  const int c = static_cast<int>(scheme.categories.size());
  std::vector<std::set<std::string>> picked(n);
  for (int k = 1; k <= n; ++k) {
    if (auto it = fixed.find(k); it != fixed.end()) {
      picked[k - 1].insert(it->second.begin(), it->second.end());
      continue;
    }
    // Early prototypes lean on the first (cheap, quick) categories.
    const int reach = std::max(2, c * k / n);
    for (int i = uniform(rng, 1, max_per_prototype); i > 0; --i)
      picked[k - 1].insert(scheme.categories[uniform(rng, 0, std::min(reach, c) - 1)]);
  }
  std::set<std::string> used;
  for (const auto& p : picked) used.insert(p.begin(), p.end());
  for (const auto& cat : scheme.categories) {
    if (used.count(cat)) continue;
    int k;
    do k = uniform(rng, 1, n);
    while (fixed.count(k));
    picked[k - 1].insert(cat);
  }
  std::vector<CodeAssignment> out;
  for (int k = 1; k <= n; ++k)
    out.push_back(assign_codes(captures[k - 1].capture_id, scheme,
                               {picked[k - 1].begin(), picked[k - 1].end()}));
  return out;
}

LinkGraph make_graph(Rng& rng, const std::vector<CaptureRecord>& captures) {
  const int n = static_cast<int>(captures.size());
  auto id = [&](int k) { return captures[k - 1].capture_id; };

  // A few prototypes stay entirely unlinked.
  std::set<int> isolated;
  const std::set<int> reserved = {1, 5, 17, 29, 60, 63, 80, 81, 82};
  while (isolated.size() < 4) {
    int k = uniform(rng, 2, n - 3);
    if (!reserved.count(k)) isolated.insert(k);
  }

  // Most prototypes feed one or two later ones, so several routes converge
  // on the final concept; a few dead ends strand the prototypes before them.
  std::set<int> dead_ends;
  while (dead_ends.size() < 5) {
    int k = uniform(rng, 2, n - 10);
    if (!reserved.count(k) && !isolated.count(k)) dead_ends.insert(k);
  }

  LinkGraph g;
  for (int k = 1; k < n; ++k) {
    if (isolated.count(k) || dead_ends.count(k)) continue;
    const int fanout = uniform(rng, 0, 99) < 30 ? 2 : 1;
    for (int added = 0, tries = 0; added < fanout && tries < 20; ++tries) {
      const int to = std::min(n, k + uniform(rng, 1, 8));
      if (isolated.count(to) || g.edges.count({id(k), id(to)})) continue;
      g.edges.insert({id(k), id(to)});
      ++added;
    }
  }
  g.edges.insert({id(n - 1), id(n)});
  for (int k : kExternalTests) g.node_classes[id(k)] = NodeClass::ExternalTest;
  g.node_classes[id(n)] = NodeClass::FinalConcept;
  return g;
}

}  // namespace

CaseFixture synthesize_case_fixture(std::uint64_t seed, const FixtureOptions& options) {
  Rng rng(seed);
  CaseFixture fx;
  fx.booth_id = "booth-trolllabs";
  fx.card_id = "card-4f2a9c";
  fx.user_name = "Case student";
  fx.project_title = "CPR mannequin";
  fx.project_description = "Low-cost CPR training mannequin, master's thesis project";

  std::set<Timestamp> times;
  while (times.size() < kAutumnCaptures)
    times.insert(working_time(rng, kAutumnStart, kAutumnDays));
  while (times.size() < kCasePrototypes)
    times.insert(working_time(rng, kSpringStart, kSpringDays));

  std::uint64_t counter = 0;
  for (Timestamp ts : times)
    fx.captures.push_back(make_record(fx.booth_id, fx.card_id, ts, uniform(rng, 0, 999),
                                      ++counter, fx.images));

  const auto schemes = builtin_schemes();
  const std::map<int, std::vector<std::string>> p37 = {
      {37, {"hard plastics", "electronics", "metal"}}};
  for (auto& a : code_scheme(rng, schemes[0], fx.captures, 3, p37))
    fx.assignments.push_back(std::move(a));
  for (auto& a : code_scheme(rng, schemes[1], fx.captures, 2, {}))
    fx.assignments.push_back(std::move(a));
  for (auto& a : code_scheme(rng, schemes[2], fx.captures, 2, {}))
    fx.assignments.push_back(std::move(a));

  fx.graph = make_graph(rng, fx.captures);

  fx.bulk_card_id = "card-bulk-7d31";
  if (options.inject_bulk) {
    for (int i = 0; i < kBulkInjectionSize; ++i)
      fx.bulk_captures.push_back(make_record(fx.booth_id, fx.bulk_card_id,
                                             kBulkStart + i * kBulkSpacing, 0, ++counter,
                                             fx.images));
  }
  return fx;
}

LoadedFixture load_fixture(backend::Repository& repo, const CaseFixture& fixture) {
  if (repo.capture_count() != 0)
    throw Error(ErrorCode::kConflict, "the case fixture needs an empty repository");

  LoadedFixture out;
  const User user = repo.create_user(fixture.user_name);
  repo.register_card(fixture.card_id, user.user_id);
  out.user_id = user.user_id;

  for (const auto* list : {&fixture.captures, &fixture.bulk_captures})
    for (const auto& c : *list) {
      repo.ingest_capture(c, fixture.images.at(c.capture_id));
      ++out.captures;
    }

  const Project project = repo.create_project(fixture.project_title,
                                              fixture.project_description, user.user_id);
  out.project_id = project.project_id;
  std::vector<CaptureId> members;
  for (const auto& c : fixture.captures) members.push_back(c.capture_id);
  repo.assign_to_project(project.project_id, members);

  for (const auto& a : fixture.assignments)
    repo.set_codes(a.capture_id, a.scheme_id, a.categories);

  LinkGraph graph = fixture.graph;
  graph.project_id = project.project_id;
  repo.put_links(project.project_id, graph);
  return out;
}

}  // namespace protobooth::analytics
