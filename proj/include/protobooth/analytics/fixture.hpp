#pragma once

// Synthetic reproduction of the single-student case project: 82 prototypes
// in two bursts (autumn 2017, spring 2018) from one card at one booth, coded
// under the three builtin schemes and linked into a graph that ends in the
// final concept.

#include <cstdint>
#include <map>
#include <vector>

#include "protobooth/backend/repository.hpp"
#include "protobooth/ingest.hpp"
#include "protobooth/link_graph.hpp"
#include "protobooth/model.hpp"
#include "protobooth/schemes.hpp"

namespace protobooth::analytics {

inline constexpr int kCasePrototypes = 82;
inline constexpr int kBulkInjectionSize = 25;

struct FixtureOptions {
  /// Adds 25 captures within ten minutes from a second card. They belong to
  /// no project.
  bool inject_bulk = false;
};

struct CaseFixture {
  BoothId booth_id;
  CardId card_id;
  std::string user_name;
  std::string project_title;
  std::string project_description;
  std::vector<CaptureRecord> captures;  // canonical order; prototype k at k-1
  std::map<CaptureId, ImagePayloads> images;
  std::vector<CodeAssignment> assignments;
  LinkGraph graph;  // project_id left empty until loaded
  CardId bulk_card_id;
  std::vector<CaptureRecord> bulk_captures;

  std::vector<CodeAssignment> assignments_for(const SchemeId& scheme_id) const {
    std::vector<CodeAssignment> out;
    for (const auto& a : assignments)
      if (a.scheme_id == scheme_id) out.push_back(a);
    return out;
  }

  /// Id of prototype k, 1-based.
  const CaptureId& prototype(int k) const { return captures.at(k - 1).capture_id; }
};

CaseFixture synthesize_case_fixture(std::uint64_t seed,
                                    const FixtureOptions& options = {});

struct LoadedFixture {
  UserId user_id;
  ProjectId project_id;
  std::size_t captures = 0;
};

/// Ingests everything into an empty repository. Throws Error(kConflict) if
/// the repository already holds captures.
LoadedFixture load_fixture(backend::Repository& repo, const CaseFixture& fixture);

}  // namespace protobooth::analytics
