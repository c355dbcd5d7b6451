#pragma once

// Figure data computed from captures, codes and link graphs. Every function
// is pure: output depends only on its arguments, never on input order.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "protobooth/analytics/timezone.hpp"
#include "protobooth/link_graph.hpp"
#include "protobooth/model.hpp"
#include "protobooth/schemes.hpp"

namespace protobooth::analytics {

struct ScatterPoint {
  CaptureId capture_id;
  double x = 0;  // local hours for the weekday plot, UNIX seconds for timelines
  int lane = 0;
  double jitter = 0;
  std::optional<ProjectId> color_key;

  bool operator==(const ScatterPoint&) const = default;
};

/// Time of day against weekday. Points in canonical order; a capture in
/// several projects is keyed by the smallest project id.
std::vector<ScatterPoint> weekday_scatter(std::span<const CaptureRecord> captures,
                                          std::span<const Project> projects,
                                          std::uint64_t seed,
                                          const TimeZone& tz = TimeZone::utc());

/// Absolute time on a single lane; no binning.
std::vector<ScatterPoint> project_timeline(std::span<const CaptureRecord> captures,
                                           std::uint64_t seed);

enum class CumulativeMode {
  DistinctCategories,  // |union of categories over prototypes 1..k|
  SummedCounts,        // sum of per-prototype category counts over 1..k
};

std::string_view to_string(CumulativeMode mode);
std::optional<CumulativeMode> parse_cumulative_mode(std::string_view name);

struct CumulativePoint {
  int k = 0;  // 1-based prototype index
  int value = 0;

  bool operator==(const CumulativePoint&) const = default;
};

struct CumulativeSeries {
  SchemeId scheme_id;
  CumulativeMode mode = CumulativeMode::DistinctCategories;
  std::vector<CumulativePoint> points;

  bool operator==(const CumulativeSeries&) const = default;
};

/// Assignments for captures outside `captures` are ignored. Throws
/// Error(kUnknownScheme) for an assignment of another scheme and
/// Error(kUnknownCategory) for a label the scheme lacks.
CumulativeSeries cumulative_usage(
    std::span<const CaptureRecord> captures,
    std::span<const CodeAssignment> assignments, const CodingScheme& scheme,
    CumulativeMode mode = CumulativeMode::DistinctCategories);

struct CategoryMatrix {
  SchemeId scheme_id;
  std::vector<CaptureId> rows;       // canonical order
  std::vector<std::string> columns;  // scheme category order
  std::vector<std::vector<int>> cells;

  std::vector<int> row_sums() const;
  std::vector<int> column_sums() const;

  bool operator==(const CategoryMatrix&) const = default;
};

/// Same errors as cumulative_usage.
CategoryMatrix category_matrix(std::span<const CaptureRecord> captures,
                               std::span<const CodeAssignment> assignments,
                               const CodingScheme& scheme);

struct LayoutNode {
  CaptureId capture_id;
  int x = 0;       // chronological rank, 1..N
  double y = 0;    // jitter, lane units
  NodeClass cls = NodeClass::Internal;
  bool reaches_final = false;

  bool operator==(const LayoutNode&) const = default;
};

struct GraphLayout {
  ProjectId project_id;
  std::vector<LayoutNode> nodes;  // ordered by x
  std::vector<Edge> edges;

  bool operator==(const GraphLayout&) const = default;
};

/// Every capture becomes a node. Throws Error(kNotFound) when the graph
/// mentions a capture not in `captures` and Error(kChronology) for an edge
/// that does not point forward.
GraphLayout layout_graph(const LinkGraph& graph,
                         std::span<const CaptureRecord> captures,
                         std::uint64_t seed);

inline constexpr std::int64_t kDefaultBulkWindow = 1800;
inline constexpr int kDefaultBulkThreshold = 20;

struct BulkSession {
  CardId card_id;
  Timestamp window_start = 0;
  Timestamp window_end = 0;
  std::vector<CaptureId> capture_ids;  // canonical order
  int count = 0;

  bool operator==(const BulkSession&) const = default;
};

/// Maximal same-card runs whose consecutive gaps are at most
/// `window_seconds`, reported when longer than `threshold`. Sorted by
/// window_start, then card. Throws Error(kValidation) for window ≤ 0 or
/// threshold < 1.
std::vector<BulkSession> detect_bulk(std::span<const CaptureRecord> captures,
                                     std::int64_t window_seconds = kDefaultBulkWindow,
                                     int threshold = kDefaultBulkThreshold);

}  // namespace protobooth::analytics
