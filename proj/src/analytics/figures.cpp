#include "protobooth/analytics/figures.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "protobooth/analytics/jitter.hpp"
#include "protobooth/error.hpp"

namespace protobooth::analytics {

namespace {

std::vector<CaptureRecord> sorted(std::span<const CaptureRecord> captures) {
  return canonical_order({captures.begin(), captures.end()});
}

// Category indices per capture, checked against the scheme. Several
// assignments for one capture are merged.
std::map<CaptureId, std::set<std::size_t>> index_codes(
    std::span<const CodeAssignment> assignments, const CodingScheme& scheme) {
  std::map<std::string_view, std::size_t> column;
  for (std::size_t i = 0; i < scheme.categories.size(); ++i)
    column.emplace(scheme.categories[i], i);

  std::map<CaptureId, std::set<std::size_t>> out;
  for (const auto& a : assignments) {
    if (a.scheme_id != scheme.scheme_id)
      throw Error(ErrorCode::kUnknownScheme,
                  fmt::format("assignment for {} belongs to scheme {}, not {}",
                              a.capture_id, a.scheme_id, scheme.scheme_id));
    auto& cells = out[a.capture_id];
    for (const auto& label : a.categories) {
      auto it = column.find(label);
      if (it == column.end())
        throw Error(ErrorCode::kUnknownCategory,
                    fmt::format("scheme {} has no category \"{}\"", scheme.scheme_id,
                                label));
      cells.insert(it->second);
    }
  }
  return out;
}

}  // namespace

std::vector<ScatterPoint> weekday_scatter(std::span<const CaptureRecord> captures,
                                          std::span<const Project> projects,
                                          std::uint64_t seed, const TimeZone& tz) {
  std::map<CaptureId, ProjectId> first_project;
  for (const auto& p : projects)
    for (const auto& id : p.members) {
      auto [it, fresh] = first_project.emplace(id, p.project_id);
      if (!fresh && p.project_id < it->second) it->second = p.project_id;
    }

  std::vector<ScatterPoint> out;
  for (const auto& c : sorted(captures)) {
    const auto local = tz.to_local(c.timestamp);
    ScatterPoint p;
    p.capture_id = c.capture_id;
    p.x = local.hour + local.minute / 60.0;
    p.lane = local.weekday;
    p.jitter = jitter(seed, c.capture_id);
    if (auto it = first_project.find(c.capture_id); it != first_project.end())
      p.color_key = it->second;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ScatterPoint> project_timeline(std::span<const CaptureRecord> captures,
                                           std::uint64_t seed) {
  std::vector<ScatterPoint> out;
  for (const auto& c : sorted(captures))
    out.push_back({c.capture_id, static_cast<double>(c.timestamp), 0,
                   jitter(seed, c.capture_id), std::nullopt});
  return out;
}

std::string_view to_string(CumulativeMode mode) {
  return mode == CumulativeMode::DistinctCategories ? "distinct" : "summed";
}

std::optional<CumulativeMode> parse_cumulative_mode(std::string_view name) {
  if (name == "distinct") return CumulativeMode::DistinctCategories;
  if (name == "summed") return CumulativeMode::SummedCounts;
  return std::nullopt;
}

CumulativeSeries cumulative_usage(std::span<const CaptureRecord> captures,
                                  std::span<const CodeAssignment> assignments,
                                  const CodingScheme& scheme, CumulativeMode mode) {
  const auto codes = index_codes(assignments, scheme);
  CumulativeSeries out{scheme.scheme_id, mode, {}};
  std::set<std::size_t> used;
  int total = 0;
  int k = 0;
  for (const auto& c : sorted(captures)) {
    if (auto it = codes.find(c.capture_id); it != codes.end()) {
      used.insert(it->second.begin(), it->second.end());
      total += static_cast<int>(it->second.size());
    }
    const int value = mode == CumulativeMode::DistinctCategories
                          ? static_cast<int>(used.size())
                          : total;
    out.points.push_back({++k, value});
  }
  return out;
}

std::vector<int> CategoryMatrix::row_sums() const {
  std::vector<int> out;
  for (const auto& row : cells) {
    int sum = 0;
    for (int v : row) sum += v;
    out.push_back(sum);
  }
  return out;
}

std::vector<int> CategoryMatrix::column_sums() const {
  std::vector<int> out(columns.size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size() && c < out.size(); ++c) out[c] += row[c];
  return out;
}

CategoryMatrix category_matrix(std::span<const CaptureRecord> captures,
                               std::span<const CodeAssignment> assignments,
                               const CodingScheme& scheme) {
  const auto codes = index_codes(assignments, scheme);
  CategoryMatrix m;
  m.scheme_id = scheme.scheme_id;
  m.columns = scheme.categories;
  for (const auto& c : sorted(captures)) {
    std::vector<int> row(scheme.categories.size(), 0);
    if (auto it = codes.find(c.capture_id); it != codes.end())
      for (auto col : it->second) row[col] = 1;
    m.rows.push_back(c.capture_id);
    m.cells.push_back(std::move(row));
  }
  return m;
}

GraphLayout layout_graph(const LinkGraph& graph,
                         std::span<const CaptureRecord> captures,
                         std::uint64_t seed) {
  const ChronologicalIndex index(captures);
  for (const auto& id : graph.nodes())
    if (!index.contains(id))
      throw Error(ErrorCode::kNotFound,
                  fmt::format("link graph references unknown capture {}", id));
  for (const auto& [from, to] : graph.edges)
    if (*index.rank(from) >= *index.rank(to))
      throw Error(ErrorCode::kChronology,
                  fmt::format("edge {} -> {} does not point forward in time", from, to));

  const auto reach = reachability(graph);
  GraphLayout out;
  out.project_id = graph.project_id;
  int x = 0;
  for (const auto& id : index.ordered_ids()) {
    auto r = reach.find(id);
    out.nodes.push_back({id, ++x, jitter(seed, id), graph.class_of(id),
                         r != reach.end() && r->second});
  }
  out.edges.assign(graph.edges.begin(), graph.edges.end());
  std::sort(out.edges.begin(), out.edges.end(), [&](const Edge& a, const Edge& b) {
    return std::pair(*index.rank(a.first), *index.rank(a.second)) <
           std::pair(*index.rank(b.first), *index.rank(b.second));
  });
  return out;
}

std::vector<BulkSession> detect_bulk(std::span<const CaptureRecord> captures,
                                     std::int64_t window_seconds, int threshold) {
  if (window_seconds <= 0)
    throw Error(ErrorCode::kValidation, "bulk window must be positive");
  if (threshold < 1) throw Error(ErrorCode::kValidation, "bulk threshold must be at least 1");

  std::map<CardId, std::vector<const CaptureRecord*>> by_card;
  const auto ordered = sorted(captures);
  for (const auto& c : ordered) by_card[c.card_id].push_back(&c);

  std::vector<BulkSession> out;
  auto emit = [&](const CardId& card, std::span<const CaptureRecord* const> run) {
    if (static_cast<int>(run.size()) <= threshold) return;
    BulkSession s{card, run.front()->timestamp, run.back()->timestamp, {},
                  static_cast<int>(run.size())};
    for (const auto* c : run) s.capture_ids.push_back(c->capture_id);
    out.push_back(std::move(s));
  };
  for (const auto& [card, list] : by_card) {
    std::size_t start = 0;
    for (std::size_t i = 1; i <= list.size(); ++i) {
      if (i == list.size() || list[i]->timestamp - list[i - 1]->timestamp > window_seconds) {
        emit(card, std::span(list).subspan(start, i - start));
        start = i;
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const BulkSession& a, const BulkSession& b) {
    return std::tie(a.window_start, a.card_id) < std::tie(b.window_start, b.card_id);
  });
  return out;
}

}  // namespace protobooth::analytics
