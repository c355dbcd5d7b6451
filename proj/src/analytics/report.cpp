#include "protobooth/analytics/report.hpp"

#include <fmt/format.h>

#include "protobooth/error.hpp"

namespace protobooth::analytics {

namespace {

constexpr std::array<std::pair<FigureKind, std::string_view>, 6> kNames = {{
    {FigureKind::Weekday, "fig3"},
    {FigureKind::Timeline, "fig4"},
    {FigureKind::Usage, "fig5"},
    {FigureKind::Matrix, "matrix"},
    {FigureKind::Graph, "graph"},
    {FigureKind::Bulk, "bulk"},
}};

CodingScheme require_scheme(const backend::Repository& repo, const SchemeId& id) {
  auto s = repo.scheme(id);
  if (!s) throw Error(ErrorCode::kUnknownScheme, fmt::format("unknown scheme {}", id));
  return *s;
}

}  // namespace

FigureKind parse_figure_kind(std::string_view name) {
  for (const auto& [kind, n] : kNames)
    if (n == name) return kind;
  throw Error(ErrorCode::kBadRequest,
              fmt::format("unknown figure \"{}\" (expected fig3, fig4, fig5, matrix, "
                          "graph or bulk)",
                          name));
}

std::string_view to_string(FigureKind kind) {
  for (const auto& [k, n] : kNames)
    if (k == kind) return n;
  return "?";
}

FigureData compute_figure(const backend::Repository& repo, const FigureRequest& request) {
  backend::CaptureFilter filter;
  if (request.project) {
    if (!repo.project(*request.project))
      throw Error(ErrorCode::kNotFound, fmt::format("unknown project {}", *request.project));
    filter.project = request.project;
  }
  const auto captures = repo.query_captures(filter);

  // Assignments of one scheme, restricted to the selected captures by the
  // figure functions themselves.
  auto codes_for = [&](const CodingScheme& scheme) { return repo.assignments(scheme.scheme_id); };

  switch (request.kind) {
    case FigureKind::Weekday: {
      const auto projects = repo.projects();
      return WeekdayFigure{weekday_scatter(captures, projects, request.seed,
                                           TimeZone::resolve(request.timezone))};
    }
    case FigureKind::Timeline:
      return TimelineFigure{project_timeline(captures, request.seed)};
    case FigureKind::Usage: {
      UsageFigure f;
      std::vector<CodingScheme> schemes;
      if (request.scheme)
        schemes.push_back(require_scheme(repo, *request.scheme));
      else
        schemes = builtin_schemes();
      for (const auto& s : schemes)
        f.series.push_back(cumulative_usage(captures, codes_for(s), s, request.mode));
      return f;
    }
    case FigureKind::Matrix: {
      const auto s = require_scheme(repo, request.scheme.value_or(kMaterialsScheme));
      return category_matrix(captures, codes_for(s), s);
    }
    case FigureKind::Graph:
      if (!request.project)
        throw Error(ErrorCode::kBadRequest, "the link graph needs a project");
      return layout_graph(repo.links(*request.project), captures, request.seed);
    case FigureKind::Bulk:
      return BulkFigure{detect_bulk(captures, request.window_seconds, request.threshold)};
  }
  throw Error(ErrorCode::kBadRequest, "unknown figure");
}

}  // namespace protobooth::analytics
