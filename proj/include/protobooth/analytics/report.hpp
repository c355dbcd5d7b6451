#pragma once

// Figures computed straight from a repository, shared by the HTTP service
// and the command line.

#include <cstdint>
#include <optional>
#include <string>

#include "protobooth/analytics/render.hpp"
#include "protobooth/backend/repository.hpp"

namespace protobooth::analytics {

enum class FigureKind { Weekday, Timeline, Usage, Matrix, Graph, Bulk };

/// Accepts fig3, fig4, fig5, matrix, graph and bulk. Throws
/// Error(kBadRequest) otherwise.
FigureKind parse_figure_kind(std::string_view name);
std::string_view to_string(FigureKind kind);

struct FigureRequest {
  FigureKind kind = FigureKind::Timeline;
  std::optional<ProjectId> project;  // all captures when absent
  std::optional<SchemeId> scheme;
  std::uint64_t seed = 1;
  std::string timezone = "UTC";
  CumulativeMode mode = CumulativeMode::DistinctCategories;
  std::int64_t window_seconds = kDefaultBulkWindow;
  int threshold = kDefaultBulkThreshold;
};

/// Usage without a scheme plots the three builtin schemes; matrix defaults to
/// materials; graph requires a project. Throws Error(kNotFound) for an
/// unknown project, Error(kUnknownScheme) for an unknown scheme.
FigureData compute_figure(const backend::Repository& repo,
                          const FigureRequest& request);

}  // namespace protobooth::analytics
