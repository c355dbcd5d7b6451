#pragma once

// SVG, CSV and JSON renderings of figure data.
//
// CSV schemas (one header line, then one row per record):
//   weekday   capture_id,x,lane,jitter,color_key
//   timeline  capture_id,timestamp,lane,jitter
//   usage     k,distinct_count            one distinct-mode series
//             k,cumulative_sum            one summed-mode series
//             k,<scheme>,<scheme>,...     several series side by side
//   matrix    capture_id,<category>...,row_sum
//   graph     type,from,to,x,y,class      node rows leave `to` empty,
//                                         edge rows leave x, y, class empty
//   bulk      card_id,window_start,window_end,count,capture_ids
//             (ids separated by ';')
//
// SVG canvases are 1000×400, except the link graph at 1200×600.

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "protobooth/analytics/figures.hpp"
#include "protobooth/serialize.hpp"

namespace protobooth::analytics {

struct WeekdayFigure {
  std::vector<ScatterPoint> points;
  bool operator==(const WeekdayFigure&) const = default;
};

struct TimelineFigure {
  std::vector<ScatterPoint> points;
  bool operator==(const TimelineFigure&) const = default;
};

struct UsageFigure {
  std::vector<CumulativeSeries> series;
  bool operator==(const UsageFigure&) const = default;
};

struct BulkFigure {
  std::vector<BulkSession> sessions;
  bool operator==(const BulkFigure&) const = default;
};

using FigureData = std::variant<WeekdayFigure, TimelineFigure, UsageFigure,
                                CategoryMatrix, GraphLayout, BulkFigure>;

enum class RenderFormat { Svg, Csv, Json };

/// Throws Error(kUnsupportedFormat).
RenderFormat parse_render_format(std::string_view name);
std::string_view content_type(RenderFormat format);

std::string render(const FigureData& figure, RenderFormat format);

Json to_json(const FigureData& figure);

}  // namespace protobooth::analytics
