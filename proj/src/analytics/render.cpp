#include "protobooth/analytics/render.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "protobooth/analytics/jitter.hpp"
#include "protobooth/error.hpp"

namespace protobooth::analytics {

namespace {

constexpr std::array<const char*, 10> kPalette = {
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
constexpr const char* kNoProject = "#999999";

std::string num(double v) {
  auto s = fmt::format("{:.2f}", v);
  return s == "-0.00" ? "0.00" : s;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string utc_date(Timestamp ts) {
  using namespace std::chrono;
  const std::chrono::year_month_day ymd{floor<days>(sys_seconds{seconds{ts}})};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

// Tick step giving at most `max_ticks` ticks over [0, span].
int tick_step(double span, int max_ticks) {
  return std::max(1, static_cast<int>(std::ceil(span / max_ticks)));
}

struct Plot {
  double x0, x1, y0, y1;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

class Svg {
 public:
  Svg(int width, int height, std::string_view title) {
    out_ = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"11\">\n"
        "<title>{2}</title>\n"
        "<rect width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
        width, height, xml_escape(title));
    text(width / 2.0, 18, title, "middle", "font-size=\"14\"");
  }

  void raw(std::string_view s) { out_ += s; }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke,
            std::string_view extra = "") {
    out_ += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\"{}{}/>\n",
                        num(x1), num(y1), num(x2), num(y2), stroke,
                        extra.empty() ? "" : " ", extra);
  }

  void rect(double x, double y, double w, double h, std::string_view fill) {
    out_ += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                        num(x), num(y), num(w), num(h), fill);
  }

  void circle(double cx, double cy, double r, std::string_view fill,
              std::string_view extra = "") {
    out_ += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"{}{}/>\n", num(cx),
                        num(cy), num(r), fill, extra.empty() ? "" : " ", extra);
  }

  void text(double x, double y, std::string_view s, std::string_view anchor = "start",
            std::string_view extra = "") {
    out_ += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"{}\"{}{}>{}</text>\n", num(x),
                        num(y), anchor, extra.empty() ? "" : " ", extra, xml_escape(s));
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke) {
    out_ += "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"";
    out_ += stroke;
    out_ += "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out_ += ' ';
      out_ += num(pts[i].first) + "," + num(pts[i].second);
    }
    out_ += "\"/>\n";
  }

  void frame(const Plot& p) {
    line(p.x0, p.y1, p.x1, p.y1, "#333333");
    line(p.x0, p.y0, p.x0, p.y1, "#333333");
  }

  void legend(double x, double y, const std::vector<std::pair<std::string, std::string>>& items,
              std::size_t max_items = 20) {
    for (std::size_t i = 0; i < items.size() && i < max_items; ++i) {
      rect(x, y + i * 16 - 9, 10, 10, items[i].second);
      text(x + 16, y + i * 16, items[i].first);
    }
    if (items.size() > max_items)
      text(x, y + max_items * 16, fmt::format("+{} more", items.size() - max_items));
  }

  std::string finish() { return out_ + "</svg>\n"; }

 private:
  std::string out_;
};

// ---- weekday scatter ---------------------------------------------------

std::map<ProjectId, std::string> project_colours(const std::vector<ScatterPoint>& points) {
  std::set<ProjectId> keys;
  for (const auto& p : points)
    if (p.color_key) keys.insert(*p.color_key);
  std::map<ProjectId, std::string> out;
  std::size_t i = 0;
  for (const auto& k : keys) out[k] = kPalette[i++ % kPalette.size()];
  return out;
}

std::string svg(const WeekdayFigure& f) {
  static constexpr std::array<const char*, 7> kDays = {"Mon", "Tue", "Wed", "Thu",
                                                       "Fri", "Sat", "Sun"};
  Svg s(1000, 400, "Captures by time of day and weekday");
  const Plot p{60, 840, 30, 360};
  const double lane_h = p.height() / 7;
  for (int h = 0; h <= 24; h += 3) {
    const double x = p.x0 + h / 24.0 * p.width();
    s.line(x, p.y0, x, p.y1, "#e5e5e5");
    s.text(x, p.y1 + 16, fmt::format("{:02d}:00", h), "middle");
  }
  for (int d = 0; d < 7; ++d) s.text(p.x0 - 8, p.y0 + (d + 0.5) * lane_h + 4, kDays[d], "end");
  s.frame(p);
  s.text((p.x0 + p.x1) / 2, p.y1 + 34, "time of day", "middle");

  const auto colours = project_colours(f.points);
  for (const auto& pt : f.points) {
    const double cx = p.x0 + std::clamp(pt.x, 0.0, 24.0) / 24.0 * p.width();
    const double cy = p.y0 + (pt.lane + 0.5 + pt.jitter) * lane_h;
    s.circle(cx, cy, 3, pt.color_key ? colours.at(*pt.color_key) : kNoProject,
             "fill-opacity=\"0.8\"");
  }
  std::vector<std::pair<std::string, std::string>> items(colours.begin(), colours.end());
  if (std::any_of(f.points.begin(), f.points.end(), [](auto& pt) { return !pt.color_key; }))
    items.emplace_back("no project", kNoProject);
  s.legend(860, p.y0 + 10, items);
  return s.finish();
}

std::string csv(const WeekdayFigure& f) {
  std::string out = "capture_id,x,lane,jitter,color_key\n";
  for (const auto& p : f.points)
    out += fmt::format("{},{:.4f},{},{:.6f},{}\n", csv_field(p.capture_id), p.x, p.lane,
                       p.jitter, csv_field(p.color_key.value_or("")));
  return out;
}

// ---- timeline ---------------------------------------------------------

std::string svg(const TimelineFigure& f) {
  Svg s(1000, 400, "Project timeline");
  const Plot p{60, 960, 40, 340};
  double lo = 0, hi = 1;
  if (!f.points.empty()) {
    lo = f.points.front().x;
    hi = f.points.back().x;
    for (const auto& pt : f.points) {
      lo = std::min(lo, pt.x);
      hi = std::max(hi, pt.x);
    }
    if (hi - lo < 86400) {
      lo -= 43200;
      hi += 43200;
    }
  }
  auto px = [&](double t) { return p.x0 + (t - lo) / (hi - lo) * p.width(); };

  // Month ticks at the first of each month inside the range.
  using namespace std::chrono;
  const auto first = year_month_day{floor<days>(sys_seconds{seconds{static_cast<Timestamp>(lo)}})};
  year_month ym{first.year(), first.month()};
  const int months = static_cast<int>((hi - lo) / (30.44 * 86400)) + 1;
  const int step = tick_step(months, 12);
  for (int i = 0;; ++i) {
    ym += std::chrono::months{1};
    const auto t = static_cast<double>(
        sys_seconds{sys_days{ym / 1}.time_since_epoch()}.time_since_epoch().count());
    if (t > hi) break;
    if (i % step) continue;
    s.line(px(t), p.y0, px(t), p.y1, "#e5e5e5");
    s.text(px(t), p.y1 + 16,
           fmt::format("{:04d}-{:02d}", static_cast<int>(ym.year()),
                       static_cast<unsigned>(ym.month())),
           "middle");
  }
  s.frame(p);
  const double mid = (p.y0 + p.y1) / 2;
  for (const auto& pt : f.points)
    s.circle(px(pt.x), mid + pt.jitter / kJitterBound * p.height() / 2 * 0.9, 3.5,
             kPalette[0], "fill-opacity=\"0.8\"");
  s.text(p.x0, p.y1 + 34, fmt::format("{} captures", f.points.size()));
  return s.finish();
}

std::string csv(const TimelineFigure& f) {
  std::string out = "capture_id,timestamp,lane,jitter\n";
  for (const auto& p : f.points)
    out += fmt::format("{},{},{},{:.6f}\n", csv_field(p.capture_id),
                       static_cast<Timestamp>(p.x), p.lane, p.jitter);
  return out;
}

// ---- cumulative usage -------------------------------------------------

void y_axis(Svg& s, const Plot& p, int max_value) {
  const int step = tick_step(max_value, 10);
  for (int v = 0; v <= max_value; v += step) {
    const double y = p.y1 - static_cast<double>(v) / max_value * p.height();
    s.line(p.x0, y, p.x1, y, "#e5e5e5");
    s.text(p.x0 - 6, y + 4, std::to_string(v), "end");
  }
}

void x_ticks(Svg& s, const Plot& p, int n, auto&& px) {
  const int step = tick_step(n, 20);
  for (int k = 1; k <= n; k += step) s.text(px(k), p.y1 + 16, std::to_string(k), "middle");
}

std::string svg(const UsageFigure& f) {
  const bool summed = !f.series.empty() && f.series[0].mode == CumulativeMode::SummedCounts;
  Svg s(1000, 400, summed ? "Cumulative category assignments" : "Cumulative categories used");
  const Plot p{60, 840, 40, 350};
  int n = 1, max_value = 1;
  for (const auto& series : f.series) {
    n = std::max(n, static_cast<int>(series.points.size()));
    for (const auto& pt : series.points) max_value = std::max(max_value, pt.value);
  }
  auto px = [&](double k) { return p.x0 + (n == 1 ? 0.5 : (k - 1) / (n - 1)) * p.width(); };
  auto py = [&](double v) { return p.y1 - v / max_value * p.height(); };
  y_axis(s, p, max_value);
  x_ticks(s, p, n, px);
  s.frame(p);
  s.text((p.x0 + p.x1) / 2, p.y1 + 34, "prototype (chronological)", "middle");

  std::vector<std::pair<std::string, std::string>> items;
  for (std::size_t i = 0; i < f.series.size(); ++i) {
    const char* colour = kPalette[i % kPalette.size()];
    std::vector<std::pair<double, double>> pts;
    for (const auto& pt : f.series[i].points) {
      if (!pts.empty()) pts.emplace_back(px(pt.k), pts.back().second);
      pts.emplace_back(px(pt.k), py(pt.value));
    }
    s.polyline(pts, colour);
    items.emplace_back(f.series[i].scheme_id, colour);
  }
  s.legend(860, p.y0 + 10, items);
  return s.finish();
}

std::string csv(const UsageFigure& f) {
  if (f.series.size() == 1) {
    const auto& series = f.series[0];
    std::string out = series.mode == CumulativeMode::SummedCounts ? "k,cumulative_sum\n"
                                                                  : "k,distinct_count\n";
    for (const auto& pt : series.points) out += fmt::format("{},{}\n", pt.k, pt.value);
    return out;
  }
  std::string out = "k";
  std::size_t n = 0;
  for (const auto& series : f.series) {
    out += "," + csv_field(series.scheme_id);
    n = std::max(n, series.points.size());
  }
  out += '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out += std::to_string(i + 1);
    for (const auto& series : f.series)
      out += i < series.points.size() ? "," + std::to_string(series.points[i].value) : ",";
    out += '\n';
  }
  return out;
}

// ---- category matrix --------------------------------------------------

std::string svg(const CategoryMatrix& m) {
  Svg s(1000, 400, fmt::format("Categories per prototype: {}", m.scheme_id));
  const Plot p{60, 800, 40, 350};
  const int n = std::max<int>(1, static_cast<int>(m.rows.size()));
  const int max_value = std::max<int>(1, static_cast<int>(m.columns.size()));
  y_axis(s, p, max_value);
  const double bar = p.width() / n;
  const double unit = p.height() / max_value;
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    double top = p.y1;
    for (std::size_t c = 0; c < m.cells[r].size(); ++c) {
      if (!m.cells[r][c]) continue;
      top -= unit;
      s.rect(p.x0 + r * bar + bar * 0.1, top, bar * 0.8, unit, kPalette[c % kPalette.size()]);
    }
  }
  x_ticks(s, p, static_cast<int>(m.rows.size()),
          [&](int k) { return p.x0 + (k - 0.5) * bar; });
  s.frame(p);
  s.text((p.x0 + p.x1) / 2, p.y1 + 34, "prototype (chronological)", "middle");
  std::vector<std::pair<std::string, std::string>> items;
  for (std::size_t c = 0; c < m.columns.size(); ++c)
    items.emplace_back(m.columns[c], kPalette[c % kPalette.size()]);
  s.legend(820, p.y0 + 10, items);
  return s.finish();
}

std::string csv(const CategoryMatrix& m) {
  std::string out = "capture_id";
  for (const auto& c : m.columns) out += "," + csv_field(c);
  out += ",row_sum\n";
  const auto sums = m.row_sums();
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    out += csv_field(m.rows[r]);
    for (int v : m.cells[r]) out += "," + std::to_string(v);
    out += "," + std::to_string(sums[r]) + "\n";
  }
  return out;
}

// ---- link graph -------------------------------------------------------

const char* class_colour(NodeClass cls) {
  switch (cls) {
    case NodeClass::ExternalTest: return "#1f77b4";
    case NodeClass::FinalConcept: return "#2ca02c";
    case NodeClass::Internal: break;
  }
  return "#555555";
}

std::string svg(const GraphLayout& g) {
  Svg s(1200, 600, "Links between prototypes");
  const Plot p{50, 1150, 50, 530};
  const int n = static_cast<int>(g.nodes.size());
  auto px = [&](int x) { return p.x0 + (n <= 1 ? 0.5 : (x - 1.0) / (n - 1)) * p.width(); };
  auto py = [&](double y) { return (p.y0 + p.y1) / 2 + y / kJitterBound * p.height() / 2; };

  s.raw(
      "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"15\" refY=\"5\" "
      "markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\">"
      "<path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#888888\"/></marker></defs>\n");
  std::map<CaptureId, std::pair<double, double>> pos;
  for (const auto& node : g.nodes) pos[node.capture_id] = {px(node.x), py(node.y)};
  for (const auto& [from, to] : g.edges) {
    const auto [ax, ay] = pos.at(from);
    const auto [bx, by] = pos.at(to);
    s.line(ax, ay, bx, by, "#888888", "stroke-width=\"1\" marker-end=\"url(#arrow)\"");
  }
  for (const auto& node : g.nodes) {
    const auto [cx, cy] = pos.at(node.capture_id);
    const char* colour = class_colour(node.cls);
    if (node.reaches_final || node.cls == NodeClass::FinalConcept)
      s.circle(cx, cy, 6, colour);
    else
      s.circle(cx, cy, 6, "#ffffff", fmt::format("stroke=\"{}\" stroke-width=\"2\"", colour));
    s.text(cx, cy - 9, std::to_string(node.x), "middle", "font-size=\"8\"");
  }
  s.line(p.x0, p.y1 + 20, p.x1, p.y1 + 20, "#333333");
  s.text(p.x0, p.y1 + 36, "earliest", "start");
  s.text(p.x1, p.y1 + 36, "latest", "end");
  const std::vector<std::pair<std::string, std::string>> items = {
      {"internal", class_colour(NodeClass::Internal)},
      {"external test", class_colour(NodeClass::ExternalTest)},
      {"final concept", class_colour(NodeClass::FinalConcept)}};
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double x = 400 + i * 140.0;
    s.circle(x, 585, 5, items[i].second);
    s.text(x + 10, 589, items[i].first);
  }
  s.circle(820, 585, 5, "#ffffff", "stroke=\"#555555\" stroke-width=\"2\"");
  s.text(830, 589, "no path to final concept");
  return s.finish();
}

std::string csv(const GraphLayout& g) {
  std::string out = "type,from,to,x,y,class\n";
  for (const auto& node : g.nodes)
    out += fmt::format("node,{},,{},{:.6f},{}\n", csv_field(node.capture_id), node.x, node.y,
                       to_string(node.cls));
  for (const auto& [from, to] : g.edges)
    out += fmt::format("edge,{},{},,,\n", csv_field(from), csv_field(to));
  return out;
}

// ---- bulk sessions ----------------------------------------------------

std::string svg(const BulkFigure& f) {
  Svg s(1000, 400, "Bulk capture sessions");
  const Plot p{60, 960, 40, 330};
  if (f.sessions.empty()) {
    s.text(500, 200, "no bulk sessions", "middle");
    return s.finish();
  }
  int max_value = 1;
  for (const auto& b : f.sessions) max_value = std::max(max_value, b.count);
  y_axis(s, p, max_value);
  const double bar = p.width() / f.sessions.size();
  for (std::size_t i = 0; i < f.sessions.size(); ++i) {
    const auto& b = f.sessions[i];
    const double h = static_cast<double>(b.count) / max_value * p.height();
    s.rect(p.x0 + i * bar + bar * 0.15, p.y1 - h, bar * 0.7, h, kPalette[2]);
    s.text(p.x0 + (i + 0.5) * bar, p.y1 + 16, utc_date(b.window_start), "middle");
    s.text(p.x0 + (i + 0.5) * bar, p.y1 + 30, b.card_id, "middle", "font-size=\"9\"");
  }
  s.frame(p);
  return s.finish();
}

std::string csv(const BulkFigure& f) {
  std::string out = "card_id,window_start,window_end,count,capture_ids\n";
  for (const auto& b : f.sessions) {
    std::string ids;
    for (const auto& id : b.capture_ids) ids += (ids.empty() ? "" : ";") + id;
    out += fmt::format("{},{},{},{},{}\n", csv_field(b.card_id), b.window_start, b.window_end,
                       b.count, csv_field(ids));
  }
  return out;
}

// ---- JSON ---------------------------------------------------------------

Json points_json(const std::vector<ScatterPoint>& points) {
  Json arr = Json::array();
  for (const auto& p : points)
    arr.push_back({{"capture_id", p.capture_id},
                   {"x", p.x},
                   {"lane", p.lane},
                   {"jitter", p.jitter},
                   {"color_key", p.color_key ? Json(*p.color_key) : Json(nullptr)}});
  return arr;
}

struct JsonVisitor {
  Json operator()(const WeekdayFigure& f) const {
    return {{"figure", "weekday"}, {"points", points_json(f.points)}};
  }
  Json operator()(const TimelineFigure& f) const {
    return {{"figure", "timeline"}, {"points", points_json(f.points)}};
  }
  Json operator()(const UsageFigure& f) const {
    Json series = Json::array();
    for (const auto& s : f.series) {
      Json pts = Json::array();
      for (const auto& pt : s.points) pts.push_back({{"k", pt.k}, {"value", pt.value}});
      series.push_back({{"scheme_id", s.scheme_id},
                        {"mode", std::string(to_string(s.mode))},
                        {"points", pts}});
    }
    return {{"figure", "usage"}, {"series", series}};
  }
  Json operator()(const CategoryMatrix& m) const {
    return {{"figure", "matrix"},        {"scheme_id", m.scheme_id},
            {"rows", m.rows},            {"columns", m.columns},
            {"cells", m.cells},          {"row_sums", m.row_sums()},
            {"column_sums", m.column_sums()}};
  }
  Json operator()(const GraphLayout& g) const {
    Json nodes = Json::array(), edges = Json::array();
    for (const auto& n : g.nodes)
      nodes.push_back({{"capture_id", n.capture_id},
                       {"x", n.x},
                       {"y", n.y},
                       {"class", std::string(to_string(n.cls))},
                       {"reaches_final", n.reaches_final}});
    for (const auto& [from, to] : g.edges) edges.push_back({{"from", from}, {"to", to}});
    return {{"figure", "graph"}, {"project_id", g.project_id}, {"nodes", nodes},
            {"edges", edges}};
  }
  Json operator()(const BulkFigure& f) const {
    Json sessions = Json::array();
    for (const auto& b : f.sessions)
      sessions.push_back({{"card_id", b.card_id},
                          {"window_start", b.window_start},
                          {"window_end", b.window_end},
                          {"count", b.count},
                          {"capture_ids", b.capture_ids}});
    return {{"figure", "bulk"}, {"sessions", sessions}};
  }
};

}  // namespace

RenderFormat parse_render_format(std::string_view name) {
  if (name == "svg") return RenderFormat::Svg;
  if (name == "csv") return RenderFormat::Csv;
  if (name == "json") return RenderFormat::Json;
  throw Error(ErrorCode::kUnsupportedFormat,
              fmt::format("unsupported format \"{}\" (expected svg, csv or json)", name));
}

std::string_view content_type(RenderFormat format) {
  switch (format) {
    case RenderFormat::Svg: return "image/svg+xml";
    case RenderFormat::Csv: return "text/csv";
    case RenderFormat::Json: break;
  }
  return "application/json";
}

Json to_json(const FigureData& figure) { return std::visit(JsonVisitor{}, figure); }

std::string render(const FigureData& figure, RenderFormat format) {
  switch (format) {
    case RenderFormat::Svg:
      return std::visit([](const auto& f) { return svg(f); }, figure);
    case RenderFormat::Csv:
      return std::visit([](const auto& f) { return csv(f); }, figure);
    case RenderFormat::Json:
      break;
  }
  return to_json(figure).dump(2) + "\n";
}

}  // namespace protobooth::analytics
