#pragma once

// Domain types shared by the booth node, the backend and the analytics.
// Everything here is a plain value type; mutation happens in the backend
// repository only.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace protobooth {

using CaptureId = std::string;
using BoothId = std::string;
using CardId = std::string;
using UserId = std::string;
using ProjectId = std::string;
using SchemeId = std::string;

/// UNIX seconds, UTC.
using Timestamp = std::int64_t;

enum class ViewAngle { Front, Top, Right, Left, RearRight, RearLeft, Rear };

/// Fixed acquisition order, also the canonical serialisation order.
inline constexpr std::array<ViewAngle, 7> kAllAngles = {
    ViewAngle::Front,     ViewAngle::Top,      ViewAngle::Right,
    ViewAngle::Left,      ViewAngle::RearRight, ViewAngle::RearLeft,
    ViewAngle::Rear};

std::string_view to_string(ViewAngle angle);
std::optional<ViewAngle> parse_view_angle(std::string_view name);

struct ImageRef {
  std::string content_hash;  // lowercase hex SHA-256 of the image bytes
  std::string media_type;
  std::int64_t byte_length = 0;

  bool operator==(const ImageRef&) const = default;
};

/// File extension used on disk and in archives for a media type.
std::string_view extension_for(std::string_view media_type);

struct Annotation {
  std::optional<std::string> title;
  std::optional<std::string> description;
  std::optional<std::string> intent;

  bool empty() const { return !title && !description && !intent; }
  bool operator==(const Annotation&) const = default;
};

struct CaptureRecord {
  CaptureId capture_id;
  BoothId booth_id;
  CardId card_id;
  Timestamp timestamp = 0;
  std::map<ViewAngle, ImageRef> views;
  Annotation annotation;

  bool operator==(const CaptureRecord&) const = default;
};

struct User {
  UserId user_id;
  std::string display_name;
  std::set<CardId> card_ids;

  bool operator==(const User&) const = default;
};

struct Project {
  ProjectId project_id;
  std::string title;
  std::string description;
  std::set<UserId> contributors;
  std::set<CaptureId> members;

  bool operator==(const Project&) const = default;
};

/// Letters, digits and `-_.:`, not starting with a dot. Ids double as file
/// names in spools and archives.
bool is_safe_id(std::string_view id);

/// Every violated CaptureRecord invariant, as human-readable lines.
/// An empty result means the record is valid.
std::vector<std::string> validate_capture(const CaptureRecord& record);

/// Strict weak order used everywhere prototypes are "sorted chronologically":
/// timestamp ascending, capture_id ascending on ties.
bool chronologically_before(const CaptureRecord& a, const CaptureRecord& b);

std::vector<CaptureRecord> canonical_order(std::vector<CaptureRecord> captures);

/// Rank lookup over a set of captures in canonical order. Ranks are
/// zero-based positions in canonical_order.
class ChronologicalIndex {
 public:
  ChronologicalIndex() = default;
  explicit ChronologicalIndex(std::span<const CaptureRecord> captures);

  std::optional<std::size_t> rank(std::string_view capture_id) const;
  bool contains(std::string_view capture_id) const {
    return rank(capture_id).has_value();
  }
  const std::vector<CaptureId>& ordered_ids() const { return ordered_; }
  std::size_t size() const { return ordered_.size(); }

 private:
  std::vector<CaptureId> ordered_;
  std::map<CaptureId, std::size_t, std::less<>> ranks_;
};

}  // namespace protobooth
