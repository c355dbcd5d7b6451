#include "protobooth/model.hpp"

#include <algorithm>

#include "protobooth/error.hpp"
#include "protobooth/hash.hpp"

namespace protobooth {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kUnknownCategory: return "unknown_category";
    case ErrorCode::kUnknownScheme: return "unknown_scheme";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kChronology: return "chronology";
    case ErrorCode::kHashMismatch: return "hash_mismatch";
    case ErrorCode::kStorage: return "storage";
    case ErrorCode::kBadRequest: return "bad_request";
    case ErrorCode::kUnsupportedFormat: return "unsupported_format";
  }
  return "unknown";
}

std::string_view to_string(ViewAngle angle) {
  switch (angle) {
    case ViewAngle::Front: return "front";
    case ViewAngle::Top: return "top";
    case ViewAngle::Right: return "right";
    case ViewAngle::Left: return "left";
    case ViewAngle::RearRight: return "rear_right";
    case ViewAngle::RearLeft: return "rear_left";
    case ViewAngle::Rear: return "rear";
  }
  return "";
}

std::optional<ViewAngle> parse_view_angle(std::string_view name) {
  for (ViewAngle a : kAllAngles) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::string_view extension_for(std::string_view media_type) {
  if (media_type == "image/x-portable-pixmap") return "ppm";
  if (media_type == "image/jpeg") return "jpg";
  if (media_type == "image/png") return "png";
  return "bin";
}

bool is_safe_id(std::string_view id) {
  if (id.empty() || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' ||
           c == ':';
  });
}

std::vector<std::string> validate_capture(const CaptureRecord& record) {
  std::vector<std::string> out;
  if (record.capture_id.empty()) {
    out.emplace_back("capture_id empty");
  } else if (!is_safe_id(record.capture_id)) {
    out.emplace_back("capture_id contains unsafe characters");
  }
  if (record.booth_id.empty()) out.emplace_back("booth_id empty");
  if (record.card_id.empty()) out.emplace_back("card_id empty");
  if (record.timestamp <= 0) out.emplace_back("timestamp nonpositive");

  std::string missing;
  for (ViewAngle a : kAllAngles) {
    if (!record.views.contains(a)) {
      if (!missing.empty()) missing += ", ";
      missing += to_string(a);
    }
  }
  if (!missing.empty()) out.push_back("views incomplete: " + missing);

  for (const auto& [angle, ref] : record.views) {
    const std::string name(to_string(angle));
    if (!is_sha256_hex(ref.content_hash))
      out.push_back("view " + name + ": content_hash is not a sha256 digest");
    if (ref.byte_length <= 0)
      out.push_back("view " + name + ": byte_length nonpositive");
    if (ref.media_type.empty())
      out.push_back("view " + name + ": media_type empty");
  }
  return out;
}

bool chronologically_before(const CaptureRecord& a, const CaptureRecord& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.capture_id < b.capture_id;
}

std::vector<CaptureRecord> canonical_order(std::vector<CaptureRecord> captures) {
  std::sort(captures.begin(), captures.end(), chronologically_before);
  return captures;
}

ChronologicalIndex::ChronologicalIndex(std::span<const CaptureRecord> captures) {
  std::vector<const CaptureRecord*> sorted;
  sorted.reserve(captures.size());
  for (const auto& c : captures) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(),
            [](const CaptureRecord* a, const CaptureRecord* b) {
              return chronologically_before(*a, *b);
            });
  for (const CaptureRecord* c : sorted) {
    if (ranks_.contains(c->capture_id)) continue;
    ranks_.emplace(c->capture_id, ordered_.size());
    ordered_.push_back(c->capture_id);
  }
}

std::optional<std::size_t> ChronologicalIndex::rank(
    std::string_view capture_id) const {
  auto it = ranks_.find(capture_id);
  if (it == ranks_.end()) return std::nullopt;
  return it->second;
}

}  // namespace protobooth
