#pragma once

#include <string>
#include <utility>

#include "protobooth/ingest.hpp"
#include "protobooth/node/camera_rig.hpp"

namespace protobooth::testing {

struct CaptureWithImages {
  CaptureRecord record;
  ImagePayloads images;
};

/// A valid record whose images are mock-rig frames.
inline CaptureWithImages make_capture(const std::string& id, Timestamp ts,
                                      const std::string& card = "card-1",
                                      const std::string& booth = "booth-1") {
  CaptureWithImages out;
  out.record.capture_id = id;
  out.record.booth_id = booth;
  out.record.card_id = card;
  out.record.timestamp = ts;
  for (ViewAngle a : kAllAngles) {
    Bytes bytes = node::mock_frame_bytes(booth, id, a);
    out.record.views[a] = ImageRef{sha256_hex(bytes), node::kMockMediaType,
                                   static_cast<std::int64_t>(bytes.size())};
    out.images.emplace(a, std::move(bytes));
  }
  return out;
}

}  // namespace protobooth::testing
