#include <string>

#include "protobooth/node/camera_rig.hpp"

namespace protobooth::node {

namespace {

constexpr int kWidth = 32;
constexpr int kHeight = 24;

int hex_value(char c) { return c <= '9' ? c - '0' : c - 'a' + 10; }

}  // namespace

Bytes mock_frame_bytes(const BoothId& booth_id, const CaptureId& capture_id,
                       ViewAngle angle) {
  const std::string key =
      booth_id + "|" + capture_id + "|" + std::string(to_string(angle));
  const std::string header = "P6\n" + std::to_string(kWidth) + " " +
                             std::to_string(kHeight) + "\n255\n";
  const std::size_t pixel_bytes = kWidth * kHeight * 3;

  Bytes out(header.begin(), header.end());
  out.reserve(header.size() + pixel_bytes);
  for (char c : key) {
    if (out.size() - header.size() == pixel_bytes) break;
    out.push_back(static_cast<unsigned char>(c));
  }
  for (std::uint64_t block = 0; out.size() - header.size() < pixel_bytes; ++block) {
    const std::string digest = sha256_hex(key + "#" + std::to_string(block));
    for (std::size_t i = 0; i + 1 < digest.size() &&
                            out.size() - header.size() < pixel_bytes;
         i += 2) {
      out.push_back(static_cast<unsigned char>(hex_value(digest[i]) * 16 +
                                               hex_value(digest[i + 1])));
    }
  }
  return out;
}

Frame MockRig::acquire(ViewAngle angle, const CaptureContext& ctx) {
  if (angle == kAllAngles.front() && options_.setup_latency.count() > 0)
    clock_.sleep_for(options_.setup_latency);
  if (options_.frame_latency.count() > 0) clock_.sleep_for(options_.frame_latency);
  if (options_.failing.contains(angle)) {
    throw RigError(angle, "camera " + std::string(to_string(angle)) +
                              " did not deliver a frame");
  }
  return Frame{mock_frame_bytes(ctx.booth_id, ctx.capture_id, angle),
               kMockMediaType};
}

}  // namespace protobooth::node
