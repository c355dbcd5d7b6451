#pragma once

#include <chrono>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

#include "protobooth/hash.hpp"
#include "protobooth/model.hpp"
#include "protobooth/node/clock.hpp"

namespace protobooth::node {

struct Frame {
  Bytes bytes;
  std::string media_type;
};

struct Resolution {
  int width = 1920;
  int height = 1080;
};

/// Identifies the sequence a frame belongs to. Real webcam adapters may
/// ignore it; the mock rig derives its pixels from it.
struct CaptureContext {
  BoothId booth_id;
  CaptureId capture_id;
};

class RigError : public std::runtime_error {
 public:
  RigError(ViewAngle angle, const std::string& what)
      : std::runtime_error(what), angle_(angle) {}
  ViewAngle angle() const { return angle_; }

 private:
  ViewAngle angle_;
};

/// Seven inward-facing cameras. Hardware adapters implement this.
class CameraRig {
 public:
  virtual ~CameraRig() = default;
  /// Throws RigError when the camera cannot deliver a frame.
  virtual Frame acquire(ViewAngle angle, const CaptureContext& ctx) = 0;
  virtual Resolution resolution() const = 0;
};

inline constexpr const char* kMockMediaType = "image/x-portable-pixmap";

/// Pure function of its inputs: a small binary PPM whose leading pixels spell
/// out "booth|capture|angle" and whose remaining pixels come from a SHA-256
/// stream over the same key.
Bytes mock_frame_bytes(const BoothId& booth_id, const CaptureId& capture_id,
                       ViewAngle angle);

struct MockRigOptions {
  std::chrono::milliseconds frame_latency{1200};
  /// Paid once per sequence, before the first frame.
  std::chrono::milliseconds setup_latency{300};
  Resolution declared{1920, 1080};
  std::set<ViewAngle> failing;
};

class MockRig final : public CameraRig {
 public:
  MockRig(Clock& clock, MockRigOptions options = {})
      : clock_(clock), options_(std::move(options)) {}

  Frame acquire(ViewAngle angle, const CaptureContext& ctx) override;
  Resolution resolution() const override { return options_.declared; }

  MockRigOptions& options() { return options_; }

 private:
  Clock& clock_;
  MockRigOptions options_;
};

}  // namespace protobooth::node
