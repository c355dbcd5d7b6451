#pragma once

// Shared builders for tests.

#include <filesystem>
#include <random>
#include <string>

#include "protobooth/hash.hpp"
#include "protobooth/model.hpp"

namespace protobooth::testing {

inline CaptureRecord make_record(const std::string& id, Timestamp ts,
                                 const std::string& card = "card-1",
                                 const std::string& booth = "booth-1") {
  CaptureRecord r;
  r.capture_id = id;
  r.booth_id = booth;
  r.card_id = card;
  r.timestamp = ts;
  for (ViewAngle a : kAllAngles) {
    const std::string payload = id + "/" + std::string(to_string(a));
    r.views[a] = ImageRef{sha256_hex(payload), "image/x-portable-pixmap",
                          static_cast<std::int64_t>(payload.size())};
  }
  return r;
}

/// Temporary directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("protobooth-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& sub) const {
    return path_ / sub;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace protobooth::testing
