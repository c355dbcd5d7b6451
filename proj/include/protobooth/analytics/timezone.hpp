#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "protobooth/model.hpp"

namespace protobooth::analytics {

struct LocalTime {
  int weekday = 0;  // ISO order, Monday = 0
  int hour = 0;
  int minute = 0;
  int second = 0;
};

/// Display time zone for time-of-day plots. Accepts "UTC", a POSIX TZ rule
/// ("CET-1CEST,M3.5.0,M10.5.0/3") or an IANA name looked up under the
/// zoneinfo directory (its POSIX footer is used, which is exact for current
/// rules).
class TimeZone {
 public:
  static TimeZone utc();
  /// Throws Error(kValidation) when the name cannot be resolved.
  static TimeZone resolve(const std::string& name,
                          const std::filesystem::path& zoneinfo_root =
                              "/usr/share/zoneinfo");

  LocalTime to_local(Timestamp ts) const;
  /// Seconds east of UTC in effect at `ts`.
  std::int64_t utc_offset(Timestamp ts) const;
  const std::string& name() const { return name_; }

 private:
  struct Rule;
  TimeZone(std::string name, std::shared_ptr<const Rule> rule)
      : name_(std::move(name)), rule_(std::move(rule)) {}

  std::string name_;
  std::shared_ptr<const Rule> rule_;  // null for UTC
};

}  // namespace protobooth::analytics
