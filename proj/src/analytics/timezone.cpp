#include "protobooth/analytics/timezone.hpp"

#include <algorithm>
#include <boost/date_time/local_time/local_time.hpp>
#include <cctype>
#include <chrono>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "protobooth/error.hpp"

namespace protobooth::analytics {

struct TimeZone::Rule {
  boost::local_time::time_zone_ptr zone;
};

namespace {

[[noreturn]] void bad_zone(const std::string& name, const std::string& why) {
  throw Error(ErrorCode::kValidation, fmt::format("time zone {}: {}", name, why));
}

// POSIX TZ strings count offsets west of UTC and give the DST offset as an
// absolute value; boost's posix_time_zone counts east and wants the DST
// offset as a delta from standard time. Quoted names (<+03>) are not
// understood by boost either, so names are replaced by placeholders.
class PosixRuleTranslator {
 public:
  explicit PosixRuleTranslator(std::string_view text) : s_(text) {}

  std::string translate(const std::string& label) {
    if (!name()) bad_zone(label, "missing standard-time name");
    auto std_west = offset();
    if (!std_west) bad_zone(label, "missing UTC offset");
    std::string out = "STD" + format_offset(-*std_west);
    if (pos_ == s_.size()) return out;
    if (!name()) bad_zone(label, "malformed rule");
    out += "DST";
    if (auto dst_west = offset()) out += format_offset(*std_west - *dst_west);
    if (pos_ < s_.size()) {
      if (s_[pos_] != ',') bad_zone(label, "malformed rule");
      out += s_.substr(pos_);
    }
    return out;
  }

 private:
  bool name() {
    if (pos_ < s_.size() && s_[pos_] == '<') {
      auto close = s_.find('>', pos_);
      if (close == std::string_view::npos) return false;
      pos_ = close + 1;
      return true;
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return pos_ - start >= 3;
  }

  std::optional<int> offset() {
    int sign = 1;
    std::size_t start = pos_;
    if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-'))
      sign = s_[pos_++] == '-' ? -1 : 1;
    int total = 0;
    for (int field = 0, scale = 3600; field < 3; ++field, scale /= 60) {
      if (field > 0) {
        if (pos_ >= s_.size() || s_[pos_] != ':') break;
        ++pos_;
      }
      int v = 0, digits = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        v = v * 10 + (s_[pos_++] - '0');
        ++digits;
      }
      if (digits == 0) {
        pos_ = start;
        return std::nullopt;
      }
      total += v * scale;
    }
    return sign * total;
  }

  static std::string format_offset(int east) {
    const char sign = east < 0 ? '-' : '+';
    east = std::abs(east);
    return fmt::format("{}{:02d}:{:02d}:{:02d}", sign, east / 3600, east / 60 % 60,
                       east % 60);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

bool is_zone_name(const std::string& name) {
  if (name.empty() || name.front() == '/' || name.find("..") != std::string::npos)
    return false;
  for (char c : name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '/' && c != '_' &&
        c != '-' && c != '+')
      return false;
  return true;
}

// The TZif footer: a newline-enclosed POSIX rule after the binary data.
std::optional<std::string> zoneinfo_footer(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  if (data.rfind("TZif", 0) != 0 || data.size() < 2 || data.back() != '\n')
    return std::nullopt;
  auto open = data.rfind('\n', data.size() - 2);
  if (open == std::string::npos) return std::nullopt;
  return data.substr(open + 1, data.size() - open - 2);
}

}  // namespace

TimeZone TimeZone::utc() { return TimeZone("UTC", nullptr); }

TimeZone TimeZone::resolve(const std::string& name,
                           const std::filesystem::path& zoneinfo_root) {
  if (name == "UTC" || name == "Z" || name.empty()) return utc();

  std::string rule = name;
  if (is_zone_name(name)) {
    std::error_code ec;
    const auto file = zoneinfo_root / name;
    if (std::filesystem::is_regular_file(file, ec)) {
      auto footer = zoneinfo_footer(file);
      if (!footer) bad_zone(name, "not a TZif file");
      if (footer->empty()) bad_zone(name, "zone has no current rule");
      rule = *footer;
    }
  }
  std::string translated = PosixRuleTranslator(rule).translate(name);
  try {
    auto r = std::make_shared<Rule>();
    r->zone.reset(new boost::local_time::posix_time_zone(translated));
    return TimeZone(name, std::move(r));
  } catch (const std::exception& e) {
    bad_zone(name, std::string("unsupported rule: ") + e.what());
  }
}

std::int64_t TimeZone::utc_offset(Timestamp ts) const {
  if (!rule_) return 0;
  using namespace boost::posix_time;
  const ptime epoch(boost::gregorian::date(1970, 1, 1));
  const ptime at = epoch + seconds(ts);
  boost::local_time::local_date_time local(at, rule_->zone);
  return (local.local_time() - at).total_seconds();
}

LocalTime TimeZone::to_local(Timestamp ts) const {
  using namespace std::chrono;
  const sys_seconds local{seconds{ts + utc_offset(ts)}};
  const auto day = floor<days>(local);
  const hh_mm_ss hms{local - day};
  LocalTime out;
  out.weekday = static_cast<int>(weekday{day}.iso_encoding()) - 1;
  out.hour = static_cast<int>(hms.hours().count());
  out.minute = static_cast<int>(hms.minutes().count());
  out.second = static_cast<int>(hms.seconds().count());
  return out;
}

}  // namespace protobooth::analytics
