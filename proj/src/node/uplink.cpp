#include "protobooth/node/uplink.hpp"

#include <httplib.h>

#include <algorithm>

#include "protobooth/serialize.hpp"

namespace protobooth::node {

std::chrono::seconds backoff_delay(int attempt_count) {
  constexpr std::int64_t kBase = 5;
  constexpr std::int64_t kCap = 600;
  if (attempt_count <= 0) return std::chrono::seconds(0);
  std::int64_t delay = kBase;
  for (int i = 1; i < attempt_count && delay < kCap; ++i) delay *= 2;
  return std::chrono::seconds(std::min(delay, kCap));
}

DeliveryReport flush_spool(Spool& spool, Uplink& uplink, const Clock& clock,
                           FlushOptions options) {
  DeliveryReport report;
  for (const auto& entry : spool.entries()) {
    const Timestamp now = clock.now_seconds();
    if (!options.ignore_schedule && entry.next_attempt_at > now) {
      ++report.deferred;
      continue;
    }
    try {
      IngestReceipt receipt = uplink.deliver(entry.record, entry.images);
      spool.remove(entry.record.capture_id);
      ++report.delivered;
      report.receipts.push_back(std::move(receipt));
    } catch (const UplinkError& e) {
      const int attempts = entry.attempt_count + 1;
      spool.reschedule(entry.record.capture_id, attempts,
                       now + backoff_delay(attempts).count());
      ++report.deferred;
      if (e.permanent()) ++report.rejected;
      report.errors.push_back(entry.record.capture_id + ": " + e.what());
    }
  }
  return report;
}

HttpUplink::HttpUplink(std::string base_url) : base_url_(std::move(base_url)) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

IngestReceipt HttpUplink::deliver(const CaptureRecord& record,
                                  const ImagePayloads& images) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(std::chrono::seconds(5));
  client.set_read_timeout(std::chrono::seconds(30));

  httplib::MultipartFormDataItems items;
  items.push_back({"manifest", Json(record).dump(), "manifest.json",
                   "application/json"});
  for (const auto& [angle, bytes] : images) {
    const auto& ref = record.views.at(angle);
    const std::string name(to_string(angle));
    items.push_back({name, to_text(bytes),
                     name + "." + std::string(extension_for(ref.media_type)),
                     ref.media_type});
  }
  auto res = client.Post("/api/captures", items);
  if (!res) {
    throw UplinkError("backend unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200 && res->status != 201) {
    const bool permanent = res->status >= 400 && res->status < 500;
    throw UplinkError("backend answered " + std::to_string(res->status) + ": " +
                          res->body,
                      permanent);
  }
  try {
    return Json::parse(res->body).get<IngestReceipt>();
  } catch (const std::exception& e) {
    throw UplinkError(std::string("malformed receipt: ") + e.what());
  }
}

}  // namespace protobooth::node
