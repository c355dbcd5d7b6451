#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "protobooth/ingest.hpp"
#include "protobooth/node/clock.hpp"
#include "protobooth/node/spool.hpp"

namespace protobooth::node {

class UplinkError : public std::runtime_error {
 public:
  /// `permanent` marks a rejection the server will repeat (bad manifest);
  /// anything else is worth retrying.
  UplinkError(const std::string& what, bool permanent = false)
      : std::runtime_error(what), permanent_(permanent) {}
  bool permanent() const { return permanent_; }

 private:
  bool permanent_;
};

/// Connection to the backend ingestion endpoint.
class Uplink {
 public:
  virtual ~Uplink() = default;
  /// Returns the server's receipt or throws UplinkError.
  virtual IngestReceipt deliver(const CaptureRecord& record,
                                const ImagePayloads& images) = 0;
};

/// POST /api/captures against a running service.
class HttpUplink final : public Uplink {
 public:
  /// `base_url` like "http://127.0.0.1:8080".
  explicit HttpUplink(std::string base_url);
  IngestReceipt deliver(const CaptureRecord& record,
                        const ImagePayloads& images) override;

 private:
  std::string base_url_;
};

struct DeliveryReport {
  int delivered = 0;
  int deferred = 0;
  int rejected = 0;  // subset of deferred: permanent server rejections
  std::vector<IngestReceipt> receipts;
  std::vector<std::string> errors;
};

struct FlushOptions {
  /// Attempt every entry now, even those still backing off.
  bool ignore_schedule = false;
};

/// Retry delay after the n-th consecutive failure (n ≥ 1):
/// 5 s · 2^(n-1), capped at 10 min.
std::chrono::seconds backoff_delay(int attempt_count);

/// Attempts spooled entries oldest-first. Acknowledged entries are removed;
/// failures are rescheduled with exponential backoff. Never drops an entry.
DeliveryReport flush_spool(Spool& spool, Uplink& uplink, const Clock& clock,
                           FlushOptions options = {});

}  // namespace protobooth::node
