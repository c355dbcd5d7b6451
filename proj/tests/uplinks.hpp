#pragma once

// In-process uplinks for node tests.

#include <functional>
#include <mutex>
#include <random>

#include "protobooth/backend/repository.hpp"
#include "protobooth/error.hpp"
#include "protobooth/node/uplink.hpp"

namespace protobooth::testing {

/// Delivers straight into a repository.
class RepositoryUplink : public node::Uplink {
 public:
  explicit RepositoryUplink(backend::Repository& repo) : repo_(repo) {}
  IngestReceipt deliver(const CaptureRecord& record,
                        const ImagePayloads& images) override {
    if (!online) throw node::UplinkError("backend unreachable");
    try {
      return repo_.ingest_capture(record, images);
    } catch (const Error& e) {
      throw node::UplinkError(e.what(), !e.retriable());
    }
  }
  bool online = true;

 private:
  backend::Repository& repo_;
};

/// Fails a seeded fraction of deliveries before they reach the backend.
class FlakyUplink : public node::Uplink {
 public:
  FlakyUplink(node::Uplink& inner, double failure_rate, std::uint64_t seed)
      : inner_(inner), rate_(failure_rate), rng_(seed) {}
  IngestReceipt deliver(const CaptureRecord& record,
                        const ImagePayloads& images) override {
    {
      std::lock_guard lock(mu_);
      if (std::uniform_real_distribution<double>(0, 1)(rng_) < rate_) {
        ++failures;
        throw node::UplinkError("injected uplink failure");
      }
    }
    return inner_.deliver(record, images);
  }
  int failures = 0;

 private:
  node::Uplink& inner_;
  double rate_;
  std::mt19937_64 rng_;
  std::mutex mu_;
};

}  // namespace protobooth::testing
