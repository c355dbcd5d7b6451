#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

#include "protobooth/model.hpp"

namespace protobooth::node {

/// Millisecond wall clock. Capture timestamps are whole seconds derived
/// from it.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() const = 0;
  virtual void sleep_for(std::chrono::milliseconds d) = 0;

  Timestamp now_seconds() const { return now_ms() / 1000; }
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() const override;
  void sleep_for(std::chrono::milliseconds d) override;
};

/// Manually driven clock; sleeping advances time instantly.
class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(std::int64_t start_ms = 0) : now_(start_ms) {}

  std::int64_t now_ms() const override { return now_.load(); }
  void sleep_for(std::chrono::milliseconds d) override { advance(d); }

  void advance(std::chrono::milliseconds d) { now_ += d.count(); }
  void set_ms(std::int64_t ms) { now_ = ms; }

 private:
  std::atomic<std::int64_t> now_;
};

}  // namespace protobooth::node
