#pragma once

#include <cstdint>
#include <string_view>

namespace protobooth::analytics {

inline constexpr double kJitterBound = 0.4;

/// Uniform in [-0.4, 0.4), a pure function of (seed, capture_id): the same
/// capture lands on the same offset in every dataset that contains it.
double jitter(std::uint64_t seed, std::string_view capture_id);

}  // namespace protobooth::analytics
