#include "protobooth/analytics/jitter.hpp"

#include <random>

namespace protobooth::analytics {

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

double jitter(std::uint64_t seed, std::string_view capture_id) {
  // mt19937_64's output sequence is fixed by the standard; the distribution
  // classes are not, so the mapping to [0, 1) is done by hand.
  std::mt19937_64 engine(seed ^ fnv1a(capture_id));
  const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
  return -kJitterBound + 2 * kJitterBound * unit;
}

}  // namespace protobooth::analytics
