#include "icegrid/rng.hpp"

namespace icegrid {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

Stream::Stream(std::uint64_t seed, std::uint64_t scenario_id, StreamPurpose purpose)
    : key_(mix64(mix64(mix64(seed) ^ (scenario_id * kGolden)) + static_cast<std::uint64_t>(purpose))) {}

Stream::result_type Stream::operator()() { return mix64(key_ + (++counter_) * kGolden); }

double Stream::uniform() {
  // 53 random bits, shifted half an ulp off zero.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace icegrid
