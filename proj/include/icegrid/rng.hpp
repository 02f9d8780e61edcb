#pragma once

#include <cstdint>
#include <limits>

namespace icegrid {

enum class StreamPurpose : std::uint64_t { Storm = 1, Load = 2, Damage = 3, Wind = 4, Repair = 5 };

/// Source of uniform draws in (0,1). Scenario sampling consumes this interface
/// so tests can script the draws.
class UniformSource {
 public:
  virtual ~UniformSource() = default;
  virtual double uniform() = 0;
};

/// Counter-based stream: output n is a bijective mix of (key + n * golden).
/// Streams are keyed by (seed, scenario id, purpose) and never share state.
class Stream final : public UniformSource {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint64_t scenario_id, StreamPurpose purpose);
  explicit Stream(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform in the open interval (0,1).
  double uniform() override;

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace icegrid
