#pragma once

#include <array>
#include <cstdint>

namespace rholpa {

/// splitmix64 step; used for seeding and sub-stream derivation.
std::uint64_t splitmix64(std::uint64_t& state);

/// xoshiro256** generator. Each (seed, stream) pair yields an independent,
/// reproducible sequence; streams are derived by hashing both values
/// through splitmix64.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  Xoshiro256(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t operator()();
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  /// (k + 1/2) / 2^52 for a random 52-bit k: never 0 or 1, and 1 - u is
  /// exactly representable, so antithetic draws mirror exactly.
  double uniform();

 private:
  std::array<std::uint64_t, 4> s_;
};

/// Stream ids used by the simulator. Design and noise never share a stream.
enum class Stream : std::uint64_t { design = 1, noise = 2, replication = 3 };

/// Seed for replication `index` of an experiment seeded with `seed`.
std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace rholpa
