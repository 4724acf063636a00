#include "rholpa/random.hpp"

namespace rholpa {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t sm = seed;
  const std::uint64_t mixed_seed = splitmix64(sm);
  std::uint64_t st = stream ^ 0xD1B54A32D192ED03ULL;
  std::uint64_t state = mixed_seed ^ splitmix64(st);
  for (auto& word : s_) word = splitmix64(state);
}

std::uint64_t Xoshiro256::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256::uniform() {
  const std::uint64_t k = (*this)() >> 12;  // 52 bits
  return (static_cast<double>(k) + 0.5) * 0x1.0p-52;
}

std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t index) {
  Xoshiro256 g(seed ^ (index * 0x9E3779B97F4A7C15ULL), static_cast<std::uint64_t>(Stream::replication));
  return g();
}

}  // namespace rholpa
