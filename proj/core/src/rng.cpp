#include "waseplab/rng.hpp"

#include <cmath>

namespace waseplab {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, ctr[0], hi0, lo0);
    mulhilo(kM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

Philox::Philox(std::uint64_t seed, std::uint64_t replica, std::uint32_t stream) {
  const std::uint64_t k = splitmix64(seed ^ splitmix64(0x5157ull + stream));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  // Replica lives in the high counter words; the low words count blocks.
  ctr_ = {0u, 0u, static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32)};
}

void Philox::refill() {
  buf_ = philox4x32(ctr_, key_);
  if (++ctr_[0] == 0) ++ctr_[1];
  pos_ = 0;
}

std::uint32_t Philox::next32() {
  if (pos_ == 4) refill();
  return buf_[static_cast<std::size_t>(pos_++)];
}

std::uint64_t Philox::operator()() {
  const std::uint64_t hi = next32();
  return (hi << 32) | next32();
}

std::uint64_t Philox::below(std::uint64_t bound) {
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t r;
  do {
    r = (*this)();
  } while (r >= limit);
  return r % bound;
}

double Philox::exponential() {
  // 1 - U lies in (0, 1], so the log is finite.
  return -std::log1p(-uniform());
}

}  // namespace waseplab
