#include "astride/util.hpp"

#include <array>

namespace astride {

uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string content_digest(std::string_view text) {
  static constexpr char kHex[] = "0123456789abcdef";
  uint64_t h = fnv1a64(text);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

uint64_t SplitMix64::next() {
  state_ += 0x9e3779b97f4a7c15ull;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

uint64_t SplitMix64::below(uint64_t bound) {
  // Lemire multiply-shift; deterministic and close enough to uniform.
  return static_cast<uint64_t>(
      (static_cast<unsigned __int128>(next()) * bound) >> 64);
}

int SplitMix64::range(int lo, int hi) {
  return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1)));
}

double SplitMix64::unit() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

uint64_t mix_seed(uint64_t seed, uint64_t lane) {
  SplitMix64 rng(seed ^ (0x9e3779b97f4a7c15ull * (lane + 1)));
  return rng.next();
}

}  // namespace astride
