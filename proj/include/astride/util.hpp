#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace astride {

/// 64-bit FNV-1a over raw bytes.
uint64_t fnv1a64(std::string_view data);

/// 16-char hex fingerprint of canonical diagram text.
std::string content_digest(std::string_view text);

// Deterministic splitmix64 stream. Used instead of <random> distributions so
// generated corpora are byte-identical across standard library versions.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next();

  /// Uniform in [0, bound); bound must be > 0.
  uint64_t below(uint64_t bound);

  /// Uniform in [lo, hi], inclusive.
  int range(int lo, int hi);

  /// Uniform in [0, 1).
  double unit();

  bool chance(double p) { return unit() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<size_t>(below(v.size()))];
  }

 private:
  uint64_t state_;
};

/// Derives an independent sub-seed for a numbered lane (per-record streams).
uint64_t mix_seed(uint64_t seed, uint64_t lane);

}  // namespace astride
