#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace clusterfeat {

// Counter-based generator (Philox4x32-10).  The key is the user seed and the
// counter's high words hold a stream id, so split() hands out statistically
// independent streams without any shared state.  Every draw consumes a fixed
// number of 32-bit words, which makes "how many samples did this consume"
// an exact integer (words()); training code relies on that to prove batches
// are never reused.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  // Derived stream for e.g. (trial, phase).  Same seed, decorrelated counter
  // prefix; the parent generator is left untouched.
  Rng split(std::uint64_t a) const {
    Rng child(*this);
    child.stream_ = mix_(stream_, a);
    child.counter_ = 0;
    child.fill_ = 0;
    child.words_out_ = 0;
    return child;
  }
  Rng split(std::uint64_t a, std::uint64_t b) const { return split(a).split(b); }

  std::uint32_t next_u32() {
    if (fill_ == 0) refill_();
    --fill_;
    ++words_out_;
    return block_[3 - fill_];
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on [0, 1), 53-bit resolution, always 2 words.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive range.  Fixed-width multiply keeps the word count deterministic;
  // the O(range/2^64) bias is far below anything observable here.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    unsigned __int128 span = static_cast<std::uint64_t>(hi - lo) + 1;
    std::uint64_t off =
        static_cast<std::uint64_t>((span * static_cast<unsigned __int128>(next_u64())) >> 64);
    return lo + static_cast<std::int64_t>(off);
  }

  // Standard normal via Box-Muller.  The sine partner is discarded on purpose:
  // a normal always costs exactly 4 words, so draw accounting stays exact.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // +1 with probability p, else -1.
  int rademacher(double p) { return uniform() < p ? 1 : -1; }

  // 32-bit words handed out since construction or split().
  std::uint64_t words() const { return words_out_; }

  std::uint64_t stream() const { return stream_; }

 private:
  static std::uint64_t splitmix_(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t mix_(std::uint64_t h, std::uint64_t v) {
    return splitmix_(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
  }

  void refill_() {
    std::array<std::uint32_t, 4> c = {
        static_cast<std::uint32_t>(counter_),
        static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32)};
    std::array<std::uint32_t, 2> k = key_;
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = 0xD2511F53ULL * c[0];
      std::uint64_t p1 = 0xCD9E8D57ULL * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
           static_cast<std::uint32_t>(p0)};
      k[0] += 0x9E3779B9U;
      k[1] += 0xBB67AE85U;
    }
    block_ = c;
    ++counter_;
    fill_ = 4;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int fill_ = 0;
  std::uint64_t words_out_ = 0;
};

}  // namespace clusterfeat
