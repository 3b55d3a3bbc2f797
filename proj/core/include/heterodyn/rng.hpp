#pragma once

#include <cstdint>
#include <random>

namespace heterodyn {

// (seed, stream_id) names a reproducible random stream. Replicas use
// consecutive stream ids under one seed so they can run in any order.
struct SeededStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  SeededStream substream(std::uint64_t k) const {
    // Mix so that substreams of different parents do not collide trivially.
    return {seed, stream_id * 0x9E3779B97F4A7C15ULL + k + 1};
  }
};

// Engine bound to one SeededStream. Not thread-safe; give each worker its own.
class Rng {
 public:
  explicit Rng(SeededStream stream);

  const SeededStream& stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform on (0, 1).
  double uniform_open();
  // Standard normal (Box-Muller, pairs cached).
  double normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  SeededStream stream_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace heterodyn
