#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace onebit {

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
// The 64-bit key is the experiment seed and the upper 64 counter bits
// select an independent stream, so the value at (seed, stream, index) is
// fixed across platforms and independent of thread scheduling.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key);
};

// Stream-addressable uniform/normal source backed by Philox4x32-10.
// Satisfies UniformRandomBitGenerator so std algorithms accept it.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform on (0, 1), never exactly 0 or 1.
  double uniform();

  // Standard normal via Box-Muller; the sine branch is cached.
  double normal();

 private:
  void refill();

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  Philox4x32::Block buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace onebit
