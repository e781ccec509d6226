#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace skewlab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by (seed, stream id); draws advance a 64-bit block
/// counter. Any sample index can therefore get its own independent stream,
/// which keeps Monte-Carlo results independent of batch scheduling.
class CounterRng {
 public:
  static constexpr std::string_view kName = "philox4x32-10";
  static constexpr int kVersion = 1;

  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  /// Raw Philox4x32 with 10 rounds.
  static Block philox(Block counter, Key key) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

 private:
  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int used_ = 4;
};

}  // namespace skewlab
