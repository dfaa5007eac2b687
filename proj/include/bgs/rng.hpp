#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "bgs/matcore.hpp"

namespace bgs {

/// xoshiro256** seeded through splitmix64; normals via Box-Muller.
/// Fixed algorithm so that a seed reproduces the same stream on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double normal() noexcept;

  Mat uniform_mat(Index rows, Index cols);
  Mat normal_mat(Index rows, Index cols);

private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// FNV-1a, used to derive per-cell streams from a run seed.
std::uint64_t stable_hash(std::string_view text) noexcept;

}  // namespace bgs
