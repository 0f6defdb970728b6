#pragma once

#include <array>
#include <cstdint>

namespace vrc {

/// Philox4x32-10 counter-based generator. The stream is a pure function of
/// (seed, counter), so any position can be reproduced without replaying.
class PhiloxRng {
  public:
    using Block = std::array<std::uint32_t, 4>;

    explicit PhiloxRng(std::uint64_t seed = 0) : seed_(seed) {}

    static Block generate(const Block& counter, std::array<std::uint32_t, 2> key);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal via the Box-Muller transform; values come in pairs.
    double normal();

  private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    Block buffer_{};
    int available_ = 0;
    double spare_normal_ = 0;
    bool has_spare_ = false;
};

}  // namespace vrc
