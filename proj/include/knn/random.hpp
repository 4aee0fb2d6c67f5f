#pragma once

#include <array>
#include <cstdint>

namespace knn {

/// Philox4x32-10 counter-based bijection (Salmon et al., SC'11).
/// Stateless: the same (counter, key) always yields the same block.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) noexcept;
};

/// A reproducible stream of uniform variates identified by (seed, stream_index).
///
/// The seed forms the Philox key; the stream index occupies the upper half of the
/// counter and the draw number the lower half, so any two streams are disjoint and
/// a stream can be recreated anywhere without replaying others.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_index) noexcept;

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform double in (0, 1).
    double uniform_open() noexcept;
    std::uint32_t next_u32() noexcept;

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream_index() const noexcept { return stream_; }
    [[nodiscard]] std::uint64_t blocks_used() const noexcept { return block_; }

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int pos_ = 4;
};

}  // namespace knn
