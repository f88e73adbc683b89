#pragma once

#include <array>
#include <cstdint>

namespace roughmix {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A generator is a pure function of (key, counter): every output is
/// addressable by index, so streams can be split and consumed in any order
/// or across any number of threads without changing the numbers drawn.
/// The 64-bit seed forms the key; the 64-bit stream id and the 64-bit block
/// index form the counter.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept;

    /// Raw 128-bit block number `index` of this stream.
    Block block(std::uint64_t index) const noexcept;

    /// Standard normal number `index` of this stream (Box-Muller; two normals
    /// per block pair of uniforms).
    double normal(std::uint64_t index) const noexcept;

    /// Uniform number in (0, 1] addressed by `index`.
    double uniform(std::uint64_t index) const noexcept;

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
};

/// Stream id used for fBm component `component` and ambient coordinate
/// `coordinate` of a GMFBM sample.
constexpr std::uint64_t component_stream(std::uint32_t component, std::uint32_t coordinate) noexcept {
    return (static_cast<std::uint64_t>(component) << 32) | coordinate;
}

/// Derives the seed of replicate `index` from a base seed (SplitMix64
/// finalizer). Monte Carlo loops use replicate seeds so that each path is
/// reproducible on its own.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

}  // namespace roughmix
