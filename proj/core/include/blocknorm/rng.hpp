#pragma once

#include <cstdint>
#include <string_view>

namespace blocknorm {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Key for a named substream of a run seed ("jigsaw", "selection", ...).
std::uint64_t substream_key(std::uint64_t seed, std::string_view name) noexcept;

// Key for the index-th item of a stream.
std::uint64_t indexed_key(std::uint64_t key, std::uint64_t index) noexcept;

// Counter-based generator: the n-th draw is a pure function of (key, n), so
// draws for item i never depend on how many items were processed before it.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t next() noexcept;
    // Uniform in [0, bound) by rejection; bound must be > 0.
    std::uint64_t uniform(std::uint64_t bound) noexcept;

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace blocknorm
