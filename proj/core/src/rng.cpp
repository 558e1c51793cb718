#include "blocknorm/rng.hpp"

namespace blocknorm {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

std::uint64_t substream_key(std::uint64_t seed, std::string_view name) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return mix64(seed ^ mix64(h));
}

std::uint64_t indexed_key(std::uint64_t key, std::uint64_t index) noexcept {
    return mix64(key + mix64(index * kGolden + 1));
}

std::uint64_t CounterRng::next() noexcept {
    return mix64(key_ ^ mix64(++counter_ * kGolden));
}

std::uint64_t CounterRng::uniform(std::uint64_t bound) noexcept {
    // Largest multiple of bound representable; values at or above it are
    // rejected so every residue is equally likely.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
    for (;;) {
        const std::uint64_t v = next();
        if (v <= limit) return v % bound;
    }
}

}  // namespace blocknorm
