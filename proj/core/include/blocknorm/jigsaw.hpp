// 3x3 jigsaw-puzzle pseudo-OOD images.
//
// An image is center-cropped to the largest multiple of 3 in each spatial
// dimension, cut into a 3x3 grid of equal tiles, the tiles are rearranged by a
// non-identity permutation, and the result is nearest-neighbor resized back to
// the original H x W. The permutation is drawn uniformly from the 9! - 1
// non-identity permutations by a counter-based RNG keyed on
// (seed, sample_index), so each sample gets its own reproducible shuffle.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "blocknorm/tensor.hpp"

namespace blocknorm {

inline constexpr std::size_t kJigsawGrid = 3;
inline constexpr std::size_t kJigsawTiles = kJigsawGrid * kJigsawGrid;
inline constexpr std::uint32_t kJigsawPermutationCount = 362880;  // 9!

// Tiles are numbered row-major. Output tile p holds source tile perm[p].
using TilePermutation = std::array<std::uint8_t, kJigsawTiles>;

struct JigsawConfig {
    std::uint64_t seed = 0;
};

// The permutation with the given lexicographic rank in [0, 9!); rank 0 is
// the identity.
TilePermutation permutation_from_rank(std::uint32_t rank);

bool is_identity(const TilePermutation& perm) noexcept;

// The permutation drawn for one sample. Never the identity.
TilePermutation jigsaw_permutation(const JigsawConfig& config, std::size_t sample_index);

// Crop + tile shuffle only: returns C x 3*floor(H/3) x 3*floor(W/3).
// Throws ShapeError unless image is C x H x W with H, W >= 3.
Tensor jigsaw_shuffle_cropped(const Tensor& image, const TilePermutation& perm);

// Full pipeline with an explicit permutation; output shape equals input shape.
Tensor make_jigsaw(const Tensor& image, const TilePermutation& perm);

Tensor make_jigsaw(const Tensor& image, const JigsawConfig& config, std::size_t sample_index);

}  // namespace blocknorm
