#include "blocknorm/jigsaw.hpp"

#include <vector>

#include "blocknorm/errors.hpp"
#include "blocknorm/rng.hpp"

namespace blocknorm {

namespace {

void check_image(const Tensor& image) {
    if (image.rank() != 3) {
        throw ShapeError("jigsaw expects a C x H x W image, got " + shape_to_string(image.shape()));
    }
    if (image.dim(1) < kJigsawGrid || image.dim(2) < kJigsawGrid) {
        throw ShapeError("jigsaw needs H, W >= 3, got " + shape_to_string(image.shape()));
    }
}

}  // namespace

TilePermutation permutation_from_rank(std::uint32_t rank) {
    // Decode the factorial-base (Lehmer) digits of rank.
    std::vector<std::uint8_t> pool(kJigsawTiles);
    for (std::size_t i = 0; i < kJigsawTiles; ++i) pool[i] = static_cast<std::uint8_t>(i);
    std::uint32_t fact = kJigsawPermutationCount;
    TilePermutation perm{};
    rank %= kJigsawPermutationCount;
    for (std::size_t i = 0; i < kJigsawTiles; ++i) {
        fact /= static_cast<std::uint32_t>(kJigsawTiles - i);
        const std::uint32_t digit = rank / fact;
        rank %= fact;
        perm[i] = pool[digit];
        pool.erase(pool.begin() + digit);
    }
    return perm;
}

bool is_identity(const TilePermutation& perm) noexcept {
    for (std::size_t i = 0; i < kJigsawTiles; ++i) {
        if (perm[i] != i) return false;
    }
    return true;
}

TilePermutation jigsaw_permutation(const JigsawConfig& config, std::size_t sample_index) {
    CounterRng rng(indexed_key(config.seed, sample_index));
    const auto rank = static_cast<std::uint32_t>(1 + rng.uniform(kJigsawPermutationCount - 1));
    return permutation_from_rank(rank);
}

Tensor jigsaw_shuffle_cropped(const Tensor& image, const TilePermutation& perm) {
    check_image(image);
    const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
    const std::size_t th = h / kJigsawGrid, tw = w / kJigsawGrid;
    const std::size_t h3 = th * kJigsawGrid, w3 = tw * kJigsawGrid;
    const std::size_t top = (h - h3) / 2, left = (w - w3) / 2;

    Tensor out(Shape{c, h3, w3});
    for (std::size_t dst = 0; dst < kJigsawTiles; ++dst) {
        const std::size_t src = perm[dst];
        const std::size_t sy = top + (src / kJigsawGrid) * th, sx = left + (src % kJigsawGrid) * tw;
        const std::size_t dy = (dst / kJigsawGrid) * th, dx = (dst % kJigsawGrid) * tw;
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t y = 0; y < th; ++y) {
                for (std::size_t x = 0; x < tw; ++x) {
                    out.at(ch, dy + y, dx + x) = image.at(ch, sy + y, sx + x);
                }
            }
        }
    }
    return out;
}

Tensor make_jigsaw(const Tensor& image, const TilePermutation& perm) {
    Tensor shuffled = jigsaw_shuffle_cropped(image, perm);
    const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
    const std::size_t h3 = shuffled.dim(1), w3 = shuffled.dim(2);
    if (h3 == h && w3 == w) return shuffled;

    Tensor out(image.shape());
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < h; ++y) {
            const std::size_t sy = y * h3 / h;
            for (std::size_t x = 0; x < w; ++x) {
                out.at(ch, y, x) = shuffled.at(ch, sy, x * w3 / w);
            }
        }
    }
    return out;
}

Tensor make_jigsaw(const Tensor& image, const JigsawConfig& config, std::size_t sample_index) {
    check_image(image);
    return make_jigsaw(image, jigsaw_permutation(config, sample_index));
}

}  // namespace blocknorm
