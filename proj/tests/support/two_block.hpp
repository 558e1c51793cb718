// Two-block model with a known answer for block selection.
//
// Inputs are 1x9x9 images x = c0 + a*t + noise, where t is a fixed zero-mean
// template whose nine 3x3 tiles all have distinct means, and c0 keeps every
// pixel positive.
//
//   passthrough: 1x1 identity conv + ReLU. Its tap is x itself, and its norm
//                ignores pixel order, so its NormRatio is 1.
//   matched:     9x9 conv with kernel t, bias 1.3*|t|^2, ReLU. Output is
//                <t, x> + bias. Any non-identity tile shuffle lowers <t, x>,
//                so its NormRatio is above 1.
//
// The OOD set holds ID-test images with all 81 pixels shuffled.
#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "blocknorm/blocknorm.hpp"

namespace two_block {

using namespace blocknorm;

inline constexpr std::size_t kSide = 9;

inline std::vector<double> template_values() {
    std::vector<double> t(kSide * kSide);
    for (std::size_t h = 0; h < kSide; ++h) {
        for (std::size_t w = 0; w < kSide; ++w) {
            t[h * kSide + w] = (static_cast<double>(h) - 4.0) + 0.37 * (static_cast<double>(w) - 4.0);
        }
    }
    return t;
}

inline double template_energy() {
    const auto t = template_values();
    return std::inner_product(t.begin(), t.end(), t.begin(), 0.0);
}

// extra_matched is appended to the matched block after its ReLU.
inline ModelSpec make_model(std::vector<LayerSpec> extra_matched = {}) {
    Conv2d pass;
    pass.weight = Tensor(Shape{1, 1, 1, 1}, {1.0f});
    BlockSpec a{"passthrough", {pass, ReLU{}}};

    Conv2d matched;
    std::vector<float> w;
    for (double v : template_values()) w.push_back(static_cast<float>(v));
    matched.weight = Tensor(Shape{1, 1, kSide, kSide}, w);
    matched.bias = Tensor(Shape{1}, {static_cast<float>(1.3 * template_energy())});
    BlockSpec b{"matched", {matched, ReLU{}}};
    for (auto& l : extra_matched) b.layers.push_back(std::move(l));

    Linear fc;
    fc.weight = Tensor(Shape{2, 1}, {1.0f, -1.0f});
    return ModelSpec({1, kSide, kSide}, {a, b}, {Flatten{}, fc});
}

inline std::vector<Tensor> make_id(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> level(7.5, 8.5), gain(0.8, 1.2), noise(-0.05, 0.05);
    const auto t = template_values();
    std::vector<Tensor> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double c0 = level(rng), a = gain(rng);
        Tensor x(Shape{1, kSide, kSide});
        for (std::size_t p = 0; p < t.size(); ++p) x[p] = static_cast<float>(c0 + a * t[p] + noise(rng));
        out.push_back(std::move(x));
    }
    return out;
}

inline std::vector<Tensor> pixel_shuffled(const std::vector<Tensor>& images, std::mt19937_64& rng) {
    std::vector<Tensor> out;
    for (const Tensor& x : images) {
        std::vector<float> v = x.values();
        std::shuffle(v.begin(), v.end(), rng);
        out.emplace_back(x.shape(), std::move(v));
    }
    return out;
}

}  // namespace two_block
