// Reference implementations used as test oracles. Each is written the slow,
// obvious way and shares no code with the library beyond the data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "blocknorm/blocknorm.hpp"

namespace oracle {

using blocknorm::BatchNorm;
using blocknorm::Conv2d;
using blocknorm::Shape;
using blocknorm::Tensor;

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor t(shape);
    for (float& v : t.mutable_data()) v = static_cast<float>(u(rng));
    return t;
}

inline float at4(const Tensor& w, std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    const Shape& s = w.shape();
    return w[((a * s[1] + b) * s[2] + c) * s[3] + d];
}

inline Tensor conv(const Tensor& x, const Conv2d& c) {
    const long H = static_cast<long>(x.dim(1)), W = static_cast<long>(x.dim(2));
    const long K = static_cast<long>(c.kernel()), S = static_cast<long>(c.stride),
               P = static_cast<long>(c.padding);
    const long OH = (H + 2 * P - K) / S + 1, OW = (W + 2 * P - K) / S + 1;
    Tensor out(Shape{c.out_channels(), static_cast<std::size_t>(OH), static_cast<std::size_t>(OW)});
    for (std::size_t o = 0; o < c.out_channels(); ++o) {
        for (long oy = 0; oy < OH; ++oy) {
            for (long ox = 0; ox < OW; ++ox) {
                double acc = c.bias ? (*c.bias)[o] : 0.0;
                for (std::size_t i = 0; i < c.in_channels(); ++i) {
                    for (long ky = 0; ky < K; ++ky) {
                        for (long kx = 0; kx < K; ++kx) {
                            const long iy = oy * S + ky - P, ix = ox * S + kx - P;
                            if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                            acc += static_cast<double>(at4(c.weight, o, i, ky, kx)) *
                                   x.at(i, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
                        }
                    }
                }
                out.at(o, oy, ox) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

inline Tensor batchnorm(const Tensor& x, const BatchNorm& b) {
    Tensor out(x.shape());
    for (std::size_t c = 0; c < x.dim(0); ++c) {
        for (std::size_t y = 0; y < x.dim(1); ++y) {
            for (std::size_t z = 0; z < x.dim(2); ++z) {
                const double v = (static_cast<double>(x.at(c, y, z)) - b.running_mean[c]) /
                                     std::sqrt(static_cast<double>(b.running_var[c]) + b.eps) * b.gamma[c] +
                                 b.beta[c];
                out.at(c, y, z) = static_cast<float>(v);
            }
        }
    }
    return out;
}

// FeatureNorm with long double accumulation, indexing through at().
inline double feature_norm(const Tensor& z) {
    long double total = 0.0L;
    for (std::size_t c = 0; c < z.dim(0); ++c) {
        long double ss = 0.0L;
        for (std::size_t y = 0; y < z.dim(1); ++y) {
            for (std::size_t x = 0; x < z.dim(2); ++x) {
                const long double v = std::max(0.0f, z.at(c, y, x));
                ss += v * v;
            }
        }
        total += std::sqrt(ss);
    }
    return static_cast<double>(total / static_cast<long double>(z.dim(0)));
}

// Fraction of (id, ood) pairs ranked correctly, ties counting one half.
inline double auroc_pairs(const std::vector<double>& id, const std::vector<double>& ood) {
    double wins = 0.0;
    for (double a : id) {
        for (double b : ood) wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
    }
    return wins / (static_cast<double>(id.size()) * static_cast<double>(ood.size()));
}

inline std::size_t count_at_least(const std::vector<double>& scores, double gamma) {
    return static_cast<std::size_t>(std::count_if(scores.begin(), scores.end(), [&](double s) { return s >= gamma; }));
}

// Smallest k with k >= t*n, from exact integer arithmetic on t = num/den.
inline std::size_t ceil_fraction(std::size_t num, std::size_t den, std::size_t n) {
    return (num * n + den - 1) / den;
}

inline double relative_error(double got, double want, double floor = 1e-6) {
    return std::abs(got - want) / std::max(std::abs(want), floor);
}

// Random layer configurations for fidelity checks. Inputs are sized so the
// kernel always fits the padded input.
struct ConvCase {
    Conv2d conv;
    Tensor input;
};

inline ConvCase random_conv_case(std::mt19937_64& rng) {
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    ConvCase c;
    const std::size_t in = pick(1, 4), out = pick(1, 6), k = pick(1, 5);
    c.conv.stride = pick(1, 3);
    c.conv.padding = pick(0, 2);
    c.conv.weight = random_tensor(Shape{out, in, k, k}, rng);
    if (pick(0, 1) == 1) c.conv.bias = random_tensor(Shape{out}, rng);
    const std::size_t lo = k > 2 * c.conv.padding ? k - 2 * c.conv.padding : 1;
    c.input = random_tensor(Shape{in, pick(lo, 14), pick(lo, 14)}, rng, -2.0, 2.0);
    return c;
}

inline BatchNorm random_batchnorm(std::size_t channels, std::mt19937_64& rng) {
    BatchNorm b;
    b.gamma = random_tensor(Shape{channels}, rng, 0.2, 2.0);
    b.beta = random_tensor(Shape{channels}, rng, -1.0, 1.0);
    b.running_mean = random_tensor(Shape{channels}, rng, -1.0, 1.0);
    b.running_var = random_tensor(Shape{channels}, rng, 0.05, 3.0);
    b.eps = 1e-5;
    return b;
}

inline double max_relative_error(const Tensor& got, const Tensor& want, double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, relative_error(got[i], want[i], floor));
    return worst;
}

// Tile contents of the centered 3x3 grid (largest multiple-of-3 crop,
// offset rounded down), returned as a sorted list.
inline std::vector<std::vector<float>> sorted_tiles(const Tensor& img) {
    const std::size_t th = img.dim(1) / 3, tw = img.dim(2) / 3;
    const std::size_t top = (img.dim(1) - 3 * th) / 2, left = (img.dim(2) - 3 * tw) / 2;
    std::vector<std::vector<float>> tiles;
    for (std::size_t ty = 0; ty < 3; ++ty) {
        for (std::size_t tx = 0; tx < 3; ++tx) {
            std::vector<float> t;
            for (std::size_t c = 0; c < img.dim(0); ++c) {
                for (std::size_t y = 0; y < th; ++y) {
                    for (std::size_t x = 0; x < tw; ++x) t.push_back(img.at(c, top + ty * th + y, left + tx * tw + x));
                }
            }
            tiles.push_back(std::move(t));
        }
    }
    std::sort(tiles.begin(), tiles.end());
    return tiles;
}

}  // namespace oracle
