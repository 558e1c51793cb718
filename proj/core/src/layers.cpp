#include "blocknorm/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "blocknorm/errors.hpp"

namespace blocknorm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_rank(const Shape& s, std::size_t rank, const char* op) {
    if (s.size() != rank) {
        throw ShapeError(std::string(op) + " expects rank " + std::to_string(rank) + " input, got " +
                         shape_to_string(s));
    }
}

std::size_t conv_extent(std::size_t in, std::size_t k, std::size_t s, std::size_t p) {
    return (in + 2 * p - k) / s + 1;
}

Shape conv_shape(const Conv2d& c, const Shape& in) {
    require_rank(in, 3, "conv2d");
    if (in[0] != c.in_channels()) {
        throw ShapeError("conv2d expects " + std::to_string(c.in_channels()) + " input channels, got " +
                         std::to_string(in[0]));
    }
    const std::size_t k = c.kernel();
    if (in[1] + 2 * c.padding < k || in[2] + 2 * c.padding < k) {
        throw ShapeError("conv2d kernel " + std::to_string(k) + " larger than padded input " +
                         shape_to_string(in));
    }
    return {c.out_channels(), conv_extent(in[1], k, c.stride, c.padding),
            conv_extent(in[2], k, c.stride, c.padding)};
}

}  // namespace

std::string layer_kind(const LayerSpec& layer) {
    return std::visit(Overloaded{
                          [](const Conv2d&) { return std::string("conv2d"); },
                          [](const BatchNorm&) { return std::string("batchnorm"); },
                          [](const ReLU&) { return std::string("relu"); },
                          [](const MaxPool&) { return std::string("maxpool"); },
                          [](const GlobalAvgPool&) { return std::string("avgpool-global"); },
                          [](const Flatten&) { return std::string("flatten"); },
                          [](const Linear&) { return std::string("linear"); },
                      },
                      layer);
}

void validate_layer(const LayerSpec& layer) {
    std::visit(
        Overloaded{
            [](const Conv2d& c) {
                const Shape& w = c.weight.shape();
                if (w.size() != 4 || w[2] != w[3]) {
                    throw ShapeError("conv2d weight must be [out, in, k, k], got " + shape_to_string(w));
                }
                if (c.stride == 0) throw ConfigError("conv2d stride must be >= 1");
                if (c.bias && (c.bias->rank() != 1 || c.bias->size() != w[0])) {
                    throw ShapeError("conv2d bias must be [" + std::to_string(w[0]) + "]");
                }
            },
            [](const BatchNorm& b) {
                const std::size_t c = b.gamma.size();
                for (const Tensor* t : {&b.gamma, &b.beta, &b.running_mean, &b.running_var}) {
                    if (t->rank() != 1 || t->size() != c) {
                        throw ShapeError("batchnorm parameters must all be [" + std::to_string(c) + "]");
                    }
                }
                if (!(b.eps >= 0.0)) throw ConfigError("batchnorm eps must be >= 0");
                for (float v : b.running_var.data()) {
                    if (!(v >= 0.0f)) throw ConfigError("batchnorm running variance must be >= 0");
                    if (static_cast<double>(v) + b.eps <= 0.0) {
                        throw ConfigError("batchnorm running variance + eps must be > 0");
                    }
                }
            },
            [](const ReLU&) {},
            [](const MaxPool& p) {
                if (p.window == 0 || p.stride == 0) throw ConfigError("maxpool window and stride must be >= 1");
            },
            [](const GlobalAvgPool&) {},
            [](const Flatten&) {},
            [](const Linear& l) {
                if (l.weight.rank() != 2) {
                    throw ShapeError("linear weight must be [K, D], got " + shape_to_string(l.weight.shape()));
                }
                if (l.bias && (l.bias->rank() != 1 || l.bias->size() != l.weight.dim(0))) {
                    throw ShapeError("linear bias must be [" + std::to_string(l.weight.dim(0)) + "]");
                }
            },
        },
        layer);
}

Shape layer_output_shape(const LayerSpec& layer, const Shape& in) {
    return std::visit(
        Overloaded{
            [&](const Conv2d& c) { return conv_shape(c, in); },
            [&](const BatchNorm& b) {
                if (in.empty() || in[0] != b.channels()) {
                    throw ShapeError("batchnorm has " + std::to_string(b.channels()) +
                                     " channels, input is " + shape_to_string(in));
                }
                return in;
            },
            [&](const ReLU&) { return in; },
            [&](const MaxPool& p) {
                require_rank(in, 3, "maxpool");
                if (in[1] < p.window || in[2] < p.window) {
                    throw ShapeError("maxpool window " + std::to_string(p.window) + " larger than input " +
                                     shape_to_string(in));
                }
                return Shape{in[0], (in[1] - p.window) / p.stride + 1, (in[2] - p.window) / p.stride + 1};
            },
            [&](const GlobalAvgPool&) {
                require_rank(in, 3, "avgpool-global");
                return Shape{in[0], 1, 1};
            },
            [&](const Flatten&) { return Shape{shape_numel(in)}; },
            [&](const Linear& l) {
                require_rank(in, 1, "linear");
                if (in[0] != l.in_features()) {
                    throw ShapeError("linear expects " + std::to_string(l.in_features()) + " features, got " +
                                     std::to_string(in[0]));
                }
                return Shape{l.out_features()};
            },
        },
        layer);
}

Tensor conv2d(const Tensor& input, const Conv2d& spec) {
    const Shape out_shape = conv_shape(spec, input.shape());
    const std::size_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t cout = out_shape[0], oh = out_shape[1], ow = out_shape[2];
    const std::size_t k = spec.kernel(), s = spec.stride, p = spec.padding;

    Tensor out(out_shape);
    std::vector<double> acc(oh * ow);
    const float* x = input.data().data();
    const float* wt = spec.weight.data().data();

    // Valid output range along one axis for kernel offset kk: the ox with
    // 0 <= ox*s + kk - p < extent.
    auto valid_range = [&](std::size_t kk, std::size_t extent, std::size_t out_extent) {
        std::size_t lo = 0;
        if (kk < p) lo = (p - kk + s - 1) / s;
        std::size_t hi = 0;  // exclusive
        if (extent + p > kk) hi = std::min(out_extent, (extent + p - kk - 1) / s + 1);
        return std::pair{lo, std::max(lo, hi)};
    };

    for (std::size_t oc = 0; oc < cout; ++oc) {
        const double b = spec.bias ? static_cast<double>((*spec.bias)[oc]) : 0.0;
        std::fill(acc.begin(), acc.end(), b);
        for (std::size_t ic = 0; ic < cin; ++ic) {
            const float* xc = x + ic * h * w;
            for (std::size_t ky = 0; ky < k; ++ky) {
                const auto [y0, y1] = valid_range(ky, h, oh);
                for (std::size_t kx = 0; kx < k; ++kx) {
                    const double wv = wt[((oc * cin + ic) * k + ky) * k + kx];
                    if (wv == 0.0) continue;
                    const auto [x0, x1] = valid_range(kx, w, ow);
                    for (std::size_t oy = y0; oy < y1; ++oy) {
                        const float* row = xc + (oy * s + ky - p) * w;
                        double* arow = acc.data() + oy * ow;
                        for (std::size_t ox = x0; ox < x1; ++ox) {
                            arow[ox] += wv * static_cast<double>(row[ox * s + kx - p]);
                        }
                    }
                }
            }
        }
        float* o = out.mutable_data().data() + oc * oh * ow;
        for (std::size_t i = 0; i < oh * ow; ++i) o[i] = static_cast<float>(acc[i]);
    }
    return out;
}

Tensor batchnorm_infer(const Tensor& input, const BatchNorm& spec) {
    layer_output_shape(spec, input.shape());
    Tensor out(input.shape());
    const std::size_t c = spec.channels();
    const std::size_t plane = input.size() / c;
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double gamma = spec.gamma[ch];
        const double beta = spec.beta[ch];
        const double mean = spec.running_mean[ch];
        const double denom = std::sqrt(static_cast<double>(spec.running_var[ch]) + spec.eps);
        for (std::size_t i = ch * plane; i < (ch + 1) * plane; ++i) {
            out[i] = static_cast<float>(gamma * (static_cast<double>(input[i]) - mean) / denom + beta);
        }
    }
    return out;
}

Tensor relu(const Tensor& input) {
    Tensor out = input;
    for (float& v : out.mutable_data()) v = v > 0.0f ? v : 0.0f;
    return out;
}

Tensor maxpool(const Tensor& input, const MaxPool& spec) {
    const Shape out_shape = layer_output_shape(spec, input.shape());
    Tensor out(out_shape);
    const std::size_t h = input.dim(1), w = input.dim(2);
    for (std::size_t c = 0; c < out_shape[0]; ++c) {
        for (std::size_t oy = 0; oy < out_shape[1]; ++oy) {
            for (std::size_t ox = 0; ox < out_shape[2]; ++ox) {
                float m = -std::numeric_limits<float>::infinity();
                for (std::size_t dy = 0; dy < spec.window; ++dy) {
                    const std::size_t y = oy * spec.stride + dy;
                    for (std::size_t dx = 0; dx < spec.window; ++dx) {
                        m = std::max(m, input[(c * h + y) * w + ox * spec.stride + dx]);
                    }
                }
                out.at(c, oy, ox) = m;
            }
        }
    }
    return out;
}

Tensor global_avgpool(const Tensor& input) {
    require_rank(input.shape(), 3, "avgpool-global");
    const std::size_t c = input.dim(0);
    const std::size_t plane = input.dim(1) * input.dim(2);
    Tensor out(Shape{c, 1, 1});
    for (std::size_t ch = 0; ch < c; ++ch) {
        double sum = 0.0;
        for (std::size_t i = 0; i < plane; ++i) sum += input[ch * plane + i];
        out[ch] = static_cast<float>(sum / static_cast<double>(plane));
    }
    return out;
}

Tensor flatten(const Tensor& input) {
    return input.reshaped(Shape{input.size()});
}

Tensor linear(const Tensor& input, const Linear& spec) {
    const Shape out_shape = layer_output_shape(spec, input.shape());
    const std::size_t k = out_shape[0], d = spec.in_features();
    Tensor out(out_shape);
    for (std::size_t i = 0; i < k; ++i) {
        double acc = spec.bias ? static_cast<double>((*spec.bias)[i]) : 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            acc += static_cast<double>(spec.weight[i * d + j]) * static_cast<double>(input[j]);
        }
        out[i] = static_cast<float>(acc);
    }
    return out;
}

Tensor apply_layer(const Tensor& input, const LayerSpec& layer) {
    return std::visit(Overloaded{
                          [&](const Conv2d& c) { return conv2d(input, c); },
                          [&](const BatchNorm& b) { return batchnorm_infer(input, b); },
                          [&](const ReLU&) { return relu(input); },
                          [&](const MaxPool& p) { return maxpool(input, p); },
                          [&](const GlobalAvgPool&) { return global_avgpool(input); },
                          [&](const Flatten&) { return flatten(input); },
                          [&](const Linear& l) { return linear(input, l); },
                      },
                      layer);
}

}  // namespace blocknorm
