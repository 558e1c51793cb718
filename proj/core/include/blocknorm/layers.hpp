#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>

#include "blocknorm/tensor.hpp"

namespace blocknorm {

// Cross-correlation (no kernel flip) with symmetric zero padding.
// weight: [out, in, k, k]; bias: [out] when present.
struct Conv2d {
    std::size_t stride = 1;
    std::size_t padding = 0;
    Tensor weight;
    std::optional<Tensor> bias;

    std::size_t out_channels() const { return weight.dim(0); }
    std::size_t in_channels() const { return weight.dim(1); }
    std::size_t kernel() const { return weight.dim(2); }
};

// Inference-mode batch normalization with running statistics, all [C].
struct BatchNorm {
    Tensor gamma;
    Tensor beta;
    Tensor running_mean;
    Tensor running_var;
    double eps = 1e-5;

    std::size_t channels() const { return gamma.size(); }
};

struct ReLU {};

// Windows never cover padding: output = floor((H - window) / stride) + 1.
struct MaxPool {
    std::size_t window = 2;
    std::size_t stride = 2;
};

// C x H x W -> C x 1 x 1.
struct GlobalAvgPool {};

// Any rank -> rank 1.
struct Flatten {};

// weight: [K, D] with rows W_i; bias: [K] when present.
struct Linear {
    Tensor weight;
    std::optional<Tensor> bias;

    std::size_t out_features() const { return weight.dim(0); }
    std::size_t in_features() const { return weight.dim(1); }
};

using LayerSpec = std::variant<Conv2d, BatchNorm, ReLU, MaxPool, GlobalAvgPool, Flatten, Linear>;

// "conv2d", "batchnorm", "relu", "maxpool", "avgpool-global", "flatten", "linear".
std::string layer_kind(const LayerSpec& layer);

// Checks the layer's own parameters (kernel squareness, parameter lengths,
// non-negative variance). Throws ShapeError or ConfigError.
void validate_layer(const LayerSpec& layer);

// Output shape for an input of the given shape; throws ShapeError if the
// layer cannot consume it.
Shape layer_output_shape(const LayerSpec& layer, const Shape& input);

// All layer ops accumulate in double and round to float on store.
Tensor conv2d(const Tensor& input, const Conv2d& spec);
Tensor batchnorm_infer(const Tensor& input, const BatchNorm& spec);
Tensor relu(const Tensor& input);
Tensor maxpool(const Tensor& input, const MaxPool& spec);
Tensor global_avgpool(const Tensor& input);
Tensor flatten(const Tensor& input);
Tensor linear(const Tensor& input, const Linear& spec);

Tensor apply_layer(const Tensor& input, const LayerSpec& layer);

}  // namespace blocknorm
