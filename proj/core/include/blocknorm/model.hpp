#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "blocknorm/layers.hpp"
#include "blocknorm/tensor.hpp"

namespace blocknorm {

// Layer arrangement inside a block. Only metadata: the layer list is what
// executes, but reports carry the tag for block-order comparisons.
enum class OrderStyle { ConvBnRelu, BnReluConv };

std::string_view to_string(OrderStyle style);
OrderStyle parse_order_style(std::string_view text);

// One unit of the feature extractor: a conv+activation for plain nets, a
// residual block otherwise.
//
// Plain block:    out = post(layers(x))
// Residual block: out = post(layers(x) + skip(x)), skip = downsample or identity
struct BlockSpec {
    std::string name;
    std::vector<LayerSpec> layers;
    bool residual = false;
    std::vector<LayerSpec> downsample;
    std::vector<LayerSpec> post_layers;
    OrderStyle order_style = OrderStyle::ConvBnRelu;
};

// Validated, immutable network description. Shapes are propagated once at
// construction so forward passes never re-check compatibility.
class ModelSpec {
public:
    // Throws ShapeError / ConfigError naming the offending block and layer.
    ModelSpec(Shape input_shape, std::vector<BlockSpec> blocks, std::vector<LayerSpec> head);

    const Shape& input_shape() const noexcept { return input_shape_; }
    const std::vector<BlockSpec>& blocks() const noexcept { return blocks_; }
    const std::vector<LayerSpec>& head() const noexcept { return head_; }
    std::size_t num_blocks() const noexcept { return blocks_.size(); }

    const Shape& block_output_shape(std::size_t i) const { return block_shapes_.at(i); }
    std::vector<std::string> block_names() const;
    // Index of the named block; throws ConfigError if unknown.
    std::size_t block_index(std::string_view name) const;
    bool has_block(std::string_view name) const noexcept;

    std::size_t num_classes() const noexcept { return num_classes_; }
    // Length of the vector fed to the classifier (the penultimate feature f).
    std::size_t feature_dim() const noexcept { return feature_dim_; }
    // The head's final linear layer.
    const Linear& classifier() const;

private:
    Shape input_shape_;
    std::vector<BlockSpec> blocks_;
    std::vector<LayerSpec> head_;
    std::vector<Shape> block_shapes_;
    std::size_t num_classes_ = 0;
    std::size_t feature_dim_ = 0;
};

struct ForwardResult {
    Tensor logits;
    // One tap per block, in block order: the block's final output.
    std::vector<Tensor> taps;
    std::vector<std::string> tap_names;
    // Input to the classifier layer (post-pool, flattened).
    Tensor features;

    // Throws ConfigError for an unknown block name.
    const Tensor& tap(std::string_view block) const;
};

// Runs every block in order, recording its output, then the head.
// Deterministic: identical inputs give bitwise-identical results.
ForwardResult forward_with_taps(const ModelSpec& model, const Tensor& image);

// Block outputs only, skipping the head.
std::vector<Tensor> forward_blocks(const ModelSpec& model, const Tensor& image);

// Applies the classifier layer to a penultimate feature vector.
Tensor classify_features(const ModelSpec& model, const Tensor& features);

}  // namespace blocknorm
