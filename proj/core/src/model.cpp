#include "blocknorm/model.hpp"

#include <set>

#include "blocknorm/errors.hpp"

namespace blocknorm {

std::string_view to_string(OrderStyle style) {
    return style == OrderStyle::ConvBnRelu ? "Conv-BN-ReLU" : "BN-ReLU-Conv";
}

OrderStyle parse_order_style(std::string_view text) {
    if (text == "Conv-BN-ReLU") return OrderStyle::ConvBnRelu;
    if (text == "BN-ReLU-Conv") return OrderStyle::BnReluConv;
    throw ConfigError("unknown order_style '" + std::string(text) +
                      "' (expected Conv-BN-ReLU or BN-ReLU-Conv)");
}

namespace {

std::string where(const std::string& scope, const std::string& section, std::size_t idx,
                  const LayerSpec& layer) {
    return scope + " " + section + "[" + std::to_string(idx) + "] (" + layer_kind(layer) + ")";
}

Shape propagate(const std::vector<LayerSpec>& layers, Shape shape, const std::string& scope,
                const std::string& section) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        try {
            validate_layer(layers[i]);
            shape = layer_output_shape(layers[i], shape);
        } catch (const ShapeError& e) {
            throw ShapeError(where(scope, section, i, layers[i]) + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError(where(scope, section, i, layers[i]) + ": " + e.what());
        }
    }
    return shape;
}

Tensor run_layers(const std::vector<LayerSpec>& layers, Tensor x) {
    for (const auto& layer : layers) x = apply_layer(x, layer);
    return x;
}

Tensor run_block(const BlockSpec& block, const Tensor& input) {
    Tensor out = run_layers(block.layers, input);
    if (block.residual) {
        Tensor skip = block.downsample.empty() ? input : run_layers(block.downsample, input);
        auto o = out.mutable_data();
        auto s = skip.data();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] += s[i];
    }
    return run_layers(block.post_layers, std::move(out));
}

}  // namespace

ModelSpec::ModelSpec(Shape input_shape, std::vector<BlockSpec> blocks, std::vector<LayerSpec> head)
    : input_shape_(std::move(input_shape)), blocks_(std::move(blocks)), head_(std::move(head)) {
    if (input_shape_.size() != 3) {
        throw ShapeError("model input shape must be C x H x W, got " + shape_to_string(input_shape_));
    }
    for (std::size_t d : input_shape_) {
        if (d == 0) throw ShapeError("model input shape has a zero dimension");
    }
    if (blocks_.empty()) throw ConfigError("model has no blocks");

    std::set<std::string> names;
    Shape shape = input_shape_;
    for (const auto& block : blocks_) {
        if (block.name.empty()) throw ConfigError("block with empty name");
        if (!names.insert(block.name).second) throw ConfigError("duplicate block name '" + block.name + "'");
        const std::string scope = "block '" + block.name + "'";
        Shape branch = propagate(block.layers, shape, scope, "layers");
        if (block.residual) {
            Shape skip = propagate(block.downsample, shape, scope, "downsample");
            if (branch != skip) {
                throw ShapeError(scope + ": residual branch output " + shape_to_string(branch) +
                                 " does not match skip path " + shape_to_string(skip));
            }
        } else if (!block.downsample.empty()) {
            throw ConfigError(scope + ": downsample given for a non-residual block");
        }
        shape = propagate(block.post_layers, branch, scope, "post_layers");
        block_shapes_.push_back(shape);
    }

    std::size_t linear_count = 0;
    for (const auto& layer : head_) {
        if (std::holds_alternative<Linear>(layer)) ++linear_count;
    }
    if (head_.empty() || linear_count != 1 || !std::holds_alternative<Linear>(head_.back())) {
        throw ConfigError("head must contain exactly one linear layer, placed last");
    }
    Shape head_in = propagate({head_.begin(), head_.end() - 1}, shape, "head", "layers");
    if (head_in.size() != 1) {
        throw ShapeError("head: classifier input must be a flat vector, got " + shape_to_string(head_in));
    }
    Shape logits = propagate({head_.back()}, head_in, "head", "classifier");
    feature_dim_ = head_in[0];
    num_classes_ = logits[0];
}

std::vector<std::string> ModelSpec::block_names() const {
    std::vector<std::string> names;
    names.reserve(blocks_.size());
    for (const auto& b : blocks_) names.push_back(b.name);
    return names;
}

std::size_t ModelSpec::block_index(std::string_view name) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (blocks_[i].name == name) return i;
    }
    throw ConfigError("unknown block '" + std::string(name) + "'");
}

bool ModelSpec::has_block(std::string_view name) const noexcept {
    for (const auto& b : blocks_) {
        if (b.name == name) return true;
    }
    return false;
}

const Linear& ModelSpec::classifier() const {
    return std::get<Linear>(head_.back());
}

const Tensor& ForwardResult::tap(std::string_view block) const {
    for (std::size_t i = 0; i < tap_names.size(); ++i) {
        if (tap_names[i] == block) return taps[i];
    }
    throw ConfigError("unknown block '" + std::string(block) + "'");
}

std::vector<Tensor> forward_blocks(const ModelSpec& model, const Tensor& image) {
    if (image.shape() != model.input_shape()) {
        throw ShapeError("input shape " + shape_to_string(image.shape()) + " does not match model input " +
                         shape_to_string(model.input_shape()));
    }
    std::vector<Tensor> taps;
    taps.reserve(model.num_blocks());
    const Tensor* x = &image;
    for (const auto& block : model.blocks()) {
        taps.push_back(run_block(block, *x));
        x = &taps.back();
    }
    return taps;
}

ForwardResult forward_with_taps(const ModelSpec& model, const Tensor& image) {
    ForwardResult r;
    r.taps = forward_blocks(model, image);
    r.tap_names = model.block_names();
    const auto& head = model.head();
    Tensor x = r.taps.back();
    for (std::size_t i = 0; i + 1 < head.size(); ++i) x = apply_layer(x, head[i]);
    r.features = std::move(x);
    r.logits = linear(r.features, model.classifier());
    return r;
}

Tensor classify_features(const ModelSpec& model, const Tensor& features) {
    return linear(features, model.classifier());
}

}  // namespace blocknorm
