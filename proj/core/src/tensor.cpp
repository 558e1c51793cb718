#include "blocknorm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "blocknorm/errors.hpp"

namespace blocknorm {

namespace {

void validate_shape(const Shape& shape) {
    if (shape.empty() || shape.size() > kMaxRank) {
        throw ShapeError("tensor rank must be 1.." + std::to_string(kMaxRank) +
                         ", got " + std::to_string(shape.size()));
    }
    for (std::size_t d : shape) {
        if (d == 0) throw ShapeError("zero-sized dimension in shape " + shape_to_string(shape));
    }
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_to_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
    validate_shape(shape_);
    data_.assign(shape_numel(shape_), 0.0f);
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    validate_shape(shape_);
    if (shape_numel(shape_) != data_.size()) {
        throw ShapeError("shape " + shape_to_string(shape_) + " holds " +
                         std::to_string(shape_numel(shape_)) + " elements, data has " +
                         std::to_string(data_.size()));
    }
}

Tensor Tensor::filled(Shape shape, float value) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

Tensor Tensor::reshaped(Shape shape) const {
    return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const noexcept {
    for (float v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

bool Tensor::bitwise_equal(const Tensor& other) const noexcept {
    return shape_ == other.shape_ && data_.size() == other.data_.size() &&
           (data_.empty() ||
            std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0);
}

}  // namespace blocknorm
