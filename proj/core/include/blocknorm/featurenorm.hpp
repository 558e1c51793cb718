#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "blocknorm/tensor.hpp"

namespace blocknorm {

struct FeatureNormResult {
    std::vector<double> per_channel;  // a_1..a_M
    double mean = 0.0;                // the FeatureNorm score
};

// Frobenius norm of one rectified channel: sqrt(sum max(z, 0)^2),
// accumulated in double.
double channel_norm(std::span<const float> channel);

// Channel-averaged rectified norm of a feature map. The first axis is the
// channel axis; all remaining axes form the spatial slice, so an M x H x W
// map has M channels of H*W elements and a flat [M] vector M channels of one.
FeatureNormResult feature_norm(const Tensor& z);

// Shorthand for feature_norm(z).mean.
double feature_norm_score(const Tensor& z);

// norm_id / norm_pseudo. Throws DegenerateRatio (carrying block and sample
// for diagnostics) when norm_pseudo is zero.
double norm_ratio(double norm_id, double norm_pseudo, std::string_view block = {},
                  std::optional<std::size_t> sample = std::nullopt);

}  // namespace blocknorm
