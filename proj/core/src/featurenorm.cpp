#include "blocknorm/featurenorm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "blocknorm/errors.hpp"

namespace blocknorm {

double channel_norm(std::span<const float> channel) {
    double sum = 0.0;
    for (float v : channel) {
        const double d = std::max(v, 0.0f);
        sum += d * d;
    }
    return std::sqrt(sum);
}

FeatureNormResult feature_norm(const Tensor& z) {
    if (z.empty()) throw ShapeError("feature_norm on an empty tensor");
    const std::size_t m = z.dim(0);
    const std::size_t plane = z.size() / m;
    FeatureNormResult r;
    r.per_channel.resize(m);
    double sum = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
        r.per_channel[c] = channel_norm(z.data().subspan(c * plane, plane));
        sum += r.per_channel[c];
    }
    r.mean = sum / static_cast<double>(m);
    return r;
}

double feature_norm_score(const Tensor& z) {
    return feature_norm(z).mean;
}

double norm_ratio(double norm_id, double norm_pseudo, std::string_view block,
                  std::optional<std::size_t> sample) {
    if (norm_pseudo == 0.0) throw DegenerateRatio(std::string(block), sample);
    return norm_id / norm_pseudo;
}

}  // namespace blocknorm
