#include "blocknorm/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "blocknorm/errors.hpp"
#include "blocknorm/featurenorm.hpp"

namespace blocknorm {

std::string_view to_string(ScoreMethod method) {
    switch (method) {
        case ScoreMethod::FeatureNorm: return "featurenorm";
        case ScoreMethod::Msp: return "msp";
        case ScoreMethod::Energy: return "energy";
        case ScoreMethod::MspTemp: return "msp_temp";
        case ScoreMethod::EnergyReact: return "energy_react";
    }
    return "unknown";
}

ScoreMethod parse_score_method(std::string_view text) {
    for (auto m : {ScoreMethod::FeatureNorm, ScoreMethod::Msp, ScoreMethod::Energy, ScoreMethod::MspTemp,
                   ScoreMethod::EnergyReact}) {
        if (to_string(m) == text) return m;
    }
    throw ConfigError("unknown scoring method '" + std::string(text) +
                      "' (expected featurenorm, msp, energy, msp_temp or energy_react)");
}

double default_temperature(ScoreMethod method) {
    return method == ScoreMethod::MspTemp ? kDefaultMspTemperature : 1.0;
}

void DetectorConfig::validate() const {
    if (method == ScoreMethod::FeatureNorm && !selected_block) {
        throw ConfigError("featurenorm detector needs a selected block");
    }
    if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("temperature must be > 0");
    if (method == ScoreMethod::EnergyReact && !(react_clip && *react_clip > 0.0)) {
        throw ConfigError("energy_react needs a clip value > 0");
    }
    if (norm_replace) {
        if (method == ScoreMethod::FeatureNorm) throw ConfigError("norm replacement applies to logit-based methods");
        if (!selected_block) throw ConfigError("norm replacement needs a selected block");
    }
    if (!(target_tpr > 0.0 && target_tpr <= 1.0)) throw ConfigError("target TPR must be in (0, 1]");
}

double score_featurenorm(const ForwardResult& result, std::string_view block) {
    return feature_norm_score(result.tap(block));
}

double score_msp_temp(const Tensor& logits, double temperature) {
    if (logits.size() < 2) throw InputError("softmax scores need at least two logits");
    double m = -INFINITY;
    for (float v : logits.data()) m = std::max(m, static_cast<double>(v) / temperature);
    double sum = 0.0;
    for (float v : logits.data()) sum += std::exp(static_cast<double>(v) / temperature - m);
    // The largest term is exp(0) = 1.
    return 1.0 / sum;
}

double score_msp(const Tensor& logits) {
    return score_msp_temp(logits, 1.0);
}

double score_energy(const Tensor& logits, double temperature) {
    if (logits.empty()) throw InputError("energy score of an empty logit vector");
    double m = -INFINITY;
    for (float v : logits.data()) m = std::max(m, static_cast<double>(v) / temperature);
    double sum = 0.0;
    for (float v : logits.data()) sum += std::exp(static_cast<double>(v) / temperature - m);
    return temperature * (m + std::log(sum));
}

Tensor react_clip(const Tensor& features, double clip) {
    Tensor out = features;
    for (float& v : out.mutable_data()) {
        if (static_cast<double>(v) > clip) v = static_cast<float>(clip);
    }
    return out;
}

Tensor norm_replaced_logits(const Tensor& logits, const Tensor& bias, double last_norm,
                            double selected_norm) {
    if (bias.size() != logits.size()) throw ShapeError("bias and logits differ in length");
    if (last_norm == 0.0) throw DegenerateRatio("last-block feature norm is zero; cannot rescale logits");
    const double ratio = selected_norm / last_norm;
    Tensor out(logits.shape());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double b = bias[i];
        out[i] = static_cast<float>((static_cast<double>(logits[i]) - b) * ratio + b);
    }
    return out;
}

double percentile(std::vector<double> values, double pct) {
    if (values.empty()) throw InputError("percentile of an empty set");
    if (!(pct >= 0.0 && pct <= 100.0)) throw InputError("percentile must be in [0, 100]");
    std::sort(values.begin(), values.end());
    const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
}

double calibrate_threshold(std::span<const double> id_scores, double target_tpr) {
    if (id_scores.empty()) throw InputError("threshold calibration needs at least one ID score");
    if (!(target_tpr > 0.0 && target_tpr <= 1.0)) throw InputError("target TPR must be in (0, 1]");
    for (double s : id_scores) {
        if (!std::isfinite(s)) throw InputError("non-finite ID score");
    }
    const std::size_t n = id_scores.size();
    auto k = static_cast<std::size_t>(std::ceil(target_tpr * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, 1, n);
    std::vector<double> sorted(id_scores.begin(), id_scores.end());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end(),
                     std::greater<>());
    return sorted[k - 1];
}

Decision decide(double score, double gamma) noexcept {
    return score >= gamma ? Decision::ID : Decision::OOD;
}

double score_forward(const ModelSpec& model, const ForwardResult& result, const DetectorConfig& config) {
    if (config.method == ScoreMethod::FeatureNorm) {
        return score_featurenorm(result, *config.selected_block);
    }

    Tensor features = result.features;
    Tensor logits = result.logits;
    if (config.method == ScoreMethod::EnergyReact) {
        features = react_clip(features, *config.react_clip);
        logits = classify_features(model, features);
    }
    if (config.norm_replace) {
        const Linear& cls = model.classifier();
        const Tensor bias = cls.bias ? *cls.bias : Tensor(Shape{model.num_classes()});
        double sq = 0.0;
        for (float v : features.data()) sq += static_cast<double>(v) * static_cast<double>(v);
        logits = norm_replaced_logits(logits, bias, std::sqrt(sq),
                                      score_featurenorm(result, *config.selected_block));
    }

    switch (config.method) {
        case ScoreMethod::Msp: return score_msp(logits);
        case ScoreMethod::MspTemp: return score_msp_temp(logits, config.temperature);
        case ScoreMethod::Energy:
        case ScoreMethod::EnergyReact: return score_energy(logits, config.temperature);
        case ScoreMethod::FeatureNorm: break;
    }
    throw ConfigError("unhandled scoring method");
}

double score_sample(const ModelSpec& model, const Tensor& image, const DetectorConfig& config) {
    return score_forward(model, forward_with_taps(model, image), config);
}

std::vector<double> score_samples(const ModelSpec& model, const SampleSource& samples,
                                  const DetectorConfig& config, unsigned threads) {
    config.validate();
    if (config.selected_block && !model.has_block(*config.selected_block)) {
        throw ConfigError("unknown block '" + *config.selected_block + "'");
    }
    std::vector<double> scores(samples.size());
    parallel_for(samples.size(), threads,
                 [&](std::size_t i) { scores[i] = score_sample(model, samples.load(i), config); });
    return scores;
}

double react_clip_from_samples(const ModelSpec& model, const SampleSource& samples, double pct,
                               unsigned threads) {
    if (samples.empty()) throw InputError("ReAct clip estimation needs at least one sample");
    std::vector<std::vector<float>> per_sample(samples.size());
    parallel_for(samples.size(), threads, [&](std::size_t i) {
        per_sample[i] = forward_with_taps(model, samples.load(i)).features.values();
    });
    std::vector<double> all;
    all.reserve(samples.size() * model.feature_dim());
    for (const auto& f : per_sample) all.insert(all.end(), f.begin(), f.end());
    return percentile(std::move(all), pct);
}

}  // namespace blocknorm
