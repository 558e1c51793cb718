#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blocknorm/model.hpp"
#include "blocknorm/samples.hpp"
#include "blocknorm/tensor.hpp"

namespace blocknorm {

// All scores are oriented so that larger means more ID-like.
enum class ScoreMethod { FeatureNorm, Msp, Energy, MspTemp, EnergyReact };

std::string_view to_string(ScoreMethod method);
// "featurenorm", "msp", "energy", "msp_temp", "energy_react".
ScoreMethod parse_score_method(std::string_view text);

inline constexpr double kDefaultMspTemperature = 1000.0;
inline constexpr double kDefaultReactPercentile = 90.0;
inline constexpr double kDefaultTargetTpr = 0.95;

// Temperature a method uses when none is given: 1000 for msp_temp, 1 otherwise.
double default_temperature(ScoreMethod method);

struct DetectorConfig {
    ScoreMethod method = ScoreMethod::FeatureNorm;
    std::optional<std::string> selected_block;
    double threshold = 0.0;
    double temperature = 1.0;
    std::optional<double> react_clip;
    // Rescale logits by FeatureNorm(selected block) / ||f||_2 before the
    // logit-based scores.
    bool norm_replace = false;
    double target_tpr = kDefaultTargetTpr;

    // Throws ConfigError on a missing block, T <= 0, c <= 0 or norm
    // replacement without a selected block.
    void validate() const;
};

struct ScoreSet {
    ScoreMethod method = ScoreMethod::FeatureNorm;
    std::vector<double> id_scores;
    std::map<std::string, std::vector<double>> ood_scores;
    bool higher_is_id = true;
};

enum class Decision { ID, OOD };

// FeatureNorm of the named block's tap. ConfigError for an unknown block.
double score_featurenorm(const ForwardResult& result, std::string_view block);

// Maximum softmax probability, max-subtracted. Requires K >= 2 (InputError).
double score_msp(const Tensor& logits);

// T * logsumexp(v / T), the negative free energy. Allows K == 1.
double score_energy(const Tensor& logits, double temperature);

// Maximum softmax probability of v / T. score_msp_temp(v, 1) == score_msp(v).
double score_msp_temp(const Tensor& logits, double temperature);

// Elementwise min(x, c).
Tensor react_clip(const Tensor& features, double clip);

// v'_i = (v_i - b_i) * (selected_norm / last_norm) + b_i.
// Throws DegenerateRatio when last_norm is zero.
Tensor norm_replaced_logits(const Tensor& logits, const Tensor& bias, double last_norm,
                            double selected_norm);

// Linear-interpolation percentile (numpy default), pct in [0, 100].
double percentile(std::vector<double> values, double pct);

// The k-th largest score with k = ceil(target_tpr * n), so at least k of the
// n scores satisfy score >= threshold. InputError on empty input, non-finite
// scores or target_tpr outside (0, 1].
double calibrate_threshold(std::span<const double> id_scores, double target_tpr = kDefaultTargetTpr);

// ID iff score >= gamma.
Decision decide(double score, double gamma) noexcept;

// Scores one forward result under a detector configuration.
double score_forward(const ModelSpec& model, const ForwardResult& result, const DetectorConfig& config);

double score_sample(const ModelSpec& model, const Tensor& image, const DetectorConfig& config);

// Scores every sample; output order matches the source.
std::vector<double> score_samples(const ModelSpec& model, const SampleSource& samples,
                                  const DetectorConfig& config, unsigned threads = 1);

// ReAct clip value: the given percentile of all penultimate activations over
// the samples. InputError when samples is empty.
double react_clip_from_samples(const ModelSpec& model, const SampleSource& samples, double pct,
                               unsigned threads = 1);

}  // namespace blocknorm
