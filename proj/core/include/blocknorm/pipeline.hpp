// End-to-end driver: block selection -> threshold calibration on ID-train ->
// scoring of ID-test and every OOD set -> AUROC / FPR evaluation.
//
// All randomness comes from RunConfig::seed through named substreams
// ("jigsaw" for pseudo-OOD generation, "selection" for subsampling), so
// reruns with the same config write byte-identical files.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "blocknorm/manifest.hpp"
#include "blocknorm/metrics.hpp"
#include "blocknorm/model.hpp"
#include "blocknorm/scoring.hpp"
#include "blocknorm/selection.hpp"

namespace blocknorm {

std::string_view library_version() noexcept;

struct DetectorOptions {
    ScoreMethod method = ScoreMethod::FeatureNorm;
    std::optional<std::string> block;
    std::optional<double> temperature;
    double clip_percentile = kDefaultReactPercentile;
    bool norm_replace = false;
    double target_tpr = kDefaultTargetTpr;
};

struct RunConfig {
    std::filesystem::path model_dir;
    std::filesystem::path manifest_path;
    std::filesystem::path output_dir;
    DetectorOptions detector;
    std::uint64_t seed = 0;
    std::size_t max_samples = 0;
    unsigned threads = 1;
    bool dump_norms = false;
};

struct RunOutputs {
    std::optional<SelectionReport> selection;
    DetectorConfig detector;
    ScoreSet scores;
    EvalReport eval;
    // File names written under RunConfig::output_dir.
    std::vector<std::string> files;
};

JigsawConfig jigsaw_config_for_seed(std::uint64_t seed);
SelectionOptions selection_options_for_seed(std::uint64_t seed, std::size_t max_samples, unsigned threads);

// Checks the manifest against the model and the run's needs: nonempty
// ID-train and ID-test, at least one OOD set, no empty OOD set (InputError
// naming it), sample shape equal to the model input (ShapeError).
void validate_run_inputs(const ModelSpec& model, const Manifest& manifest);

// Builds a detector and calibrates its threshold on ID-train scores.
// featurenorm (and norm replacement) need options.block set.
DetectorConfig calibrate_detector(const ModelSpec& model, const SampleSource& id_train,
                                  const DetectorOptions& options, unsigned threads = 1);

// Scores ID-test and every OOD set of the manifest.
ScoreSet score_manifest(const ModelSpec& model, const Manifest& manifest, const DetectorConfig& detector,
                        unsigned threads = 1);

// Runs every stage and writes selection.json (featurenorm / norm replacement
// only), detector.json, scores.json, eval.json, eval.csv and summary.json.
// Failures are rethrown as StageError; files already written by the failed
// run are removed.
RunOutputs run_pipeline(const RunConfig& config);

}  // namespace blocknorm
