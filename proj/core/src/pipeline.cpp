#include "blocknorm/pipeline.hpp"

#include <nlohmann/json.hpp>

#include "blocknorm/errors.hpp"
#include "blocknorm/model_io.hpp"
#include "blocknorm/npy.hpp"
#include "blocknorm/reports.hpp"
#include "blocknorm/rng.hpp"

namespace blocknorm {

namespace fs = std::filesystem;

namespace {

template <class F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(name, e);
    }
}

std::string summary_json(const RunConfig& config, const Manifest& manifest, const RunOutputs& out,
                         const std::vector<std::string>& stages) {
    nlohmann::ordered_json j;
    j["tool"] = "blocknorm";
    j["version"] = std::string(library_version());
    j["tensor_format"] = "npy-1.0/<f4";
    j["seed"] = config.seed;
    j["method"] = std::string(to_string(out.detector.method));
    j["target_tpr"] = out.detector.target_tpr;
    j["max_samples"] = config.max_samples;
    j["stages"] = stages;
    j["selected_block"] = out.detector.selected_block ? nlohmann::ordered_json(*out.detector.selected_block)
                                                      : nlohmann::ordered_json(nullptr);
    j["threshold"] = out.detector.threshold;
    nlohmann::ordered_json counts;
    counts["id_train"] = manifest.id_train.size();
    counts["id_test"] = manifest.id_test.size();
    for (const auto& [name, files] : manifest.ood_sets) counts["ood"][name] = files.size();
    j["counts"] = counts;
    j["average"] = {{"auroc", out.eval.mean_auroc}, {"fpr_at_tpr", out.eval.mean_fpr_at_tpr}};
    j["outputs"] = out.files;
    return j.dump(2) + "\n";
}

}  // namespace

std::string_view library_version() noexcept {
    return BLOCKNORM_VERSION_STRING;
}

JigsawConfig jigsaw_config_for_seed(std::uint64_t seed) {
    return JigsawConfig{substream_key(seed, "jigsaw")};
}

SelectionOptions selection_options_for_seed(std::uint64_t seed, std::size_t max_samples, unsigned threads) {
    SelectionOptions o;
    o.max_samples = max_samples;
    o.subsample_key = substream_key(seed, "selection");
    o.threads = threads;
    return o;
}

void validate_run_inputs(const ModelSpec& model, const Manifest& manifest) {
    if (manifest.id_train.empty()) throw InputError("manifest has no id_train samples");
    if (manifest.id_test.empty()) throw InputError("manifest has no id_test samples");
    if (manifest.ood_sets.empty()) throw InputError("manifest has no OOD sets");
    for (const auto& [name, files] : manifest.ood_sets) {
        if (files.empty()) throw InputError("OOD set '" + name + "' is empty");
    }
    const Shape sample = read_tensor_shape(manifest.id_train.front());
    if (sample != model.input_shape()) {
        throw ShapeError("manifest samples are " + shape_to_string(sample) + " but the model expects " +
                         shape_to_string(model.input_shape()));
    }
}

DetectorConfig calibrate_detector(const ModelSpec& model, const SampleSource& id_train,
                                  const DetectorOptions& options, unsigned threads) {
    DetectorConfig d;
    d.method = options.method;
    d.selected_block = options.block;
    d.temperature = options.temperature.value_or(default_temperature(options.method));
    d.norm_replace = options.norm_replace;
    d.target_tpr = options.target_tpr;
    if (d.method == ScoreMethod::EnergyReact) {
        d.react_clip = react_clip_from_samples(model, id_train, options.clip_percentile, threads);
    }
    d.validate();
    const std::vector<double> scores = score_samples(model, id_train, d, threads);
    d.threshold = calibrate_threshold(scores, d.target_tpr);
    return d;
}

ScoreSet score_manifest(const ModelSpec& model, const Manifest& manifest, const DetectorConfig& detector,
                        unsigned threads) {
    ScoreSet s;
    s.method = detector.method;
    s.id_scores = score_samples(model, SampleSource::from_files(manifest.id_test), detector, threads);
    for (const auto& [name, files] : manifest.ood_sets) {
        s.ood_scores[name] = score_samples(model, SampleSource::from_files(files), detector, threads);
    }
    return s;
}

RunOutputs run_pipeline(const RunConfig& config) {
    std::vector<std::string> stages;
    auto [model, manifest] = stage("load", [&] {
        ModelSpec model = load_model(config.model_dir);
        Manifest manifest = load_manifest(config.manifest_path);
        validate_run_inputs(model, manifest);
        return std::pair{std::move(model), std::move(manifest)};
    });
    stages.emplace_back("load");

    RunOutputs out;
    const SampleSource id_train = SampleSource::from_files(manifest.id_train);
    DetectorOptions options = config.detector;
    const bool needs_block = options.method == ScoreMethod::FeatureNorm || options.norm_replace;
    if (needs_block) {
        out.selection = stage("select-block", [&] {
            return select_block(model, id_train, jigsaw_config_for_seed(config.seed),
                                selection_options_for_seed(config.seed, config.max_samples, config.threads));
        });
        options.block = out.selection->selected;
        stages.emplace_back("select-block");
    } else {
        options.block.reset();
    }

    out.detector = stage("calibrate", [&] { return calibrate_detector(model, id_train, options, config.threads); });
    stages.emplace_back("calibrate");

    out.scores = stage("score", [&] { return score_manifest(model, manifest, out.detector, config.threads); });
    stages.emplace_back("score");

    out.eval = stage("evaluate", [&] { return evaluate_scores(out.scores, out.detector.target_tpr); });
    stages.emplace_back("evaluate");

    std::vector<std::pair<std::string, std::string>> files;
    if (out.selection) files.emplace_back("selection.json", to_json(*out.selection, config.dump_norms));
    files.emplace_back("detector.json", to_json(out.detector));
    files.emplace_back("scores.json", to_json(out.scores));
    files.emplace_back("eval.json", to_json(out.eval));
    files.emplace_back("eval.csv", to_csv(out.eval));
    for (const auto& f : files) out.files.push_back(f.first);
    out.files.emplace_back("summary.json");
    files.emplace_back("summary.json", summary_json(config, manifest, out, stages));

    stage("write", [&] {
        const bool existed = fs::exists(config.output_dir);
        std::error_code ec;
        fs::create_directories(config.output_dir, ec);
        if (ec) throw IoError("cannot create " + config.output_dir.string() + ": " + ec.message());
        std::vector<fs::path> written;
        try {
            for (const auto& [name, text] : files) {
                const fs::path p = config.output_dir / name;
                written.push_back(p);
                write_text_file(p, text);
            }
        } catch (...) {
            for (const auto& p : written) fs::remove(p, ec);
            if (!existed) fs::remove(config.output_dir, ec);
            throw;
        }
        return 0;
    });
    return out;
}

}  // namespace blocknorm
