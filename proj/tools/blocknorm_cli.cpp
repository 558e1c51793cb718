// blocknorm: command-line front end for block selection, calibration,
// scoring and evaluation of FeatureNorm-style OOD detectors.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "blocknorm/blocknorm.hpp"

namespace fs = std::filesystem;
using namespace blocknorm;

namespace {

struct CommonModelArgs {
    std::string model_dir;
    std::string manifest;
    unsigned threads = 1;
};

void add_model_args(CLI::App* cmd, CommonModelArgs& a) {
    cmd->add_option("--model", a.model_dir, "Model directory containing model.json")->required();
    cmd->add_option("--manifest", a.manifest, "Dataset manifest JSON")->required();
    cmd->add_option("--threads", a.threads, "Worker threads for per-sample work")->check(CLI::Range(1u, 1024u));
}

struct DetectorArgs {
    std::string method = "featurenorm";
    std::string block;
    std::optional<double> temperature;
    double clip_pct = kDefaultReactPercentile;
    bool norm_replace = false;
    double target_tpr = kDefaultTargetTpr;
};

void add_detector_args(CLI::App* cmd, DetectorArgs& a, bool method_required) {
    auto* m = cmd->add_option("--method", a.method, "featurenorm | msp | energy | msp_temp | energy_react")
                  ->check(CLI::IsMember({"featurenorm", "msp", "energy", "msp_temp", "energy_react"}));
    if (method_required) m->required();
    cmd->add_option("--block", a.block, "Block whose FeatureNorm is used (featurenorm, --norm-replace)");
    cmd->add_option("--temperature", a.temperature, "Softmax/energy temperature (default 1; 1000 for msp_temp)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--clip-pct", a.clip_pct, "ReAct clip percentile of ID-train penultimate activations")
        ->check(CLI::Range(0.0, 100.0));
    cmd->add_flag("--norm-replace", a.norm_replace,
                  "Rescale logits by the selected block's FeatureNorm before logit-based scoring");
    cmd->add_option("--target-tpr", a.target_tpr, "ID true-positive rate for the threshold")
        ->check(CLI::Range(0.0, 1.0));
}

DetectorOptions to_options(const DetectorArgs& a) {
    DetectorOptions o;
    o.method = parse_score_method(a.method);
    if (!a.block.empty()) o.block = a.block;
    o.temperature = a.temperature;
    o.clip_percentile = a.clip_pct;
    o.norm_replace = a.norm_replace;
    o.target_tpr = a.target_tpr;
    return o;
}

int report_error(const Error& e) {
    if (const auto* se = dynamic_cast<const StageError*>(&e)) {
        std::cerr << "error " << se->what() << '\n';
    } else {
        std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
    }
    return 1;
}

template <class F>
int run_stage(const char* name, F&& f) {
    try {
        f();
        return 0;
    } catch (const StageError& e) {
        return report_error(e);
    } catch (const Error& e) {
        return report_error(StageError(name, e));
    } catch (const std::exception& e) {
        std::cerr << "error [" << name << "] " << e.what() << '\n';
        return 1;
    }
}

void warn_skips(const SelectionReport& r) {
    for (const auto& b : r.per_block) {
        if (b.skipped > 0) {
            std::cerr << "warning: block '" << b.name << "': skipped " << b.skipped
                      << " sample(s) with zero pseudo-OOD FeatureNorm\n";
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FeatureNorm / NormRatio out-of-distribution detection"};
    app.set_version_flag("--version", std::string(library_version()));
    app.require_subcommand(1);

    // select-block
    CommonModelArgs sel_common;
    std::uint64_t sel_seed = 0;
    std::size_t sel_max = 0;
    std::string sel_out;
    bool sel_norms = false;
    auto* sel = app.add_subcommand("select-block", "Pick the block with the largest mean NormRatio");
    add_model_args(sel, sel_common);
    sel->add_option("--seed", sel_seed, "Run seed")->required();
    sel->add_option("--max-samples", sel_max, "Use a seeded subset of at most K training samples (0 = all)");
    sel->add_flag("--dump-norms", sel_norms, "Include per-sample norms in the report");
    sel->add_option("--out", sel_out, "Selection report JSON")->required();

    // calibrate
    CommonModelArgs cal_common;
    DetectorArgs cal_det;
    std::string cal_selection, cal_out;
    auto* cal = app.add_subcommand("calibrate", "Calibrate a detector threshold on ID-train scores");
    add_model_args(cal, cal_common);
    add_detector_args(cal, cal_det, true);
    cal->add_option("--selection", cal_selection, "Take the block from a select-block report");
    cal->add_option("--out", cal_out, "Detector config JSON")->required();

    // score
    CommonModelArgs sc_common;
    DetectorArgs sc_det;
    std::string sc_detector, sc_out;
    auto* sc = app.add_subcommand("score", "Score ID-test and every OOD set");
    add_model_args(sc, sc_common);
    add_detector_args(sc, sc_det, false);
    sc->add_option("--detector", sc_detector, "Use a saved detector config instead of --method flags");
    sc->add_option("--out", sc_out, "Score set JSON")->required();

    // evaluate
    std::string ev_scores, ev_out, ev_csv;
    double ev_tpr = kDefaultTargetTpr;
    auto* ev = app.add_subcommand("evaluate", "AUROC and FPR at the target TPR per OOD set");
    ev->add_option("--scores", ev_scores, "Score set JSON")->required();
    ev->add_option("--out", ev_out, "Evaluation JSON")->required();
    ev->add_option("--csv", ev_csv, "Also write the table as CSV");
    ev->add_option("--target-tpr", ev_tpr, "ID true-positive rate")->check(CLI::Range(0.0, 1.0));

    // run
    CommonModelArgs run_common;
    DetectorArgs run_det;
    std::uint64_t run_seed = 0;
    std::size_t run_max = 0;
    std::string run_out;
    bool run_norms = false;
    auto* run = app.add_subcommand("run", "select-block -> calibrate -> score -> evaluate");
    add_model_args(run, run_common);
    add_detector_args(run, run_det, false);
    run->add_option("--seed", run_seed, "Run seed")->required();
    run->add_option("--max-samples", run_max, "Seeded subset size for block selection (0 = all)");
    run->add_flag("--dump-norms", run_norms, "Include per-sample norms in selection.json");
    run->add_option("--out-dir", run_out, "Output directory")->required();

    // make-jigsaw
    std::string jg_input, jg_manifest, jg_out, jg_out_dir;
    std::uint64_t jg_seed = 0;
    std::size_t jg_index = 0, jg_max = 0;
    auto* jg = app.add_subcommand("make-jigsaw", "Write 3x3 jigsaw pseudo-OOD tensors for inspection");
    auto* jg_in_opt = jg->add_option("--input", jg_input, "Single input tensor");
    auto* jg_man_opt = jg->add_option("--manifest", jg_manifest, "Shuffle every id_train sample of a manifest");
    jg_in_opt->excludes(jg_man_opt);
    jg->add_option("--seed", jg_seed, "Run seed (same substream as select-block)")->required();
    jg->add_option("--index", jg_index, "Sample index for --input");
    jg->add_option("--max-samples", jg_max, "Manifest mode: seeded subset, as in select-block");
    jg->add_option("--out", jg_out, "Output tensor for --input");
    jg->add_option("--out-dir", jg_out_dir, "Output directory for --manifest");

    // forward
    std::string fw_model, fw_input, fw_out_dir;
    auto* fw = app.add_subcommand("forward", "Run one tensor through a model; write logits and block taps");
    fw->add_option("--model", fw_model, "Model directory")->required();
    fw->add_option("--input", fw_input, "Input tensor (C x H x W)")->required();
    fw->add_option("--out-dir", fw_out_dir, "Writes logits.npy, features.npy and tap_<block>.npy")->required();

    CLI11_PARSE(app, argc, argv);

    if (*fw) {
        return run_stage("forward", [&] {
            ModelSpec model = load_model(fw_model);
            ForwardResult r = forward_with_taps(model, read_tensor(fw_input));
            fs::create_directories(fw_out_dir);
            write_tensor(r.logits, fs::path(fw_out_dir) / "logits.npy");
            write_tensor(r.features, fs::path(fw_out_dir) / "features.npy");
            for (std::size_t i = 0; i < r.taps.size(); ++i) {
                write_tensor(r.taps[i], fs::path(fw_out_dir) / ("tap_" + r.tap_names[i] + ".npy"));
                std::cout << r.tap_names[i] << ": FeatureNorm " << feature_norm_score(r.taps[i]) << '\n';
            }
        });
    }

    if (*sel) {
        return run_stage("select-block", [&] {
            ModelSpec model = load_model(sel_common.model_dir);
            Manifest manifest = load_manifest(sel_common.manifest);
            SelectionReport r =
                select_block(model, SampleSource::from_files(manifest.id_train), jigsaw_config_for_seed(sel_seed),
                             selection_options_for_seed(sel_seed, sel_max, sel_common.threads));
            warn_skips(r);
            write_text_file(sel_out, to_json(r, sel_norms));
            std::cout << "selected block: " << r.selected << '\n';
        });
    }

    if (*cal) {
        return run_stage("calibrate", [&] {
            ModelSpec model = load_model(cal_common.model_dir);
            Manifest manifest = load_manifest(cal_common.manifest);
            DetectorOptions opts = to_options(cal_det);
            if (!cal_selection.empty()) {
                opts.block = selection_report_from_json(read_text_file(cal_selection)).selected;
            }
            DetectorConfig d =
                calibrate_detector(model, SampleSource::from_files(manifest.id_train), opts, cal_common.threads);
            write_text_file(cal_out, to_json(d));
            std::cout << "threshold: " << d.threshold << '\n';
        });
    }

    if (*sc) {
        return run_stage("score", [&] {
            ModelSpec model = load_model(sc_common.model_dir);
            Manifest manifest = load_manifest(sc_common.manifest);
            DetectorConfig d;
            if (!sc_detector.empty()) {
                d = detector_config_from_json(read_text_file(sc_detector));
            } else {
                DetectorOptions opts = to_options(sc_det);
                d.method = opts.method;
                d.selected_block = opts.block;
                d.temperature = opts.temperature.value_or(default_temperature(opts.method));
                d.norm_replace = opts.norm_replace;
                if (d.method == ScoreMethod::EnergyReact) {
                    d.react_clip = react_clip_from_samples(model, SampleSource::from_files(manifest.id_train),
                                                           opts.clip_percentile, sc_common.threads);
                }
            }
            ScoreSet s = score_manifest(model, manifest, d, sc_common.threads);
            write_text_file(sc_out, to_json(s));
        });
    }

    if (*ev) {
        return run_stage("evaluate", [&] {
            ScoreSet s = score_set_from_json(read_text_file(ev_scores));
            EvalReport r = evaluate_scores(s, ev_tpr);
            write_text_file(ev_out, to_json(r));
            if (!ev_csv.empty()) write_text_file(ev_csv, to_csv(r));
            for (const auto& [name, e] : r.per_set) {
                std::cout << name << ": AUROC " << e.auroc << ", FPR@" << ev_tpr << " " << e.fpr_at_tpr << '\n';
            }
        });
    }

    if (*run) {
        return run_stage("run", [&] {
            RunConfig c;
            c.model_dir = run_common.model_dir;
            c.manifest_path = run_common.manifest;
            c.output_dir = run_out;
            c.detector = to_options(run_det);
            c.seed = run_seed;
            c.max_samples = run_max;
            c.threads = run_common.threads;
            c.dump_norms = run_norms;
            RunOutputs out = run_pipeline(c);
            if (out.selection) {
                warn_skips(*out.selection);
                std::cout << "selected block: " << out.selection->selected << '\n';
            }
            std::cout << "threshold: " << out.detector.threshold << '\n';
            std::cout << "average AUROC " << out.eval.mean_auroc << ", FPR " << out.eval.mean_fpr_at_tpr << '\n';
        });
    }

    if (*jg) {
        return run_stage("make-jigsaw", [&] {
            const JigsawConfig cfg = jigsaw_config_for_seed(jg_seed);
            if (!jg_input.empty()) {
                if (jg_out.empty()) throw InputError("--input needs --out");
                write_tensor(make_jigsaw(read_tensor(jg_input), cfg, jg_index), jg_out);
                return;
            }
            if (jg_manifest.empty()) throw InputError("give --input or --manifest");
            if (jg_out_dir.empty()) throw InputError("--manifest needs --out-dir");
            Manifest manifest = load_manifest(jg_manifest);
            fs::create_directories(jg_out_dir);
            const auto options = selection_options_for_seed(jg_seed, jg_max, 1);
            for (std::size_t i :
                 subsample_indices(manifest.id_train.size(), options.max_samples, options.subsample_key)) {
                Tensor x = read_tensor(manifest.id_train[i]);
                write_tensor(make_jigsaw(x, cfg, i), fs::path(jg_out_dir) / ("jigsaw_" + std::to_string(i) + ".npy"));
            }
        });
    }
    return 0;
}
