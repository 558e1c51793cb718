#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "blocknorm/blocknorm.hpp"

using namespace blocknorm;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = BLOCKNORM_FIXTURE_DIR;

class PipelineTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("blocknorm_pipe_" + std::to_string(std::random_device{}()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    RunConfig config(const std::string& variant, const std::string& out) const {
        RunConfig c;
        c.model_dir = kFixtures / ("model_" + variant);
        c.manifest_path = kFixtures / "manifest.json";
        c.output_dir = dir_ / out;
        c.seed = 7;
        return c;
    }

    static std::set<std::string> listing(const fs::path& d) {
        std::set<std::string> names;
        for (const auto& e : fs::directory_iterator(d)) names.insert(e.path().filename().string());
        return names;
    }

    static void expect_same_files(const fs::path& got, const fs::path& want) {
        ASSERT_EQ(listing(got), listing(want));
        for (const auto& name : listing(want)) {
            EXPECT_EQ(read_text_file(got / name), read_text_file(want / name)) << name;
        }
    }

    // Manifest whose paths point into the fixture data, with a custom OOD map.
    fs::path write_manifest(const nlohmann::json& ood_sets) const {
        const std::string text = read_text_file(kFixtures / "manifest.json");
        nlohmann::json m = nlohmann::json::parse(text);
        for (const char* key : {"id_train", "id_test"}) {
            for (auto& p : m[key]) p = (kFixtures / p.get<std::string>()).string();
        }
        m["ood_sets"] = ood_sets;
        const fs::path p = dir_ / "manifest.json";
        write_text_file(p, m.dump());
        return p;
    }

    fs::path dir_;
};

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(BLOCKNORM_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_F(PipelineTest, SeedSevenReproducesGoldenOutputs) {
    for (const std::string variant : {"cbr", "brc"}) {
        run_pipeline(config(variant, variant));
        expect_same_files(dir_ / variant, kFixtures / "golden" / ("run_seed7_" + variant));
    }
}

TEST_F(PipelineTest, ThreadCountDoesNotChangeOutputs) {
    RunConfig c = config("cbr", "threaded");
    c.threads = 4;
    run_pipeline(c);
    expect_same_files(dir_ / "threaded", kFixtures / "golden" / "run_seed7_cbr");
}

TEST_F(PipelineTest, RerunIsIdempotent) {
    run_pipeline(config("cbr", "a"));
    run_pipeline(config("cbr", "a"));
    expect_same_files(dir_ / "a", kFixtures / "golden" / "run_seed7_cbr");
}

TEST_F(PipelineTest, SeedChangesOnlyRandomizedOutputs) {
    RunConfig c = config("cbr", "seed8");
    c.seed = 8;
    const RunOutputs out = run_pipeline(c);
    EXPECT_NE(read_text_file(dir_ / "seed8" / "selection.json"),
              read_text_file(kFixtures / "golden" / "run_seed7_cbr" / "selection.json"));
    ASSERT_TRUE(out.selection);
    EXPECT_EQ(out.detector.selected_block, out.selection->selected);
}

TEST_F(PipelineTest, SoftmaxMethodSkipsBlockSelection) {
    RunConfig c = config("cbr", "msp");
    c.detector.method = ScoreMethod::Msp;
    const RunOutputs out = run_pipeline(c);
    EXPECT_FALSE(out.selection);
    EXPECT_FALSE(fs::exists(dir_ / "msp" / "selection.json"));
    const auto summary = nlohmann::json::parse(read_text_file(dir_ / "msp" / "summary.json"));
    EXPECT_EQ(summary["stages"], nlohmann::json({"load", "calibrate", "score", "evaluate"}));
    EXPECT_TRUE(summary["selected_block"].is_null());
}

TEST_F(PipelineTest, EveryMethodRuns) {
    for (const char* m : {"featurenorm", "msp", "energy", "msp_temp", "energy_react"}) {
        RunConfig c = config("brc", m);
        c.detector.method = parse_score_method(m);
        const RunOutputs out = run_pipeline(c);
        EXPECT_EQ(out.eval.per_set.size(), 2u) << m;
        if (out.detector.method == ScoreMethod::EnergyReact) EXPECT_TRUE(out.detector.react_clip);
    }
    RunConfig c = config("cbr", "nr");
    c.detector.method = ScoreMethod::Energy;
    c.detector.norm_replace = true;
    const RunOutputs out = run_pipeline(c);
    ASSERT_TRUE(out.selection);
    EXPECT_EQ(out.detector.selected_block, out.selection->selected);
}

TEST_F(PipelineTest, StagesComposeToTheSameResult) {
    const RunOutputs full = run_pipeline(config("cbr", "full"));
    const ModelSpec model = load_model(kFixtures / "model_cbr");
    const Manifest manifest = load_manifest(kFixtures / "manifest.json");
    DetectorOptions o;
    o.block = full.selection->selected;
    const DetectorConfig d = calibrate_detector(model, SampleSource::from_files(manifest.id_train), o);
    EXPECT_EQ(to_json(d), to_json(full.detector));
    const ScoreSet s = score_manifest(model, manifest, d);
    EXPECT_EQ(to_json(s), to_json(full.scores));
    EXPECT_EQ(to_json(evaluate_scores(s, d.target_tpr)), to_json(full.eval));
}

TEST_F(PipelineTest, ReportsRoundTripThroughJson) {
    RunConfig c = config("cbr", "rt");
    c.dump_norms = true;
    const RunOutputs out = run_pipeline(c);
    EXPECT_EQ(to_json(selection_report_from_json(to_json(*out.selection, true)), true), to_json(*out.selection, true));
    EXPECT_EQ(to_json(detector_config_from_json(to_json(out.detector))), to_json(out.detector));
    EXPECT_EQ(to_json(score_set_from_json(to_json(out.scores))), to_json(out.scores));
    EXPECT_EQ(to_json(eval_report_from_json(to_json(out.eval))), to_json(out.eval));
    EXPECT_THROW(detector_config_from_json("{"), FormatError);
}

TEST_F(PipelineTest, EmptyOodSetFailsAtLoadNamingTheSet) {
    const fs::path m = write_manifest({{"flat", nlohmann::json::array()}});
    RunConfig c = config("cbr", "empty");
    c.manifest_path = m;
    try {
        run_pipeline(c);
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "load");
        EXPECT_EQ(e.cause_kind(), "InputError");
        EXPECT_NE(std::string(e.what()).find("'flat'"), std::string::npos);
    }
    EXPECT_FALSE(fs::exists(dir_ / "empty"));
}

TEST_F(PipelineTest, MissingOodSetsFailAtLoad) {
    RunConfig c = config("cbr", "none");
    c.manifest_path = write_manifest(nlohmann::json::object());
    EXPECT_THROW(run_pipeline(c), StageError);
}

TEST_F(PipelineTest, WrongModelInputShapeIsShapeError) {
    const fs::path m = dir_ / "model";
    save_model(ModelSpec({3, 8, 8}, load_model(kFixtures / "model_cbr").blocks(),
                         load_model(kFixtures / "model_cbr").head()),
               m);
    RunConfig c = config("cbr", "shape");
    c.model_dir = m;
    try {
        run_pipeline(c);
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.cause_kind(), "ShapeError");
    }
}

TEST_F(PipelineTest, UnwritableOutputIsIoError) {
    write_text_file(dir_ / "file", "x");
    RunConfig c = config("cbr", "file/sub");
    try {
        run_pipeline(c);
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "write");
        EXPECT_EQ(e.cause_kind(), "IoError");
    }
}

TEST_F(PipelineTest, CliRunMatchesGolden) {
    const std::string args = "run --model " + (kFixtures / "model_cbr").string() + " --manifest " +
                             (kFixtures / "manifest.json").string() + " --seed 7 --out-dir " + (dir_ / "cli").string();
    ASSERT_EQ(run_cli(args, dir_ / "log.txt"), 0) << read_text_file(dir_ / "log.txt");
    expect_same_files(dir_ / "cli", kFixtures / "golden" / "run_seed7_cbr");
}

TEST_F(PipelineTest, CliStagesMatchTheRunCommand) {
    const fs::path golden = kFixtures / "golden" / "run_seed7_cbr";
    const std::string common =
        " --model " + (kFixtures / "model_cbr").string() + " --manifest " + (kFixtures / "manifest.json").string();
    const fs::path log = dir_ / "log.txt";
    ASSERT_EQ(run_cli("select-block" + common + " --seed 7 --out " + (dir_ / "sel.json").string(), log), 0)
        << read_text_file(log);
    EXPECT_EQ(read_text_file(dir_ / "sel.json"), read_text_file(golden / "selection.json"));
    ASSERT_EQ(run_cli("calibrate" + common + " --method featurenorm --selection " + (dir_ / "sel.json").string() +
                          " --out " + (dir_ / "det.json").string(),
                      log),
              0)
        << read_text_file(log);
    EXPECT_EQ(read_text_file(dir_ / "det.json"), read_text_file(golden / "detector.json"));
    ASSERT_EQ(run_cli("score" + common + " --detector " + (dir_ / "det.json").string() + " --out " +
                          (dir_ / "scores.json").string(),
                      log),
              0)
        << read_text_file(log);
    EXPECT_EQ(read_text_file(dir_ / "scores.json"), read_text_file(golden / "scores.json"));
    ASSERT_EQ(run_cli("evaluate --scores " + (dir_ / "scores.json").string() + " --out " +
                          (dir_ / "eval.json").string() + " --csv " + (dir_ / "eval.csv").string(),
                      log),
              0)
        << read_text_file(log);
    EXPECT_EQ(read_text_file(dir_ / "eval.json"), read_text_file(golden / "eval.json"));
    EXPECT_EQ(read_text_file(dir_ / "eval.csv"), read_text_file(golden / "eval.csv"));
}

TEST_F(PipelineTest, CliReportsErrorsWithStageAndKind) {
    const fs::path m = write_manifest({{"flat", nlohmann::json::array()}});
    const fs::path log = dir_ / "log.txt";
    const std::string args = "run --model " + (kFixtures / "model_cbr").string() + " --manifest " + m.string() +
                             " --seed 7 --out-dir " + (dir_ / "x").string();
    EXPECT_EQ(run_cli(args, log), 1);
    const std::string text = read_text_file(log);
    EXPECT_NE(text.find("[load] InputError"), std::string::npos) << text;
    EXPECT_NE(text.find("'flat'"), std::string::npos) << text;

    EXPECT_NE(run_cli("run --seed 7", log), 0);
    EXPECT_NE(run_cli("calibrate --method odin --model a --manifest b --out c", log), 0);
}

TEST_F(PipelineTest, CliMakeJigsawMatchesLibrary) {
    const fs::path log = dir_ / "log.txt";
    const fs::path probe = kFixtures / "probe.npy";
    ASSERT_EQ(run_cli("make-jigsaw --input " + probe.string() + " --seed 7 --index 3 --out " +
                          (dir_ / "j.npy").string(),
                      log),
              0)
        << read_text_file(log);
    EXPECT_EQ(read_tensor(dir_ / "j.npy"), make_jigsaw(read_tensor(probe), jigsaw_config_for_seed(7), 3));
}
