#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fieldlens/annotations.hpp"
#include "fieldlens/cli.hpp"
#include "fieldlens/dataset.hpp"
#include "fieldlens/digest.hpp"
#include "fieldlens/models.hpp"

namespace fieldlens {
namespace {

namespace fs = std::filesystem;
using cli::CommandResult;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("fieldlens-cli-" + random_hex(6));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    CommandResult run(std::vector<std::string> args) {
        args.insert(args.begin(), "fieldlens");
        return cli::execute(args, dir_);
    }

    CommandResult ingest_rip() {
        return run({"dataset", "ingest", "proj", "--format", "coco", "--from",
                    (fs::path(FIELDLENS_FIXTURES) / "rip/annotations.json").string()});
    }

    domain::AnnotationSet stored_set() {
        auto set = annotations::parse_coco(slurp(dir_ / "proj/dataset/annotations.json"));
        if (!set.ok()) std::abort();
        return *set;
    }

    fs::path dir_;
};

TEST_F(CliTest, NoArgumentsIsUsageError) {
    auto r = run({});
    EXPECT_EQ(r.exit_code, cli::kExitUsage);
    EXPECT_FALSE(r.diagnostics.empty());
}

TEST_F(CliTest, UnknownCommandIsUsageError) {
    EXPECT_EQ(run({"dataset", "shuffle", "proj"}).exit_code, cli::kExitUsage);
    EXPECT_EQ(run({"teleport"}).exit_code, cli::kExitUsage);
}

TEST_F(CliTest, MissingRequiredOptionPrintsSynopsis) {
    auto r = run({"dataset", "ingest", "proj", "--format", "coco"});
    EXPECT_EQ(r.exit_code, cli::kExitUsage);
    EXPECT_NE(r.diagnostics.find("--from"), std::string::npos);
    EXPECT_NE(r.diagnostics.find("Usage"), std::string::npos);
}

TEST_F(CliTest, BadEnumValueIsUsageError) {
    EXPECT_EQ(run({"model", "select", "--task", "pose"}).exit_code, cli::kExitUsage);
}

TEST_F(CliTest, HelpExitsZero) {
    auto r = run({"--help"});
    EXPECT_EQ(r.exit_code, cli::kExitOk);
    EXPECT_NE(r.summary.find("dataset"), std::string::npos);
}

TEST_F(CliTest, IngestStoresDataset) {
    auto r = ingest_rip();
    ASSERT_EQ(r.exit_code, 0) << r.diagnostics;
    EXPECT_TRUE(fs::exists(dir_ / "proj/dataset/annotations.json"));
    EXPECT_TRUE(fs::exists(dir_ / "proj/dataset/report.json"));
    auto original = annotations::parse_coco(slurp(fs::path(FIELDLENS_FIXTURES) / "rip/annotations.json"));
    ASSERT_TRUE(original.ok());
    EXPECT_TRUE(domain::equivalent(*original, stored_set(), 1e-9));
    auto j = nlohmann::json::parse(r.json);
    EXPECT_EQ(j["images"], 20);
    EXPECT_EQ(j["classes"], nlohmann::json::array({"rip", "sandbar"}));
}

TEST_F(CliTest, IngestRejectsInvalidDataset) {
    auto text = slurp(fs::path(FIELDLENS_FIXTURES) / "rip/annotations.json");
    auto j = nlohmann::json::parse(text);
    j["annotations"][0]["bbox"] = {1200, 10, 500, 50};
    spit(dir_ / "bad.json", j.dump());
    auto r = run({"--json", "dataset", "ingest", "proj", "--format", "coco", "--from", "bad.json"});
    EXPECT_EQ(r.exit_code, cli::kExitValidation);
    ASSERT_TRUE(r.error.has_value());
    EXPECT_EQ(r.error->code, ErrorCode::BoxOutOfBounds);
    EXPECT_EQ(nlohmann::json::parse(r.stdout_text())["error"]["code"], "BOX_OUT_OF_BOUNDS");
    EXPECT_FALSE(fs::exists(dir_ / "proj/dataset/annotations.json"));
}

TEST_F(CliTest, IngestMissingSourceIsEnvironmentError) {
    auto r = run({"dataset", "ingest", "proj", "--format", "coco", "--from", "nowhere.json"});
    EXPECT_EQ(r.exit_code, cli::kExitEnvironment);
}

TEST_F(CliTest, IngestMturkWithDims) {
    const fs::path mturk = fs::path(FIELDLENS_FIXTURES) / "mturk";
    auto r = run({"dataset", "ingest", "proj", "--format", "mturk", "--from", (mturk / "batch_absolute.csv").string(),
                  "--dims", (mturk / "dims.csv").string()});
    ASSERT_EQ(r.exit_code, 0) << r.diagnostics;
    auto set = stored_set();
    EXPECT_EQ(set.label_map.classes, (std::vector<std::string>{"bottle", "can"}));
    ASSERT_EQ(set.images.size(), 3u);
    EXPECT_EQ(set.boxes_of("img_002.jpg").size(), 2u);
    EXPECT_FALSE(set.labeled("img_003.jpg"));
}

TEST_F(CliTest, CommandsBeforeIngestExplainOrder) {
    auto r = run({"dataset", "stats", "proj"});
    EXPECT_EQ(r.exit_code, cli::kExitValidation);
    EXPECT_NE(r.diagnostics.find("dataset ingest"), std::string::npos);
}

TEST_F(CliTest, ConvertWritesYolo) {
    ASSERT_EQ(ingest_rip().exit_code, 0);
    auto r = run({"dataset", "convert", "proj", "--to", "yolo", "--out", "yolo"});
    ASSERT_EQ(r.exit_code, 0) << r.diagnostics;
    EXPECT_TRUE(fs::exists(dir_ / "yolo/classes.txt"));
    EXPECT_EQ(r.artifacts.size(), 21u);
}

TEST_F(CliTest, SplitWithSeedWritesManifests) {
    ASSERT_EQ(ingest_rip().exit_code, 0);
    auto r = run({"--json", "dataset", "split", "proj", "--ratio", "6:2:2", "--seed", "42"});
    ASSERT_EQ(r.exit_code, 0) << r.diagnostics;
    for (const char* f : {"train.txt", "test.txt", "eval.txt", "split.json"})
        EXPECT_TRUE(fs::exists(dir_ / "proj/splits" / f)) << f;
    auto expected = dataset::split_dataset(stored_set(), *dataset::SplitRatio::parse("6:2:2"), 42);
    ASSERT_TRUE(expected.ok());
    EXPECT_EQ(r.stdout_text(), dataset::split_sidecar_json(*expected));
    EXPECT_EQ(slurp(dir_ / "proj/splits/split.json"), r.json);
}

TEST_F(CliTest, SplitWithoutSeedRecordsIt) {
    ASSERT_EQ(ingest_rip().exit_code, 0);
    auto r = run({"dataset", "split", "proj"});
    ASSERT_EQ(r.exit_code, 0) << r.diagnostics;
    EXPECT_NE(r.summary.find("random"), std::string::npos);
    const auto seed = nlohmann::json::parse(r.json)["seed"].get<std::uint64_t>();
    const auto first = slurp(dir_ / "proj/splits/train.txt");
    auto again = run({"dataset", "split", "proj", "--seed", std::to_string(seed)});
    ASSERT_EQ(again.exit_code, 0);
    EXPECT_EQ(slurp(dir_ / "proj/splits/train.txt"), first);
    EXPECT_EQ(again.json, r.json);
}

TEST_F(CliTest, SplitRejectsBadRatio) {
    ASSERT_EQ(ingest_rip().exit_code, 0);
    auto r = run({"dataset", "split", "proj", "--ratio", "6:0:-1", "--seed", "1"});
    EXPECT_EQ(r.exit_code, cli::kExitValidation);
    EXPECT_EQ(r.error->code, ErrorCode::InvalidRatio);
}

TEST_F(CliTest, StatsJsonMatchesModule) {
    ASSERT_EQ(ingest_rip().exit_code, 0);
    auto r = run({"dataset", "stats", "proj", "--json"});
    ASSERT_EQ(r.exit_code, 0) << r.diagnostics;
    auto set = stored_set();
    EXPECT_EQ(r.stdout_text(), dataset::stats_json(dataset::dataset_stats(set), &set.label_map));
}

TEST_F(CliTest, AdviseReportsInsufficient) {
    domain::AnnotationSet set;
    set.label_map.classes = {"rip"};
    for (int i = 0; i < 120; ++i) {
        auto id = "img_" + std::to_string(i) + ".jpg";
        set.images.push_back({id, 640, 480});
        set.boxes[id] = {{10, 10, 100, 100, 0}};
    }
    auto docs = annotations::export_set(set, annotations::FormatTag::coco_json);
    ASSERT_TRUE(docs.ok());
    spit(dir_ / "small.json", docs->front().text);
    ASSERT_EQ(run({"dataset", "ingest", "proj", "--format", "coco", "--from", "small.json"}).exit_code, 0);
    auto r = run({"dataset", "advise", "proj"});
    ASSERT_EQ(r.exit_code, 0) << r.diagnostics;
    EXPECT_NE(r.summary.find("rip: insufficient"), std::string::npos);
    auto expected = dataset::advise_sufficiency(dataset::dataset_stats(stored_set()), &set.label_map);
    EXPECT_EQ(run({"--json", "dataset", "advise", "proj"}).stdout_text(), dataset::advisory_json(expected, &set.label_map));
}

TEST_F(CliTest, ModelSelectPrintsName) {
    auto r = run({"model", "select", "--max-size-mb", "10", "--classes", "2"});
    ASSERT_EQ(r.exit_code, 0) << r.diagnostics;
    EXPECT_EQ(r.summary.substr(0, r.summary.find('\n')), "EfficientDet D1");
    EXPECT_EQ(nlohmann::json::parse(r.json)["model"]["name"], "EfficientDet D1");
}

TEST_F(CliTest, ModelSelectInfeasible) {
    auto r = run({"--json", "model", "select", "--min-map", "60"});
    EXPECT_EQ(r.exit_code, cli::kExitValidation);
    EXPECT_EQ(nlohmann::json::parse(r.stdout_text())["error"]["code"], "NO_FEASIBLE_MODEL");
}

TEST_F(CliTest, ModelListMatchesRegistry) {
    auto r = run({"model", "list", "--json"});
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.stdout_text(), models::registry_json(models::default_registry()));
}

TEST_F(CliTest, FramePlanWithoutVideo) {
    auto r = run({"dataset", "frames", "proj", "--duration", "3", "--fps", "30", "--rate", "2"});
    ASSERT_EQ(r.exit_code, 0) << r.diagnostics;
    auto plan = dataset::plan_frame_extraction(3, 30, 2);
    ASSERT_TRUE(plan.ok());
    EXPECT_EQ(r.json, dataset::frame_plan_json(*plan));
    EXPECT_EQ(plan->timestamps_s.size(), 6u);
}

TEST_F(CliTest, FramesWithoutDecoderIsEnvironmentError) {
    spit(dir_ / "clip.mp4", "not really a video");
    const std::string saved = std::getenv("PATH") ? std::getenv("PATH") : "";
    ::setenv("PATH", "", 1);
    auto r = run({"dataset", "frames", "proj", "--duration", "2", "--fps", "30", "--video", "clip.mp4"});
    ::setenv("PATH", saved.c_str(), 1);
    EXPECT_EQ(r.exit_code, cli::kExitEnvironment);
    EXPECT_NE(r.diagnostics.find("ffmpeg"), std::string::npos);
}

TEST_F(CliTest, TrainInitNeedsSplit) {
    ASSERT_EQ(ingest_rip().exit_code, 0);
    auto r = run({"train", "init", "proj", "--model", "EfficientDet D1"});
    EXPECT_EQ(r.exit_code, cli::kExitValidation);
    EXPECT_EQ(r.error->code, ErrorCode::MissingSplit);
}

TEST_F(CliTest, TrainInitUnknownModel) {
    ASSERT_EQ(ingest_rip().exit_code, 0);
    ASSERT_EQ(run({"dataset", "split", "proj", "--seed", "1"}).exit_code, 0);
    EXPECT_EQ(run({"train", "init", "proj", "--model", "ResNet 9000"}).exit_code, cli::kExitValidation);
}

TEST_F(CliTest, DirectoryTrainerRunStaysOpen) {
    ASSERT_EQ(ingest_rip().exit_code, 0);
    ASSERT_EQ(run({"dataset", "split", "proj", "--seed", "1"}).exit_code, 0);
    ASSERT_EQ(run({"train", "init", "proj", "--model", "EfficientDet D1"}).exit_code, 0);
    auto r = run({"train", "start", "proj"});
    ASSERT_EQ(r.exit_code, 0) << r.diagnostics;
    const auto id = nlohmann::json::parse(r.json)["run_id"].get<std::string>();
    EXPECT_TRUE(fs::exists(dir_ / "proj/runs" / id / "dataset.json"));

    spit(dir_ / "proj/runs" / id / "loss.log", "1\t0.9\n2\t0.8\n");
    auto status = run({"train", "status", "proj", "--run", id});
    ASSERT_EQ(status.exit_code, 0) << status.diagnostics;
    auto j = nlohmann::json::parse(status.json);
    EXPECT_EQ(j["status"], "running");
    EXPECT_EQ(j["loss_history"].size(), 2u);

    auto pkg = run({"train", "package", "proj", "--run", id});
    EXPECT_EQ(pkg.exit_code, cli::kExitValidation);
    EXPECT_EQ(pkg.error->code, ErrorCode::RunNotFinished);
}

TEST_F(CliTest, PipelineToManifest) {
    ASSERT_EQ(ingest_rip().exit_code, 0);
    ASSERT_EQ(run({"dataset", "split", "proj", "--seed", "7"}).exit_code, 0);
    ASSERT_EQ(run({"train", "init", "proj", "--model", "EfficientDet D1"}).exit_code, 0);
    auto started = run({"train", "start", "proj", "--trainer", "mock"});
    ASSERT_EQ(started.exit_code, 0) << started.diagnostics;
    auto run_json = nlohmann::json::parse(started.json);
    EXPECT_EQ(run_json["status"], "converged");
    const auto id = run_json["run_id"].get<std::string>();

    auto pkg = run({"train", "package", "proj", "--run", id});
    ASSERT_EQ(pkg.exit_code, 0) << pkg.diagnostics;
    EXPECT_TRUE(fs::exists(dir_ / "proj/runs" / id / "package.json"));

    auto scaffold = run({"app", "scaffold", "proj", "--name", "Rip Watch", "--color", "#FF0000", "--run", id,
                         "--upload-endpoint", "https://field.example.org/projects/rip/observations"});
    ASSERT_EQ(scaffold.exit_code, 0) << scaffold.diagnostics;
    const auto bundle = nlohmann::json::parse(scaffold.json)["bundle_id"].get<std::string>();

    auto ios = run({"app", "manifest", "proj", "--bundle", bundle, "--platform", "ios"});
    ASSERT_EQ(ios.exit_code, 0) << ios.diagnostics;
    EXPECT_EQ(slurp(dir_ / "proj/bundles" / bundle / "manifest-ios.json"), ios.json);
    EXPECT_EQ(run({"app", "manifest", "proj", "--bundle", bundle, "--platform", "ios"}).json, ios.json);

    auto lanes = run({"app", "deploy-lanes", "proj", "--bundle", bundle, "--platform", "android", "--channel", "release"});
    ASSERT_EQ(lanes.exit_code, 0) << lanes.diagnostics;
    EXPECT_NE(lanes.summary.find("upload_to_play_store"), std::string::npos);
    EXPECT_NE(lanes.json.find("production"), std::string::npos);
}

TEST_F(CliTest, ScaffoldWithoutModelNeedsExpertMode) {
    auto r = run({"app", "scaffold", "proj", "--name", "Rip Watch", "--upload-endpoint", "https://x.example.org/u"});
    EXPECT_EQ(r.exit_code, cli::kExitValidation);
    auto ok = run({"app", "scaffold", "proj", "--name", "Rip Watch", "--expert", "--upload-endpoint",
                   "https://x.example.org/u"});
    EXPECT_EQ(ok.exit_code, 0) << ok.diagnostics;
}

TEST_F(CliTest, UnknownBundle) {
    auto r = run({"app", "manifest", "proj", "--bundle", "nope", "--platform", "ios"});
    EXPECT_EQ(r.exit_code, cli::kExitValidation);
    EXPECT_EQ(r.error->code, ErrorCode::UnknownBundle);
}

TEST_F(CliTest, TrainerUnavailableIsEnvironmentError) {
    EXPECT_EQ(cli::exit_code_for(ErrorCode::TrainerUnavailable), cli::kExitEnvironment);
    EXPECT_EQ(cli::exit_code_for(ErrorCode::IoError), cli::kExitEnvironment);
    EXPECT_EQ(cli::exit_code_for(ErrorCode::DegenerateBox), cli::kExitValidation);
}

}  // namespace
}  // namespace fieldlens
