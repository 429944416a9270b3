#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fieldlens/cli.hpp"

namespace fieldlens::cli::detail {

struct Outcome {
    std::string summary;
    std::string json;
    std::vector<std::filesystem::path> artifacts;
};

struct Options {
    std::filesystem::path cwd;
    std::string project;

    // dataset
    std::string format;
    std::string from;
    std::string dims;
    std::string labels;
    std::string to;
    std::string out;
    std::string ratio = "6:2:2";
    std::optional<std::uint64_t> seed;
    double duration = 0;
    double fps = 0;
    double rate = 1;
    std::string video;

    // model
    std::optional<double> max_size_mb;
    std::optional<double> max_inference_ms;
    std::optional<double> min_map;
    std::size_t classes = 1;
    std::string task = "detection";
    std::string model;

    // train
    std::optional<std::string> base_weights;
    std::optional<std::uint64_t> max_steps;
    std::optional<double> loss_threshold;
    std::optional<std::size_t> window;
    std::optional<std::size_t> patience;
    std::string trainer = "directory";
    std::string losses;
    std::uint64_t stride = 1;
    std::string run;

    // app
    std::string template_id = "detection-camera";
    std::string name;
    std::optional<std::string> color;
    std::optional<std::string> icon;
    std::optional<std::string> logo;
    std::optional<std::string> info;
    bool expert = false;
    double threshold = 0.5;
    std::string platforms = "ios,android";
    std::string platform;
    std::string channel = "beta";
    std::string upload_endpoint;
    std::string package;
    std::string bundle;

    // serve
    std::optional<int> port;
    std::optional<std::string> storage;
    std::optional<double> media_cap_mb;
};

Result<Outcome> dataset_ingest(const Options& o);
Result<Outcome> dataset_convert(const Options& o);
Result<Outcome> dataset_split(const Options& o);
Result<Outcome> dataset_stats(const Options& o);
Result<Outcome> dataset_advise(const Options& o);
Result<Outcome> dataset_frames(const Options& o);
Result<Outcome> model_list(const Options& o);
Result<Outcome> model_select(const Options& o);
Result<Outcome> train_init(const Options& o);
Result<Outcome> train_start(const Options& o);
Result<Outcome> train_status(const Options& o);
Result<Outcome> train_package(const Options& o);
Result<Outcome> app_scaffold(const Options& o);
Result<Outcome> app_manifest(const Options& o);
Result<Outcome> app_deploy_lanes(const Options& o);
Result<Outcome> serve(const Options& o);

}  // namespace fieldlens::cli::detail
