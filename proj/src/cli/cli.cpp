#include <CLI11.hpp>

#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commands.hpp"

namespace fieldlens::cli {

using detail::Options;
using detail::Outcome;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::IoError:
        case ErrorCode::TrainerUnavailable: return kExitEnvironment;
        default: return kExitValidation;
    }
}

namespace {

using Handler = Result<Outcome> (*)(const Options&);

struct Builder {
    CLI::App& root;
    Options& o;
    Handler& chosen;

    CLI::App* group(const char* name, const char* about) {
        auto* g = root.add_subcommand(name, about);
        g->require_subcommand(1);
        g->fallthrough();
        return g;
    }

    CLI::App* leaf(CLI::App* parent, const char* name, const char* about, Handler h, bool project = true) {
        auto* cmd = parent->add_subcommand(name, about);
        cmd->fallthrough();
        cmd->callback([this, h] { chosen = h; });
        if (project) cmd->add_option("project", o.project, "Project directory")->required();
        return cmd;
    }
};

void define_dataset(Builder& b) {
    auto& o = b.o;
    auto* g = b.group("dataset", "Ingest, convert, split and inspect annotated images");

    auto* ingest = b.leaf(g, "ingest", "Validate an annotated dataset and store it in the project", detail::dataset_ingest);
    ingest->add_option("--format", o.format, "Source format")
        ->required()
        ->check(CLI::IsMember({"coco", "voc", "yolo", "mturk", "folders", "coco_json", "voc_xml", "yolo_txt",
                               "mturk_batch", "class_folders"}));
    ingest->add_option("--from", o.from, "Source file or directory")->required();
    ingest->add_option("--dims", o.dims, "CSV of media_id,width,height for formats without image sizes");
    ingest->add_option("--labels", o.labels, "Class names, one per line, fixing class order (voc)");

    auto* convert = b.leaf(g, "convert", "Export the project dataset in another format", detail::dataset_convert);
    convert->add_option("--to", o.to, "Target format")->required()->check(
        CLI::IsMember({"coco", "voc", "yolo", "coco_json", "voc_xml", "yolo_txt"}));
    convert->add_option("--out", o.out, "Output directory");

    auto* split = b.leaf(g, "split", "Seeded stratified train/test/eval split", detail::dataset_split);
    split->add_option("--ratio", o.ratio, "train:test:eval")->capture_default_str();
    split->add_option("--seed", o.seed, "Seed; a random one is generated and recorded when omitted");

    b.leaf(g, "stats", "Per-class image and box counts", detail::dataset_stats);
    b.leaf(g, "advise", "Dataset sufficiency per class", detail::dataset_advise);

    auto* frames = b.leaf(g, "frames", "Plan or extract frames from a video", detail::dataset_frames);
    frames->add_option("--duration", o.duration, "Video duration in seconds")->required();
    frames->add_option("--fps", o.fps, "Video frame rate")->required();
    frames->add_option("--rate", o.rate, "Frames per second to extract")->capture_default_str();
    frames->add_option("--video", o.video, "Video file; extracts frames with ffmpeg");
    frames->add_option("--out", o.out, "Frame output directory");
}

void define_model(Builder& b) {
    auto& o = b.o;
    auto* g = b.group("model", "Mobile model registry");
    b.leaf(g, "list", "Show the registry", detail::model_list, false);
    auto* select = b.leaf(g, "select", "Pick the most accurate model meeting the constraints", detail::model_select, false);
    select->add_option("--max-size-mb", o.max_size_mb, "Largest model file");
    select->add_option("--max-inference-ms", o.max_inference_ms, "Slowest inference time");
    select->add_option("--min-map", o.min_map, "Lowest COCO mAP");
    select->add_option("--classes", o.classes, "Number of classes")->capture_default_str();
    select->add_option("--task", o.task, "Model task")
        ->capture_default_str()
        ->check(CLI::IsMember({"detection", "classification", "segmentation"}));
}

void define_train(Builder& b) {
    auto& o = b.o;
    auto* g = b.group("train", "Fine-tune a registry model on the project dataset");

    auto* init = b.leaf(g, "init", "Write the training config from the dataset and split", detail::train_init);
    init->add_option("--model", o.model, "Registry model name")->required();
    init->add_option("--base-weights", o.base_weights, "Pretrained checkpoint reference");
    init->add_option("--max-steps", o.max_steps, "Step budget");
    init->add_option("--loss-threshold", o.loss_threshold, "Convergence loss threshold");
    init->add_option("--window", o.window, "Convergence window in steps");
    init->add_option("--patience", o.patience, "Consecutive windows below the threshold");

    auto* start = b.leaf(g, "start", "Launch a run", detail::train_start);
    start->add_option("--trainer", o.trainer, "Trainer adapter")
        ->capture_default_str()
        ->check(CLI::IsMember({"directory", "mock"}));
    start->add_option("--losses", o.losses, "Loss curve for the mock trainer, one value per line");
    start->add_option("--stride", o.stride, "Steps between mock loss reports")->capture_default_str();

    auto* status = b.leaf(g, "status", "Refresh and show runs", detail::train_status);
    status->add_option("--run", o.run, "Run id; all runs when omitted");

    auto* package = b.leaf(g, "package", "Package a finished run for the app", detail::train_package);
    package->add_option("--run", o.run, "Run id")->required();
}

void define_app(Builder& b) {
    auto& o = b.o;
    auto* g = b.group("app", "Generate field apps from templates");

    auto* scaffold = b.leaf(g, "scaffold", "Instantiate a template into a bundle descriptor", detail::app_scaffold);
    scaffold->add_option("--template", o.template_id, "Template id")->capture_default_str();
    scaffold->add_option("--name", o.name, "App name")->required();
    scaffold->add_option("--color", o.color, "GUI color, #RRGGBB");
    scaffold->add_option("--icon", o.icon, "Icon asset");
    scaffold->add_option("--logo", o.logo, "Logo asset");
    scaffold->add_option("--info", o.info, "Info panel text");
    scaffold->add_flag("--expert", o.expert, "Enable expert mode");
    scaffold->add_option("--threshold", o.threshold, "Confidence threshold")->capture_default_str();
    scaffold->add_option("--platforms", o.platforms, "Comma-separated target platforms")->capture_default_str();
    scaffold->add_option("--upload-endpoint", o.upload_endpoint, "Observation upload URL")->required();
    auto* run = scaffold->add_option("--run", o.run, "Run whose package.json to embed");
    scaffold->add_option("--package", o.package, "Model package file")->excludes(run);

    auto* manifest = b.leaf(g, "manifest", "Emit a build manifest", detail::app_manifest);
    manifest->add_option("--bundle", o.bundle, "Bundle id")->required();
    manifest->add_option("--platform", o.platform, "Platform")->required()->check(CLI::IsMember({"ios", "android"}));

    auto* lanes = b.leaf(g, "deploy-lanes", "Emit deployment lane steps", detail::app_deploy_lanes);
    lanes->add_option("--bundle", o.bundle, "Bundle id")->required();
    lanes->add_option("--platform", o.platform, "Platform")->required()->check(CLI::IsMember({"ios", "android"}));
    lanes->add_option("--channel", o.channel, "Release channel")
        ->capture_default_str()
        ->check(CLI::IsMember({"beta", "release"}));
}

void define_serve(Builder& b) {
    auto& o = b.o;
    auto* serve = b.root.add_subcommand("serve", "Run the observation service until SIGINT or SIGTERM");
    serve->fallthrough();
    serve->callback([&b] { b.chosen = detail::serve; });
    serve->add_option("--port", o.port, "Listen port (FIELDLENS_PORT)")->check(CLI::Range(0, 65535));
    serve->add_option("--storage", o.storage, "Storage root (FIELDLENS_STORAGE_ROOT)");
    serve->add_option("--media-cap-mb", o.media_cap_mb, "Media size cap (FIELDLENS_MEDIA_CAP_MB)")
        ->check(CLI::PositiveNumber);
}

std::string error_json(const Error& e) {
    nlohmann::ordered_json j{{"error",
                              {{"code", to_string(e.code)},
                               {"message", e.message},
                               {"media_id", e.media_id ? nlohmann::ordered_json(*e.media_id) : nlohmann::ordered_json(nullptr)}}}};
    return j.dump(2) + "\n";
}

}  // namespace

CommandResult execute(const std::vector<std::string>& argv, const std::filesystem::path& working_dir) {
    CommandResult result;
    Options o;
    o.cwd = working_dir;
    Handler chosen = nullptr;

    CLI::App app("Field data to trained mobile model to deployed app", argv.empty() ? "fieldlens" : argv.front());
    app.require_subcommand(1);
    app.add_flag("--json", result.json_requested, "Print the machine-readable result");
    Builder b{app, o, chosen};
    define_dataset(b);
    define_model(b);
    define_train(b);
    define_app(b);
    define_serve(b);

    std::vector<const char*> args;
    for (const auto& a : argv) args.push_back(a.c_str());
    if (args.empty()) args.push_back("fieldlens");
    try {
        app.parse(static_cast<int>(args.size()), args.data());
    } catch (const CLI::ParseError& e) {
        std::ostringstream out, err;
        result.exit_code = app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
        result.summary = out.str();
        result.diagnostics = err.str();
        if (result.exit_code == kExitUsage) {
            const auto* failed = &app;
            for (auto* sub = failed; !sub->get_subcommands().empty();) failed = sub = sub->get_subcommands().front();
            result.diagnostics += failed->help();
        }
        result.json = result.summary;
        return result;
    }
    if (!chosen) {
        result.exit_code = kExitUsage;
        result.diagnostics = app.help();
        return result;
    }

    auto outcome = chosen(o);
    if (!outcome) {
        result.error = outcome.error();
        result.exit_code = exit_code_for(outcome.error().code);
        result.json = error_json(outcome.error());
        result.diagnostics = std::string(to_string(outcome.error().code)) + ": " + outcome.error().message;
        if (outcome.error().media_id) result.diagnostics += " [" + *outcome.error().media_id + "]";
        result.diagnostics += "\n";
        return result;
    }
    result.summary = std::move(outcome->summary);
    result.json = std::move(outcome->json);
    result.artifacts = std::move(outcome->artifacts);
    return result;
}

}  // namespace fieldlens::cli
