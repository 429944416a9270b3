#include "commands.hpp"

#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <pthread.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "fieldlens/annotations.hpp"
#include "fieldlens/appforge.hpp"
#include "fieldlens/dataset.hpp"
#include "fieldlens/digest.hpp"
#include "fieldlens/models_json.hpp"
#include "fieldlens/service_http.hpp"
#include "fieldlens/text.hpp"
#include "fieldlens/training.hpp"

namespace fieldlens::cli::detail {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

fs::path at(const Options& o, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : o.cwd / path;
}

fs::path project_dir(const Options& o) { return at(o, o.project); }
fs::path dataset_file(const Options& o) { return project_dir(o) / "dataset" / "annotations.json"; }
fs::path splits_dir(const Options& o) { return project_dir(o) / "splits"; }
fs::path runs_dir(const Options& o) { return project_dir(o) / "runs"; }
fs::path bundle_dir(const Options& o, const std::string& id) { return project_dir(o) / "bundles" / id; }

Result<std::string> read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return make_error(ErrorCode::IoError, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Result<void> write_text(const fs::path& p, std::string_view text, Outcome& outcome) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out.flush()) return make_error(ErrorCode::IoError, "cannot write " + p.string());
    outcome.artifacts.push_back(p);
    return {};
}

Result<domain::AnnotationSet> load_dataset(const Options& o) {
    const auto file = dataset_file(o);
    if (!fs::exists(file))
        return make_error(ErrorCode::EmptyDataset, "no dataset at " + file.string() + "; run `dataset ingest` first");
    auto text = read_text(file);
    if (!text) return text.error();
    return annotations::parse_coco(*text);
}

Result<annotations::ImageDims> load_dims(const Options& o) {
    annotations::ImageDims dims;
    if (o.dims.empty()) return dims;
    auto text = read_text(at(o, o.dims));
    if (!text) return text.error();
    auto table = annotations::parse_csv(*text);
    if (!table) return table.error();
    auto col = [&](const char* name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < table->header.size(); ++i)
            if (fold_key(table->header[i]) == name) return i;
        return std::nullopt;
    };
    auto id = col("media_id"), w = col("width"), h = col("height");
    if (!id || !w || !h) return make_error(ErrorCode::ParseError, "dimension table needs media_id, width and height columns");
    for (const auto& row : table->rows) {
        double wv = 0, hv = 0;
        if (row.size() <= std::max({*id, *w, *h}) || !parse_real(row[*w], wv) || !parse_real(row[*h], hv))
            return make_error(ErrorCode::ParseError, "bad dimension row in " + o.dims);
        dims[trim(row[*id])] = {static_cast<int>(wv), static_cast<int>(hv)};
    }
    return dims;
}

Result<std::vector<annotations::Document>> documents_in(const fs::path& dir, const std::string& ext) {
    std::vector<annotations::Document> docs;
    std::error_code ec;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir, ec))
        if (e.is_regular_file() && e.path().extension() == ext) files.push_back(e.path());
    if (ec) return make_error(ErrorCode::IoError, "cannot list " + dir.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        auto text = read_text(f);
        if (!text) return text.error();
        docs.push_back({f.filename().string(), std::move(*text)});
    }
    return docs;
}

Result<domain::AnnotationSet> load_source(const Options& o) {
    auto tag = annotations::parse_format(o.format);
    if (!tag) return make_error(ErrorCode::ParseError, "unknown format '" + o.format + "'");
    const auto from = at(o, o.from);
    if (!fs::exists(from)) return make_error(ErrorCode::IoError, from.string() + " does not exist");
    auto dims = load_dims(o);
    if (!dims) return dims.error();

    switch (*tag) {
        case annotations::FormatTag::coco_json: {
            auto text = read_text(from);
            if (!text) return text.error();
            return annotations::parse_coco(*text);
        }
        case annotations::FormatTag::voc_xml: {
            auto docs = documents_in(from, ".xml");
            if (!docs) return docs.error();
            if (o.labels.empty()) return annotations::parse_voc(*docs);
            auto text = read_text(at(o, o.labels));
            if (!text) return text.error();
            domain::LabelMap hint;
            for (const auto& line : split(*text, '\n'))
                if (!trim(line).empty()) hint.classes.push_back(trim(line));
            return annotations::parse_voc(*docs, &hint);
        }
        case annotations::FormatTag::yolo_txt: {
            auto docs = documents_in(from, ".txt");
            if (!docs) return docs.error();
            std::vector<domain::ImageRecord> images;
            for (const auto& [id, wh] : *dims) images.push_back({id, wh.first, wh.second});
            return annotations::parse_yolo_documents(*docs, images);
        }
        case annotations::FormatTag::mturk_batch: {
            auto text = read_text(from);
            if (!text) return text.error();
            auto table = annotations::parse_csv(*text);
            if (!table) return table.error();
            return annotations::import_mturk(*table, {}, *dims);
        }
        case annotations::FormatTag::class_folders: {
            std::map<std::string, std::vector<annotations::FolderEntry>> listing;
            std::error_code ec;
            for (const auto& cls : fs::directory_iterator(from, ec)) {
                if (!cls.is_directory()) continue;
                auto& entries = listing[cls.path().filename().string()];
                for (const auto& img : fs::directory_iterator(cls.path(), ec)) {
                    if (!img.is_regular_file()) continue;
                    auto id = img.path().filename().string();
                    auto d = dims->find(id);
                    if (d == dims->end())
                        return Error{ErrorCode::MissingDims, "no dimensions for image; pass --dims", id};
                    entries.push_back({id, d->second.first, d->second.second});
                }
                std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.media_id < b.media_id; });
            }
            if (ec) return make_error(ErrorCode::IoError, "cannot list " + from.string() + ": " + ec.message());
            return annotations::ingest_classification_folders(listing);
        }
    }
    return make_error(ErrorCode::UnsupportedExport, "unsupported format");
}

ordered_json issues_json(const std::vector<domain::Issue>& issues) {
    auto a = ordered_json::array();
    for (const auto& i : issues)
        a.push_back({{"code", to_string(i.code)},
                     {"media_id", i.media_id ? ordered_json(*i.media_id) : ordered_json(nullptr)},
                     {"message", i.message}});
    return a;
}

std::string class_list(const domain::LabelMap& m) {
    std::string out;
    for (std::size_t i = 0; i < m.size(); ++i) out += (i ? ", " : "") + m.classes[i];
    return out;
}

std::string run_line(const training::TrainingRun& run) {
    std::string line = run.run_id + ": " + std::string(training::to_string(run.status));
    if (run.finished_at_step) line += " at step " + std::to_string(*run.finished_at_step);
    line += " (" + std::to_string(run.loss_history.size()) + " loss reports";
    if (!run.loss_history.empty()) line += ", last " + format_real(run.loss_history.back().loss);
    line += ")";
    if (run.failure) line += ": " + *run.failure;
    return line;
}

Result<appforge::AppBundleDescriptor> load_descriptor(const Options& o) {
    const auto file = bundle_dir(o, o.bundle) / "descriptor.json";
    if (o.bundle.empty() || !fs::exists(file))
        return make_error(ErrorCode::UnknownBundle, "no bundle '" + o.bundle + "' in " + project_dir(o).string());
    auto text = read_text(file);
    if (!text) return text.error();
    return appforge::parse_descriptor(*text);
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out.push_back(c);
    }
    return out + "'";
}

std::optional<fs::path> find_on_path(const std::string& tool) {
    const char* path = std::getenv("PATH");
    if (!path) return std::nullopt;
    for (const auto& dir : split(path, ':')) {
        if (dir.empty()) continue;
        auto candidate = fs::path(dir) / tool;
        if (::access(candidate.c_str(), X_OK) == 0) return candidate;
    }
    return std::nullopt;
}

std::vector<double> default_mock_curve() {
    std::vector<double> losses;
    for (int k = 0; k < 400; ++k) losses.push_back(0.05 + 0.95 * std::exp(-k / 15.0));
    return losses;
}

}  // namespace

Result<Outcome> dataset_ingest(const Options& o) {
    auto set = load_source(o);
    if (!set) return set.error();
    auto report = domain::validate_annotation_set(*set);
    ordered_json j{{"task", domain::to_string(set->task)},
                   {"images", set->images.size()},
                   {"classes", set->label_map.classes},
                   {"errors", issues_json(report.errors)},
                   {"warnings", issues_json(report.warnings)}};
    if (!report.ok()) {
        auto e = report.first_error();
        e.message = std::to_string(report.errors.size()) + " validation error(s); first: " + e.message;
        return e;
    }
    auto docs = annotations::export_set(*set, annotations::FormatTag::coco_json);
    if (!docs) return docs.error();
    Outcome out;
    if (auto ok = write_text(dataset_file(o), docs->front().text, out); !ok) return ok.error();
    out.json = j.dump(2) + "\n";
    if (auto ok = write_text(project_dir(o) / "dataset" / "report.json", out.json, out); !ok) return ok.error();
    out.summary = "ingested " + std::to_string(set->images.size()) + " images, " + std::to_string(set->label_map.size()) +
                  " classes (" + class_list(set->label_map) + "), " + std::to_string(report.warnings.size()) +
                  " warning(s)\n";
    return out;
}

Result<Outcome> dataset_convert(const Options& o) {
    auto set = load_dataset(o);
    if (!set) return set.error();
    auto tag = annotations::parse_format(o.to);
    if (!tag) return make_error(ErrorCode::UnsupportedExport, "unknown format '" + o.to + "'");
    auto docs = annotations::export_set(*set, *tag);
    if (!docs) return docs.error();
    const auto dir = o.out.empty() ? project_dir(o) / "export" / std::string(annotations::to_string(*tag)) : at(o, o.out);
    Outcome out;
    auto names = ordered_json::array();
    for (const auto& d : *docs) {
        if (auto ok = write_text(dir / d.name, d.text, out); !ok) return ok.error();
        names.push_back(d.name);
    }
    out.json = ordered_json{{"format", annotations::to_string(*tag)}, {"directory", dir.string()}, {"documents", names}}.dump(2) + "\n";
    out.summary = "wrote " + std::to_string(docs->size()) + " " + std::string(annotations::to_string(*tag)) +
                  " document(s) to " + dir.string() + "\n";
    return out;
}

Result<Outcome> dataset_split(const Options& o) {
    auto set = load_dataset(o);
    if (!set) return set.error();
    auto ratio = dataset::SplitRatio::parse(o.ratio);
    if (!ratio) return ratio.error();
    const bool random_seed = !o.seed;
    const std::uint64_t seed = o.seed ? *o.seed : std::stoull(random_hex(8), nullptr, 16) & ((1ull << 53) - 1);
    auto split = dataset::split_dataset(*set, *ratio, seed);
    if (!split) return split.error();
    if (auto ok = dataset::write_split_manifests(*split, splits_dir(o)); !ok) return ok.error();
    Outcome out;
    for (const char* f : {"train.txt", "test.txt", "eval.txt", "split.json"}) out.artifacts.push_back(splits_dir(o) / f);
    out.json = dataset::split_sidecar_json(*split);
    out.summary = "split " + std::to_string(split->size()) + " images " + ratio->to_string() + " with seed " +
                  std::to_string(seed) + (random_seed ? " (random; recorded in split.json)" : "") + ": train " +
                  std::to_string(split->train.size()) + ", test " + std::to_string(split->test.size()) + ", eval " +
                  std::to_string(split->eval.size()) + "\n";
    return out;
}

Result<Outcome> dataset_stats(const Options& o) {
    auto set = load_dataset(o);
    if (!set) return set.error();
    auto stats = dataset::dataset_stats(*set);
    Outcome out;
    out.json = dataset::stats_json(stats, &set->label_map);
    out.summary = std::to_string(stats.total_images) + " images, " + std::to_string(stats.unlabeled_images) + " unlabeled\n";
    for (const auto& [id, n] : stats.per_class_image_count)
        out.summary += "  " + set->label_map.classes[id] + ": " + std::to_string(n) + " images, " +
                       std::to_string(stats.per_class_box_count[id]) + " boxes\n";
    return out;
}

Result<Outcome> dataset_advise(const Options& o) {
    auto set = load_dataset(o);
    if (!set) return set.error();
    auto report = dataset::advise_sufficiency(dataset::dataset_stats(*set), &set->label_map);
    Outcome out;
    out.json = dataset::advisory_json(report, &set->label_map);
    for (const auto& [id, tier] : report.per_class_tier)
        out.summary += set->label_map.classes[id] + ": " + std::string(dataset::to_string(tier)) + "\n";
    for (const auto& note : report.notes) out.summary += "  " + note + "\n";
    return out;
}

Result<Outcome> dataset_frames(const Options& o) {
    const auto video = o.video.empty() ? fs::path() : at(o, o.video);
    auto plan = dataset::plan_frame_extraction(o.duration, o.fps, o.rate, video.empty() ? "" : video.filename().string());
    if (!plan) return plan.error();
    Outcome out;
    out.json = dataset::frame_plan_json(*plan);
    out.summary = std::to_string(plan->timestamps_s.size()) + " frames at " + format_real(plan->effective_rate_fps) + " fps\n";
    for (const auto& w : plan->warnings) out.summary += "  warning: " + w.message + "\n";
    if (video.empty()) return out;

    auto decoder = find_on_path("ffmpeg");
    if (!decoder)
        return make_error(ErrorCode::IoError,
                          "no media decoder on PATH: install ffmpeg, or extract frames at the planned timestamps "
                          "yourself (run without --video to list them)");
    const auto dir = o.out.empty() ? project_dir(o) / "dataset" / "frames" : at(o, o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    for (double t : plan->timestamps_s) {
        char name[64];
        std::snprintf(name, sizeof(name), "_%09lld.jpg", static_cast<long long>(std::llround(t * 1000)));
        auto target = dir / (video.stem().string() + name);
        auto cmd = shell_quote(decoder->string()) + " -v error -y -ss " + format_real(t) + " -i " +
                   shell_quote(video.string()) + " -frames:v 1 " + shell_quote(target.string());
        if (std::system(cmd.c_str()) != 0)
            return make_error(ErrorCode::IoError, "decoder failed at t=" + format_real(t) + "s");
        out.artifacts.push_back(target);
    }
    return out;
}

Result<Outcome> model_list(const Options&) {
    auto registry = models::registry_from_environment();
    if (!registry) return registry.error();
    Outcome out;
    out.json = models::registry_json(*registry);
    char line[160];
    for (const auto& e : *registry) {
        std::snprintf(line, sizeof(line), "%-18s %8.1f ms %6.1f mAP %8.1f MB\n", e.name.c_str(), e.inference_ms, e.map_coco,
                      e.size_mb);
        out.summary += line;
    }
    return out;
}

Result<Outcome> model_select(const Options& o) {
    auto registry = models::registry_from_environment();
    if (!registry) return registry.error();
    models::SelectionConstraints c;
    c.max_size_mb = o.max_size_mb;
    c.max_inference_ms = o.max_inference_ms;
    c.min_map = o.min_map;
    c.num_classes = o.classes;
    auto task = models::parse_model_task(o.task);
    if (!task) return make_error(ErrorCode::InvalidConstraints, "unknown task '" + o.task + "'");
    c.task = *task;
    auto pick = models::select_model(*registry, c);
    if (!pick) return pick.error();
    Outcome out;
    out.json = ordered_json{{"model", models::entry_to_json(pick->entry)}, {"notes", pick->notes}}.dump(2) + "\n";
    out.summary = pick->entry.name + "\n";
    for (const auto& n : pick->notes) out.summary += "  " + n + "\n";
    return out;
}

Result<Outcome> train_init(const Options& o) {
    auto set = load_dataset(o);
    if (!set) return set.error();
    auto split = dataset::read_split_manifests(splits_dir(o));
    if (!split) return split.error();
    auto registry = models::registry_from_environment();
    if (!registry) return registry.error();
    const auto* model = models::find_model(*registry, o.model);
    if (!model) return make_error(ErrorCode::InvalidConfig, "no model named '" + o.model + "' in the registry");
    training::TrainingOverrides ov{o.base_weights, o.max_steps, o.loss_threshold, o.window, o.patience};
    auto config = training::build_training_config(*set, *model, *split, ov);
    if (!config) return config.error();
    Outcome out;
    out.json = training::config_json(*config);
    if (auto ok = write_text(runs_dir(o) / "config.json", out.json, out); !ok) return ok.error();
    out.summary = "training config for " + config->model.name + " from " + config->base_weights + ", " +
                  std::to_string(config->split.train.size()) + " training images\n";
    return out;
}

Result<Outcome> train_start(const Options& o) {
    const auto config_file = runs_dir(o) / "config.json";
    if (!fs::exists(config_file)) return make_error(ErrorCode::InvalidConfig, "no training config; run `train init` first");
    auto text = read_text(config_file);
    if (!text) return text.error();
    auto config = training::parse_config(*text);
    if (!config) return config.error();
    auto set = load_dataset(o);
    if (!set) return set.error();

    std::unique_ptr<training::TrainerAdapter> trainer;
    if (o.trainer == "mock") {
        training::MockScript script;
        script.losses = default_mock_curve();
        script.step_stride = o.stride;
        if (!o.losses.empty()) {
            auto curve = read_text(at(o, o.losses));
            if (!curve) return curve.error();
            script.losses.clear();
            for (const auto& line : split(*curve, '\n')) {
                if (trim(line).empty()) continue;
                double v = 0;
                if (!parse_real(trim(line), v)) return make_error(ErrorCode::ParseError, "bad loss value '" + line + "'");
                script.losses.push_back(v);
            }
        }
        trainer = std::make_unique<training::MockTrainer>(runs_dir(o), script);
    } else {
        trainer = std::make_unique<training::DirectoryTrainer>(runs_dir(o));
    }
    training::Orchestrator orch(runs_dir(o), *trainer);
    if (auto ok = orch.resume(); !ok) return ok.error();
    auto run = orch.start(*config, *set);
    if (!run) return run.error();
    if (o.trainer == "mock") {
        auto refreshed = orch.refresh(run->run_id);
        if (!refreshed) return refreshed.error();
        run = std::move(refreshed);
    }
    Outcome out;
    out.json = training::run_json(*run);
    out.artifacts.push_back(runs_dir(o) / run->run_id);
    out.summary = run_line(*run) + "\n";
    if (o.trainer != "mock")
        out.summary += "  handoff directory: " + (runs_dir(o) / run->run_id).string() + "\n";
    return out;
}

Result<Outcome> train_status(const Options& o) {
    training::DirectoryTrainer trainer(runs_dir(o));
    training::Orchestrator orch(runs_dir(o), trainer);
    if (auto ok = orch.resume(); !ok) return ok.error();
    auto ids = o.run.empty() ? orch.run_ids() : std::vector<std::string>{o.run};
    Outcome out;
    auto all = ordered_json::array();
    std::string single;
    for (const auto& id : ids) {
        auto run = orch.snapshot(id);
        if (!run) return run.error();
        if (!training::is_terminal(run->status)) {
            run = orch.refresh(id);
            if (!run) return run.error();
        }
        single = training::run_json(*run);
        all.push_back(ordered_json::parse(single));
        out.summary += run_line(*run) + "\n";
    }
    out.json = o.run.empty() ? all.dump(2) + "\n" : single;
    if (ids.empty()) out.summary = "no runs\n";
    return out;
}

Result<Outcome> train_package(const Options& o) {
    training::DirectoryTrainer trainer(runs_dir(o));
    training::Orchestrator orch(runs_dir(o), trainer);
    if (auto ok = orch.resume(); !ok) return ok.error();
    auto run = orch.snapshot(o.run);
    if (!run) return run.error();
    if (!training::is_terminal(run->status)) {
        run = orch.refresh(o.run);
        if (!run) return run.error();
    }
    if (!training::is_finished(run->status))
        return make_error(ErrorCode::RunNotFinished, o.run + " is " + std::string(training::to_string(run->status)));
    auto artifacts = trainer.artifacts(o.run);
    if (!artifacts) return artifacts.error();
    auto pkg = training::package_model(*run, *artifacts);
    if (!pkg) return pkg.error();
    Outcome out;
    out.json = training::package_json(*pkg);
    if (auto ok = write_text(runs_dir(o) / o.run / "package.json", out.json, out); !ok) return ok.error();
    out.summary = "packaged " + pkg->model_name + " (" + pkg->runtime_format_tag + ", sha256 " + pkg->checksum.substr(0, 12) +
                  "...) with labels " + class_list(pkg->label_map) + "\n";
    return out;
}

Result<Outcome> app_scaffold(const Options& o) {
    auto tpl = appforge::find_template(o.template_id);
    if (!tpl) return tpl.error();
    appforge::Customization c;
    c.app_name = o.name;
    c.gui_color = o.color;
    c.icon = o.icon;
    c.logo = o.logo;
    c.info_panel_text = o.info;
    c.expert_mode_enabled = o.expert;
    c.confidence_threshold = o.threshold;

    std::optional<training::ModelPackage> model;
    std::optional<fs::path> package_file;
    if (!o.package.empty()) package_file = at(o, o.package);
    else if (!o.run.empty()) package_file = runs_dir(o) / o.run / "package.json";
    if (package_file) {
        if (!fs::exists(*package_file))
            return make_error(ErrorCode::MissingModel, "no model package at " + package_file->string());
        auto text = read_text(*package_file);
        if (!text) return text.error();
        auto pkg = training::parse_package(*text);
        if (!pkg) return pkg.error();
        model = *pkg;
    }
    std::set<appforge::Platform> platforms;
    for (const auto& p : split(o.platforms, ',')) {
        if (trim(p).empty()) continue;
        auto platform = appforge::parse_platform(p);
        if (!platform) return make_error(ErrorCode::InvalidCustomization, "unknown platform '" + p + "'");
        platforms.insert(*platform);
    }
    auto d = appforge::instantiate_template(*tpl, c, model, platforms, o.upload_endpoint);
    if (!d) return d.error();
    Outcome out;
    out.json = appforge::descriptor_json(*d);
    if (auto ok = write_text(bundle_dir(o, d->bundle_id) / "descriptor.json", out.json, out); !ok) return ok.error();
    out.summary = "bundle " + d->bundle_id + " from " + d->template_id +
                  (d->model ? " with " + d->model->model_name : std::string(" in expert-only mode")) + "\n";
    return out;
}

Result<Outcome> app_manifest(const Options& o) {
    auto d = load_descriptor(o);
    if (!d) return d.error();
    auto platform = appforge::parse_platform(o.platform);
    if (!platform) return make_error(ErrorCode::PlatformNotTargeted, "unknown platform '" + o.platform + "'");
    auto manifest = appforge::emit_build_manifest(*d, *platform);
    if (!manifest) return manifest.error();
    Outcome out;
    out.json = *manifest;
    const auto file = bundle_dir(o, d->bundle_id) / ("manifest-" + std::string(appforge::to_string(*platform)) + ".json");
    if (auto ok = write_text(file, *manifest, out); !ok) return ok.error();
    out.summary = "wrote " + file.string() + "\n";
    return out;
}

Result<Outcome> app_deploy_lanes(const Options& o) {
    auto d = load_descriptor(o);
    if (!d) return d.error();
    auto platform = appforge::parse_platform(o.platform);
    if (!platform) return make_error(ErrorCode::PlatformNotTargeted, "unknown platform '" + o.platform + "'");
    auto channel = appforge::parse_channel(o.channel);
    if (!channel) return make_error(ErrorCode::InvalidCustomization, "unknown channel '" + o.channel + "'");
    auto lanes = appforge::emit_deploy_lanes(*d, *platform, *channel);
    if (!lanes) return lanes.error();
    Outcome out;
    out.json = appforge::deploy_json(*lanes);
    const auto file = bundle_dir(o, d->bundle_id) /
                      ("lanes-" + std::string(appforge::to_string(*platform)) + "-" + std::string(appforge::to_string(*channel)) + ".json");
    if (auto ok = write_text(file, out.json, out); !ok) return ok.error();
    for (const auto& s : lanes->lane_steps) out.summary += s.kind + ": " + s.action + "\n";
    return out;
}

Result<Outcome> serve(const Options& o) {
    auto config = service::config_from_environment();
    if (!config) return config.error();
    if (o.port) config->port = static_cast<std::uint16_t>(*o.port);
    if (o.storage) config->storage_root = *o.storage;
    if (o.media_cap_mb) config->media_cap_bytes = static_cast<std::size_t>(*o.media_cap_mb * 1024 * 1024);
    config->storage_root = at(o, config->storage_root.string());

    auto store = std::make_shared<service::FileStore>(config->storage_root);
    service::Service svc(store, *config);
    if (auto ok = svc.load(); !ok) return ok.error();
    service::HttpServer server(svc);
    const int port = server.bind("0.0.0.0", config->port);
    if (port < 0) return make_error(ErrorCode::IoError, "cannot listen on port " + std::to_string(config->port));

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);
    std::thread serving([&] { server.listen(); });
    std::cerr << "listening on port " << port << ", storage " << config->storage_root.string() << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
    serving.join();

    Outcome out;
    out.json = ordered_json{{"port", port}, {"storage_root", config->storage_root.string()}, {"signal", sig}}.dump(2) + "\n";
    out.summary = "stopped on signal " + std::to_string(sig) + "\n";
    return out;
}

}  // namespace fieldlens::cli::detail
