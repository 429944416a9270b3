#include <sstream>

#include "fieldlens/annotations.hpp"
#include "fieldlens/digest.hpp"
#include "fieldlens/text.hpp"
#include "fieldlens/training.hpp"
#include "json_io.hpp"

namespace fieldlens::training {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

DirectoryTrainer::DirectoryTrainer(fs::path root) : root_(std::move(root)) {}

Result<void> DirectoryTrainer::launch(const TrainingRun& run, const domain::AnnotationSet& set) {
    const auto dir = run_dir(run.run_id);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) return make_error(ErrorCode::TrainerUnavailable, "cannot create handoff directory " + dir.string());
    auto fail = [](const Error& e) { return make_error(ErrorCode::TrainerUnavailable, e.message); };

    if (auto ok = detail::write_file(dir / "config.json", config_json(run.config)); !ok) return fail(ok.error());
    if (auto ok = dataset::write_split_manifests(run.config.split, dir); !ok) return fail(ok.error());
    auto coco = annotations::export_set(set, annotations::FormatTag::coco_json);
    if (!coco) return coco.error();
    if (auto ok = detail::write_file(dir / "dataset.json", coco->front().text); !ok) return fail(ok.error());
    fs::remove(dir / "stop", ec);
    return {};
}

Result<std::vector<LossPoint>> DirectoryTrainer::poll(const std::string& run_id) {
    const auto path = run_dir(run_id) / "loss.log";
    std::vector<LossPoint> points;
    if (!fs::exists(path)) return points;
    auto text = detail::read_file(path);
    if (!text) return text.error();
    // only complete lines; the trainer may be mid-write on the last one
    auto end = text->rfind('\n');
    if (end == std::string::npos) return points;
    std::istringstream in(text->substr(0, end + 1));
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto fields = split(line, '\t');
        double step = 0, loss = 0;
        if (fields.size() != 2 || !parse_real(trim(fields[0]), step) || !parse_real(trim(fields[1]), loss) || step < 0 ||
            step != static_cast<double>(static_cast<std::uint64_t>(step)))
            return make_error(ErrorCode::TrainerFailed, "loss.log line " + std::to_string(lineno) + " is malformed");
        points.push_back({static_cast<std::uint64_t>(step), loss});
    }
    return points;
}

std::optional<std::string> DirectoryTrainer::failure(const std::string& run_id) {
    const auto path = run_dir(run_id) / "failed";
    if (!fs::exists(path)) return std::nullopt;
    auto text = detail::read_file(path);
    std::string reason = text ? trim(*text) : std::string();
    return reason.empty() ? std::string("trainer reported failure") : reason;
}

Result<TrainerArtifacts> DirectoryTrainer::artifacts(const std::string& run_id) {
    const auto dir = run_dir(run_id);
    if (!fs::exists(dir / "model.bin")) return make_error(ErrorCode::ArtifactMissing, "no model.bin for run " + run_id);
    auto meta_text = detail::read_file(dir / "meta.json");
    if (!meta_text) return make_error(ErrorCode::ArtifactMissing, "no meta.json for run " + run_id);
    TrainerArtifacts out;
    out.weights = dir / "model.bin";
    try {
        auto meta = ordered_json::parse(*meta_text);
        out.runtime_format_tag = meta.at("runtime_format_tag").get<std::string>();
        out.input_size = {meta.at("input_size").at(0).get<int>(), meta.at("input_size").at(1).get<int>()};
    } catch (const nlohmann::json::exception& e) {
        return make_error(ErrorCode::ArtifactMissing, "meta.json: " + std::string(e.what()));
    }
    return out;
}

void DirectoryTrainer::stop(const std::string& run_id) {
    std::error_code ec;
    if (fs::exists(run_dir(run_id), ec)) (void)detail::write_file(run_dir(run_id) / "stop", "");
}

std::string mock_weights(const TrainingConfig& config) {
    auto text = config_json(config);
    return "FIELDLENS-MOCK-WEIGHTS\n" + sha256_hex(text) + "\n" + text;
}

MockTrainer::MockTrainer(fs::path root, MockScript script) : DirectoryTrainer(std::move(root)), script_(std::move(script)) {}

Result<void> MockTrainer::launch(const TrainingRun& run, const domain::AnnotationSet& set) {
    if (script_.unavailable) return make_error(ErrorCode::TrainerUnavailable, "mock trainer refused the connection");
    if (auto ok = DirectoryTrainer::launch(run, set); !ok) return ok;
    const auto dir = run_dir(run.run_id);

    std::string log;
    for (std::size_t i = 0; i < script_.losses.size(); ++i)
        log += std::to_string((i + 1) * script_.step_stride) + "\t" + format_real(script_.losses[i]) + "\n";
    if (auto ok = detail::write_file(dir / "loss.log", log); !ok) return ok;
    if (script_.fail) return detail::write_file(dir / "failed", "scripted failure\n");

    if (auto ok = detail::write_file(dir / "model.bin", mock_weights(run.config)); !ok) return ok;
    ordered_json meta{{"runtime_format_tag", script_.runtime_format_tag},
                      {"input_size", {script_.input_size.first, script_.input_size.second}}};
    return detail::write_file(dir / "meta.json", meta.dump(2) + "\n");
}

}  // namespace fieldlens::training
