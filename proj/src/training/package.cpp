#include "fieldlens/digest.hpp"
#include "fieldlens/training.hpp"
#include "json_io.hpp"

namespace fieldlens::training {

using nlohmann::ordered_json;

Result<ModelPackage> package_model(const TrainingRun& run, const TrainerArtifacts& artifacts) {
    if (!is_finished(run.status))
        return make_error(ErrorCode::RunNotFinished, "run " + run.run_id + " is " + std::string(to_string(run.status)));
    auto checksum = sha256_file(artifacts.weights);
    if (!checksum) return make_error(ErrorCode::ArtifactMissing, "weights not found at " + artifacts.weights.string());
    if (artifacts.runtime_format_tag.empty()) return make_error(ErrorCode::ArtifactMissing, "trainer gave no runtime format");

    ModelPackage pkg;
    pkg.weights_ref = artifacts.weights.string();
    pkg.runtime_format_tag = artifacts.runtime_format_tag;
    pkg.label_map = run.config.label_map;
    pkg.input_size = artifacts.input_size;
    pkg.checksum = *checksum;
    pkg.source_run = run.run_id;
    pkg.task = run.config.task;
    pkg.model_name = run.config.model.name;
    return pkg;
}

std::string package_json(const ModelPackage& p) {
    ordered_json j;
    j["weights_ref"] = p.weights_ref;
    j["runtime_format_tag"] = p.runtime_format_tag;
    j["label_map"] = p.label_map.classes;
    j["input_size"] = {p.input_size.first, p.input_size.second};
    j["checksum"] = p.checksum;
    j["source_run"] = p.source_run;
    j["task"] = domain::to_string(p.task);
    j["model_name"] = p.model_name;
    return j.dump(2) + "\n";
}

Result<ModelPackage> parse_package(std::string_view text) {
    try {
        auto j = ordered_json::parse(text);
        ModelPackage p;
        p.weights_ref = j.at("weights_ref").get<std::string>();
        p.runtime_format_tag = j.at("runtime_format_tag").get<std::string>();
        p.label_map.classes = j.at("label_map").get<std::vector<std::string>>();
        p.input_size = {j.at("input_size").at(0).get<int>(), j.at("input_size").at(1).get<int>()};
        p.checksum = j.at("checksum").get<std::string>();
        p.source_run = j.at("source_run").get<std::string>();
        auto task = domain::parse_task(j.at("task").get<std::string>());
        if (!task) return make_error(ErrorCode::ArtifactMissing, "package has unknown task");
        p.task = *task;
        p.model_name = j.value("model_name", std::string());
        return p;
    } catch (const nlohmann::json::exception& e) {
        return make_error(ErrorCode::ArtifactMissing, std::string("package.json: ") + e.what());
    }
}

}  // namespace fieldlens::training
