#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "fieldlens/models_json.hpp"
#include "fieldlens/training.hpp"
#include "json_io.hpp"

namespace fieldlens::training {

using nlohmann::ordered_json;

Result<void> ConvergencePolicy::validate() const {
    if (!std::isfinite(loss_threshold) || loss_threshold <= 0)
        return make_error(ErrorCode::InvalidConfig, "loss_threshold must be positive");
    if (window == 0) return make_error(ErrorCode::InvalidConfig, "window must be positive");
    if (patience == 0) return make_error(ErrorCode::InvalidConfig, "patience must be positive");
    return {};
}

std::string default_base_weights(const models::ModelRegistryEntry& model) {
    std::string slug;
    for (char ch : model.name) {
        if (std::isalnum(static_cast<unsigned char>(ch)))
            slug.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        else if (!slug.empty() && slug.back() != '_')
            slug.push_back('_');
    }
    while (!slug.empty() && slug.back() == '_') slug.pop_back();
    return "coco-pretrained/" + slug;
}

Result<TrainingConfig> build_training_config(const domain::AnnotationSet& set, const models::ModelRegistryEntry& model,
                                             const std::optional<dataset::SplitResult>& split,
                                             const TrainingOverrides& overrides) {
    if (auto ok = models::check_class_capacity(model, set.label_map.size()); !ok) return ok.error();
    if (!split || split->size() == 0) return make_error(ErrorCode::MissingSplit, "no split for this dataset");
    std::set<std::string_view> ids;
    for (const auto& img : set.images) ids.insert(img.media_id);
    for (const auto* list : {&split->train, &split->test, &split->eval})
        for (const auto& id : *list)
            if (!ids.count(id)) return make_error(ErrorCode::MissingSplit, "split refers to unknown image '" + id + "'");
    if (model.task != models::model_task(set.task))
        return make_error(ErrorCode::InvalidConfig, model.name + " is a " + std::string(models::to_string(model.task)) +
                                                        " model but the dataset is " + std::string(domain::to_string(set.task)));

    TrainingConfig config;
    config.model = model;
    config.base_weights = default_base_weights(model);
    config.split = *split;
    config.label_map = set.label_map;
    config.task = set.task;

    if (overrides.base_weights) {
        if (overrides.base_weights->empty()) return make_error(ErrorCode::InvalidConfig, "base_weights must not be empty");
        config.base_weights = *overrides.base_weights;
    }
    if (overrides.max_steps) {
        if (*overrides.max_steps == 0) return make_error(ErrorCode::InvalidConfig, "max_steps must be positive");
        config.max_steps = *overrides.max_steps;
    }
    if (overrides.loss_threshold) config.convergence.loss_threshold = *overrides.loss_threshold;
    if (overrides.window) config.convergence.window = *overrides.window;
    if (overrides.patience) config.convergence.patience = *overrides.patience;
    if (auto ok = config.convergence.validate(); !ok) return ok.error();
    return config;
}

std::string config_json(const TrainingConfig& c) { return detail::config_to_json(c).dump(2) + "\n"; }

Result<TrainingConfig> parse_config(std::string_view text) {
    try {
        return detail::config_from_json(ordered_json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        return make_error(ErrorCode::InvalidConfig, e.what());
    }
}

namespace detail {

ordered_json split_to_json(const dataset::SplitResult& s) {
    ordered_json j;
    j["seed"] = s.seed;
    j["ratio"] = {{"train", s.ratio.train}, {"test", s.ratio.test}, {"eval", s.ratio.eval}};
    j["train"] = s.train;
    j["test"] = s.test;
    j["eval"] = s.eval;
    auto strata = ordered_json::array();
    for (const auto& st : s.strata)
        strata.push_back({{"name", st.name},
                          {"class_id", st.class_id ? ordered_json(*st.class_id) : ordered_json(nullptr)},
                          {"train", st.counts[0]},
                          {"test", st.counts[1]},
                          {"eval", st.counts[2]}});
    j["strata"] = std::move(strata);
    return j;
}

dataset::SplitResult split_from_json(const ordered_json& j) {
    dataset::SplitResult s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.ratio = {j.at("ratio").at("train").get<double>(), j.at("ratio").at("test").get<double>(),
               j.at("ratio").at("eval").get<double>()};
    s.train = j.at("train").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    s.eval = j.at("eval").get<std::vector<std::string>>();
    for (const auto& e : j.at("strata")) {
        dataset::Stratum st;
        st.name = e.at("name").get<std::string>();
        if (!e.at("class_id").is_null()) st.class_id = e.at("class_id").get<std::size_t>();
        st.counts = {e.at("train").get<std::size_t>(), e.at("test").get<std::size_t>(), e.at("eval").get<std::size_t>()};
        s.strata.push_back(std::move(st));
    }
    return s;
}

ordered_json config_to_json(const TrainingConfig& c) {
    ordered_json j;
    j["model"] = models::entry_to_json(c.model);
    j["base_weights"] = c.base_weights;
    j["task"] = domain::to_string(c.task);
    j["label_map"] = c.label_map.classes;
    j["max_steps"] = c.max_steps;
    j["convergence"] = {{"loss_threshold", c.convergence.loss_threshold},
                        {"window", c.convergence.window},
                        {"patience", c.convergence.patience}};
    j["split"] = split_to_json(c.split);
    return j;
}

Result<TrainingConfig> config_from_json(const ordered_json& j) {
    TrainingConfig c;
    auto model = models::entry_from_json(j.at("model"));
    if (!model) return make_error(ErrorCode::InvalidConfig, model.error().message);
    c.model = *model;
    c.base_weights = j.at("base_weights").get<std::string>();
    auto task = domain::parse_task(j.at("task").get<std::string>());
    if (!task) return make_error(ErrorCode::InvalidConfig, "unknown task");
    c.task = *task;
    c.label_map.classes = j.at("label_map").get<std::vector<std::string>>();
    c.max_steps = j.at("max_steps").get<std::uint64_t>();
    const auto& conv = j.at("convergence");
    c.convergence = {conv.at("loss_threshold").get<double>(), conv.at("window").get<std::size_t>(),
                     conv.at("patience").get<std::size_t>()};
    if (auto ok = c.convergence.validate(); !ok) return ok.error();
    c.split = split_from_json(j.at("split"));
    return c;
}

}  // namespace detail

}  // namespace fieldlens::training
