#include <nlohmann/json.hpp>

#include "fieldlens/appforge.hpp"
#include "fieldlens/digest.hpp"
#include "fieldlens/text.hpp"

namespace fieldlens::appforge {

using nlohmann::json;

namespace {

Result<void> require_platform(const AppBundleDescriptor& d, Platform p) {
    if (!d.target_platforms.count(p))
        return make_error(ErrorCode::PlatformNotTargeted, d.bundle_id + " does not target " + std::string(to_string(p)));
    return {};
}

std::string model_file(const std::string& format_tag) {
    auto tag = fold_key(format_tag);
    if (tag == "tflite") return "model.tflite";
    if (tag == "coreml" || tag == "mlmodel") return "model.mlmodel";
    if (tag == "onnx") return "model.onnx";
    return "model.bin";
}

json tool_entry_point(Platform p) {
    if (p == Platform::ios)
        return {{"tool", "xcodebuild"},
                {"args", {"-workspace", "FieldApp.xcworkspace", "-scheme", "FieldApp", "-configuration", "Release", "archive"}}};
    return {{"tool", "./gradlew"}, {"args", {"assembleRelease"}}};
}

}  // namespace

Result<std::string> emit_build_manifest(const AppBundleDescriptor& d, Platform platform) {
    if (auto ok = require_platform(d, platform); !ok) return ok.error();
    auto tpl = find_template(d.template_id);
    if (!tpl) return tpl.error();
    const auto& c = d.customization;

    json m;
    m["template"] = {{"id", tpl->template_id}, {"source", tpl->source_ref}};

    json assets = json::array();
    auto sub = [&](std::string_view key, const std::optional<std::string>& value) {
        if (value) assets.push_back({{"key", key}, {"value", *value}});
    };
    sub(kAppName, c.app_name);
    sub(kGuiColor, c.gui_color);
    sub(kIcon, c.icon);
    sub(kLogo, c.logo);
    sub(kInfoPanelText, c.info_panel_text);
    for (const auto& g : tpl->guide_assets) assets.push_back({{"key", "guide"}, {"value", g}});
    m["assets"] = std::move(assets);

    if (d.model) {
        m["model"] = {{"path", "assets/model/" + model_file(d.model->runtime_format_tag)},
                      {"checksum", d.model->checksum},
                      {"format_tag", d.model->runtime_format_tag},
                      {"input_size", {d.model->input_size.first, d.model->input_size.second}}};
        m["labels"] = {{"path", "assets/model/labels.txt"}, {"classes", d.model->label_map.classes}};
    } else {
        m["model"] = nullptr;
        m["labels"] = nullptr;
    }
    m["runtime"] = {{"confidence_threshold", c.confidence_threshold},
                    {"expert_mode", c.expert_mode_enabled},
                    {"upload_endpoint", d.upload_endpoint},
                    {"app_identifier", app_identifier(c)}};
    m["build"] = {{"platform", to_string(platform)}, {"tool_entry_point", tool_entry_point(platform)}};
    m["digest"] = {{"algorithm", "sha256"}, {"value", sha256_hex(m.dump())}};
    return m.dump(2) + "\n";
}

Result<DeployConfig> emit_deploy_lanes(const AppBundleDescriptor& d, Platform platform, Channel channel) {
    if (auto ok = require_platform(d, platform); !ok) return ok.error();
    DeployConfig cfg;
    cfg.platform = platform;
    cfg.channel = channel;
    cfg.app_identifier = app_identifier(d.customization);
    auto& s = cfg.lane_steps;
    const std::string id = cfg.app_identifier;
    if (platform == Platform::ios) {
        s.push_back({"prepare", "increment_build_number", {{"xcodeproj", "FieldApp.xcodeproj"}}});
        s.push_back({"sign", "sync_code_signing", {{"app_identifier", id}, {"type", "appstore"}}});
        s.push_back({"build", "build_app", {{"scheme", "FieldApp"}, {"export_method", "app-store"}}});
        if (channel == Channel::beta)
            s.push_back({"distribute", "upload_to_testflight", {{"app_identifier", id}, {"skip_waiting_for_build_processing", "true"}}});
        else
            s.push_back({"distribute", "upload_to_app_store", {{"app_identifier", id}, {"submit_for_review", "true"}}});
    } else {
        s.push_back({"prepare", "increment_version_code", {{"gradle_file_path", "app/build.gradle"}}});
        s.push_back({"build", "gradle", {{"task", "bundle"}, {"build_type", "Release"}}});
        s.push_back({"sign", "sign_bundle", {{"keystore", "release.keystore"}}});
        s.push_back({"distribute", "upload_to_play_store",
                     {{"package_name", id}, {"track", channel == Channel::beta ? "beta" : "production"}}});
    }
    return cfg;
}

std::string deploy_json(const DeployConfig& cfg) {
    json j;
    j["platform"] = to_string(cfg.platform);
    j["channel"] = to_string(cfg.channel);
    j["app_identifier"] = cfg.app_identifier;
    json lane = json::array();
    for (const auto& step : cfg.lane_steps) lane.push_back({{"kind", step.kind}, {"action", step.action}, {"params", step.params}});
    j["lane"] = {{"name", std::string(to_string(cfg.platform)) + "_" + std::string(to_string(cfg.channel))}, {"steps", lane}};
    return j.dump(2) + "\n";
}

}  // namespace fieldlens::appforge
