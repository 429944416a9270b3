#include <cctype>
#include <cmath>

#include <nlohmann/json.hpp>

#include "fieldlens/appforge.hpp"
#include "fieldlens/digest.hpp"
#include "fieldlens/text.hpp"
#include "fieldlens/timeutil.hpp"

namespace fieldlens::appforge {

using nlohmann::ordered_json;

std::string_view to_string(Platform p) { return p == Platform::ios ? "ios" : "android"; }
std::string_view to_string(Channel c) { return c == Channel::beta ? "beta" : "release"; }

std::optional<Platform> parse_platform(std::string_view text) {
    auto k = fold_key(text);
    if (k == "ios") return Platform::ios;
    if (k == "android") return Platform::android;
    return std::nullopt;
}

std::optional<Channel> parse_channel(std::string_view text) {
    auto k = fold_key(text);
    if (k == "beta") return Channel::beta;
    if (k == "release") return Channel::release;
    return std::nullopt;
}

const std::vector<AppTemplate>& template_catalog() {
    static const std::vector<AppTemplate> catalog = [] {
        std::set<std::string, std::less<>> all_keys{std::string(kGuiColor), std::string(kIcon), std::string(kLogo),
                                                    std::string(kAppName), std::string(kInfoPanelText)};
        return std::vector<AppTemplate>{
            {"detection-camera", {domain::Task::detection}, all_keys, true, "templates/detection-camera",
             {"guides/detection-camera/getting-started.md", "guides/detection-camera/tutorial.md"}},
            {"classification-camera", {domain::Task::classification}, all_keys, true, "templates/classification-camera",
             {"guides/classification-camera/getting-started.md", "guides/classification-camera/tutorial.md"}},
        };
    }();
    return catalog;
}

Result<AppTemplate> find_template(std::string_view template_id) {
    for (const auto& t : template_catalog())
        if (t.template_id == template_id) return t;
    return make_error(ErrorCode::UnknownTemplate, "no template '" + std::string(template_id) + "'");
}

std::set<std::string> Customization::keys() const {
    std::set<std::string> k{std::string(kAppName)};
    if (gui_color) k.insert(std::string(kGuiColor));
    if (icon) k.insert(std::string(kIcon));
    if (logo) k.insert(std::string(kLogo));
    if (info_panel_text) k.insert(std::string(kInfoPanelText));
    return k;
}

Result<void> Customization::validate() const {
    auto bad = [](const std::string& m) { return make_error(ErrorCode::InvalidCustomization, m); };
    if (trim(app_name).empty()) return bad("app_name must not be empty");
    if (gui_color) {
        const auto& c = *gui_color;
        bool ok = c.size() == 7 && c[0] == '#';
        for (std::size_t i = 1; ok && i < c.size(); ++i) ok = std::isxdigit(static_cast<unsigned char>(c[i])) != 0;
        if (!ok) return bad("gui_color must look like #RRGGBB, got '" + c + "'");
    }
    if (icon && icon->empty()) return bad("icon reference is empty");
    if (logo && logo->empty()) return bad("logo reference is empty");
    if (!std::isfinite(confidence_threshold) || confidence_threshold <= 0 || confidence_threshold >= 1)
        return bad("confidence_threshold must be strictly between 0 and 1");
    return {};
}

Result<AppBundleDescriptor> instantiate_template(const AppTemplate& tpl, const Customization& c,
                                                 const std::optional<training::ModelPackage>& model,
                                                 const std::set<Platform>& platforms, std::string upload_endpoint) {
    if (auto ok = c.validate(); !ok) return ok.error();
    for (const auto& key : c.keys())
        if (!tpl.customizable_keys.count(key))
            return make_error(ErrorCode::UnsupportedCustomization, tpl.template_id + " does not allow customizing " + key);
    if (c.expert_mode_enabled && !tpl.supports_expert_mode)
        return make_error(ErrorCode::UnsupportedCustomization, tpl.template_id + " has no expert mode");
    if (model) {
        if (!tpl.supported_tasks.count(model->task))
            return make_error(ErrorCode::TaskMismatch, tpl.template_id + " cannot host a " +
                                                           std::string(domain::to_string(model->task)) + " model");
        if (model->label_map.empty()) return make_error(ErrorCode::MissingModel, "model package has an empty label map");
    } else if (!c.expert_mode_enabled) {
        return make_error(ErrorCode::MissingModel, "no model package and expert mode is off");
    }
    if (platforms.empty()) return make_error(ErrorCode::InvalidCustomization, "no target platform");

    AppBundleDescriptor d;
    d.bundle_id = "bndl-" + random_hex(8);
    d.template_id = tpl.template_id;
    d.customization = c;
    d.model = model;
    d.target_platforms = platforms;
    d.upload_endpoint = std::move(upload_endpoint);
    d.created_at = utc_now_iso8601();
    return d;
}

std::string app_identifier(const Customization& c) {
    std::string slug;
    for (char ch : c.app_name)
        if (std::isalnum(static_cast<unsigned char>(ch))) slug.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (slug.empty() || std::isdigit(static_cast<unsigned char>(slug[0]))) slug = "app" + slug;
    return "org.fieldlens." + slug;
}

namespace {

ordered_json opt(const std::optional<std::string>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::optional<std::string> opt_string(const ordered_json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

}  // namespace

std::string descriptor_json(const AppBundleDescriptor& d) {
    ordered_json j;
    j["bundle_id"] = d.bundle_id;
    j["template_id"] = d.template_id;
    const auto& c = d.customization;
    j["customization"] = {{"app_name", c.app_name},
                          {"gui_color", opt(c.gui_color)},
                          {"icon", opt(c.icon)},
                          {"logo", opt(c.logo)},
                          {"info_panel_text", opt(c.info_panel_text)},
                          {"expert_mode_enabled", c.expert_mode_enabled},
                          {"confidence_threshold", c.confidence_threshold}};
    j["model"] = d.model ? ordered_json::parse(training::package_json(*d.model)) : ordered_json(nullptr);
    auto platforms = ordered_json::array();
    for (auto p : d.target_platforms) platforms.push_back(to_string(p));
    j["target_platforms"] = std::move(platforms);
    j["upload_endpoint"] = d.upload_endpoint;
    j["created_at"] = d.created_at;
    return j.dump(2) + "\n";
}

Result<AppBundleDescriptor> parse_descriptor(std::string_view text) {
    auto bad = [](const std::string& m) { return make_error(ErrorCode::InvalidCustomization, "descriptor: " + m); };
    try {
        auto j = ordered_json::parse(text);
        AppBundleDescriptor d;
        d.bundle_id = j.at("bundle_id").get<std::string>();
        d.template_id = j.at("template_id").get<std::string>();
        const auto& c = j.at("customization");
        d.customization.app_name = c.at("app_name").get<std::string>();
        d.customization.gui_color = opt_string(c, "gui_color");
        d.customization.icon = opt_string(c, "icon");
        d.customization.logo = opt_string(c, "logo");
        d.customization.info_panel_text = opt_string(c, "info_panel_text");
        d.customization.expert_mode_enabled = c.at("expert_mode_enabled").get<bool>();
        d.customization.confidence_threshold = c.at("confidence_threshold").get<double>();
        if (!j.at("model").is_null()) {
            auto pkg = training::parse_package(j.at("model").dump());
            if (!pkg) return pkg.error();
            d.model = *pkg;
        }
        for (const auto& p : j.at("target_platforms")) {
            auto platform = parse_platform(p.get<std::string>());
            if (!platform) return bad("unknown platform " + p.dump());
            d.target_platforms.insert(*platform);
        }
        d.upload_endpoint = j.at("upload_endpoint").get<std::string>();
        d.created_at = j.at("created_at").get<std::string>();
        return d;
    } catch (const nlohmann::json::exception& e) {
        return bad(e.what());
    }
}

}  // namespace fieldlens::appforge
