#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fieldlens/domain.hpp"
#include "fieldlens/result.hpp"
#include "fieldlens/training.hpp"

namespace fieldlens::appforge {

enum class Platform { ios, android };
enum class Channel { beta, release };

std::string_view to_string(Platform p);
std::string_view to_string(Channel c);
std::optional<Platform> parse_platform(std::string_view text);
std::optional<Channel> parse_channel(std::string_view text);

inline constexpr std::string_view kGuiColor = "gui_color";
inline constexpr std::string_view kIcon = "icon";
inline constexpr std::string_view kLogo = "logo";
inline constexpr std::string_view kAppName = "app_name";
inline constexpr std::string_view kInfoPanelText = "info_panel_text";

struct AppTemplate {
    std::string template_id;
    std::set<domain::Task> supported_tasks;
    std::set<std::string, std::less<>> customizable_keys;
    bool supports_expert_mode = false;
    std::string source_ref;
    std::vector<std::string> guide_assets;
};

const std::vector<AppTemplate>& template_catalog();
Result<AppTemplate> find_template(std::string_view template_id);

struct Customization {
    std::string app_name;
    std::optional<std::string> gui_color{};
    std::optional<std::string> icon{};
    std::optional<std::string> logo{};
    std::optional<std::string> info_panel_text{};
    bool expert_mode_enabled = false;
    double confidence_threshold = 0.5;

    /// Keys this customization sets; app_name is always among them.
    std::set<std::string> keys() const;
    Result<void> validate() const;
};

struct AppBundleDescriptor {
    std::string bundle_id;
    std::string template_id;
    Customization customization;
    std::optional<training::ModelPackage> model{};
    std::set<Platform> target_platforms;
    std::string upload_endpoint;
    std::string created_at;
};

/// Fills `template` with the customization and the trained model; with no
/// model the template must support expert mode and it must be switched on.
Result<AppBundleDescriptor> instantiate_template(const AppTemplate& tpl, const Customization& customization,
                                                 const std::optional<training::ModelPackage>& model,
                                                 const std::set<Platform>& platforms, std::string upload_endpoint);

std::string descriptor_json(const AppBundleDescriptor& d);
Result<AppBundleDescriptor> parse_descriptor(std::string_view json_text);

/// Reverse-DNS identifier derived from the app name.
std::string app_identifier(const Customization& c);

/// Build manifest JSON. Excludes bundle id and timestamps, so the same
/// descriptor content always yields the same bytes. The `digest` section is
/// the SHA-256 of the other sections.
Result<std::string> emit_build_manifest(const AppBundleDescriptor& d, Platform platform);

struct LaneStep {
    std::string kind;    // prepare, sign, build or distribute
    std::string action;  // lane-runner action name
    std::map<std::string, std::string> params;

    bool operator==(const LaneStep&) const = default;
};

struct DeployConfig {
    Platform platform = Platform::ios;
    Channel channel = Channel::beta;
    std::string app_identifier;
    std::vector<LaneStep> lane_steps;

    bool operator==(const DeployConfig&) const = default;
};

Result<DeployConfig> emit_deploy_lanes(const AppBundleDescriptor& d, Platform platform, Channel channel);
std::string deploy_json(const DeployConfig& config);

}  // namespace fieldlens::appforge
