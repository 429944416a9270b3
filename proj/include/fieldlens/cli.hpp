#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fieldlens/result.hpp"

namespace fieldlens::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitEnvironment = 3;

struct CommandResult {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> artifacts;
    /// Human-readable text for stdout.
    std::string summary;
    /// The operation's serialized result; what `--json` prints.
    std::string json;
    bool json_requested = false;
    std::optional<Error> error{};
    /// Usage text and diagnostics for stderr.
    std::string diagnostics;

    const std::string& stdout_text() const { return json_requested ? json : summary; }
};

int exit_code_for(ErrorCode code);

/// Runs one command. `argv[0]` is the program name. Relative paths resolve
/// against `working_dir`. `serve` blocks until SIGINT or SIGTERM.
///
/// Project layout: `<project>/dataset/annotations.json`, `<project>/splits/`,
/// `<project>/runs/<run id>/`, `<project>/bundles/<bundle id>/`.
CommandResult execute(const std::vector<std::string>& argv, const std::filesystem::path& working_dir);

}  // namespace fieldlens::cli
