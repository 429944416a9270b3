#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fieldlens {

/// Current UTC time as `YYYY-MM-DDTHH:MM:SSZ`.
std::string utc_now_iso8601();
std::string format_iso8601(std::int64_t epoch_seconds);

/// Seconds since the epoch for `YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM)`.
std::optional<std::int64_t> parse_iso8601(std::string_view text);

}  // namespace fieldlens
