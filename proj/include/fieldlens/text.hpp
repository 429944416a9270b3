#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fieldlens {

std::string trim(std::string_view s);
/// ASCII lower-case after trimming; the identity key for class names.
std::string fold_key(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
/// Shortest decimal text that parses back to exactly `v`.
std::string format_real(double v);
bool parse_real(std::string_view s, double& out);

}  // namespace fieldlens
