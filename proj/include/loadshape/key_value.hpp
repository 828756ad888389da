#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace loadshape {

// Flat "key = value" text. Blank lines and lines starting with '#' are
// skipped. Throws FormatError on a line without '=' or a repeated key.
std::map<std::string, std::string> parse_key_values(std::string_view text, std::string_view origin = "<config>");
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

}  // namespace loadshape
