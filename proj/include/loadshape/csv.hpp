#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace loadshape::csv {

// Splits one line on commas. Fields are not quoted anywhere in this project's
// formats; a trailing '\r' is dropped.
std::vector<std::string_view> split(std::string_view line);

// Strict decimal parse of the whole field (surrounding blanks allowed).
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);

// Shortest text that parses back to exactly the same double.
std::string format_double(double value);

std::string_view trim(std::string_view text);

// Reads a whole file into lines. Throws IoError when unreadable.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes through a temp file and renames, so readers never see half a file.
void write_file(const std::filesystem::path& path, std::string_view content);

// Joins fields with commas and appends '\n'.
void append_row(std::string& out, const std::vector<std::string>& fields);

}  // namespace loadshape::csv
