#include "loadshape/key_value.hpp"

#include <fstream>
#include <sstream>

#include "loadshape/csv.hpp"
#include "loadshape/error.hpp"

namespace loadshape {

std::map<std::string, std::string> parse_key_values(std::string_view text, std::string_view origin) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = csv::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError(std::string(origin) + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = std::string(csv::trim(line.substr(0, eq)));
    const auto value = std::string(csv::trim(line.substr(eq + 1)));
    if (key.empty()) throw FormatError(std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw FormatError(std::string(origin) + ":" + std::to_string(line_no) + ": key '" + key + "' repeated");
    }
  }
  return out;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path.string());
}

}  // namespace loadshape
