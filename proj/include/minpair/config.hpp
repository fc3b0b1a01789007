#ifndef MINPAIR_CONFIG_HPP_
#define MINPAIR_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "minpair/error.hpp"
#include "minpair/text.hpp"

namespace minpair {

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Flat run configuration: one `key = value` per line, '#' starts a comment
/// line. Keys are long flag names without dashes ("max-ratio"; underscores
/// are accepted). Repeating a key repeats the flag. A value wrapped in
/// double quotes is taken verbatim without them.
inline std::vector<ConfigEntry> parse_flat_config(std::string_view content,
                                                  const std::string& where = "config") {
  std::vector<ConfigEntry> out;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    auto line = text::trim(raw);
    if (!line.empty() && line.back() == '\r') line = text::trim(line.substr(0, line.size() - 1));
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfig, where + ":" + std::to_string(line_no) +
                                          ": expected key = value");
    }
    std::string key(text::trim(line.substr(0, eq)));
    for (auto& c : key) {
      if (c == '_') c = '-';
    }
    if (key.starts_with("--")) key = key.substr(2);
    if (key.empty()) {
      throw Error(ErrorCode::kConfig, where + ":" + std::to_string(line_no) + ": empty key");
    }
    std::string value(text::trim(line.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    out.push_back({std::move(key), std::move(value), line_no});
  }
  return out;
}

inline std::vector<ConfigEntry> read_flat_config(const std::filesystem::path& path) {
  return parse_flat_config(text::read_file(path), path.string());
}

}  // namespace minpair

#endif  // MINPAIR_CONFIG_HPP_
