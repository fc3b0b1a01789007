#ifndef MINPAIR_TEXT_HPP_
#define MINPAIR_TEXT_HPP_

// UTF-8 helpers. Case handling covers ASCII and the Latin-1 supplement,
// which is all German orthography needs (ß has no single-letter uppercase
// and is left alone).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "minpair/error.hpp"

namespace minpair::text {

struct Decoded {
  char32_t cp = 0;
  std::size_t length = 0;  // 0 on malformed input
};

inline Decoded decode(std::string_view s, std::size_t pos) {
  if (pos >= s.size()) return {};
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {};
  }
  if (pos + len > s.size()) return {};
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {};
    cp = (cp << 6) | (b & 0x3F);
  }
  // overlong forms, surrogates, out of range
  if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
      (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
      (cp >= 0xD800 && cp <= 0xDFFF)) {
    return {};
  }
  return {cp, len};
}

inline std::string encode(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

/// Byte offset of the first invalid sequence, or npos when valid.
inline std::size_t find_invalid_utf8(std::string_view s) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto d = decode(s, pos);
    if (d.length == 0) return pos;
    pos += d.length;
  }
  return std::string_view::npos;
}

inline bool is_upper(char32_t cp) {
  return (cp >= U'A' && cp <= U'Z') ||
         (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7);
}

inline bool is_lower(char32_t cp) {
  return (cp >= U'a' && cp <= U'z') ||
         (cp >= 0xDF && cp <= 0xFE && cp != 0xF7);
}

inline bool is_letter(char32_t cp) { return is_upper(cp) || is_lower(cp); }

inline char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  return cp;
}

inline char32_t to_upper(char32_t cp) {
  if (cp >= U'a' && cp <= U'z') return cp - 32;
  if (cp >= 0xE0 && cp <= 0xFE && cp != 0xF7) return cp - 0x20;
  return cp;
}

inline char32_t first_codepoint(std::string_view s) {
  const auto d = decode(s, 0);
  return d.length == 0 ? 0 : d.cp;
}

inline bool starts_upper(std::string_view s) {
  return is_upper(first_codepoint(s));
}

inline bool starts_lower(std::string_view s) {
  return is_lower(first_codepoint(s));
}

inline std::string with_first(std::string_view s, char32_t (*fn)(char32_t)) {
  const auto d = decode(s, 0);
  if (d.length == 0) return std::string(s);
  return encode(fn(d.cp)) + std::string(s.substr(d.length));
}

inline std::string lower_first(std::string_view s) {
  return with_first(s, to_lower);
}

inline std::string upper_first(std::string_view s) {
  return with_first(s, to_upper);
}

inline std::string to_lower_all(std::string_view s) {
  std::string out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto d = decode(s, pos);
    if (d.length == 0) {
      out += s[pos++];
      continue;
    }
    out += encode(to_lower(d.cp));
    pos += d.length;
  }
  return out;
}

/// Copies the capitalization of `model`'s first letter onto `word`.
inline std::string match_case(std::string_view model, std::string_view word) {
  return starts_upper(model) ? upper_first(word) : std::string(word);
}

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string join(const std::vector<std::string>& parts,
                        std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Reads a UTF-8 text file as lines. A trailing newline does not produce an
/// empty final line; CRLF endings are accepted.
inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  if (const auto bad = find_invalid_utf8(content); bad != std::string::npos) {
    const auto line = 1 + std::count(content.begin(),
                                     content.begin() + static_cast<long>(bad),
                                     '\n');
    throw Error(ErrorCode::kInvalidUtf8,
                path.string() + ":" + std::to_string(line) +
                    ": invalid UTF-8 byte sequence");
  }
  std::vector<std::string> lines;
  if (content.empty()) return lines;
  std::size_t start = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

/// Writes via a temporary sibling and rename, so readers never observe a
/// half-written file.
inline void write_file_atomic(const std::filesystem::path& path,
                              std::string_view content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace minpair::text

#endif  // MINPAIR_TEXT_HPP_
