#ifndef MINPAIR_CORPUS_HPP_
#define MINPAIR_CORPUS_HPP_

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "minpair/error.hpp"
#include "minpair/text.hpp"

namespace minpair {

using json = nlohmann::ordered_json;

/// Where a reference translation came from. Serialized as "human" or
/// "machine:<engine>".
struct Origin {
  enum class Kind { kHuman, kMachine };
  Kind kind = Kind::kHuman;
  std::string engine;

  static Origin human() { return {}; }
  static Origin machine(std::string engine) {
    return {Kind::kMachine, std::move(engine)};
  }

  bool is_machine() const { return kind == Kind::kMachine; }

  std::string to_string() const {
    return is_machine() ? "machine:" + engine : "human";
  }

  static Origin parse(std::string_view s) {
    if (s == "human") return human();
    if (s.starts_with("machine:") && s.size() > 8) {
      return machine(std::string(s.substr(8)));
    }
    throw Error(ErrorCode::kMalformedRecord,
                "bad origin '" + std::string(s) +
                    "' (expected human or machine:<engine>)");
  }

  friend bool operator==(const Origin&, const Origin&) = default;
};

struct SentencePair {
  std::string id;
  std::string source;
  std::string target;
  Origin origin;
  std::string dataset_tag;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

/// Half-open range [begin, end). Byte offsets for character spans, token
/// indices for phenomenon spans.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  friend bool operator==(const Span&, const Span&) = default;
  friend std::ostream& operator<<(std::ostream& os, const Span& s) {
    return os << '[' << s.begin << ',' << s.end << ')';
  }
};

/// Tokens plus the whitespace around them. `gaps` has one more element than
/// `tokens`: gaps[i] precedes tokens[i] and gaps.back() trails the last
/// token, which makes detokenization exact.
struct TokenizedSentence {
  std::vector<std::string> tokens;
  std::vector<Span> spans;
  std::vector<std::string> gaps;

  std::size_t size() const { return tokens.size(); }
  const std::string& operator[](std::size_t i) const { return tokens[i]; }
};

namespace detail {

inline bool is_split_punct(char32_t cp) {
  switch (cp) {
    case U'.': case U',': case U';': case U':': case U'!': case U'?':
    case U'"': case U'(': case U')':
    case U'»': case U'«': case U'„': case U'“': case U'”':
      return true;
    default:
      return false;
  }
}

inline void push_token(TokenizedSentence& out, std::string_view text,
                       std::size_t begin, std::size_t end,
                       std::size_t& cursor) {
  out.gaps.emplace_back(text.substr(cursor, begin - cursor));
  out.tokens.emplace_back(text.substr(begin, end - begin));
  out.spans.push_back({begin, end});
  cursor = end;
}

inline void recompute_spans(TokenizedSentence& ts) {
  ts.spans.clear();
  std::size_t pos = 0;
  for (std::size_t i = 0; i < ts.tokens.size(); ++i) {
    pos += ts.gaps[i].size();
    ts.spans.push_back({pos, pos + ts.tokens[i].size()});
    pos += ts.tokens[i].size();
  }
}

}  // namespace detail

/// Splits on whitespace, then peels sentence punctuation (. , ; : ! ? " » «
/// „ “ ” ( )) off both ends of each chunk into separate tokens. Hyphens and
/// word-internal punctuation stay attached.
inline TokenizedSentence tokenize(std::string_view text) {
  if (text::trim(text).empty()) {
    throw Error(ErrorCode::kEmptyInput, "cannot tokenize empty text");
  }
  TokenizedSentence out;
  std::size_t cursor = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text::is_space(text[pos])) {
      ++pos;
      continue;
    }
    std::size_t chunk_end = pos;
    while (chunk_end < text.size() && !text::is_space(text[chunk_end])) {
      ++chunk_end;
    }
    // leading punctuation
    std::size_t b = pos;
    while (b < chunk_end) {
      const auto d = text::decode(text, b);
      if (d.length == 0 || !detail::is_split_punct(d.cp)) break;
      detail::push_token(out, text, b, b + d.length, cursor);
      b += d.length;
    }
    // trailing punctuation, collected right to left
    std::vector<Span> trailing;
    std::size_t e = chunk_end;
    while (e > b) {
      std::size_t start = e - 1;
      while (start > b && (static_cast<unsigned char>(text[start]) & 0xC0) == 0x80) {
        --start;
      }
      const auto d = text::decode(text, start);
      if (d.length == 0 || !detail::is_split_punct(d.cp)) break;
      trailing.push_back({start, e});
      e = start;
    }
    if (e > b) detail::push_token(out, text, b, e, cursor);
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) {
      detail::push_token(out, text, it->begin, it->end, cursor);
    }
    pos = chunk_end;
  }
  out.gaps.emplace_back(text.substr(cursor));
  return out;
}

inline std::string detokenize(const TokenizedSentence& ts) {
  std::string out;
  for (std::size_t i = 0; i < ts.tokens.size(); ++i) {
    out += ts.gaps[i];
    out += ts.tokens[i];
  }
  if (!ts.gaps.empty()) out += ts.gaps.back();
  return out;
}

/// Token-level edits used by the perturbation rules. Deleting a token also
/// removes the whitespace in front of it (or behind it, for the first token).
inline TokenizedSentence replace_token(TokenizedSentence ts, std::size_t i,
                                       std::string replacement) {
  ts.tokens.at(i) = std::move(replacement);
  detail::recompute_spans(ts);
  return ts;
}

inline TokenizedSentence erase_tokens(TokenizedSentence ts, Span range) {
  if (range.end > ts.tokens.size() || range.begin > range.end) {
    throw Error(ErrorCode::kSpanOutOfRange, "erase range out of bounds");
  }
  if (range.empty()) return ts;
  const auto b = static_cast<long>(range.begin);
  const auto e = static_cast<long>(range.end);
  if (range.begin == 0) {
    // keep the leading gap, drop the gaps that separated the erased tokens
    // from what follows
    ts.gaps.erase(ts.gaps.begin() + 1, ts.gaps.begin() + e + 1);
  } else {
    ts.gaps.erase(ts.gaps.begin() + b, ts.gaps.begin() + e);
  }
  ts.tokens.erase(ts.tokens.begin() + b, ts.tokens.begin() + e);
  detail::recompute_spans(ts);
  return ts;
}

// ---------------------------------------------------------------------------
// Ingestion

namespace detail {

inline std::string checked_field(std::string_view raw,
                                 const std::string& where) {
  const auto t = text::trim(raw);
  if (t.empty()) {
    throw Error(ErrorCode::kMalformedRow, where + ": empty sentence");
  }
  return std::string(t);
}

}  // namespace detail

/// Pairs line i of the source file with line i of the target file.
inline std::vector<SentencePair> read_parallel(
    const std::filesystem::path& source_path,
    const std::filesystem::path& target_path, const std::string& dataset_tag,
    const Origin& origin = Origin::human()) {
  const auto src = text::read_lines(source_path);
  const auto tgt = text::read_lines(target_path);
  if (src.size() != tgt.size()) {
    throw Error(ErrorCode::kLineCountMismatch,
                source_path.string() + " has " + std::to_string(src.size()) +
                    " lines but " + target_path.string() + " has " +
                    std::to_string(tgt.size()));
  }
  std::vector<SentencePair> pairs;
  pairs.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const std::string where =
        source_path.string() + ":" + std::to_string(i + 1);
    pairs.push_back({dataset_tag + ":" + std::to_string(i + 1),
                     detail::checked_field(src[i], where),
                     detail::checked_field(tgt[i], where), origin,
                     dataset_tag});
  }
  return pairs;
}

/// Two-column tab-separated input; extra columns are ignored.
inline std::vector<SentencePair> read_tsv(const std::filesystem::path& path,
                                          const std::string& dataset_tag,
                                          const Origin& origin = Origin::human()) {
  const auto lines = text::read_lines(path);
  std::vector<SentencePair> pairs;
  pairs.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const auto cols = text::split(lines[i], '\t');
    if (cols.size() < 2) {
      throw Error(ErrorCode::kMalformedRow,
                  where + ": expected at least 2 tab-separated columns");
    }
    pairs.push_back({dataset_tag + ":" + std::to_string(i + 1),
                     detail::checked_field(cols[0], where),
                     detail::checked_field(cols[1], where), origin,
                     dataset_tag});
  }
  return pairs;
}

inline json to_json(const SentencePair& p) {
  json j;
  j["id"] = p.id;
  j["source"] = p.source;
  j["target"] = p.target;
  j["origin"] = p.origin.to_string();
  j["dataset_tag"] = p.dataset_tag;
  return j;
}

inline SentencePair sentence_pair_from_json(const json& j) {
  try {
    SentencePair p{j.at("id").get<std::string>(),
                   j.at("source").get<std::string>(),
                   j.at("target").get<std::string>(),
                   Origin::parse(j.at("origin").get<std::string>()),
                   j.at("dataset_tag").get<std::string>()};
    if (text::trim(p.source).empty() || text::trim(p.target).empty()) {
      throw Error(ErrorCode::kMalformedRecord, p.id + ": empty sentence");
    }
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, e.what());
  }
}

/// Parses newline-delimited JSON; blank lines are skipped.
inline std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::vector<json> out;
  const auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    try {
      out.push_back(json::parse(lines[i]));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  path.string() + ":" + std::to_string(i + 1) + ": " +
                      e.what());
    }
  }
  return out;
}

inline std::string dump_jsonl(std::span<const json> records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

inline void write_corpus(const std::filesystem::path& path,
                         std::span<const SentencePair> pairs) {
  std::vector<json> records;
  records.reserve(pairs.size());
  for (const auto& p : pairs) records.push_back(to_json(p));
  text::write_file_atomic(path, dump_jsonl(records));
}

inline std::vector<SentencePair> read_corpus(const std::filesystem::path& path) {
  std::vector<SentencePair> pairs;
  std::set<std::string> seen;
  for (const auto& j : read_jsonl(path)) {
    auto p = sentence_pair_from_json(j);
    if (!seen.insert(p.id).second) {
      throw Error(ErrorCode::kDuplicateId,
                  path.string() + ": duplicate id " + p.id);
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// Filtering

enum class FilterReason { kTooLong, kRatio };

inline std::string_view to_string(FilterReason r) {
  return r == FilterReason::kTooLong ? "TOO_LONG" : "RATIO";
}

struct FilterOptions {
  std::size_t max_tokens = 250;
  double max_ratio = 1.5;
};

struct RemovedPair {
  SentencePair pair;
  FilterReason reason;
};

struct FilterResult {
  std::vector<SentencePair> kept;
  std::vector<RemovedPair> removed;
  std::map<FilterReason, std::size_t> removed_count;
};

/// Length is checked before ratio, so a pair violating both is counted as
/// TOO_LONG. The ratio is max/min over token counts; equality with
/// max_ratio is kept.
inline std::optional<FilterReason> filter_reason(const SentencePair& pair,
                                                 const FilterOptions& opts) {
  const auto ls = tokenize(pair.source).size();
  const auto lt = tokenize(pair.target).size();
  if (ls > opts.max_tokens || lt > opts.max_tokens) {
    return FilterReason::kTooLong;
  }
  const auto hi = static_cast<double>(std::max(ls, lt));
  const auto lo = static_cast<double>(std::min(ls, lt));
  if (hi > opts.max_ratio * lo) return FilterReason::kRatio;
  return std::nullopt;
}

inline FilterResult filter_pairs(std::span<const SentencePair> pairs,
                                 const FilterOptions& opts = {}) {
  FilterResult result;
  result.removed_count[FilterReason::kTooLong] = 0;
  result.removed_count[FilterReason::kRatio] = 0;
  for (const auto& p : pairs) {
    if (const auto reason = filter_reason(p, opts)) {
      result.removed.push_back({p, *reason});
      ++result.removed_count[*reason];
    } else {
      result.kept.push_back(p);
    }
  }
  return result;
}

}  // namespace minpair

#endif  // MINPAIR_CORPUS_HPP_
