#ifndef MINPAIR_RESOURCES_HPP_
#define MINPAIR_RESOURCES_HPP_

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "minpair/error.hpp"
#include "minpair/text.hpp"

namespace minpair {

/// Word lists and mapping tables consumed by the perturbation rules. All of
/// them are plain-text files in one directory so the rules can be audited
/// and amended without recompiling.
struct RuleResources {
  std::set<std::string> dative_prepositions;
  std::map<std::string, std::string> dative_to_genitive;
  std::map<std::string, std::string> genitive_noun_overrides;
  std::map<std::string, std::string> np_agreement_flips;
  std::set<std::string> un_polarity_lexicon;
  /// Holds both directions (3sg -> 3pl and 3pl -> 3sg).
  std::map<std::string, std::string> verb_number;
  std::set<std::string> noun_stoplist;
  std::set<std::string> plural_nouns;
  std::set<std::string> singular_nouns;
  std::set<std::string> abbreviations;

  static constexpr std::array<std::string_view, 9> kRequiredPrepositions = {
      "entgegen", "entsprechend", "gegenüber", "gemäß", "nahe",
      "nebst",    "mitsamt",      "samt",      "seit"};

  static RuleResources load(const std::filesystem::path& dir);

  /// Throws ResourceInvalid when an invariant of the tables is broken.
  void validate() const;

  /// If `token` is a listed un-word (optionally with an adjective or noun
  /// ending), returns it with the prefix removed. Sentence-initial tokens
  /// are also matched with their first letter lowercased.
  std::optional<std::string> polarity_base(std::string_view token,
                                           bool sentence_initial) const;
};

namespace detail {

inline std::vector<std::string> resource_lines(
    const std::filesystem::path& path) {
  std::vector<std::string> out;
  for (const auto& raw : text::read_lines(path)) {
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    out.emplace_back(line);
  }
  return out;
}

inline std::set<std::string> load_word_set(const std::filesystem::path& path) {
  const auto lines = resource_lines(path);
  return {lines.begin(), lines.end()};
}

inline std::map<std::string, std::string> load_mapping(
    const std::filesystem::path& path) {
  std::map<std::string, std::string> out;
  for (const auto& line : resource_lines(path)) {
    const auto cols = text::split(line, '\t');
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
      throw Error(ErrorCode::kResourceInvalid,
                  path.string() + ": expected two tab-separated columns in '" +
                      line + "'");
    }
    if (!out.emplace(cols[0], cols[1]).second) {
      throw Error(ErrorCode::kResourceInvalid,
                  path.string() + ": duplicate key '" + cols[0] + "'");
    }
  }
  return out;
}

inline std::string_view un_prefix_stripped(std::string_view entry) {
  return entry.substr(2);
}

}  // namespace detail

inline RuleResources RuleResources::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo,
                "resource directory not found: " + dir.string());
  }
  RuleResources r;
  r.dative_prepositions = detail::load_word_set(dir / "dative_prepositions.txt");
  r.dative_to_genitive =
      detail::load_mapping(dir / "dative_genitive_determiners.tsv");
  r.genitive_noun_overrides =
      detail::load_mapping(dir / "genitive_noun_overrides.tsv");
  r.np_agreement_flips = detail::load_mapping(dir / "np_agreement_flips.tsv");
  r.un_polarity_lexicon = detail::load_word_set(dir / "un_polarity_lexicon.txt");
  for (const auto& [sg, pl] : detail::load_mapping(dir / "verb_number.tsv")) {
    if (!r.verb_number.emplace(sg, pl).second ||
        !r.verb_number.emplace(pl, sg).second) {
      throw Error(ErrorCode::kResourceInvalid,
                  "verb_number.tsv: form listed twice: " + sg + "/" + pl);
    }
  }
  r.noun_stoplist = detail::load_word_set(dir / "noun_stoplist.txt");
  r.plural_nouns = detail::load_word_set(dir / "kein_plural_nouns.txt");
  r.singular_nouns = detail::load_word_set(dir / "kein_singular_nouns.txt");
  r.abbreviations = detail::load_word_set(dir / "abbreviations.txt");
  r.validate();
  return r;
}

inline void RuleResources::validate() const {
  for (const auto p : kRequiredPrepositions) {
    if (!dative_prepositions.contains(std::string(p))) {
      throw Error(ErrorCode::kResourceInvalid,
                  "dative preposition list lacks '" + std::string(p) + "'");
    }
  }
  for (const auto& entry : un_polarity_lexicon) {
    if (!(entry.starts_with("un") || entry.starts_with("Un")) ||
        entry.size() <= 2) {
      throw Error(ErrorCode::kResourceInvalid,
                  "polarity lexicon entry '" + entry +
                      "' does not start with un-/Un-");
    }
  }
}

inline std::optional<std::string> RuleResources::polarity_base(
    std::string_view token, bool sentence_initial) const {
  static constexpr std::array<std::string_view, 5> kAdjectiveEndings = {
      "e", "en", "em", "er", "es"};
  static constexpr std::array<std::string_view, 5> kNounEndings = {
      "s", "es", "en", "n", "e"};

  auto lookup = [&](std::string_view word) -> std::optional<std::string> {
    const std::string w(word);
    if (un_polarity_lexicon.contains(w)) {
      const auto rest = detail::un_prefix_stripped(w);
      return w.front() == 'U' ? text::upper_first(rest) : std::string(rest);
    }
    for (const auto& entry : un_polarity_lexicon) {
      if (!word.starts_with(entry)) continue;
      const auto suffix = word.substr(entry.size());
      const bool noun = entry.front() == 'U';
      const auto& endings = noun ? kNounEndings : kAdjectiveEndings;
      if (std::find(endings.begin(), endings.end(), suffix) == endings.end()) {
        continue;
      }
      const auto rest = detail::un_prefix_stripped(entry);
      return (noun ? text::upper_first(rest) : std::string(rest)) +
             std::string(suffix);
    }
    return std::nullopt;
  };

  if (auto base = lookup(token)) return base;
  if (sentence_initial && text::starts_upper(token)) {
    if (auto base = lookup(text::lower_first(token))) {
      return text::upper_first(*base);
    }
  }
  return std::nullopt;
}

}  // namespace minpair

#endif  // MINPAIR_RESOURCES_HPP_
