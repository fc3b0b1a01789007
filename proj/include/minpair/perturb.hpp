#ifndef MINPAIR_PERTURB_HPP_
#define MINPAIR_PERTURB_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minpair/corpus.hpp"
#include "minpair/error.hpp"
#include "minpair/resources.hpp"
#include "minpair/text.hpp"

namespace minpair {

// The eight error types, in alphabetical order. Reports list rows in this
// order.
enum class ErrorType {
  kClauseOmission,
  kHypercorrectGenitive,
  kNpAgreement,
  kPlaceholderDing,
  kPolarityAffixDel,
  kPolarityParticleKeinDel,
  kPolarityParticleNichtDel,
  kSubjVerbAgreement,
};

inline constexpr std::array<ErrorType, 8> kAllErrorTypes = {
    ErrorType::kClauseOmission,          ErrorType::kHypercorrectGenitive,
    ErrorType::kNpAgreement,             ErrorType::kPlaceholderDing,
    ErrorType::kPolarityAffixDel,        ErrorType::kPolarityParticleKeinDel,
    ErrorType::kPolarityParticleNichtDel, ErrorType::kSubjVerbAgreement,
};

constexpr std::string_view to_string(ErrorType t) {
  switch (t) {
    case ErrorType::kClauseOmission: return "clause_omission";
    case ErrorType::kHypercorrectGenitive: return "hypercorrect_genitive";
    case ErrorType::kNpAgreement: return "np_agreement";
    case ErrorType::kPlaceholderDing: return "placeholder_ding";
    case ErrorType::kPolarityAffixDel: return "polarity_affix_del";
    case ErrorType::kPolarityParticleKeinDel: return "polarity_particle_kein_del";
    case ErrorType::kPolarityParticleNichtDel: return "polarity_particle_nicht_del";
    case ErrorType::kSubjVerbAgreement: return "subj_verb_agreement";
  }
  return "";
}

inline ErrorType parse_error_type(std::string_view name) {
  for (const auto t : kAllErrorTypes) {
    if (to_string(t) == name) return t;
  }
  throw Error(ErrorCode::kUnknownErrorType,
              "unknown error type '" + std::string(name) + "'");
}

struct MinimalPair {
  std::string id;
  ErrorType error_type = ErrorType::kPlaceholderDing;
  std::string source;
  std::string correct;
  std::string contrastive;
  /// Token ranges holding the edited material, per variant.
  std::vector<Span> correct_spans;
  std::vector<Span> contrastive_spans;
  Origin ref_origin;

  friend bool operator==(const MinimalPair&, const MinimalPair&) = default;
};

/// Tokens outside the phenomenon spans must agree, and the variants must
/// differ.
inline bool is_minimal(const MinimalPair& p) {
  if (p.correct == p.contrastive) return false;
  auto outside = [](const std::string& s, const std::vector<Span>& spans)
      -> std::optional<std::vector<std::string>> {
    const auto ts = tokenize(s);
    std::vector<bool> inside(ts.size(), false);
    for (const auto& sp : spans) {
      if (sp.begin > sp.end || sp.end > ts.size()) return std::nullopt;
      for (auto i = sp.begin; i < sp.end; ++i) inside[i] = true;
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (!inside[i]) out.push_back(ts[i]);
    }
    return out;
  };
  const auto a = outside(p.correct, p.correct_spans);
  const auto b = outside(p.contrastive, p.contrastive_spans);
  return a && b && *a == *b;
}

// ---------------------------------------------------------------------------
// Seeding

/// splitmix64 finalizer; fixed across platforms, unlike the standard
/// distributions.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed used for one sentence inside a test set, so each sentence draws
/// independently of corpus order and sharding.
constexpr std::uint64_t pair_seed(std::uint64_t seed, std::string_view id) {
  return mix64(seed ^ fnv1a64(id));
}

// ---------------------------------------------------------------------------
// Shared token predicates

namespace detail {

inline bool is_boundary_token(std::string_view tok) {
  return tok == "." || tok == "!" || tok == "?" || tok == ":";
}

inline bool is_opening_quote(std::string_view tok) {
  return tok == "\"" || tok == "„" || tok == "«" || tok == "»" ||
         tok == "“" || tok == "(";
}

/// True if token i starts a sentence: position 0, after . ! ? :, or after
/// an opening quote in one of those positions.
inline bool starts_sentence(const TokenizedSentence& ts, std::size_t i) {
  if (i == 0) return true;
  if (is_boundary_token(ts[i - 1])) return true;
  if (is_opening_quote(ts[i - 1])) {
    return i - 1 == 0 || is_boundary_token(ts[i - 2]);
  }
  return false;
}

inline bool is_word(std::string_view tok) {
  return text::is_letter(text::first_codepoint(tok));
}

/// Index of the first capitalized token in (from, from + window], allowing
/// only lowercase words (adjectives, adverbs) in between.
inline std::optional<std::size_t> find_head_noun(const TokenizedSentence& ts,
                                                 std::size_t from,
                                                 std::size_t window) {
  for (std::size_t k = from + 1; k < ts.size() && k <= from + window; ++k) {
    if (text::starts_upper(ts[k])) return k;
    if (!text::starts_lower(ts[k])) return std::nullopt;
  }
  return std::nullopt;
}

inline MinimalPair make_pair(const SentencePair& pair, ErrorType type,
                             const TokenizedSentence& contrastive,
                             Span correct_span, Span contrastive_span) {
  MinimalPair mp;
  mp.id = pair.id;
  mp.error_type = type;
  mp.source = pair.source;
  mp.correct = pair.target;
  mp.contrastive = detokenize(contrastive);
  mp.correct_spans = {correct_span};
  mp.contrastive_spans = {contrastive_span};
  mp.ref_origin = pair.origin;
  return mp;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Placeholder "Ding"

/// Capitalized tokens at non-initial positions that do not open a sentence
/// and are not stoplisted. Capitalization stands in for a POS tagger.
inline std::vector<std::size_t> candidate_nouns(const TokenizedSentence& ts,
                                                const RuleResources& res) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (!text::starts_upper(ts[i])) continue;
    if (res.noun_stoplist.contains(ts[i])) continue;
    if (detail::starts_sentence(ts, i)) continue;
    out.push_back(i);
  }
  return out;
}

inline std::size_t select_target_noun(const TokenizedSentence& ts,
                                      std::uint64_t seed,
                                      const RuleResources& res) {
  const auto candidates = candidate_nouns(ts, res);
  if (candidates.empty()) {
    throw Error(ErrorCode::kNoCandidateNoun, "no candidate noun");
  }
  return candidates[mix64(seed) % candidates.size()];
}

inline MinimalPair perturb_placeholder_ding(const SentencePair& pair,
                                            std::uint64_t seed,
                                            const RuleResources& res) {
  const auto ts = tokenize(pair.target);
  const auto i = select_target_noun(ts, seed, res);
  return detail::make_pair(pair, ErrorType::kPlaceholderDing,
                           replace_token(ts, i, "Ding"), {i, i + 1},
                           {i, i + 1});
}

// ---------------------------------------------------------------------------
// Hypercorrect genitive

/// Genitive singular of a masculine/neuter noun given its dative form.
inline std::string genitive_noun(const std::string& noun,
                                 const RuleResources& res) {
  if (const auto it = res.genitive_noun_overrides.find(noun);
      it != res.genitive_noun_overrides.end()) {
    return it->second;
  }
  if (text::ends_with(noun, "nis")) return noun + "ses";
  if (text::ends_with(noun, "s") || text::ends_with(noun, "ß") ||
      text::ends_with(noun, "x") || text::ends_with(noun, "z") ||
      text::ends_with(noun, "sch")) {
    return noun + "es";
  }
  return noun + "s";
}

inline MinimalPair perturb_hypercorrect_genitive(const SentencePair& pair,
                                                 const RuleResources& res) {
  const auto ts = tokenize(pair.target);
  for (std::size_t i = 0; i + 2 < ts.size(); ++i) {
    const auto prep = i == 0 ? text::lower_first(ts[i]) : ts[i];
    if (!res.dative_prepositions.contains(prep)) continue;
    const auto det = res.dative_to_genitive.find(ts[i + 1]);
    if (det == res.dative_to_genitive.end()) continue;
    // adjectives between determiner and noun keep their -en ending
    const auto noun = detail::find_head_noun(ts, i + 1, 3);
    if (!noun) continue;
    auto edited = replace_token(ts, i + 1, det->second);
    edited = replace_token(std::move(edited), *noun,
                           genitive_noun(ts[*noun], res));
    return detail::make_pair(pair, ErrorType::kHypercorrectGenitive, edited,
                             {i + 1, *noun + 1}, {i + 1, *noun + 1});
  }
  throw Error(ErrorCode::kNoEligiblePhrase,
              "no dative preposition with a masculine/neuter singular phrase");
}

// ---------------------------------------------------------------------------
// Polarity affix deletion

inline MinimalPair perturb_polarity_affix(const SentencePair& pair,
                                          const RuleResources& res) {
  const auto ts = tokenize(pair.target);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto base =
        res.polarity_base(ts[i], detail::starts_sentence(ts, i));
    if (!base) continue;
    return detail::make_pair(pair, ErrorType::kPolarityAffixDel,
                             replace_token(ts, i, *base), {i, i + 1},
                             {i, i + 1});
  }
  throw Error(ErrorCode::kNoEligibleToken, "no listed un- word");
}

// ---------------------------------------------------------------------------
// Negation particles

enum class NegationLexeme { kKein, kNicht };

namespace detail {

inline const std::map<std::string, std::string>& kein_forms() {
  static const std::map<std::string, std::string> forms = {
      {"kein", "ein"},     {"keine", "eine"},   {"keinen", "einen"},
      {"keinem", "einem"}, {"keiner", "einer"}, {"keines", "eines"}};
  return forms;
}

enum class Number { kSingular, kPlural, kUnknown };

inline Number noun_number(const std::string& noun, const RuleResources& res) {
  auto listed = [&](const std::set<std::string>& set) {
    if (set.contains(noun)) return true;
    // dative plural adds -n
    return text::ends_with(noun, "n") &&
           set.contains(noun.substr(0, noun.size() - 1));
  };
  const bool pl = listed(res.plural_nouns);
  const bool sg = res.singular_nouns.contains(noun);
  if (pl != sg) return pl ? Number::kPlural : Number::kSingular;
  if (pl && sg) return Number::kUnknown;
  static constexpr std::array<std::string_view, 8> kPluralSuffixes = {
      "ungen", "heiten", "keiten", "schaften", "ionen", "täten", "innen",
      "nisse"};
  static constexpr std::array<std::string_view, 8> kSingularSuffixes = {
      "ung", "heit", "keit", "schaft", "ion", "tät", "ik", "nis"};
  for (const auto s : kPluralSuffixes) {
    if (text::ends_with(noun, s)) return Number::kPlural;
  }
  for (const auto s : kSingularSuffixes) {
    if (text::ends_with(noun, s)) return Number::kSingular;
  }
  return Number::kUnknown;
}

}  // namespace detail

/// nicht is deleted. kein-forms become the matching ein-form, or are
/// deleted before a plural noun; forms whose number cannot be decided are
/// skipped.
inline MinimalPair perturb_negation_particle(const SentencePair& pair,
                                             NegationLexeme lexeme,
                                             const RuleResources& res) {
  const auto ts = tokenize(pair.target);
  const auto type = lexeme == NegationLexeme::kNicht
                        ? ErrorType::kPolarityParticleNichtDel
                        : ErrorType::kPolarityParticleKeinDel;
  auto deletion = [&](std::size_t i) {
    return detail::make_pair(pair, type, erase_tokens(ts, {i, i + 1}),
                             {i, i + 1}, {i, i});
  };
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto lower = detail::starts_sentence(ts, i) ? text::lower_first(ts[i])
                                                      : ts[i];
    if (lexeme == NegationLexeme::kNicht) {
      if (lower != "nicht") continue;
      // deleting a sentence-initial Nicht would leave a lowercase opener
      if (i + 1 < ts.size() && detail::starts_sentence(ts, i) &&
          !text::starts_upper(ts[i + 1])) {
        continue;
      }
      return deletion(i);
    }
    const auto form = detail::kein_forms().find(lower);
    if (form == detail::kein_forms().end()) continue;
    const bool may_be_plural =
        lower == "keine" || lower == "keinen" || lower == "keiner";
    auto number = detail::Number::kSingular;
    if (may_be_plural) {
      const auto noun = detail::find_head_noun(ts, i, 3);
      number = noun ? detail::noun_number(ts[*noun], res)
                    : detail::Number::kUnknown;
    }
    if (number == detail::Number::kUnknown) continue;
    if (number == detail::Number::kPlural) {
      if (detail::starts_sentence(ts, i) && i + 1 < ts.size() &&
          !text::starts_upper(ts[i + 1])) {
        continue;
      }
      return deletion(i);
    }
    return detail::make_pair(pair, type,
                             replace_token(ts, i, text::match_case(ts[i], form->second)),
                             {i, i + 1}, {i, i + 1});
  }
  throw Error(ErrorCode::kNoEligibleToken,
              lexeme == NegationLexeme::kNicht ? "no 'nicht'"
                                               : "no decidable kein-form");
}

// ---------------------------------------------------------------------------
// Clause segmentation and omission

class ClauseSegmenter {
 public:
  virtual ~ClauseSegmenter() = default;
  /// Never returns an empty list; clauses joined by single spaces give the
  /// whitespace-normalized input.
  virtual std::vector<std::string> segment(std::string_view text) const = 0;
};

/// Splits after . ! ? : (optionally followed by closing quotes or a closing
/// parenthesis) when whitespace and an uppercase letter or opening quote
/// follow. Listed abbreviations, ordinals ("3.") and initials ("J.") do not
/// split.
class RuleBasedSegmenter : public ClauseSegmenter {
 public:
  explicit RuleBasedSegmenter(std::set<std::string> abbreviations)
      : abbreviations_(std::move(abbreviations)) {}

  std::vector<std::string> segment(std::string_view input) const override {
    std::vector<std::string> words;
    std::size_t pos = 0;
    while (pos < input.size()) {
      while (pos < input.size() && text::is_space(input[pos])) ++pos;
      const auto start = pos;
      while (pos < input.size() && !text::is_space(input[pos])) ++pos;
      if (pos > start) words.emplace_back(input.substr(start, pos - start));
    }
    std::vector<std::string> clauses;
    std::string current;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (!current.empty()) current += ' ';
      current += words[i];
      if (i + 1 < words.size() && ends_clause(words[i]) &&
          opens_clause(words[i + 1])) {
        clauses.push_back(std::move(current));
        current.clear();
      }
    }
    if (!current.empty() || clauses.empty()) {
      clauses.push_back(std::move(current));
    }
    return clauses;
  }

 private:
  static bool is_closer(std::string_view s, std::size_t& len) {
    for (const std::string_view q : {"\"", ")", "“", "”", "«", "»", "'"}) {
      if (text::ends_with(s, q)) {
        len = q.size();
        return true;
      }
    }
    return false;
  }

  bool ends_clause(std::string_view word) const {
    if (abbreviations_.contains(std::string(word))) return false;
    std::string_view w = word;
    std::size_t len = 0;
    while (!w.empty() && is_closer(w, len)) w.remove_suffix(len);
    if (w.empty()) return false;
    const char last = w.back();
    if (last != '.' && last != '!' && last != '?' && last != ':') return false;
    if (last == '.') {
      const auto stem = w.substr(0, w.size() - 1);
      if (!stem.empty() &&
          std::all_of(stem.begin(), stem.end(),
                      [](char c) { return c >= '0' && c <= '9'; })) {
        return false;  // ordinal
      }
      if (stem.size() == 1 && text::is_upper(static_cast<unsigned char>(stem[0]))) {
        return false;  // initial
      }
    }
    return true;
  }

  static bool opens_clause(std::string_view word) {
    const auto cp = text::first_codepoint(word);
    return text::is_upper(cp) || cp == U'"' || cp == U'„' || cp == U'“' ||
           cp == U'«' || cp == U'»';
  }

  std::set<std::string> abbreviations_;
};

inline std::vector<std::string> segment_clauses(std::string_view text,
                                                const RuleResources& res) {
  return RuleBasedSegmenter(res.abbreviations).segment(text);
}

/// Deletes one clause (the last one unless `clause_index` says otherwise).
inline MinimalPair perturb_clause_omission(
    const SentencePair& pair, const ClauseSegmenter& segmenter,
    std::optional<std::size_t> clause_index = std::nullopt) {
  const auto clauses = segmenter.segment(pair.target);
  if (clauses.size() < 2) {
    throw Error(ErrorCode::kSingleClause, "target has a single clause");
  }
  const auto k = clause_index.value_or(clauses.size() - 1);
  if (k >= clauses.size()) {
    throw Error(ErrorCode::kNoEligibleSite,
                "clause index " + std::to_string(k) + " out of range");
  }
  const auto ts = tokenize(pair.target);
  std::size_t begin = 0;
  for (std::size_t c = 0; c < k; ++c) begin += tokenize(clauses[c]).size();
  const std::size_t end = begin + tokenize(clauses[k]).size();
  if (end > ts.size()) {
    throw Error(ErrorCode::kSpanOutOfRange,
                "segmenter output does not align with tokens");
  }
  return detail::make_pair(pair, ErrorType::kClauseOmission,
                           erase_tokens(ts, {begin, end}), {begin, end},
                           {begin, begin});
}

// ---------------------------------------------------------------------------
// Agreement

enum class AgreementKind { kNounPhrase, kSubjectVerb };

namespace detail {

inline bool is_subject_pronoun(std::string_view tok) {
  static const std::set<std::string, std::less<>> kPronouns = {
      "er", "sie", "es", "man", "wir", "ihr", "ich", "du"};
  return kPronouns.contains(text::lower_first(tok));
}

}  // namespace detail

/// np: flips the first determiner that heads a noun (within three tokens)
/// using the agreement-flip table; spans cover determiner through noun.
/// subj_verb: flips the number of the first listed finite verb that has a
/// noun or subject pronoun within three tokens on either side.
inline MinimalPair perturb_agreement(const SentencePair& pair,
                                     AgreementKind kind,
                                     const RuleResources& res) {
  const auto ts = tokenize(pair.target);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (kind == AgreementKind::kNounPhrase) {
      const auto key =
          detail::starts_sentence(ts, i) ? text::lower_first(ts[i]) : ts[i];
      const auto flip = res.np_agreement_flips.find(key);
      if (flip == res.np_agreement_flips.end()) continue;
      const auto noun = detail::find_head_noun(ts, i, 3);
      if (!noun) continue;
      return detail::make_pair(
          pair, ErrorType::kNpAgreement,
          replace_token(ts, i, text::match_case(ts[i], flip->second)),
          {i, *noun + 1}, {i, *noun + 1});
    }
    const auto flip = res.verb_number.find(ts[i]);
    if (flip == res.verb_number.end()) continue;
    bool has_subject = false;
    const auto lo = i >= 3 ? i - 3 : 0;
    for (auto j = lo; j < ts.size() && j <= i + 3 && !has_subject; ++j) {
      if (j == i) continue;
      has_subject = detail::is_subject_pronoun(ts[j]) ||
                    (text::starts_upper(ts[j]) &&
                     !detail::starts_sentence(ts, j) &&
                     !res.noun_stoplist.contains(ts[j]));
    }
    if (!has_subject) continue;
    return detail::make_pair(pair, ErrorType::kSubjVerbAgreement,
                             replace_token(ts, i, flip->second), {i, i + 1},
                             {i, i + 1});
  }
  throw Error(ErrorCode::kNoEligibleSite,
              kind == AgreementKind::kNounPhrase
                  ? "no determiner+noun site in the flip table"
                  : "no listed verb next to a subject");
}

// ---------------------------------------------------------------------------
// Test set construction

struct BuildOptions {
  /// Delete this clause instead of the last one.
  std::optional<std::size_t> clause_index;
  /// Overrides the rule-based segmenter when set.
  std::shared_ptr<const ClauseSegmenter> segmenter;
};

/// Applies the rule for `type` to one sentence. `seed` is used as-is (only
/// placeholder_ding consumes it).
inline MinimalPair apply_rule(const SentencePair& pair, ErrorType type,
                              std::uint64_t seed, const RuleResources& res,
                              const BuildOptions& opts = {}) {
  switch (type) {
    case ErrorType::kPlaceholderDing:
      return perturb_placeholder_ding(pair, seed, res);
    case ErrorType::kHypercorrectGenitive:
      return perturb_hypercorrect_genitive(pair, res);
    case ErrorType::kPolarityAffixDel:
      return perturb_polarity_affix(pair, res);
    case ErrorType::kPolarityParticleKeinDel:
      return perturb_negation_particle(pair, NegationLexeme::kKein, res);
    case ErrorType::kPolarityParticleNichtDel:
      return perturb_negation_particle(pair, NegationLexeme::kNicht, res);
    case ErrorType::kClauseOmission: {
      if (opts.segmenter) {
        return perturb_clause_omission(pair, *opts.segmenter,
                                       opts.clause_index);
      }
      return perturb_clause_omission(
          pair, RuleBasedSegmenter(res.abbreviations), opts.clause_index);
    }
    case ErrorType::kNpAgreement:
      return perturb_agreement(pair, AgreementKind::kNounPhrase, res);
    case ErrorType::kSubjVerbAgreement:
      return perturb_agreement(pair, AgreementKind::kSubjectVerb, res);
  }
  throw Error(ErrorCode::kUnknownErrorType, "unhandled error type");
}

struct SkippedPair {
  std::string id;
  ErrorCode reason;
  std::string message;
};

struct TestsetResult {
  std::vector<MinimalPair> pairs;
  std::vector<SkippedPair> skipped;
};

/// At most one minimal pair per sentence. Sentences the rule does not apply
/// to are recorded in `skipped` with their reason.
inline TestsetResult build_testset(std::span<const SentencePair> pairs,
                                   ErrorType type, std::uint64_t seed,
                                   const RuleResources& res,
                                   const BuildOptions& opts = {}) {
  TestsetResult out;
  for (const auto& p : pairs) {
    try {
      out.pairs.push_back(apply_rule(p, type, pair_seed(seed, p.id), res, opts));
    } catch (const Error& e) {
      if (!is_skip_reason(e.code())) throw;
      out.skipped.push_back({p.id, e.code(), e.what()});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interchange format

namespace detail {

inline json spans_to_json(const std::vector<Span>& spans) {
  json arr = json::array();
  for (const auto& s : spans) arr.push_back(json::array({s.begin, s.end}));
  return arr;
}

inline std::vector<Span> spans_from_json(const json& arr) {
  std::vector<Span> out;
  for (const auto& s : arr) {
    if (!s.is_array() || s.size() != 2) {
      throw Error(ErrorCode::kMalformedRecord, "span must be [begin, end]");
    }
    out.push_back({s[0].get<std::size_t>(), s[1].get<std::size_t>()});
  }
  return out;
}

}  // namespace detail

inline json to_json(const MinimalPair& p) {
  json j;
  j["id"] = p.id;
  j["error_type"] = std::string(to_string(p.error_type));
  j["source"] = p.source;
  j["correct"] = p.correct;
  j["contrastive"] = p.contrastive;
  j["phenomenon_spans"] = {
      {"correct", detail::spans_to_json(p.correct_spans)},
      {"contrastive", detail::spans_to_json(p.contrastive_spans)}};
  j["ref_origin"] = p.ref_origin.to_string();
  return j;
}

inline MinimalPair minimal_pair_from_json(const json& j) {
  try {
    MinimalPair p;
    p.id = j.at("id").get<std::string>();
    p.error_type = parse_error_type(j.at("error_type").get<std::string>());
    p.source = j.at("source").get<std::string>();
    p.correct = j.at("correct").get<std::string>();
    p.contrastive = j.at("contrastive").get<std::string>();
    const auto& spans = j.at("phenomenon_spans");
    p.correct_spans = detail::spans_from_json(spans.at("correct"));
    p.contrastive_spans = detail::spans_from_json(spans.at("contrastive"));
    p.ref_origin = Origin::parse(j.at("ref_origin").get<std::string>());
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, e.what());
  }
}

inline void write_testset(const std::filesystem::path& path,
                          std::span<const MinimalPair> pairs) {
  std::vector<json> records;
  records.reserve(pairs.size());
  for (const auto& p : pairs) records.push_back(to_json(p));
  text::write_file_atomic(path, dump_jsonl(records));
}

inline std::vector<MinimalPair> read_testset(const std::filesystem::path& path) {
  std::vector<MinimalPair> out;
  std::set<std::pair<std::string, ErrorType>> seen;
  for (const auto& j : read_jsonl(path)) {
    auto p = minimal_pair_from_json(j);
    if (!seen.emplace(p.id, p.error_type).second) {
      throw Error(ErrorCode::kDuplicateId,
                  path.string() + ": duplicate id " + p.id);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace minpair

#endif  // MINPAIR_PERTURB_HPP_
