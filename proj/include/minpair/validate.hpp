#ifndef MINPAIR_VALIDATE_HPP_
#define MINPAIR_VALIDATE_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "minpair/corpus.hpp"
#include "minpair/error.hpp"
#include "minpair/perturb.hpp"
#include "minpair/resources.hpp"

namespace minpair {

enum class ValidationStatus {
  kAutoAccept,
  kNeedsReview,
  /// Reserved for an automatic use-as-contrastive route; classification
  /// never produces it and it admits no decisions.
  kUseAsContrastive,
  kDropped,
  kReviewedAccept,
  kReviewedContrastive,
  kReviewedDrop,
};

inline constexpr std::array<ValidationStatus, 7> kAllStatuses = {
    ValidationStatus::kAutoAccept,       ValidationStatus::kNeedsReview,
    ValidationStatus::kUseAsContrastive, ValidationStatus::kDropped,
    ValidationStatus::kReviewedAccept,   ValidationStatus::kReviewedContrastive,
    ValidationStatus::kReviewedDrop,
};

constexpr std::string_view to_string(ValidationStatus s) {
  switch (s) {
    case ValidationStatus::kAutoAccept: return "AUTO_ACCEPT";
    case ValidationStatus::kNeedsReview: return "NEEDS_REVIEW";
    case ValidationStatus::kUseAsContrastive: return "USE_AS_CONTRASTIVE";
    case ValidationStatus::kDropped: return "DROPPED";
    case ValidationStatus::kReviewedAccept: return "REVIEWED_ACCEPT";
    case ValidationStatus::kReviewedContrastive: return "REVIEWED_CONTRASTIVE";
    case ValidationStatus::kReviewedDrop: return "REVIEWED_DROP";
  }
  return "";
}

inline ValidationStatus parse_validation_status(std::string_view s) {
  for (const auto st : kAllStatuses) {
    if (to_string(st) == s) return st;
  }
  throw Error(ErrorCode::kMalformedRecord, "unknown status '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Phenomenon keys

/// Contiguous token run that must occur in a machine reference.
struct KeySegment {
  std::vector<std::string> tokens;
  /// Per token: was it sentence-initial in the variant it came from.
  std::vector<bool> initial;
};

struct PhenomenonKey {
  ErrorType error_type = ErrorType::kPlaceholderDing;
  std::vector<KeySegment> segments;

  std::vector<std::string> tokens() const {
    std::vector<std::string> out;
    for (const auto& s : segments) out.insert(out.end(), s.tokens.begin(), s.tokens.end());
    return out;
  }
};

namespace detail {

inline bool is_deletion_type(ErrorType t) {
  return t == ErrorType::kPolarityParticleNichtDel ||
         t == ErrorType::kPolarityParticleKeinDel ||
         t == ErrorType::kClauseOmission;
}

inline KeySegment key_segment(const TokenizedSentence& ts, std::size_t begin,
                              std::size_t end) {
  KeySegment seg;
  for (auto i = begin; i < end; ++i) {
    seg.tokens.push_back(ts[i]);
    seg.initial.push_back(starts_sentence(ts, i));
  }
  return seg;
}

// The clause of `ts` that ends right before token `at` (or starts at it
// when nothing precedes).
inline KeySegment preceding_clause(const TokenizedSentence& ts, std::size_t at,
                                   const RuleResources& res) {
  const auto clauses = RuleBasedSegmenter(res.abbreviations).segment(detokenize(ts));
  std::size_t begin = 0;
  for (const auto& c : clauses) {
    const auto n = tokenize(c).size();
    const auto end = begin + n;
    if ((at > 0 && end >= at) || (at == 0 && n > 0)) {
      return key_segment(ts, begin, std::min(end, ts.size()));
    }
    begin = end;
  }
  return key_segment(ts, 0, ts.size());
}

inline bool tokens_match(const std::string& key_tok, bool key_initial,
                         const TokenizedSentence& ref, std::size_t i) {
  if (ref[i] == key_tok) return true;
  if (key_initial || starts_sentence(ref, i)) {
    return text::lower_first(ref[i]) == text::lower_first(key_tok);
  }
  return false;
}

inline std::optional<Span> find_segment(const TokenizedSentence& ref,
                                        const KeySegment& seg) {
  const auto n = seg.tokens.size();
  if (n == 0 || n > ref.size()) return std::nullopt;
  for (std::size_t j = 0; j + n <= ref.size(); ++j) {
    bool ok = true;
    for (std::size_t t = 0; t < n && ok; ++t) {
      ok = tokens_match(seg.tokens[t], seg.initial[t], ref, j + t);
    }
    if (ok) return Span{j, j + n};
  }
  return std::nullopt;
}

}  // namespace detail

/// The phenomenon-bearing tokens of one variant:
///  - the span tokens (polarity word, replaced noun, agreement site);
///  - hypercorrect_genitive: the preceding preposition plus the span;
///  - deletions (empty span): the neighbours around the gap, or for
///    clause omission the clause the deleted one followed.
inline PhenomenonKey extract_phenomenon_key(std::string_view variant,
                                            ErrorType type,
                                            std::span<const Span> spans,
                                            const RuleResources& res) {
  if (spans.empty()) {
    throw Error(ErrorCode::kSpanOutOfRange, "no phenomenon span");
  }
  const auto ts = tokenize(variant);
  PhenomenonKey key{type, {}};
  for (const auto& sp : spans) {
    if (sp.begin > sp.end || sp.end > ts.size()) {
      throw Error(ErrorCode::kSpanOutOfRange,
                  "span [" + std::to_string(sp.begin) + "," +
                      std::to_string(sp.end) + ") outside " +
                      std::to_string(ts.size()) + " tokens");
    }
    if (sp.begin < sp.end) {
      const auto from =
          type == ErrorType::kHypercorrectGenitive && sp.begin > 0 ? sp.begin - 1
                                                                   : sp.begin;
      key.segments.push_back(detail::key_segment(ts, from, sp.end));
      continue;
    }
    if (!detail::is_deletion_type(type)) {
      throw Error(ErrorCode::kSpanOutOfRange,
                  "empty span for " + std::string(to_string(type)));
    }
    if (type == ErrorType::kClauseOmission) {
      key.segments.push_back(detail::preceding_clause(ts, sp.begin, res));
    } else {
      key.segments.push_back(detail::key_segment(
          ts, sp.begin > 0 ? sp.begin - 1 : 0, std::min(sp.begin + 1, ts.size())));
    }
    if (key.segments.back().tokens.empty()) {
      throw Error(ErrorCode::kSpanOutOfRange, "deletion site has no context");
    }
  }
  return key;
}

/// Location of every key segment in `reference`, or nullopt if one is
/// missing.
inline std::optional<std::vector<Span>> locate_key(const TokenizedSentence& reference,
                                                   const PhenomenonKey& key) {
  std::vector<Span> out;
  for (const auto& seg : key.segments) {
    const auto at = detail::find_segment(reference, seg);
    if (!at) return std::nullopt;
    out.push_back(*at);
  }
  return out;
}

inline bool contains_key(std::string_view reference, const PhenomenonKey& key) {
  return locate_key(tokenize(reference), key).has_value();
}

/// AUTO_ACCEPT if the machine reference carries the correct variant's key,
/// NEEDS_REVIEW if it carries the contrastive variant's key instead,
/// DROPPED otherwise. For placeholder_ding any candidate noun suffices.
inline ValidationStatus classify_candidate(std::string_view machine_reference,
                                           const MinimalPair& human,
                                           const RuleResources& res) {
  if (text::trim(machine_reference).empty()) return ValidationStatus::kDropped;
  const auto ref = tokenize(machine_reference);
  if (human.error_type == ErrorType::kPlaceholderDing) {
    return candidate_nouns(ref, res).empty() ? ValidationStatus::kDropped
                                             : ValidationStatus::kAutoAccept;
  }
  const auto correct = extract_phenomenon_key(human.correct, human.error_type,
                                              human.correct_spans, res);
  if (locate_key(ref, correct)) return ValidationStatus::kAutoAccept;
  const auto contrastive = extract_phenomenon_key(
      human.contrastive, human.error_type, human.contrastive_spans, res);
  if (locate_key(ref, contrastive)) return ValidationStatus::kNeedsReview;
  return ValidationStatus::kDropped;
}

// ---------------------------------------------------------------------------
// Records and decisions

struct ValidationRecord {
  /// Unique within a store; one sentence can carry pairs of several error
  /// types, so this is "<error_type>/<pair id>". Empty means human.id.
  std::string record_id;
  /// The human-reference minimal pair.
  MinimalPair human;
  std::string machine_reference;
  std::string engine_name;
  ValidationStatus status = ValidationStatus::kDropped;
  std::optional<std::string> reviewer_note;
  std::optional<std::string> manually_derived_correct;
  std::uint64_t version = 0;

  const std::string& id() const { return record_id.empty() ? human.id : record_id; }

  friend bool operator==(const ValidationRecord&, const ValidationRecord&) = default;
};

enum class Decision { kAccept, kMarkContrastive, kDrop };

constexpr std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::kAccept: return "accept";
    case Decision::kMarkContrastive: return "mark_contrastive";
    case Decision::kDrop: return "drop";
  }
  return "";
}

inline std::optional<Decision> parse_decision(std::string_view s) {
  if (s == "accept") return Decision::kAccept;
  if (s == "mark_contrastive") return Decision::kMarkContrastive;
  if (s == "drop") return Decision::kDrop;
  return std::nullopt;
}

struct DecisionRequest {
  std::string id;
  Decision decision = Decision::kAccept;
  std::uint64_t expected_version = 0;
  std::string reviewer;
  std::optional<std::string> manually_derived_correct;
  std::optional<std::string> reviewer_note;
};

inline bool is_terminal(ValidationStatus s) {
  return s == ValidationStatus::kAutoAccept || s == ValidationStatus::kDropped ||
         s == ValidationStatus::kUseAsContrastive;
}

/// Advances a NEEDS_REVIEW record by one decision. Pure; persistence lives
/// in RecordStore.
inline ValidationRecord apply_decision(const ValidationRecord& record,
                                       const DecisionRequest& req) {
  if (is_terminal(record.status)) {
    throw Error(ErrorCode::kIllegalTransition,
                record.id() + ": " + std::string(to_string(record.status)) +
                    " admits no decisions");
  }
  if (req.expected_version != record.version) {
    throw Error(ErrorCode::kVersionConflict,
                record.id() + ": expected version " +
                    std::to_string(req.expected_version) + ", record is at " +
                    std::to_string(record.version));
  }
  if (record.status != ValidationStatus::kNeedsReview) {
    throw Error(ErrorCode::kIllegalTransition,
                record.id() + ": already " + std::string(to_string(record.status)));
  }
  ValidationRecord out = record;
  switch (req.decision) {
    case Decision::kAccept:
      out.status = ValidationStatus::kReviewedAccept;
      break;
    case Decision::kDrop:
      out.status = ValidationStatus::kReviewedDrop;
      break;
    case Decision::kMarkContrastive: {
      const auto& fix = req.manually_derived_correct;
      if (!fix || text::trim(*fix).empty()) {
        throw Error(ErrorCode::kMissingCorrection,
                    record.id() + ": mark_contrastive needs manually_derived_correct");
      }
      if (*fix == record.machine_reference) {
        throw Error(ErrorCode::kMissingCorrection,
                    record.id() + ": corrected text equals the machine reference");
      }
      out.status = ValidationStatus::kReviewedContrastive;
      out.manually_derived_correct = *fix;
      break;
    }
  }
  if (req.reviewer_note) out.reviewer_note = req.reviewer_note;
  ++out.version;
  return out;
}

struct ValidationOutcome {
  std::vector<ValidationRecord> records;
  /// Machine references whose source matched no human pair.
  std::vector<std::string> unmatched_machine_ids;
  /// Further machine references for a source that already had one.
  std::vector<std::string> duplicate_machine_ids;
};

/// Pairs each human minimal pair with the machine reference translated from
/// the same source sentence and classifies it. Human pairs without a
/// machine reference yield no record.
inline ValidationOutcome validate_machine_refs(
    std::span<const MinimalPair> human_pairs,
    std::span<const SentencePair> machine_refs, const RuleResources& res) {
  ValidationOutcome out;
  std::unordered_map<std::string, const SentencePair*> by_source;
  std::unordered_map<std::string, bool> used_source;
  for (const auto& m : machine_refs) {
    if (!by_source.emplace(m.source, &m).second) {
      out.duplicate_machine_ids.push_back(m.id);
    }
  }
  for (const auto& h : human_pairs) {
    const auto it = by_source.find(h.source);
    if (it == by_source.end()) continue;
    used_source[h.source] = true;
    const auto& m = *it->second;
    ValidationRecord r;
    r.record_id = std::string(to_string(h.error_type)) + "/" + h.id;
    r.human = h;
    r.machine_reference = m.target;
    r.engine_name = m.origin.is_machine() ? m.origin.engine : m.dataset_tag;
    r.status = classify_candidate(m.target, h, res);
    out.records.push_back(std::move(r));
  }
  for (const auto& [src, m] : by_source) {
    if (!used_source.contains(src)) out.unmatched_machine_ids.push_back(m->id);
  }
  std::sort(out.unmatched_machine_ids.begin(), out.unmatched_machine_ids.end());
  return out;
}

/// Token spans where the two texts differ, after stripping the longest
/// common prefix and suffix.
inline std::pair<Span, Span> diff_spans(const TokenizedSentence& a,
                                        const TokenizedSentence& b) {
  std::size_t pre = 0;
  while (pre < a.size() && pre < b.size() && a[pre] == b[pre]) ++pre;
  std::size_t suf = 0;
  while (suf < a.size() - pre && suf < b.size() - pre &&
         a[a.size() - 1 - suf] == b[b.size() - 1 - suf]) {
    ++suf;
  }
  return {{pre, a.size() - suf}, {pre, b.size() - suf}};
}

struct MachineTestsetOptions {
  bool allow_unresolved = false;
  BuildOptions build;
};

/// Machine-reference minimal pairs: accepted references get the same rule
/// re-applied; reviewed-contrastive references become the contrastive
/// variant of the manually derived correct one; everything else is left
/// out. References the rule no longer applies to are reported as skipped.
inline TestsetResult build_machine_testset(std::span<const ValidationRecord> records,
                                           std::uint64_t seed,
                                           const RuleResources& res,
                                           const MachineTestsetOptions& opts = {}) {
  std::vector<std::string> pending;
  for (const auto& r : records) {
    if (r.status == ValidationStatus::kNeedsReview) pending.push_back(r.id());
  }
  if (!pending.empty() && !opts.allow_unresolved) {
    std::string ids;
    for (std::size_t i = 0; i < pending.size() && i < 20; ++i) {
      ids += (i ? ", " : "") + pending[i];
    }
    if (pending.size() > 20) ids += ", ...";
    throw Error(ErrorCode::kUnresolvedReviews,
                std::to_string(pending.size()) + " record(s) await review: " + ids);
  }
  TestsetResult out;
  for (const auto& r : records) {
    const auto origin = Origin::machine(r.engine_name);
    switch (r.status) {
      case ValidationStatus::kAutoAccept:
      case ValidationStatus::kReviewedAccept: {
        const SentencePair sp{r.human.id, r.human.source, r.machine_reference, origin,
                              "machine"};
        try {
          out.pairs.push_back(apply_rule(sp, r.human.error_type,
                                         pair_seed(seed, r.human.id), res, opts.build));
        } catch (const Error& e) {
          if (!is_skip_reason(e.code())) throw;
          out.skipped.push_back({r.human.id, e.code(), e.what()});
        }
        break;
      }
      case ValidationStatus::kReviewedContrastive: {
        MinimalPair p;
        p.id = r.human.id;
        p.error_type = r.human.error_type;
        p.source = r.human.source;
        p.correct = r.manually_derived_correct.value_or("");
        p.contrastive = r.machine_reference;
        const auto [c, k] = diff_spans(tokenize(p.correct), tokenize(p.contrastive));
        p.correct_spans = {c};
        p.contrastive_spans = {k};
        p.ref_origin = origin;
        out.pairs.push_back(std::move(p));
        break;
      }
      default:
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization: the test-set interchange record plus review fields

inline json to_json(const ValidationRecord& r) {
  json j = to_json(r.human);
  j["record_id"] = r.id();
  j["machine_reference"] = r.machine_reference;
  j["engine_name"] = r.engine_name;
  j["status"] = std::string(to_string(r.status));
  j["version"] = r.version;
  j["reviewer_note"] = r.reviewer_note ? json(*r.reviewer_note) : json(nullptr);
  j["manually_derived_correct"] =
      r.manually_derived_correct ? json(*r.manually_derived_correct) : json(nullptr);
  return j;
}

inline ValidationRecord validation_record_from_json(const json& j) {
  try {
    ValidationRecord r;
    r.human = minimal_pair_from_json(j);
    r.record_id = j.value("record_id", std::string());
    if (r.record_id == r.human.id) r.record_id.clear();
    r.machine_reference = j.at("machine_reference").get<std::string>();
    r.engine_name = j.at("engine_name").get<std::string>();
    r.status = parse_validation_status(j.at("status").get<std::string>());
    r.version = j.at("version").get<std::uint64_t>();
    if (j.contains("reviewer_note") && !j["reviewer_note"].is_null()) {
      r.reviewer_note = j["reviewer_note"].get<std::string>();
    }
    if (j.contains("manually_derived_correct") &&
        !j["manually_derived_correct"].is_null()) {
      r.manually_derived_correct = j["manually_derived_correct"].get<std::string>();
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, e.what());
  }
}

}  // namespace minpair

#endif  // MINPAIR_VALIDATE_HPP_
