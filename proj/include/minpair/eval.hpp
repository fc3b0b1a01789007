#ifndef MINPAIR_EVAL_HPP_
#define MINPAIR_EVAL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "minpair/corpus.hpp"
#include "minpair/error.hpp"
#include "minpair/perturb.hpp"
#include "minpair/scorer.hpp"

namespace minpair {

enum class Verdict { kCorrectPreferred, kContrastivePreferred, kTie };

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kCorrectPreferred: return "CORRECT_PREFERRED";
    case Verdict::kContrastivePreferred: return "CONTRASTIVE_PREFERRED";
    case Verdict::kTie: return "TIE";
  }
  return "";
}

struct JudgedPair {
  std::string id;
  double score_correct = 0.0;
  double score_contrastive = 0.0;
  Verdict verdict = Verdict::kTie;
};

inline Verdict judge_pair(double score_correct, double score_contrastive) {
  if (!std::isfinite(score_correct) || !std::isfinite(score_contrastive)) {
    throw Error(ErrorCode::kNonFiniteScore, "cannot judge a non-finite score");
  }
  if (score_correct > score_contrastive) return Verdict::kCorrectPreferred;
  if (score_correct < score_contrastive) return Verdict::kContrastivePreferred;
  return Verdict::kTie;
}

inline JudgedPair judge(std::string id, double score_correct,
                        double score_contrastive) {
  try {
    return {std::move(id), score_correct, score_contrastive,
            judge_pair(score_correct, score_contrastive)};
  } catch (const Error& e) {
    throw Error(e.code(), id + ": " + e.what());
  }
}

enum class TiePolicy { kLoss, kHalf };

constexpr std::string_view to_string(TiePolicy p) {
  return p == TiePolicy::kLoss ? "tie_counts_as_loss" : "tie_counts_as_half";
}

/// Percentage of pairs whose correct variant scores higher.
inline double accuracy(std::span<const JudgedPair> judged,
                       TiePolicy ties = TiePolicy::kLoss) {
  if (judged.empty()) throw Error(ErrorCode::kEmptyTestset, "accuracy of empty set");
  double wins = 0.0;
  for (const auto& j : judged) {
    if (j.verdict == Verdict::kCorrectPreferred) wins += 1.0;
    if (j.verdict == Verdict::kTie && ties == TiePolicy::kHalf) wins += 0.5;
  }
  return 100.0 * wins / static_cast<double>(judged.size());
}

struct DiscrepancyInput {
  double score_onebest = 0.0;
  double score_preferred = 0.0;

  static DiscrepancyInput of(double onebest, double correct, double contrastive) {
    return {onebest, std::max(correct, contrastive)};
  }
};

/// Mean gap between the 1-best score and the preferred variant's score.
inline double discrepancy(std::span<const DiscrepancyInput> inputs) {
  if (inputs.empty()) {
    throw Error(ErrorCode::kEmptyTestset, "discrepancy of empty set");
  }
  double sum = 0.0;
  for (const auto& in : inputs) sum += in.score_onebest - in.score_preferred;
  return sum / static_cast<double>(inputs.size());
}

struct RunStats {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and sample standard deviation (n-1); std is 0 for one value.
inline RunStats aggregate_runs(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyTestset, "no runs to aggregate");
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double sq = 0.0;
  for (const double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

// ---------------------------------------------------------------------------
// Scoring a test set

enum class TestsetType { kHuman, kMachine };

constexpr std::string_view to_string(TestsetType t) {
  return t == TestsetType::kHuman ? "human" : "machine";
}

inline TestsetType testset_type_of(std::span<const MinimalPair> pairs) {
  for (const auto& p : pairs) {
    if (p.ref_origin.is_machine()) return TestsetType::kMachine;
  }
  return TestsetType::kHuman;
}

struct PairJudgment {
  JudgedPair judged;
  std::optional<double> score_onebest;
};

struct BackendResult {
  std::string backend;
  /// Runs sharing a group (e.g. seeds of one architecture) are averaged in
  /// reports; different groups never are.
  std::string group;
  std::string length_unit = "token";
  std::size_t n_pairs = 0;
  std::size_t n_ties = 0;
  double accuracy = 0.0;
  /// Pairs with a scored 1-best translation.
  std::size_t n_onebest = 0;
  std::optional<double> discrepancy;
};

struct EvalReport {
  ErrorType error_type = ErrorType::kPlaceholderDing;
  TestsetType testset_type = TestsetType::kHuman;
  std::vector<BackendResult> results;
};

struct ScoredTestset {
  BackendResult result;
  std::vector<PairJudgment> judgments;
};

/// Scores every pair (and its 1-best translation, where known) with one
/// backend. `onebest` maps pair ids to 1-best target text; a table backend
/// may also supply 1-best scores for ids without text.
inline ScoredTestset score_testset(
    ScorerBackend& backend, std::span<const MinimalPair> pairs,
    const std::unordered_map<std::string, std::string>& onebest,
    const std::string& group, TiePolicy ties = TiePolicy::kLoss) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyTestset, "test set is empty");
  const auto* table = dynamic_cast<const TableBackend*>(&backend);
  std::vector<ScoreRequest> requests;
  std::vector<std::optional<std::size_t>> onebest_slot(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    requests.push_back({make_request_id(p.id, "correct"), p.source,
                        tokenize(p.correct).tokens});
    requests.push_back({make_request_id(p.id, "contrastive"), p.source,
                        tokenize(p.contrastive).tokens});
    const auto rid = make_request_id(p.id, "onebest");
    if (const auto it = onebest.find(p.id); it != onebest.end()) {
      onebest_slot[i] = requests.size();
      requests.push_back({rid, p.source, tokenize(it->second).tokens});
    } else if (table != nullptr && table->contains(rid)) {
      onebest_slot[i] = requests.size();
      requests.push_back({rid, p.source, {}});
    }
  }
  std::vector<TokenLogProbs> lps;
  try {
    lps = backend.score_batch(requests);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kBackendFailure ||
        e.code() == ErrorCode::kProtocolViolation ||
        e.code() == ErrorCode::kTimeout) {
      throw;
    }
    throw Error(ErrorCode::kBackendFailure, backend.name() + ": " + e.what());
  }

  ScoredTestset out;
  std::vector<JudgedPair> judged;
  std::vector<DiscrepancyInput> gaps;
  std::size_t next = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double c = length_normalized_score(lps[next++]);
    const double k = length_normalized_score(lps[next++]);
    PairJudgment pj{judge(pairs[i].id, c, k), std::nullopt};
    if (onebest_slot[i]) {
      pj.score_onebest = length_normalized_score(lps[next++]);
      gaps.push_back(DiscrepancyInput::of(*pj.score_onebest, c, k));
    }
    if (pj.judged.verdict == Verdict::kTie) ++out.result.n_ties;
    judged.push_back(pj.judged);
    out.judgments.push_back(std::move(pj));
  }
  out.result.backend = backend.name();
  out.result.group = group;
  out.result.length_unit = backend.length_unit();
  out.result.n_pairs = pairs.size();
  out.result.accuracy = accuracy(judged, ties);
  out.result.n_onebest = gaps.size();
  if (!gaps.empty()) out.result.discrepancy = discrepancy(gaps);
  return out;
}

// ---------------------------------------------------------------------------
// Reports

/// One decimal, halves rounded away from zero. The value is nudged by a few
/// ulps first so that e.g. 0.05 (stored as 0.05000000000000000277) and
/// 0.15 (stored as 0.1499999999999999944) both round up.
inline std::string format_one_decimal(double v) {
  const double scaled = v * 10.0;
  double r = std::round(scaled + std::copysign(1e-9 * std::max(1.0, std::fabs(scaled)),
                                               scaled));
  if (r == 0.0) r = 0.0;  // no "-0.0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", r / 10.0);
  return buf;
}

inline std::string format_cell(std::span<const double> runs) {
  if (runs.empty()) return "—";
  const auto s = aggregate_runs(runs);
  return format_one_decimal(s.mean) + "±" + format_one_decimal(s.std);
}

enum class ReportFormat { kTsv, kMarkdown };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "tsv") return ReportFormat::kTsv;
  if (s == "markdown" || s == "md") return ReportFormat::kMarkdown;
  throw Error(ErrorCode::kConfig, "unknown report format '" + std::string(s) + "'");
}

/// Groups in order of first appearance.
inline std::vector<std::string> report_groups(std::span<const EvalReport> reports) {
  std::vector<std::string> groups;
  for (const auto& r : reports) {
    for (const auto& b : r.results) {
      if (std::find(groups.begin(), groups.end(), b.group) == groups.end()) {
        groups.push_back(b.group);
      }
    }
  }
  return groups;
}

/// Reports in row order: error type, then human before machine. Reports for
/// the same row are merged.
inline std::vector<EvalReport> sorted_reports(std::span<const EvalReport> reports) {
  std::map<std::pair<ErrorType, TestsetType>, EvalReport> rows;
  for (const auto& r : reports) {
    auto& row = rows[{r.error_type, r.testset_type}];
    row.error_type = r.error_type;
    row.testset_type = r.testset_type;
    row.results.insert(row.results.end(), r.results.begin(), r.results.end());
  }
  std::vector<EvalReport> out;
  for (auto& [key, r] : rows) out.push_back(std::move(r));
  return out;
}

/// One row per (error type, test set type); discrepancy
/// columns then accuracy columns, one per backend group, as mean±std.
inline std::string render_report(std::span<const EvalReport> reports,
                                 ReportFormat format) {
  const auto rows = sorted_reports(reports);
  const auto groups = report_groups(rows);
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header = {"error_type", "testset_type"};
  for (const auto& g : groups) header.push_back("discrepancy " + g);
  for (const auto& g : groups) header.push_back("accuracy " + g);
  table.push_back(header);
  for (const auto& r : rows) {
    std::vector<std::string> line = {std::string(to_string(r.error_type)),
                                     std::string(to_string(r.testset_type)) +
                                         " references"};
    for (const bool disc : {true, false}) {
      for (const auto& g : groups) {
        std::vector<double> runs;
        for (const auto& b : r.results) {
          if (b.group != g) continue;
          if (disc && b.discrepancy) runs.push_back(*b.discrepancy);
          if (!disc) runs.push_back(b.accuracy);
        }
        line.push_back(format_cell(runs));
      }
    }
    table.push_back(std::move(line));
  }

  std::string out;
  if (format == ReportFormat::kTsv) {
    for (const auto& line : table) out += text::join(line, "\t") + "\n";
    return out;
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    out += "| " + text::join(table[i], " | ") + " |\n";
    if (i == 0) {
      out += "|";
      for (std::size_t c = 0; c < table[i].size(); ++c) {
        out += c < 2 ? " --- |" : " ---: |";
      }
      out += "\n";
    }
  }
  return out;
}

/// Full-precision companion records, one per (error type, test set type,
/// backend).
inline std::string render_report_jsonl(std::span<const EvalReport> reports,
                                       TiePolicy ties) {
  std::string out;
  for (const auto& r : sorted_reports(reports)) {
    for (const auto& b : r.results) {
      json j;
      j["error_type"] = to_string(r.error_type);
      j["testset_type"] = to_string(r.testset_type);
      j["backend"] = b.backend;
      j["group"] = b.group;
      j["n_pairs"] = b.n_pairs;
      j["n_ties"] = b.n_ties;
      j["accuracy"] = b.accuracy;
      j["n_onebest"] = b.n_onebest;
      j["discrepancy"] = b.discrepancy ? json(*b.discrepancy) : json(nullptr);
      j["length_unit"] = b.length_unit;
      j["tie_policy"] = to_string(ties);
      j["score"] = "mean log-probability over target tokens and EOS, all sequences";
      out += j.dump() + "\n";
    }
  }
  return out;
}

inline std::vector<EvalReport> reports_from_jsonl(const std::filesystem::path& path) {
  std::vector<EvalReport> out;
  for (const auto& j : read_jsonl(path)) {
    try {
      EvalReport r;
      r.error_type = parse_error_type(j.at("error_type").get<std::string>());
      const auto tt = j.at("testset_type").get<std::string>();
      if (tt != "human" && tt != "machine") {
        throw Error(ErrorCode::kMalformedRecord, "bad testset_type " + tt);
      }
      r.testset_type = tt == "human" ? TestsetType::kHuman : TestsetType::kMachine;
      BackendResult b;
      b.backend = j.at("backend").get<std::string>();
      b.group = j.at("group").get<std::string>();
      b.n_pairs = j.at("n_pairs").get<std::size_t>();
      b.n_ties = j.value("n_ties", std::size_t{0});
      b.accuracy = j.at("accuracy").get<double>();
      b.n_onebest = j.value("n_onebest", std::size_t{0});
      if (j.contains("discrepancy") && !j["discrepancy"].is_null()) {
        b.discrepancy = j["discrepancy"].get<double>();
      }
      b.length_unit = j.value("length_unit", std::string("token"));
      r.results.push_back(std::move(b));
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, path.string() + ": " + e.what());
    }
  }
  return out;
}

inline std::string judgments_jsonl(std::span<const PairJudgment> judgments) {
  std::string out;
  for (const auto& pj : judgments) {
    json j;
    j["id"] = pj.judged.id;
    j["score_correct"] = pj.judged.score_correct;
    j["score_contrastive"] = pj.judged.score_contrastive;
    j["score_onebest"] = pj.score_onebest ? json(*pj.score_onebest) : json(nullptr);
    j["verdict"] = to_string(pj.judged.verdict);
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace minpair

#endif  // MINPAIR_EVAL_HPP_
