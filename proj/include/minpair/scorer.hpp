#ifndef MINPAIR_SCORER_HPP_
#define MINPAIR_SCORER_HPP_

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "minpair/corpus.hpp"
#include "minpair/error.hpp"
#include "minpair/text.hpp"

namespace minpair {

/// Natural-log conditional probabilities, one per scored position. When a
/// target is scored the last entry belongs to the end-of-sequence position.
struct TokenLogProbs {
  std::vector<double> logprobs;

  std::size_t size() const { return logprobs.size(); }

  /// Throws InvalidLogProbs unless non-empty, finite and <= 0.
  void validate() const {
    if (logprobs.empty()) {
      throw Error(ErrorCode::kInvalidLogProbs, "no scored positions");
    }
    for (const double lp : logprobs) {
      if (!std::isfinite(lp) || lp > 0.0) {
        throw Error(ErrorCode::kInvalidLogProbs,
                    "log-probability out of range: " + std::to_string(lp));
      }
    }
  }

  friend bool operator==(const TokenLogProbs&, const TokenLogProbs&) = default;
};

/// Sum of token log-probabilities, without normalization.
inline double sequence_score(const TokenLogProbs& lp) {
  lp.validate();
  return std::accumulate(lp.logprobs.begin(), lp.logprobs.end(), 0.0);
}

/// Mean log-probability over all scored positions (target tokens plus EOS).
inline double length_normalized_score(const TokenLogProbs& lp) {
  return sequence_score(lp) / static_cast<double>(lp.size());
}

struct ScoreRequest {
  std::string id;
  std::string source;
  /// May be empty for table lookups of sequences whose text is unknown.
  std::vector<std::string> target_tokens;
};

/// Request ids combine the minimal-pair id with the scored variant
/// ("correct", "contrastive" or "onebest").
inline std::string make_request_id(std::string_view pair_id,
                                   std::string_view variant) {
  return std::string(pair_id) + "|" + std::string(variant);
}

enum class BackendKind { kTable, kNgram, kExternal };

inline std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::kTable: return "table";
    case BackendKind::kNgram: return "ngram";
    case BackendKind::kExternal: return "external";
  }
  return "";
}

/// A model that assigns per-position log-probabilities to a target given a
/// source. Implementations must return identical results for identical
/// requests.
class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;

  virtual const std::string& name() const = 0;
  virtual BackendKind kind() const = 0;
  /// Unit of the positions being averaged ("token", "subword", ...).
  virtual std::string length_unit() const { return "token"; }

  /// One result per request, in request order.
  virtual std::vector<TokenLogProbs> score_batch(
      std::span<const ScoreRequest> requests) = 0;

  TokenLogProbs score(const ScoreRequest& request) {
    return std::move(score_batch(std::span(&request, 1)).front());
  }
};

/// Length-normalized score of `request.target_tokens` given its source.
inline double conditional_score(ScorerBackend& backend,
                                const ScoreRequest& request) {
  TokenLogProbs lp;
  try {
    lp = backend.score(request);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kBackendFailure) throw;
    throw Error(ErrorCode::kBackendFailure,
                backend.name() + ": " + request.id + ": " + e.what());
  }
  return length_normalized_score(lp);
}

inline double conditional_score(ScorerBackend& backend, std::string id,
                                std::string source, std::string_view target) {
  if (text::trim(target).empty()) {
    throw Error(ErrorCode::kEmptyTarget, "empty target for " + id);
  }
  return conditional_score(
      backend, {std::move(id), std::move(source), tokenize(target).tokens});
}

// ---------------------------------------------------------------------------
// Score tables: pair_id \t variant \t comma-separated log-probabilities

inline std::string format_logprob(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<double> parse_logprob_list(std::string_view s,
                                              const std::string& where) {
  std::vector<double> out;
  for (const auto& field : text::split(s, ',')) {
    const std::string f(text::trim(field));
    char* end = nullptr;
    const double v = std::strtod(f.c_str(), &end);
    if (f.empty() || end != f.c_str() + f.size()) {
      throw Error(ErrorCode::kMalformedRow,
                  where + ": bad log-probability '" + f + "'");
    }
    out.push_back(v);
  }
  return out;
}

struct ScoreTableRow {
  std::string pair_id;
  std::string variant;
  TokenLogProbs logprobs;
};

inline std::vector<ScoreTableRow> read_score_table(
    const std::filesystem::path& path) {
  std::vector<ScoreTableRow> rows;
  const auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const auto cols = text::split(lines[i], '\t');
    if (cols.size() != 3) {
      throw Error(ErrorCode::kMalformedRow,
                  where + ": expected pair_id, variant, logprob list");
    }
    TokenLogProbs lp{parse_logprob_list(cols[2], where)};
    try {
      lp.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedRow, where + ": " + e.what());
    }
    rows.push_back({cols[0], cols[1], std::move(lp)});
  }
  return rows;
}

inline std::string format_score_table(std::span<const ScoreTableRow> rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.pair_id;
    out += '\t';
    out += r.variant;
    out += '\t';
    for (std::size_t i = 0; i < r.logprobs.size(); ++i) {
      if (i > 0) out += ',';
      out += format_logprob(r.logprobs.logprobs[i]);
    }
    out += '\n';
  }
  return out;
}

/// Precomputed log-probabilities looked up by request id.
class TableBackend : public ScorerBackend {
 public:
  TableBackend(std::string name, std::span<const ScoreTableRow> rows)
      : name_(std::move(name)) {
    for (const auto& r : rows) {
      const auto key = make_request_id(r.pair_id, r.variant);
      if (!table_.emplace(key, r.logprobs).second) {
        throw Error(ErrorCode::kDuplicateId, "score table: duplicate " + key);
      }
    }
  }

  static TableBackend load(std::string name, const std::filesystem::path& path) {
    const auto rows = read_score_table(path);
    return TableBackend(std::move(name), rows);
  }

  const std::string& name() const override { return name_; }
  BackendKind kind() const override { return BackendKind::kTable; }

  bool contains(const std::string& request_id) const {
    return table_.contains(request_id);
  }

  std::vector<TokenLogProbs> score_batch(
      std::span<const ScoreRequest> requests) override {
    std::vector<TokenLogProbs> out;
    out.reserve(requests.size());
    for (const auto& r : requests) {
      const auto it = table_.find(r.id);
      if (it == table_.end()) {
        throw Error(ErrorCode::kBackendFailure,
                    name_ + ": no score table entry for " + r.id);
      }
      if (!r.target_tokens.empty() &&
          it->second.size() != r.target_tokens.size() + 1) {
        throw Error(ErrorCode::kBackendFailure,
                    name_ + ": " + r.id + " has " +
                        std::to_string(it->second.size()) +
                        " log-probabilities for " +
                        std::to_string(r.target_tokens.size()) +
                        " tokens (+EOS)");
      }
      out.push_back(it->second);
    }
    return out;
  }

 private:
  std::string name_;
  std::unordered_map<std::string, TokenLogProbs> table_;
};

// ---------------------------------------------------------------------------
// Add-k smoothed n-gram model over target-side tokens

class NgramModel {
 public:
  static constexpr std::string_view kBos = "<s>";
  static constexpr std::string_view kEos = "</s>";
  static constexpr std::string_view kUnk = "<unk>";

  /// Vocabulary is every training token plus <unk> and </s>; <s> only
  /// appears in histories.
  static NgramModel train(std::span<const std::string> sentences,
                          std::size_t order, double k) {
    if (sentences.empty()) {
      throw Error(ErrorCode::kEmptyCorpus, "n-gram training corpus is empty");
    }
    if (order < 1) throw Error(ErrorCode::kConfig, "n-gram order must be >= 1");
    if (!(k > 0.0)) throw Error(ErrorCode::kConfig, "smoothing k must be > 0");
    NgramModel m;
    m.order_ = order;
    m.k_ = k;
    m.vocab_.emplace(kUnk);
    m.vocab_.emplace(kEos);
    std::vector<std::vector<std::string>> tokenized;
    tokenized.reserve(sentences.size());
    for (const auto& s : sentences) {
      if (text::trim(s).empty()) continue;
      auto toks = tokenize(s).tokens;
      for (const auto& t : toks) m.vocab_.insert(t);
      tokenized.push_back(std::move(toks));
    }
    if (tokenized.empty()) {
      throw Error(ErrorCode::kEmptyCorpus, "n-gram training corpus is empty");
    }
    for (const auto& toks : tokenized) {
      m.for_each_event(toks, [&](const std::string& history,
                                 const std::string& word) {
        auto& h = m.counts_[history];
        ++h.total;
        ++h.next[word];
      });
    }
    return m;
  }

  std::size_t order() const { return order_; }
  double k() const { return k_; }
  std::size_t vocabulary_size() const { return vocab_.size(); }
  const std::set<std::string>& vocabulary() const { return vocab_; }

  /// log p(word | history); history holds the preceding tokens (the last
  /// order-1 of them are used, padded with <s>).
  double logprob(std::span<const std::string> history,
                 const std::string& word) const {
    return logprob_key(history_key(history), word);
  }

  double prob(std::span<const std::string> history,
              const std::string& word) const {
    return std::exp(logprob(history, word));
  }

  /// Log-probabilities of every token followed by </s>.
  TokenLogProbs score(std::span<const std::string> tokens) const {
    TokenLogProbs out;
    out.logprobs.reserve(tokens.size() + 1);
    std::vector<std::string> toks(tokens.begin(), tokens.end());
    for_each_event(toks, [&](const std::string& history, const std::string& word) {
      out.logprobs.push_back(logprob_key(history, word));
    });
    return out;
  }

  std::size_t history_count(std::span<const std::string> history) const {
    const auto it = counts_.find(history_key(history));
    return it == counts_.end() ? 0 : it->second.total;
  }

 private:
  struct HistoryCounts {
    std::size_t total = 0;
    std::unordered_map<std::string, std::size_t> next;
  };

  std::string in_vocab(const std::string& w) const {
    return vocab_.contains(w) ? w : std::string(kUnk);
  }

  std::string history_key(std::span<const std::string> history) const {
    std::string key;
    const std::size_t need = order_ - 1;
    for (std::size_t i = 0; i < need; ++i) {
      // position counted back from the end of the history
      const std::size_t back = need - i;
      if (i > 0) key += '\x1f';
      key += back <= history.size()
                 ? (history[history.size() - back] == kBos
                        ? std::string(kBos)
                        : in_vocab(history[history.size() - back]))
                 : std::string(kBos);
    }
    return key;
  }

  double logprob_key(const std::string& key, const std::string& word) const {
    const auto w = in_vocab(word);
    std::size_t c_hw = 0;
    std::size_t c_h = 0;
    if (const auto it = counts_.find(key); it != counts_.end()) {
      c_h = it->second.total;
      if (const auto jt = it->second.next.find(w); jt != it->second.next.end()) {
        c_hw = jt->second;
      }
    }
    const double v = static_cast<double>(vocab_.size());
    return std::log((static_cast<double>(c_hw) + k_) /
                    (static_cast<double>(c_h) + k_ * v));
  }

  template <typename Fn>
  void for_each_event(const std::vector<std::string>& toks, Fn&& fn) const {
    std::vector<std::string> padded(order_ - 1, std::string(kBos));
    padded.insert(padded.end(), toks.begin(), toks.end());
    padded.emplace_back(kEos);
    for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
      const std::span<const std::string> history(padded.data(), i);
      fn(history_key(history), padded[i]);
    }
  }

  std::size_t order_ = 1;
  double k_ = 1.0;
  std::set<std::string> vocab_;
  std::unordered_map<std::string, HistoryCounts> counts_;
};

/// Built-in oracle backend. Ignores the source sentence.
class NgramBackend : public ScorerBackend {
 public:
  NgramBackend(std::string name, NgramModel model)
      : name_(std::move(name)), model_(std::move(model)) {}

  const std::string& name() const override { return name_; }
  BackendKind kind() const override { return BackendKind::kNgram; }
  const NgramModel& model() const { return model_; }

  std::vector<TokenLogProbs> score_batch(
      std::span<const ScoreRequest> requests) override {
    std::vector<TokenLogProbs> out;
    out.reserve(requests.size());
    for (const auto& r : requests) {
      if (r.target_tokens.empty()) {
        throw Error(ErrorCode::kEmptyTarget, name_ + ": empty target for " + r.id);
      }
      out.push_back(model_.score(r.target_tokens));
    }
    return out;
  }

 private:
  std::string name_;
  NgramModel model_;
};

}  // namespace minpair

#endif  // MINPAIR_SCORER_HPP_
