#ifndef MINPAIR_BACKENDS_HPP_
#define MINPAIR_BACKENDS_HPP_

#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "minpair/corpus.hpp"
#include "minpair/external.hpp"
#include "minpair/scorer.hpp"

namespace minpair {

/// A `NAME=KIND:LOCATION` backend declaration. A NAME of the form
/// "group/run" puts the backend in that group; otherwise the name is the
/// group.
struct BackendSpec {
  std::string name;
  std::string group;
  BackendKind kind = BackendKind::kTable;
  std::string location;
};

inline BackendKind parse_backend_kind(std::string_view s) {
  if (s == "table") return BackendKind::kTable;
  if (s == "ngram") return BackendKind::kNgram;
  if (s == "external") return BackendKind::kExternal;
  throw Error(ErrorCode::kConfig,
              "unknown backend kind '" + std::string(s) + "' (table, ngram, external)");
}

inline BackendSpec parse_backend_spec(std::string_view spec) {
  const auto eq = spec.find('=');
  const auto colon = eq == std::string_view::npos ? eq : spec.find(':', eq + 1);
  if (eq == 0 || colon == std::string_view::npos || colon + 1 == spec.size()) {
    throw Error(ErrorCode::kConfig, "backend '" + std::string(spec) +
                                        "' is not NAME=KIND:LOCATION");
  }
  BackendSpec b;
  b.name = std::string(spec.substr(0, eq));
  b.kind = parse_backend_kind(spec.substr(eq + 1, colon - eq - 1));
  b.location = std::string(spec.substr(colon + 1));
  const auto slash = b.name.find('/');
  b.group = slash == std::string::npos ? b.name : b.name.substr(0, slash);
  if (b.group.empty()) {
    throw Error(ErrorCode::kConfig, "backend '" + b.name + "' has an empty group");
  }
  return b;
}

struct BackendOptions {
  std::size_t ngram_order = 3;
  double ngram_k = 0.1;
  std::size_t connections = 1;
  ExternalOptions external;
};

/// Target sentences for n-gram training: the targets of a corpus .jsonl,
/// otherwise one sentence per line (the last column of tab-separated lines).
inline std::vector<std::string> read_training_text(const std::filesystem::path& path) {
  std::vector<std::string> out;
  if (path.extension() == ".jsonl") {
    for (const auto& p : read_corpus(path)) out.push_back(p.target);
    return out;
  }
  for (const auto& line : text::read_lines(path)) {
    const auto tab = line.rfind('\t');
    const auto s = text::trim(tab == std::string::npos ? std::string_view(line)
                                                       : std::string_view(line).substr(tab + 1));
    if (!s.empty()) out.emplace_back(s);
  }
  return out;
}

/// File-safe rendering of a backend name ("transformer/1" -> "transformer_1").
inline std::string sanitize_name(std::string_view name) {
  std::string out;
  for (const char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

/// Builds backends lazily. A table location may be a directory holding one
/// `<testset stem>.tsv` per test set file, so pair ids need only be unique
/// within a file.
class BackendFactory {
 public:
  BackendFactory(BackendSpec spec, BackendOptions options)
      : spec_(std::move(spec)), options_(std::move(options)) {}

  const BackendSpec& spec() const { return spec_; }

  ScorerBackend& for_testset(const std::filesystem::path& testset) {
    if (spec_.kind == BackendKind::kTable) {
      auto table = std::filesystem::path(spec_.location);
      if (std::filesystem::is_directory(table)) {
        table /= testset.stem().string() + ".tsv";
      }
      auto& slot = tables_[table.string()];
      if (!slot) {
        if (!std::filesystem::exists(table)) {
          throw Error(ErrorCode::kIo, spec_.name + ": no score table " + table.string());
        }
        slot = std::make_unique<TableBackend>(TableBackend::load(spec_.name, table));
      }
      return *slot;
    }
    if (!shared_) {
      if (spec_.kind == BackendKind::kNgram) {
        const auto text = read_training_text(spec_.location);
        shared_ = std::make_unique<NgramBackend>(
            spec_.name, NgramModel::train(text, options_.ngram_order, options_.ngram_k));
      } else {
        shared_ = ExternalBackend::connect(spec_.name, spec_.location,
                                           options_.connections, options_.external);
      }
    }
    return *shared_;
  }

 private:
  BackendSpec spec_;
  BackendOptions options_;
  std::unordered_map<std::string, std::unique_ptr<TableBackend>> tables_;
  std::unique_ptr<ScorerBackend> shared_;
};

/// 1-best translations keyed by sentence id: a corpus .jsonl (targets) or
/// `id<TAB>text` lines.
inline std::unordered_map<std::string, std::string> read_onebest(
    const std::filesystem::path& path) {
  std::unordered_map<std::string, std::string> out;
  if (path.extension() == ".jsonl") {
    for (const auto& p : read_corpus(path)) out[p.id] = p.target;
    return out;
  }
  const auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto tab = lines[i].find('\t');
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorCode::kMalformedRow, where + ": expected id<TAB>translation");
    }
    const auto t = text::trim(std::string_view(lines[i]).substr(tab + 1));
    if (t.empty()) throw Error(ErrorCode::kMalformedRow, where + ": empty translation");
    if (!out.emplace(lines[i].substr(0, tab), std::string(t)).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": duplicate id " + lines[i].substr(0, tab));
    }
  }
  return out;
}

}  // namespace minpair

#endif  // MINPAIR_BACKENDS_HPP_
