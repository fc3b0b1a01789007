// minpair: contrastive minimal-pair evaluation pipeline.
//
//   ingest -> filter -> generate -> score / evaluate -> report
//   generate -> validate -> serve-review -> build-machine-set

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "minpair/backends.hpp"
#include "minpair/config.hpp"
#include "minpair/eval.hpp"
#include "minpair/record_store.hpp"
#include "minpair/review_service.hpp"
#include "minpair/validate.hpp"

namespace fs = std::filesystem;
using namespace minpair;

namespace {

struct Args {
  std::string config;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string resources = MINPAIR_DEFAULT_RESOURCES;
  std::string format = "tsv";
  std::vector<std::string> error_types;
  std::vector<std::string> backends;
  std::size_t max_tokens = 250;
  double max_ratio = 1.5;
  std::size_t ngram_order = 3;
  double ngram_k = 0.1;
  std::size_t timeout_ms = 60000;
  std::size_t connections = 1;
  std::size_t batch_size = 512;
  std::string tie_policy = "loss";

  // ingest
  std::string src, tgt, tag, name = "corpus", origin = "human";
  std::vector<std::string> tsv;
  // filter, generate
  std::string corpus;
  std::optional<std::size_t> clause_index;
  // score, evaluate, validate
  std::vector<std::string> testsets;
  std::vector<std::string> onebest;
  std::string machine;
  std::string store;
  // build-machine-set
  bool allow_unresolved = false;
  // report
  std::vector<std::string> inputs;
  // serve-review
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui;
};

/// Everything a command writes goes through here so each artifact gets a
/// `<name>.meta.json` sidecar; the artifact itself carries no timestamps.
class Artifacts {
 public:
  Artifacts(std::string command, std::vector<std::string> argv, std::uint64_t seed,
            fs::path dir)
      : command_(std::move(command)), argv_(std::move(argv)), seed_(seed),
        dir_(std::move(dir)) {}

  void input(const fs::path& p) { inputs_.push_back(p.string()); }
  const fs::path& dir() const { return dir_; }

  fs::path write(const fs::path& rel, const std::string& content) {
    const auto path = dir_ / rel;
    fs::create_directories(path.parent_path());
    text::write_file_atomic(path, content);
    json meta;
    meta["artifact"] = rel.string();
    meta["command"] = command_;
    meta["seed"] = seed_;
    meta["argv"] = argv_;
    meta["inputs"] = inputs_;
    meta["created"] = utc_timestamp();
    text::write_file_atomic(path.string() + ".meta.json", meta.dump(2) + "\n");
    return path;
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::uint64_t seed_;
  fs::path dir_;
  std::vector<std::string> inputs_;
};

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorCode::kConfig, std::string(flag) + " is required");
}

template <typename T>
void require(const std::vector<T>& values, const char* flag) {
  if (values.empty()) throw Error(ErrorCode::kConfig, std::string(flag) + " is required");
}

std::vector<ErrorType> selected_types(const Args& a) {
  if (a.error_types.empty()) {
    return {kAllErrorTypes.begin(), kAllErrorTypes.end()};
  }
  std::vector<ErrorType> out;
  for (const auto& t : a.error_types) {
    const auto type = parse_error_type(t);
    if (std::find(out.begin(), out.end(), type) == out.end()) out.push_back(type);
  }
  return out;
}

RuleResources load_resources(const Args& a) { return RuleResources::load(a.resources); }

BackendOptions backend_options(const Args& a) {
  BackendOptions o;
  o.ngram_order = a.ngram_order;
  o.ngram_k = a.ngram_k;
  o.connections = a.connections;
  o.external.timeout = std::chrono::milliseconds(a.timeout_ms);
  o.external.batch_size = a.batch_size;
  return o;
}

TiePolicy tie_policy(const Args& a) {
  if (a.tie_policy == "loss") return TiePolicy::kLoss;
  if (a.tie_policy == "half") return TiePolicy::kHalf;
  throw Error(ErrorCode::kConfig, "tie policy must be loss or half");
}

std::string skipped_jsonl(std::span<const SkippedPair> skipped) {
  std::string out;
  for (const auto& s : skipped) {
    out += json{{"id", s.id}, {"reason", to_string(s.reason)}, {"message", s.message}}
               .dump() +
           "\n";
  }
  return out;
}

std::string testset_jsonl(std::span<const MinimalPair> pairs) {
  std::vector<json> lines;
  for (const auto& p : pairs) lines.push_back(to_json(p));
  return dump_jsonl(lines);
}

/// `--onebest PATH` applies to every backend, `--onebest NAME=PATH` to one.
class OnebestSource {
 public:
  OnebestSource(const std::vector<std::string>& specs, Artifacts& art) {
    for (const auto& s : specs) {
      const auto eq = s.find('=');
      const bool named = eq != std::string::npos && !fs::exists(s);
      const fs::path path = named ? s.substr(eq + 1) : s;
      art.input(path);
      (named ? by_backend_[s.substr(0, eq)] : shared_) = read_onebest(path);
    }
  }

  const std::unordered_map<std::string, std::string>& for_backend(
      const std::string& name) const {
    const auto it = by_backend_.find(name);
    return it == by_backend_.end() ? shared_ : it->second;
  }

 private:
  std::unordered_map<std::string, std::string> shared_;
  std::map<std::string, std::unordered_map<std::string, std::string>> by_backend_;
};

std::vector<BackendFactory> backend_factories(const Args& a) {
  require(a.backends, "--backend");
  std::vector<BackendFactory> out;
  std::set<std::string> names;
  for (const auto& s : a.backends) {
    auto spec = parse_backend_spec(s);
    if (!names.insert(spec.name).second) {
      throw Error(ErrorCode::kConfig, "backend " + spec.name + " declared twice");
    }
    out.emplace_back(std::move(spec), backend_options(a));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_ingest(const Args& a, Artifacts& art) {
  const auto origin = Origin::parse(a.origin);
  std::vector<SentencePair> pairs;
  if (!a.src.empty() || !a.tgt.empty()) {
    require(a.src, "--src");
    require(a.tgt, "--tgt");
    art.input(a.src);
    art.input(a.tgt);
    auto got = read_parallel(a.src, a.tgt,
                             a.tag.empty() ? fs::path(a.src).stem().string() : a.tag, origin);
    pairs.insert(pairs.end(), got.begin(), got.end());
  }
  for (const auto& t : a.tsv) {
    art.input(t);
    auto got = read_tsv(t, a.tag.empty() ? fs::path(t).stem().string() : a.tag, origin);
    pairs.insert(pairs.end(), got.begin(), got.end());
  }
  if (a.src.empty() && a.tsv.empty()) {
    throw Error(ErrorCode::kConfig, "ingest needs --src/--tgt or --tsv");
  }
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "no sentence pairs read");
  std::set<std::string> ids;
  for (const auto& p : pairs) {
    if (!ids.insert(p.id).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate id " + p.id + " (use distinct --tag)");
    }
  }
  std::vector<json> lines;
  for (const auto& p : pairs) lines.push_back(to_json(p));
  const auto path = art.write(a.name + ".jsonl", dump_jsonl(lines));
  std::cerr << "ingested " << pairs.size() << " pairs -> " << path.string() << "\n";
  return 0;
}

int cmd_filter(const Args& a, Artifacts& art) {
  require(a.corpus, "--corpus");
  art.input(a.corpus);
  const auto pairs = read_corpus(a.corpus);
  const auto result = filter_pairs(pairs, {a.max_tokens, a.max_ratio});
  std::vector<json> kept;
  for (const auto& p : result.kept) kept.push_back(to_json(p));
  std::string removed;
  for (const auto& r : result.removed) {
    removed += json{{"id", r.pair.id}, {"reason", to_string(r.reason)}}.dump() + "\n";
  }
  json stats;
  stats["total"] = pairs.size();
  stats["kept"] = result.kept.size();
  json by_reason = json::object();
  for (const auto& [reason, n] : result.removed_count) {
    by_reason[std::string(to_string(reason))] = n;
  }
  stats["removed"] = by_reason;
  stats["max_tokens"] = a.max_tokens;
  stats["max_ratio"] = a.max_ratio;
  art.write("filtered.jsonl", dump_jsonl(kept));
  art.write("filter_removed.jsonl", removed);
  art.write("filter_stats.json", stats.dump(2) + "\n");
  std::cerr << "kept " << result.kept.size() << " of " << pairs.size() << "\n";
  return 0;
}

int cmd_generate(const Args& a, Artifacts& art) {
  require(a.corpus, "--corpus");
  art.input(a.corpus);
  art.input(a.resources);
  const auto res = load_resources(a);
  const auto pairs = read_corpus(a.corpus);
  BuildOptions opts;
  opts.clause_index = a.clause_index;
  json stats = json::object();
  for (const auto type : selected_types(a)) {
    const auto result = build_testset(pairs, type, a.seed, res, opts);
    const std::string t(to_string(type));
    art.write("testset." + t + ".jsonl", testset_jsonl(result.pairs));
    art.write("skipped." + t + ".jsonl", skipped_jsonl(result.skipped));
    json by_reason = json::object();
    for (const auto& s : result.skipped) {
      const std::string r(to_string(s.reason));
      by_reason[r] = by_reason.value(r, 0) + 1;
    }
    stats[t] = {{"pairs", result.pairs.size()},
                {"skipped", result.skipped.size()},
                {"skipped_by_reason", by_reason}};
    std::cerr << t << ": " << result.pairs.size() << " pairs, " << result.skipped.size()
              << " skipped\n";
  }
  art.write("generate_stats.json", stats.dump(2) + "\n");
  return 0;
}

int cmd_score(const Args& a, Artifacts& art) {
  require(a.testsets, "--testset");
  auto factories = backend_factories(a);
  const OnebestSource onebest(a.onebest, art);
  for (const auto& t : a.testsets) art.input(t);
  for (auto& f : factories) {
    const auto& ob = onebest.for_backend(f.spec().name);
    for (const auto& t : a.testsets) {
      const auto pairs = read_testset(t);
      std::vector<ScoreRequest> requests;
      for (const auto& p : pairs) {
        requests.push_back({make_request_id(p.id, "correct"), p.source,
                            tokenize(p.correct).tokens});
        requests.push_back({make_request_id(p.id, "contrastive"), p.source,
                            tokenize(p.contrastive).tokens});
        if (const auto it = ob.find(p.id); it != ob.end()) {
          requests.push_back({make_request_id(p.id, "onebest"), p.source,
                              tokenize(it->second).tokens});
        }
      }
      // one 1-best row per sentence even if several pairs share it
      std::set<std::string> seen;
      std::vector<ScoreRequest> unique;
      for (auto& r : requests) {
        if (seen.insert(r.id).second) unique.push_back(std::move(r));
      }
      const auto lps = f.for_testset(t).score_batch(unique);
      std::vector<ScoreTableRow> rows;
      for (std::size_t i = 0; i < unique.size(); ++i) {
        const auto bar = unique[i].id.rfind('|');
        rows.push_back({unique[i].id.substr(0, bar), unique[i].id.substr(bar + 1), lps[i]});
      }
      const auto rel = fs::path("scores." + sanitize_name(f.spec().name)) /
                       (fs::path(t).stem().string() + ".tsv");
      art.write(rel, format_score_table(rows));
      std::cerr << f.spec().name << ": " << rows.size() << " rows -> " << rel.string()
                << "\n";
    }
  }
  return 0;
}

int cmd_evaluate(const Args& a, Artifacts& art) {
  require(a.testsets, "--testset");
  auto factories = backend_factories(a);
  const OnebestSource onebest(a.onebest, art);
  const auto ties = tie_policy(a);
  const auto format = parse_report_format(a.format);
  for (const auto& t : a.testsets) art.input(t);

  std::vector<EvalReport> reports;
  for (const auto& t : a.testsets) {
    const auto pairs = read_testset(t);
    if (pairs.empty()) {
      std::cerr << "note: " << t << " holds no pairs; skipped\n";
      continue;
    }
    std::map<ErrorType, std::vector<MinimalPair>> by_type;
    for (const auto& p : pairs) by_type[p.error_type].push_back(p);
    for (const auto& [type, group] : by_type) {
      EvalReport report{type, testset_type_of(group), {}};
      for (auto& f : factories) {
        const auto scored = score_testset(f.for_testset(t), group,
                                          onebest.for_backend(f.spec().name),
                                          f.spec().group, ties);
        report.results.push_back(scored.result);
        const auto rel = fs::path("judgments") / sanitize_name(f.spec().name) /
                         (fs::path(t).stem().string() + "." +
                          std::string(to_string(type)) + ".jsonl");
        art.write(rel, judgments_jsonl(scored.judgments));
      }
      reports.push_back(std::move(report));
    }
  }
  if (reports.empty()) throw Error(ErrorCode::kEmptyTestset, "every test set is empty");
  art.write("report.jsonl", render_report_jsonl(reports, ties));
  const auto table = render_report(reports, format);
  art.write(format == ReportFormat::kTsv ? "report.tsv" : "report.md", table);
  std::cout << table;
  return 0;
}

int cmd_report(const Args& a, Artifacts& art) {
  require(a.inputs, "--input");
  const auto format = parse_report_format(a.format);
  std::vector<EvalReport> reports;
  for (const auto& in : a.inputs) {
    art.input(in);
    auto got = reports_from_jsonl(in);
    reports.insert(reports.end(), got.begin(), got.end());
  }
  if (reports.empty()) throw Error(ErrorCode::kEmptyInput, "no report records");
  const auto table = render_report(reports, format);
  art.write(format == ReportFormat::kTsv ? "report.tsv" : "report.md", table);
  std::cout << table;
  return 0;
}

int cmd_validate(const Args& a, Artifacts& art) {
  require(a.testsets, "--testset");
  require(a.machine, "--machine");
  require(a.store, "--store");
  art.input(a.resources);
  const auto res = load_resources(a);
  std::vector<MinimalPair> humans;
  for (const auto& t : a.testsets) {
    art.input(t);
    for (auto& p : read_testset(t)) {
      if (p.ref_origin.is_machine()) {
        throw Error(ErrorCode::kMalformedRecord,
                    t + ": " + p.id + " is not a human-reference pair");
      }
      humans.push_back(std::move(p));
    }
  }
  art.input(a.machine);
  const auto machine = read_corpus(a.machine);
  const auto outcome = validate_machine_refs(humans, machine, res);
  auto store = RecordStore::create(a.store, outcome.records);
  json stats = stats_to_json(store->stats());
  stats["records"] = store->size();
  stats["unmatched_machine_ids"] = outcome.unmatched_machine_ids;
  stats["duplicate_machine_ids"] = outcome.duplicate_machine_ids;
  art.write("validation_stats.json", stats.dump(2) + "\n");
  std::cerr << outcome.records.size() << " records -> " << a.store << ", "
            << stats["total"]["NEEDS_REVIEW"].get<std::size_t>() << " need review\n";
  return 0;
}

int cmd_build_machine_set(const Args& a, Artifacts& art) {
  require(a.store, "--store");
  art.input(a.resources);
  art.input(a.store);
  const auto res = load_resources(a);
  const auto store = RecordStore::open(a.store);
  MachineTestsetOptions opts;
  opts.allow_unresolved = a.allow_unresolved;
  opts.build.clause_index = a.clause_index;
  std::map<ErrorType, std::vector<ValidationRecord>> by_type;
  for (auto& r : store->snapshot()) by_type[r.human.error_type].push_back(std::move(r));
  std::vector<std::string> unresolved;
  for (const auto& [type, records] : by_type) {
    for (const auto& r : records) {
      if (r.status == ValidationStatus::kNeedsReview) unresolved.push_back(r.id());
    }
  }
  if (!unresolved.empty() && !a.allow_unresolved) {
    // one check over all types so nothing is written on failure
    build_machine_testset(store->snapshot(), a.seed, res, opts);
  }
  for (const auto& [type, records] : by_type) {
    const auto result = build_machine_testset(records, a.seed, res, opts);
    const std::string t(to_string(type));
    art.write("machine_testset." + t + ".jsonl", testset_jsonl(result.pairs));
    art.write("machine_skipped." + t + ".jsonl", skipped_jsonl(result.skipped));
    std::cerr << t << ": " << result.pairs.size() << " pairs\n";
  }
  return 0;
}

int cmd_serve_review(const Args& a, Artifacts&) {
  require(a.store, "--store");
  const char* secret = std::getenv("MINPAIR_REVIEW_SECRET");
  if (secret == nullptr || *secret == '\0') {
    throw Error(ErrorCode::kConfig, "MINPAIR_REVIEW_SECRET must be set");
  }
  const auto res = load_resources(a);
  auto store = RecordStore::open(a.store);
  ReviewServiceOptions opts;
  opts.secret = secret;
  if (!a.ui.empty()) opts.static_dir = fs::path(a.ui);
  ReviewService service(*store, res, opts);

  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
  const int port = service.bind(a.host, a.port);
  std::thread server([&] { service.listen(); });
  service.wait_until_ready();
  std::cerr << "review service on http://" << a.host << ":" << port << "\n";
  int sig = 0;
  sigwait(&stop_signals, &sig);
  service.stop();
  server.join();
  return 0;
}

// ---------------------------------------------------------------------------
// Config overlay

CLI::Option* find_option(CLI::App* app, const std::string& key) {
  try {
    return app->get_option("--" + key);
  } catch (const CLI::OptionNotFound&) {
    return nullptr;
  }
}

/// Applies config entries to options not given on the command line. Keys
/// belonging only to other subcommands are ignored; keys known nowhere are
/// an error.
void apply_config(CLI::App& app, CLI::App* active, const std::vector<ConfigEntry>& entries,
                  const std::string& where) {
  std::map<CLI::Option*, std::vector<std::string>> values;
  for (const auto& e : entries) {
    if (e.key == "config") {
      throw Error(ErrorCode::kConfig,
                  where + ":" + std::to_string(e.line) + ": config files do not nest");
    }
    CLI::Option* opt = active != nullptr ? find_option(active, e.key) : nullptr;
    if (opt == nullptr) opt = find_option(&app, e.key);
    if (opt == nullptr) {
      bool elsewhere = false;
      for (auto* sub : app.get_subcommands({})) elsewhere |= find_option(sub, e.key) != nullptr;
      if (!elsewhere) {
        throw Error(ErrorCode::kConfig,
                    where + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "'");
      }
      continue;
    }
    if (opt->count() > 0) continue;  // given on the command line
    values[opt].push_back(e.value);
  }
  for (auto& [opt, vals] : values) {
    if (opt->get_expected_max() <= 1 && vals.size() > 1) {
      throw Error(ErrorCode::kConfig, where + ": '" + opt->get_name() + "' set twice");
    }
    for (const auto& v : vals) opt->add_result(v);
    try {
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw Error(ErrorCode::kConfig, where + ": " + opt->get_name() + ": " + e.what());
    }
  }
}

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);
  Args a;
  CLI::App app{"Contrastive minimal-pair evaluation for machine translation", "minpair"};
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--config", a.config, "Flat key = value file; flags win");
  app.add_option("--seed", a.seed, "Seed for every random choice");
  app.add_option("--out", a.out, "Output directory");
  app.add_option("--resources", a.resources, "Rule resource directory");
  app.add_option("--format", a.format, "Report format: tsv or markdown");
  app.add_option("--error-type", a.error_types, "Error type (repeatable; default all)");
  app.add_option("--backend", a.backends, "NAME=KIND:PATH, KIND table|ngram|external");
  app.add_option("--max-tokens", a.max_tokens, "Filter: longest side in tokens");
  app.add_option("--max-ratio", a.max_ratio, "Filter: longest/shortest token ratio");
  app.add_option("--ngram-order", a.ngram_order, "n-gram backend order");
  app.add_option("--ngram-k", a.ngram_k, "n-gram add-k smoothing");
  app.add_option("--timeout-ms", a.timeout_ms, "External scorer timeout per batch");
  app.add_option("--connections", a.connections, "External scorer connections");
  app.add_option("--batch-size", a.batch_size, "External scorer requests per batch");
  app.add_option("--tie-policy", a.tie_policy, "Ties count as loss or half");

  auto* ingest = app.add_subcommand("ingest", "Read parallel text into a corpus");
  ingest->add_option("--src", a.src, "Source side, one sentence per line");
  ingest->add_option("--tgt", a.tgt, "Target side, line-aligned with --src");
  ingest->add_option("--tsv", a.tsv, "source<TAB>target file (repeatable)");
  ingest->add_option("--tag", a.tag, "Dataset tag and id prefix (default: file stem)");
  ingest->add_option("--origin", a.origin, "human or machine:<engine>");
  ingest->add_option("--name", a.name, "Output file stem");

  auto* filter = app.add_subcommand("filter", "Drop over-long and mismatched pairs");
  filter->add_option("--corpus", a.corpus, "Corpus .jsonl");

  auto* generate = app.add_subcommand("generate", "Build minimal-pair test sets");
  generate->add_option("--corpus", a.corpus, "Corpus .jsonl");
  generate->add_option("--clause-index", a.clause_index, "Delete this clause, not the last");

  auto* score = app.add_subcommand("score", "Write score tables for test sets");
  score->add_option("--testset", a.testsets, "Test set .jsonl (repeatable)");
  score->add_option("--onebest", a.onebest, "[NAME=]PATH of 1-best translations");

  auto* evaluate = app.add_subcommand("evaluate", "Accuracy and discrepancy per backend");
  evaluate->add_option("--testset", a.testsets, "Test set .jsonl (repeatable)");
  evaluate->add_option("--onebest", a.onebest, "[NAME=]PATH of 1-best translations");

  auto* validate = app.add_subcommand("validate", "Match machine references to human pairs");
  validate->add_option("--testset", a.testsets, "Human-reference test set (repeatable)");
  validate->add_option("--machine", a.machine, "Machine-translated corpus .jsonl");
  validate->add_option("--store", a.store, "Review store directory to create");

  auto* build = app.add_subcommand("build-machine-set", "Machine-reference test sets");
  build->add_option("--store", a.store, "Review store directory");
  build->add_flag("--allow-unresolved", a.allow_unresolved, "Skip pending reviews");
  build->add_option("--clause-index", a.clause_index, "Delete this clause, not the last");

  auto* report = app.add_subcommand("report", "Render report.jsonl files as a table");
  report->add_option("--input", a.inputs, "report.jsonl (repeatable)");

  auto* serve = app.add_subcommand("serve-review", "Review API for pending records");
  serve->add_option("--store", a.store, "Review store directory");
  serve->add_option("--host", a.host, "Bind address");
  serve->add_option("--port", a.port, "Port (0 picks one)");
  serve->add_option("--ui", a.ui, "Review UI bundle to serve at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: USAGE: " << one_line(e.what()) << "\n";
    return 2;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (!a.config.empty()) {
      apply_config(app, active, read_flat_config(a.config), a.config);
    }
    std::vector<std::string> args(argv, argv + argc);
    Artifacts art(active->get_name(), args, a.seed, a.out);
    if (!a.config.empty()) art.input(a.config);
    const auto& name = active->get_name();
    if (name == "ingest") return cmd_ingest(a, art);
    if (name == "filter") return cmd_filter(a, art);
    if (name == "generate") return cmd_generate(a, art);
    if (name == "score") return cmd_score(a, art);
    if (name == "evaluate") return cmd_evaluate(a, art);
    if (name == "validate") return cmd_validate(a, art);
    if (name == "build-machine-set") return cmd_build_machine_set(a, art);
    if (name == "report") return cmd_report(a, art);
    return cmd_serve_review(a, art);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: IO_ERROR: " << one_line(e.what()) << "\n";
    return 1;
  }
}
