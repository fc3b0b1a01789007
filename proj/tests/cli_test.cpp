#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "minpair/config.hpp"
#include "minpair/eval.hpp"
#include "minpair/perturb.hpp"
#include "test_util.hpp"

using namespace minpair;
using minpair::testing::fixture;
using minpair::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (const char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Run cli(const TempDir& dir, const std::vector<std::string>& args) {
  std::string cmd = quote(MINPAIR_CLI);
  for (const auto& a : args) cmd += " " + quote(a);
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  cmd += " >" + quote(out.string()) + " 2>" + quote(err.string());
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, text::read_file(out),
          text::read_file(err)};
}

// The Ding/mitsamt human references as a corpus plus both generated test sets.
fs::path table3_testsets(const TempDir& dir) {
  const auto out = dir / "t3";
  EXPECT_EQ(cli(dir, {"ingest", "--tsv", fixture("table3_human.tsv").string(), "--tag",
                      "t3h", "--out", out.string()})
                .status,
            0);
  EXPECT_EQ(cli(dir, {"generate", "--corpus", (out / "corpus.jsonl").string(), "--seed",
                      "4", "--error-type", "placeholder_ding", "--error-type",
                      "hypercorrect_genitive", "--out", out.string()})
                .status,
            0);
  return out;
}

}  // namespace

TEST(FlatConfig, Parses) {
  const auto entries = parse_flat_config(
      "# run\nseed = 4\n\nerror_type=placeholder_ding\n--out = \"a b\"\r\n");
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0].key, "seed");
  EXPECT_EQ(entries[0].value, "4");
  EXPECT_EQ(entries[1].key, "error-type");
  EXPECT_EQ(entries[2].key, "out");
  EXPECT_EQ(entries[2].value, "a b");
  EXPECT_EQ(entries[2].line, 5u);
  EXPECT_THROW(parse_flat_config("seed 4\n"), Error);
  EXPECT_THROW(parse_flat_config(" = 4\n"), Error);
}

TEST(Cli, GeneratePolarityExample) {
  TempDir dir;
  ASSERT_EQ(cli(dir, {"ingest", "--tsv", fixture("worked_examples.tsv").string(), "--out",
                      dir.path().string()})
                .status,
            0);
  const auto r = cli(dir, {"generate", "--corpus", (dir / "corpus.jsonl").string(),
                           "--error-type", "polarity_affix_del", "--out",
                           dir.path().string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto pairs = read_testset(dir / "testset.polarity_affix_del.jsonl");
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].correct, "Die Sonden werden unerwartet schneller oder langsamer.");
  EXPECT_EQ(pairs[0].contrastive, "Die Sonden werden erwartet schneller oder langsamer.");
  EXPECT_TRUE(fs::exists(dir / "testset.polarity_affix_del.jsonl.meta.json"));
}

TEST(Cli, GenerateIsByteIdentical) {
  TempDir dir;
  ASSERT_EQ(cli(dir, {"ingest", "--tsv", fixture("news_sample.tsv").string(), "--out",
                      dir.path().string()})
                .status,
            0);
  for (const auto* run : {"a", "b"}) {
    ASSERT_EQ(cli(dir, {"generate", "--corpus", (dir / "corpus.jsonl").string(),
                        "--seed", "11", "--out", (dir / run).string()})
                  .status,
              0);
  }
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    const auto name = e.path().filename().string();
    if (name.ends_with(".meta.json")) continue;
    EXPECT_EQ(text::read_file(e.path()), text::read_file(dir / "b" / name)) << name;
    ++compared;
  }
  EXPECT_EQ(compared, 2 * kAllErrorTypes.size() + 1);
}

TEST(Cli, EvaluateWorkedScores) {
  TempDir dir;
  const auto t3 = table3_testsets(dir);
  const auto ding = read_testset(t3 / "testset.placeholder_ding.jsonl");
  ASSERT_EQ(ding.size(), 2u);
  EXPECT_EQ(ding[0].contrastive, "Gestern Abend wollte das Gremium über die Ding abstimmen.");

  const auto out = dir / "eval";
  const auto r = cli(dir, {"evaluate", "--testset",
                           (t3 / "testset.placeholder_ding.jsonl").string(), "--testset",
                           (t3 / "testset.hypercorrect_genitive.jsonl").string(),
                           "--backend",
                           "distilled/1=table:" + fixture("table3_tables").string(),
                           "--out", out.string()});
  // the Ding set also holds t3h:2, which has no score rows
  EXPECT_EQ(r.status, 1);
  EXPECT_TRUE(r.err.starts_with("error: BACKEND_FAILURE: ")) << r.err;

  // keep only the scored pair of each set
  std::vector<MinimalPair> first = {ding[0]};
  write_testset(t3 / "testset.placeholder_ding.jsonl", first);
  const auto ok = cli(dir, {"evaluate", "--testset",
                            (t3 / "testset.placeholder_ding.jsonl").string(), "--testset",
                            (t3 / "testset.hypercorrect_genitive.jsonl").string(),
                            "--backend",
                            "distilled/1=table:" + fixture("table3_tables").string(),
                            "--out", out.string()});
  ASSERT_EQ(ok.status, 0) << ok.err;
  const auto reports = reports_from_jsonl(out / "report.jsonl");
  ASSERT_EQ(reports.size(), 2u);
  for (const auto& rep : reports) {
    const auto& b = rep.results.at(0);
    ASSERT_TRUE(b.discrepancy);
    EXPECT_NEAR(*b.discrepancy,
                rep.error_type == ErrorType::kPlaceholderDing ? 2.25 : 2.44, 1e-6);
    EXPECT_EQ(b.accuracy, 0.0);
    EXPECT_EQ(b.group, "distilled");
  }
  EXPECT_EQ(text::read_file(out / "report.tsv"), ok.out);
  EXPECT_NE(ok.out.find("placeholder_ding\thuman references\t2.3±0.0\t0.0±0.0"),
            std::string::npos)
      << ok.out;
  EXPECT_TRUE(fs::exists(out / "judgments" / "distilled_1" /
                         "testset.placeholder_ding.placeholder_ding.jsonl"));
}

TEST(Cli, ScoreTablesReproduceNgramEvaluation) {
  TempDir dir;
  const auto t3 = table3_testsets(dir);
  const auto corpus = (t3 / "corpus.jsonl").string();
  const auto set = (t3 / "testset.placeholder_ding.jsonl").string();
  ASSERT_EQ(cli(dir, {"score", "--testset", set, "--backend", "ng=ngram:" + corpus,
                      "--out", (dir / "s").string()})
                .status,
            0);
  const auto direct = cli(dir, {"evaluate", "--testset", set, "--backend",
                                "ng=ngram:" + corpus, "--out", (dir / "e1").string()});
  const auto via_table =
      cli(dir, {"evaluate", "--testset", set, "--backend",
                "ng=table:" + (dir / "s" / "scores.ng").string(), "--out",
                (dir / "e2").string()});
  ASSERT_EQ(direct.status, 0) << direct.err;
  ASSERT_EQ(via_table.status, 0) << via_table.err;
  EXPECT_EQ(text::read_file(dir / "e1" / "report.jsonl"),
            text::read_file(dir / "e2" / "report.jsonl"));
}

TEST(Cli, ReportAveragesRunsPerGroup) {
  TempDir dir;
  std::string jsonl;
  for (const double acc : {99.0, 99.2, 99.1}) {
    jsonl += json{{"error_type", "clause_omission"}, {"testset_type", "human"},
                  {"backend", "transformer/" + std::to_string(static_cast<int>(acc * 10))},
                  {"group", "transformer"}, {"n_pairs", 10}, {"accuracy", acc},
                  {"discrepancy", 1.0}}
                 .dump() +
             "\n";
  }
  dir.write("a.jsonl", jsonl);
  dir.write("b.jsonl", json{{"error_type", "clause_omission"}, {"testset_type", "machine"},
                            {"backend", "distilled/1"}, {"group", "distilled"},
                            {"n_pairs", 10}, {"accuracy", 80.0}, {"discrepancy", nullptr}}
                           .dump() +
                           "\n");
  const auto r = cli(dir, {"report", "--input", (dir / "a.jsonl").string(), "--input",
                           (dir / "b.jsonl").string(), "--format", "tsv", "--out",
                           dir.path().string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out,
            "error_type\ttestset_type\tdiscrepancy transformer\tdiscrepancy distilled\t"
            "accuracy transformer\taccuracy distilled\n"
            "clause_omission\thuman references\t1.0±0.0\t—\t99.1±0.1\t—\n"
            "clause_omission\tmachine references\t—\t—\t—\t80.0±0.0\n");
  const auto md = cli(dir, {"report", "--input", (dir / "a.jsonl").string(), "--format",
                            "markdown", "--out", dir.path().string()});
  EXPECT_TRUE(md.out.starts_with("| error_type |")) << md.out;
  EXPECT_TRUE(fs::exists(dir / "report.md"));
}

TEST(Cli, ConfigFileWithFlagOverrides) {
  TempDir dir;
  ASSERT_EQ(cli(dir, {"ingest", "--tsv", fixture("table3_human.tsv").string(), "--tag",
                      "t3h", "--out", dir.path().string()})
                .status,
            0);
  const auto cfg = dir.write("run.cfg", "# Ding only\nseed = 4\nerror_type = placeholder_ding\n"
                                        "corpus = " + (dir / "corpus.jsonl").string() +
                                            "\nout = " + (dir / "c").string() +
                                            "\nstore = ignored-by-generate\n");
  ASSERT_EQ(cli(dir, {"generate", "--config", cfg.string()}).status, 0);
  EXPECT_EQ(read_testset(dir / "c" / "testset.placeholder_ding.jsonl")[0].contrastive,
            "Gestern Abend wollte das Gremium über die Ding abstimmen.");
  EXPECT_FALSE(fs::exists(dir / "c" / "testset.clause_omission.jsonl"));

  ASSERT_EQ(cli(dir, {"generate", "--config", cfg.string(), "--seed", "5"}).status, 0);
  EXPECT_EQ(read_testset(dir / "c" / "testset.placeholder_ding.jsonl")[0].contrastive,
            "Gestern Ding wollte das Gremium über die Personalie abstimmen.");

  const auto typo = dir.write("typo.cfg", "seed = 4\nsede = 5\n");
  const auto r = cli(dir, {"generate", "--config", typo.string()});
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.err, "error: CONFIG_ERROR: " + typo.string() + ":2: unknown key 'sede'\n");
}

TEST(Cli, ErrorsAreOneLine) {
  TempDir dir;
  auto r = cli(dir, {"generate", "--corpus", (dir / "missing.jsonl").string()});
  EXPECT_EQ(r.status, 1);
  EXPECT_TRUE(r.err.starts_with("error: IO_ERROR: ")) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);

  r = cli(dir, {"generate"});
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.err, "error: CONFIG_ERROR: --corpus is required\n");

  r = cli(dir, {"generate", "--bogus"});
  EXPECT_EQ(r.status, 2);
  EXPECT_TRUE(r.err.starts_with("error: USAGE: ")) << r.err;

  r = cli(dir, {"evaluate", "--testset", "x", "--backend", "nokind"});
  EXPECT_EQ(r.status, 1);
  EXPECT_TRUE(r.err.starts_with("error: CONFIG_ERROR: ")) << r.err;

  r = cli(dir, {"serve-review", "--store", dir.path().string()});
  EXPECT_EQ(r.status, 1);
  EXPECT_TRUE(r.err.starts_with("error: CONFIG_ERROR: MINPAIR_REVIEW_SECRET")) << r.err;
}

TEST(Cli, ValidateThenBuildMachineSet) {
  TempDir dir;
  const auto t3 = table3_testsets(dir);
  ASSERT_EQ(cli(dir, {"ingest", "--tsv", fixture("table3_machine.tsv").string(), "--tag",
                      "t3m", "--origin", "machine:online", "--name", "machine", "--out",
                      dir.path().string()})
                .status,
            0);
  const auto store = (dir / "store").string();
  const auto r = cli(dir, {"validate", "--testset",
                           (t3 / "testset.placeholder_ding.jsonl").string(), "--testset",
                           (t3 / "testset.hypercorrect_genitive.jsonl").string(),
                           "--machine", (dir / "machine.jsonl").string(), "--store", store,
                           "--out", dir.path().string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto stats = json::parse(text::read_file(dir / "validation_stats.json"));
  EXPECT_EQ(stats["records"], 3);
  EXPECT_EQ(stats["by_error_type"]["hypercorrect_genitive"]["DROPPED"], 1);

  const auto b = cli(dir, {"build-machine-set", "--store", store, "--seed", "4", "--out",
                           (dir / "m").string()});
  ASSERT_EQ(b.status, 0) << b.err;
  const auto ding = read_testset(dir / "m" / "machine_testset.placeholder_ding.jsonl");
  ASSERT_FALSE(ding.empty());
  EXPECT_EQ(ding[0].id, "t3h:1");
  EXPECT_EQ(ding[0].correct, "Gestern Abend wollte der Ausschuss über die Ernennung abstimmen.");
  EXPECT_EQ(ding[0].ref_origin, Origin::machine("online"));
  EXPECT_TRUE(read_testset(dir / "m" / "machine_testset.hypercorrect_genitive.jsonl").empty());
}
