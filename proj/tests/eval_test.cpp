#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "minpair/eval.hpp"
#include "ordering_suite.hpp"
#include "test_util.hpp"

using namespace minpair;
using minpair::testing::fixture;
using minpair::testing::TempDir;

namespace {

MinimalPair table3_pair(int example) {
  MinimalPair p;
  if (example == 1) {
    p.id = "t3h:1";
    p.error_type = ErrorType::kPlaceholderDing;
    p.source = "Yesterday evening, the committee wanted to vote on the appointment.";
    p.correct = "Gestern Abend wollte das Gremium über die Personalie abstimmen.";
    p.contrastive = "Gestern Abend wollte das Gremium über die Ding abstimmen.";
    p.correct_spans = p.contrastive_spans = {{7, 8}};
  } else {
    p.id = "t3h:2";
    p.error_type = ErrorType::kHypercorrectGenitive;
    p.source = "Why did Judah lose its land and temple?";
    p.correct = "Warum verlor Juda sein Land mitsamt dem Tempel?";
    p.contrastive = "Warum verlor Juda sein Land mitsamt des Tempels?";
    p.correct_spans = p.contrastive_spans = {{6, 8}};
  }
  return p;
}

const std::unordered_map<std::string, std::string> kOnebest = {
    {"t3h:1", "Gestern Abend wollte der Ausschuss über die Ernennung abstimmen."},
    {"t3h:2", "Warum hat Juda sein Land und seinen Tempel verloren?"},
};

std::vector<JudgedPair> judged(std::initializer_list<Verdict> vs) {
  std::vector<JudgedPair> out;
  for (const auto v : vs) out.push_back({"", 0, 0, v});
  return out;
}

BackendResult run(const std::string& group, double acc,
                  std::optional<double> disc = std::nullopt) {
  BackendResult b;
  b.backend = group + "/x";
  b.group = group;
  b.accuracy = acc;
  b.discrepancy = disc;
  return b;
}

}  // namespace

TEST(JudgePair, Verdicts) {
  EXPECT_EQ(judge_pair(-1.0, -2.0), Verdict::kCorrectPreferred);
  EXPECT_EQ(judge_pair(-3.61, -2.34), Verdict::kContrastivePreferred);
  EXPECT_EQ(judge_pair(-1.0, -1.0), Verdict::kTie);
  EXPECT_THROW(judge_pair(NAN, -1.0), Error);
  EXPECT_THROW(judge_pair(-1.0, -INFINITY), Error);
}

TEST(JudgePair, SwapSymmetry) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> d(-20, 0);
  for (int i = 0; i < 500; ++i) {
    const double a = d(rng) / 4.0;
    const double b = d(rng) / 4.0;
    const auto v = judge_pair(a, b);
    const auto w = judge_pair(b, a);
    if (v == Verdict::kTie) {
      EXPECT_EQ(w, Verdict::kTie);
    } else {
      EXPECT_NE(v, w);
      EXPECT_NE(w, Verdict::kTie);
    }
  }
}

TEST(Accuracy, Counts) {
  using enum Verdict;
  EXPECT_DOUBLE_EQ(accuracy(judged({kCorrectPreferred, kContrastivePreferred})), 50.0);
  EXPECT_DOUBLE_EQ(accuracy(judged({kCorrectPreferred, kCorrectPreferred})), 100.0);
  EXPECT_DOUBLE_EQ(accuracy(judged({kCorrectPreferred, kTie})), 50.0);
  EXPECT_DOUBLE_EQ(accuracy(judged({kCorrectPreferred, kTie}), TiePolicy::kHalf), 75.0);
  EXPECT_THROW(accuracy({}), Error);
}

// Shifting both scores of a pair by the same amount, or scaling both by a
// positive factor, never changes accuracy.
TEST(Accuracy, ShiftAndScaleInvariance) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> s(-10.0, 0.0);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int round = 0; round < 50; ++round) {
    std::vector<JudgedPair> a;
    std::vector<JudgedPair> b;
    for (int i = 0; i < 40; ++i) {
      const double c = s(rng);
      const double k = i % 9 == 0 ? c : s(rng);
      const double d = shift(rng);
      const double m = scale(rng);
      a.push_back(judge("p", c, k));
      b.push_back(judge("p", i % 2 ? c + d : c * m, i % 2 ? k + d : k * m));
    }
    EXPECT_DOUBLE_EQ(accuracy(a), accuracy(b));
  }
}

TEST(Discrepancy, WorkedScorePairs) {
  const auto d1 = DiscrepancyInput::of(-0.09, -3.61, -2.34);
  EXPECT_DOUBLE_EQ(d1.score_preferred, -2.34);
  EXPECT_NEAR(discrepancy(std::vector{d1}), 2.25, 1e-6);
  EXPECT_NEAR(discrepancy(std::vector{DiscrepancyInput::of(-0.11, -2.58, -2.55)}),
              2.44, 1e-6);
  EXPECT_EQ(discrepancy(std::vector{DiscrepancyInput{-1.5, -1.5},
                                    DiscrepancyInput{-0.2, -0.2}}),
            0.0);
  EXPECT_THROW(discrepancy({}), Error);
}

TEST(Discrepancy, MonotoneInPreferredScore) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> s(-10.0, 0.0);
  std::uniform_real_distribution<double> up(0.0, 2.0);
  for (int round = 0; round < 100; ++round) {
    std::vector<DiscrepancyInput> in;
    for (int i = 0; i < 10; ++i) in.push_back(DiscrepancyInput::of(s(rng), s(rng), s(rng)));
    const double before = discrepancy(in);
    in[round % 10].score_preferred += up(rng);
    EXPECT_LE(discrepancy(in), before + 1e-12);
  }
}

TEST(AggregateRuns, MeanAndSampleStd) {
  const auto s = aggregate_runs(std::vector{99.0, 99.2, 99.1});
  EXPECT_NEAR(s.mean, 99.1, 1e-9);
  EXPECT_NEAR(s.std, 0.1, 1e-9);
  const auto one = aggregate_runs(std::vector{5.0});
  EXPECT_EQ(one.mean, 5.0);
  EXPECT_EQ(one.std, 0.0);
  const auto same = aggregate_runs(std::vector{2.5, 2.5, 2.5});
  EXPECT_EQ(same.mean, 2.5);
  EXPECT_EQ(same.std, 0.0);
  EXPECT_THROW(aggregate_runs({}), Error);
}

TEST(ScoreTestset, WorkedScoreFixtures) {
  auto table = TableBackend::load("distilled/1", fixture("table3_scores.tsv"));
  for (int ex : {1, 2}) {
    const std::vector<MinimalPair> pairs = {table3_pair(ex)};
    const auto scored = score_testset(table, pairs, kOnebest, "distilled");
    ASSERT_TRUE(scored.result.discrepancy);
    EXPECT_NEAR(*scored.result.discrepancy, ex == 1 ? 2.25 : 2.44, 1e-6);
    EXPECT_EQ(scored.result.accuracy, 0.0);
    EXPECT_EQ(scored.judgments[0].judged.verdict, Verdict::kContrastivePreferred);
    // table rows suffice without the 1-best text
    const auto no_text = score_testset(table, pairs, {}, "distilled");
    EXPECT_EQ(no_text.result.discrepancy, scored.result.discrepancy);
  }
  const std::vector<MinimalPair> both = {table3_pair(1), table3_pair(2)};
  const auto scored = score_testset(table, both, kOnebest, "distilled");
  EXPECT_NEAR(*scored.result.discrepancy, (2.25 + 2.44) / 2, 1e-6);
  EXPECT_EQ(scored.result.n_pairs, 2u);
}

TEST(ScoreTestset, NgramWithoutOnebestHasNoDiscrepancy) {
  const std::vector<std::string> corpus = {kOnebest.at("t3h:1")};
  NgramBackend ng("ng", NgramModel::train(corpus, 2, 1.0));
  const std::vector<MinimalPair> pairs = {table3_pair(1)};
  const auto scored = score_testset(ng, pairs, {}, "ng");
  EXPECT_FALSE(scored.result.discrepancy);
  EXPECT_EQ(scored.result.n_onebest, 0u);
  EXPECT_THROW(score_testset(ng, {}, {}, "ng"), Error);
}

TEST(FormatCell, OneDecimal) {
  EXPECT_EQ(format_one_decimal(99.1), "99.1");
  EXPECT_EQ(format_one_decimal(0.05), "0.1");
  EXPECT_EQ(format_one_decimal(0.15), "0.2");
  EXPECT_EQ(format_one_decimal(0.04), "0.0");
  EXPECT_EQ(format_one_decimal(-0.01), "0.0");
  EXPECT_EQ(format_one_decimal(2.25), "2.3");
  EXPECT_EQ(format_cell({}), "—");
  EXPECT_EQ(format_cell(std::vector{99.1}), "99.1±0.0");
  EXPECT_EQ(format_cell(std::vector{99.0, 99.2, 99.1}), "99.1±0.1");
}

TEST(RenderReport, RowOrderAndMissingGroups) {
  const std::vector<EvalReport> reports = {
      {ErrorType::kPolarityAffixDel, TestsetType::kMachine,
       {run("transformer", 96.7, 0.3), run("distilled", 93.9, 0.7)}},
      {ErrorType::kClauseOmission, TestsetType::kHuman, {run("transformer", 75.5)}},
      {ErrorType::kPolarityAffixDel, TestsetType::kHuman,
       {run("transformer", 94.0, 1.3)}},
      {ErrorType::kClauseOmission, TestsetType::kMachine,
       {run("transformer", 87.7, 0.3)}},
  };
  EXPECT_EQ(render_report(reports, ReportFormat::kTsv),
            "error_type\ttestset_type\tdiscrepancy transformer\tdiscrepancy "
            "distilled\taccuracy transformer\taccuracy distilled\n"
            "clause_omission\thuman references\t—\t—\t75.5±0.0\t—\n"
            "clause_omission\tmachine references\t0.3±0.0\t—\t87.7±0.0\t—\n"
            "polarity_affix_del\thuman references\t1.3±0.0\t—\t94.0±0.0\t—\n"
            "polarity_affix_del\tmachine references\t0.3±0.0\t0.7±0.0\t96.7±0.0\t"
            "93.9±0.0\n");
}

TEST(RenderReport, AggregatesRunsWithinGroup) {
  const std::vector<EvalReport> reports = {
      {ErrorType::kPlaceholderDing, TestsetType::kHuman,
       {run("transformer", 99.0, 1.2), run("transformer", 99.2, 1.2),
        run("transformer", 99.1, 1.2)}},
  };
  EXPECT_EQ(render_report(reports, ReportFormat::kMarkdown),
            "| error_type | testset_type | discrepancy transformer | accuracy "
            "transformer |\n"
            "| --- | --- | ---: | ---: |\n"
            "| placeholder_ding | human references | 1.2±0.0 | 99.1±0.1 |\n");
}

TEST(RenderReport, CompanionJsonlRoundTrip) {
  TempDir dir;
  const std::vector<EvalReport> reports = {
      {ErrorType::kNpAgreement, TestsetType::kMachine, {run("d", 100.0, 0.15)}},
      {ErrorType::kNpAgreement, TestsetType::kHuman, {run("d", 99.7, 0.84)}},
  };
  const auto path = dir.write("r.jsonl", render_report_jsonl(reports, TiePolicy::kLoss));
  const auto back = reports_from_jsonl(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].testset_type, TestsetType::kHuman);
  EXPECT_EQ(render_report(back, ReportFormat::kTsv),
            render_report(reports, ReportFormat::kTsv));
}

TEST(OrderingProperty, MachineReferencesNarrowTheGap) {
  const auto suite = minpair::testing::make_ordering_suite(60, 3);
  NgramBackend ng("ng", NgramModel::train(suite.training, 3, 0.1));
  const auto& res = minpair::testing::default_resources();
  for (const auto type : kAllErrorTypes) {
    const auto human = build_testset(suite.human_refs, type, 1, res);
    const auto machine = build_testset(suite.machine_refs, type, 1, res);
    ASSERT_EQ(human.pairs.size(), 60u) << to_string(type);
    ASSERT_EQ(machine.pairs.size(), 60u) << to_string(type);
    const auto dh = score_testset(ng, human.pairs, suite.onebest, "ng").result.discrepancy;
    const auto dm = score_testset(ng, machine.pairs, suite.onebest, "ng").result.discrepancy;
    EXPECT_LT(*dm, *dh) << to_string(type);
    EXPECT_GT(*dm, 0.0) << to_string(type);
  }
}
