#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "minpair/corpus.hpp"
#include "test_util.hpp"

using namespace minpair;
using minpair::testing::fixture;
using minpair::testing::TempDir;

namespace {

std::vector<std::string> tokens_of(const std::string& s) {
  return tokenize(s).tokens;
}

std::string words(std::size_t n, const std::string& w = "Wort") {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out += ' ';
    out += w;
  }
  return out;
}

SentencePair make(const std::string& id, const std::string& s,
                  const std::string& t) {
  return {id, s, t, Origin::human(), "test"};
}

}  // namespace

TEST(ReadParallel, PairsLinesWithPositionalIds) {
  TempDir dir;
  const auto src = dir.write("s.en", "one\ntwo\nthree\n");
  const auto tgt = dir.write("t.de", "eins\nzwei\ndrei\n");
  const auto pairs = read_parallel(src, tgt, "tag");
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(pairs[0].id, "tag:1");
  EXPECT_EQ(pairs[1].id, "tag:2");
  EXPECT_EQ(pairs[2].id, "tag:3");
  EXPECT_EQ(pairs[2].source, "three");
  EXPECT_EQ(pairs[2].target, "drei");
  EXPECT_EQ(pairs[0].origin, Origin::human());
  EXPECT_EQ(pairs[0].dataset_tag, "tag");
}

TEST(ReadParallel, LineCountMismatch) {
  TempDir dir;
  const auto src = dir.write("s.en", "one\ntwo\nthree\n");
  const auto tgt = dir.write("t.de", "eins\nzwei\n");
  try {
    read_parallel(src, tgt, "tag");
    FAIL() << "expected LineCountMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLineCountMismatch);
  }
}

TEST(ReadParallel, RejectsInvalidUtf8) {
  TempDir dir;
  const auto src = dir.write("s.en", "ok\n");
  const auto tgt = dir.write("t.de", "M\xfc" "nchen\n");  // latin-1, not UTF-8
  try {
    read_parallel(src, tgt, "tag");
    FAIL() << "expected InvalidUtf8";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidUtf8);
  }
}

TEST(ReadTsv, SplitsColumns) {
  TempDir dir;
  const auto path = dir.write("c.tsv", "Hello\tHallo\n");
  const auto pairs = read_tsv(path, "c", Origin::machine("deepl"));
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].source, "Hello");
  EXPECT_EQ(pairs[0].target, "Hallo");
  EXPECT_EQ(pairs[0].origin.to_string(), "machine:deepl");
}

TEST(ReadTsv, MalformedRowReportsLine) {
  TempDir dir;
  const auto path = dir.write("c.tsv", "Hello\tHallo\nno tab here\n");
  try {
    read_tsv(path, "c");
    FAIL() << "expected MalformedRow";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedRow);
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(Tokenize, SplitsSentencePunctuation) {
  EXPECT_EQ(tokens_of("Die Sonden werden unerwartet schneller oder langsamer."),
            (std::vector<std::string>{"Die", "Sonden", "werden", "unerwartet",
                                      "schneller", "oder", "langsamer", "."}));
  EXPECT_EQ(tokens_of("gegen Geschäftsschluss ins Minus."),
            (std::vector<std::string>{"gegen", "Geschäftsschluss", "ins",
                                      "Minus", "."}));
}

TEST(Tokenize, KeepsHyphensAndInnerPunctuation) {
  EXPECT_EQ(tokens_of("Das Reform-Paket (3,5 Mrd.) scheiterte."),
            (std::vector<std::string>{"Das", "Reform-Paket", "(", "3,5", "Mrd",
                                      ".", ")", "scheiterte", "."}));
  EXPECT_EQ(tokens_of("Er sagte: „Ja.“"),
            (std::vector<std::string>{"Er", "sagte", ":", "„", "Ja", ".", "“"}));
  EXPECT_EQ(tokens_of("»Niemals«, sagte er."),
            (std::vector<std::string>{"»", "Niemals", "«", ",", "sagte", "er",
                                      "."}));
}

TEST(Tokenize, EmptyInput) {
  EXPECT_THROW(tokenize(""), Error);
  EXPECT_THROW(tokenize("   \t"), Error);
}

TEST(Tokenize, LosslessRoundTripOnFixtureCorpus) {
  for (const auto* name : {"news_sample.tsv", "worked_examples.tsv",
                           "table3_human.tsv", "table3_machine.tsv"}) {
    for (const auto& p : read_tsv(fixture(name), "f")) {
      for (const auto& s : {p.source, p.target, "  " + p.target + "\t "}) {
        const auto ts = tokenize(s);
        EXPECT_EQ(detokenize(ts), s);
        ASSERT_GE(ts.size(), 1u);
        ASSERT_EQ(ts.spans.size(), ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i) {
          EXPECT_EQ(s.substr(ts.spans[i].begin, ts.spans[i].size()), ts[i]);
        }
      }
    }
  }
}

TEST(Tokenize, EraseRepairsSpacing) {
  const auto ts = tokenize("Das ist nicht gut.");
  EXPECT_EQ(detokenize(erase_tokens(ts, {2, 3})), "Das ist gut.");
  EXPECT_EQ(detokenize(erase_tokens(ts, {0, 1})), "ist nicht gut.");
  EXPECT_EQ(detokenize(erase_tokens(ts, {2, 5})), "Das ist");
  EXPECT_EQ(detokenize(erase_tokens(ts, {0, 5})), "");
  EXPECT_THROW(erase_tokens(ts, {4, 6}), Error);
}

TEST(FilterPairs, PlantedViolations) {
  std::vector<SentencePair> pairs = {
      make("long", words(251), words(200)),
      make("ratio16", words(10), words(16)),
      make("ratio15", words(10), words(15)),
      make("ratio15rev", words(15), words(10)),
      make("edge250", words(250), words(250)),
  };
  const auto r = filter_pairs(pairs);
  EXPECT_EQ(r.removed_count.at(FilterReason::kTooLong), 1u);
  EXPECT_EQ(r.removed_count.at(FilterReason::kRatio), 1u);
  ASSERT_EQ(r.removed.size(), 2u);
  EXPECT_EQ(r.removed[0].pair.id, "long");
  EXPECT_EQ(r.removed[1].pair.id, "ratio16");
  ASSERT_EQ(r.kept.size(), 3u);
  EXPECT_EQ(r.kept[0].id, "ratio15");
  EXPECT_EQ(r.kept[1].id, "ratio15rev");
  EXPECT_EQ(r.kept[2].id, "edge250");
}

TEST(FilterPairs, EmptyInput) {
  const auto r = filter_pairs({});
  EXPECT_TRUE(r.kept.empty());
  EXPECT_TRUE(r.removed.empty());
}

// Random corpora: kept and removed partition the input in order, and
// filtering the kept set again removes nothing.
TEST(FilterPairs, PartitionAndIdempotence) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<std::size_t> len(1, 300);
  for (int round = 0; round < 20; ++round) {
    std::vector<SentencePair> pairs;
    for (int i = 0; i < 50; ++i) {
      pairs.push_back(make(std::to_string(i), words(len(rng), "a"),
                           words(len(rng) / 4 + 1, "b.")));
    }
    const auto r = filter_pairs(pairs, {.max_tokens = 200, .max_ratio = 1.5});
    EXPECT_EQ(r.kept.size() + r.removed.size(), pairs.size());
    EXPECT_EQ(r.removed_count.at(FilterReason::kTooLong) +
                  r.removed_count.at(FilterReason::kRatio),
              r.removed.size());
    std::size_t k = 0;
    std::size_t d = 0;
    for (const auto& p : pairs) {
      if (k < r.kept.size() && r.kept[k].id == p.id) {
        ++k;
      } else {
        ASSERT_LT(d, r.removed.size());
        EXPECT_EQ(r.removed[d].pair.id, p.id);
        ++d;
      }
    }
    const auto again = filter_pairs(r.kept, {.max_tokens = 200, .max_ratio = 1.5});
    EXPECT_TRUE(again.removed.empty());
    EXPECT_EQ(again.kept, r.kept);
  }
}

TEST(CorpusFile, JsonlFieldsAndRoundTrip) {
  TempDir dir;
  const auto pairs = read_tsv(fixture("news_sample.tsv"), "news");
  write_corpus(dir / "c.jsonl", pairs);
  const auto first = read_jsonl(dir / "c.jsonl").front();
  std::vector<std::string> keys;
  for (const auto& [k, v] : first.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"id", "source", "target", "origin",
                                            "dataset_tag"}));
  EXPECT_EQ(read_corpus(dir / "c.jsonl"), pairs);
}

TEST(CorpusFile, DuplicateIdRejected) {
  TempDir dir;
  const std::string rec =
      R"({"id":"a","source":"x","target":"y","origin":"human","dataset_tag":"t"})";
  const auto path = dir.write("c.jsonl", rec + "\n" + rec + "\n");
  try {
    read_corpus(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateId);
  }
}
