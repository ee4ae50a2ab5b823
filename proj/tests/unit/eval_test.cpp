#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "json.hpp"
#include "histkit/embed/matrix.hpp"
#include "histkit/error.hpp"
#include "histkit/eval/bitext.hpp"
#include "histkit/eval/modern_tasks.hpp"
#include "histkit/eval/report.hpp"
#include "histkit/translate/sentence_pair.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

namespace histkit::eval {
namespace {

using embed::EmbeddingMatrix;

EmbeddingMatrix matrix_of(const std::vector<std::string>& ids, const std::vector<std::vector<float>>& rows) {
  std::vector<float> data;
  for (const auto& r : rows) data.insert(data.end(), r.begin(), r.end());
  return EmbeddingMatrix(rows.empty() ? 1 : rows[0].size(), ids, data);
}

BitextTask identity_task(std::size_t n) {
  BitextTask t;
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = "p" + std::to_string(i);
    t.queries.push_back({id, "q" + std::to_string(i)});
    t.candidates.push_back({id, "c" + std::to_string(i)});
    t.gold.push_back(i);
  }
  t.excluded.assign(n, {});
  t.excluded_reverse.assign(n, {});
  return t;
}

translate::SentencePair sp(const std::string& lb, const std::string& tgt, int index) {
  return {lb, tgt, "de", "art", index};
}

std::vector<float> onehot(std::size_t n, std::size_t i) {
  std::vector<float> v(n, 0.0f);
  v[i] = 1.0f;
  return v;
}

TEST(BuildTask, DistinctSentencesHaveNoExclusions) {
  const std::vector<translate::SentencePair> pairs{sp("Den Hond bellt.", "Der Hund bellt.", 0),
                                                    sp("Et reent haut.", "Es regnet heute.", 1),
                                                    sp("Mir ginn an d'Stad.", "Wir gehen in die Stadt.", 2)};
  const auto t = build_bitext_task(pairs);
  EXPECT_EQ(t.n_excluded_pairs(), 0u);
  EXPECT_EQ(t.queries[1].id, "art:1");
  EXPECT_EQ(t.candidates[2].text, "Wir gehen in die Stadt.");
  EXPECT_EQ(t.target_lang, "de");
  t.validate();
}

TEST(BuildTask, PlantedDuplicateIsExcludedBothWays) {
  // Candidate 2 repeats query 0's text verbatim.
  const std::vector<translate::SentencePair> pairs{sp("Gudde Moien Lëtzebuerg", "Guten Morgen", 0),
                                                    sp("Eppes ganz anescht", "Etwas anderes", 1),
                                                    sp("Drëtte Saz", "Gudde Moien Lëtzebuerg!", 2)};
  const auto t = build_bitext_task(pairs);
  EXPECT_EQ(t.excluded[0], std::vector<std::size_t>{2});
  EXPECT_TRUE(t.excluded[1].empty());
  EXPECT_EQ(t.excluded_reverse[2], std::vector<std::size_t>{0});
  EXPECT_EQ(t.n_excluded_pairs(), 1u);
}

TEST(BuildTask, ThresholdAboveOneExcludesNothing) {
  const std::vector<translate::SentencePair> pairs{sp("same", "same", 0), sp("same", "same", 1), sp("x", "same", 2)};
  BuildTaskOptions o;
  o.threshold = 1.01;
  EXPECT_EQ(build_bitext_task(pairs, o).n_excluded_pairs(), 0u);
  o.threshold = 0.85;
  EXPECT_GT(build_bitext_task(pairs, o).n_excluded_pairs(), 0u);
}

TEST(BuildTask, FilterBoundary) {
  // 10 letters, 3 substitutions: similarity 0.7, kept.
  const std::vector<translate::SentencePair> keep{sp("abcdefghij", "x1", 0), sp("y", "abcdefgXYZ", 1)};
  EXPECT_EQ(build_bitext_task(keep).n_excluded_pairs(), 0u);
  // Punctuation-only difference: similarity 1.0, excluded.
  const std::vector<translate::SentencePair> dup{sp("Hien ass do.", "x1", 0), sp("y", "Hien, ass do!", 1)};
  EXPECT_EQ(build_bitext_task(dup).excluded[0], std::vector<std::size_t>{1});
}

TEST(BuildTask, CasefoldWidensTheFilter) {
  const std::vector<translate::SentencePair> pairs{sp("GROSS", "a", 0), sp("b", "gross", 1)};
  BuildTaskOptions o;
  EXPECT_EQ(build_bitext_task(pairs, o).n_excluded_pairs(), 0u);
  o.casefold = true;
  EXPECT_EQ(build_bitext_task(pairs, o).n_excluded_pairs(), 1u);
}

TEST(BuildTask, DuplicatePairIdsThrow) {
  const std::vector<translate::SentencePair> pairs{sp("a", "b", 0), sp("c", "d", 0)};
  EXPECT_THROW(build_bitext_task(pairs), Error);
}

TEST(BuildTask, ThreadCountDoesNotChangeTheResult) {
  std::mt19937_64 rng(8);
  std::vector<translate::SentencePair> pairs;
  for (int i = 0; i < 120; ++i) {
    std::string lb, tgt;
    for (int k = 0; k < 6; ++k) lb.push_back(static_cast<char>('a' + rng() % 3));
    for (int k = 0; k < 6; ++k) tgt.push_back(static_cast<char>('a' + rng() % 3));
    pairs.push_back(sp(lb, tgt, i));
  }
  BuildTaskOptions one, four;
  four.threads = 4;
  EXPECT_EQ(build_bitext_task(pairs, one), build_bitext_task(pairs, four));
}

TEST(TaskJson, RoundTrip) {
  const std::vector<translate::SentencePair> pairs{sp("Moien \"du\"", "Hallo", 0), sp("Moien du", "Moien du!", 1),
                                                    sp("Äddi", "Tschüss", 2)};
  BuildTaskOptions o;
  o.threshold = 0.5;
  const auto t = build_bitext_task(pairs, o);
  ASSERT_GT(t.n_excluded_pairs(), 0u);
  EXPECT_EQ(task_from_json(task_to_json(t)), t);
  testing::TempDir dir;
  save_task(t, dir / "t.json");
  EXPECT_EQ(load_task(dir / "t.json"), t);
}

TEST(TaskJson, RejectsExcludedGold) {
  auto t = identity_task(3);
  t.excluded[1] = {1};
  EXPECT_THROW(t.validate(), Error);
  EXPECT_THROW(task_from_json(task_to_json(identity_task(2)).replace(0, 1, "[")), Error);
}

TEST(Bitext, MatchedOneHotsScorePerfectly) {
  const auto t = identity_task(3);
  const std::vector<std::string> ids{"p0", "p1", "p2"};
  const auto e = matrix_of(ids, {onehot(3, 0), onehot(3, 1), onehot(3, 2)});
  const auto r = bitext_accuracy(t, e, e);
  EXPECT_EQ(r.acc_src_to_tgt, 1.0);
  EXPECT_EQ(r.acc_tgt_to_src, 1.0);
  EXPECT_EQ(r.n_queries, 3u);
}

TEST(Bitext, SwappedTargetsLeaveOneThird) {
  const auto t = identity_task(3);
  const std::vector<std::string> ids{"p0", "p1", "p2"};
  const auto src = matrix_of(ids, {onehot(3, 0), onehot(3, 1), onehot(3, 2)});
  const auto tgt = matrix_of(ids, {onehot(3, 1), onehot(3, 0), onehot(3, 2)});
  const auto r = bitext_accuracy(t, src, tgt);
  EXPECT_DOUBLE_EQ(r.acc_src_to_tgt, 1.0 / 3);
  EXPECT_DOUBLE_EQ(r.acc_tgt_to_src, 1.0 / 3);
}

TEST(Bitext, TieWithDistractorIsAMiss) {
  const auto t = identity_task(2);
  const std::vector<std::string> ids{"p0", "p1"};
  const auto src = matrix_of(ids, {{1, 0}, {0, 1}});
  const auto tgt = matrix_of(ids, {{1, 1}, {0, 1}});
  const auto r = bitext_accuracy(t, src, tgt);
  // Query 1 sees gold cos 1 vs 0.707: hit. Query 0 sees 0.707 vs 0: hit.
  EXPECT_EQ(r.hits_src_to_tgt, 2u);
  const auto tied = matrix_of(ids, {{1, 1}, {1, 1}});
  EXPECT_EQ(bitext_accuracy(t, src, tied).hits_src_to_tgt, 0u);
}

TEST(Bitext, ExclusionRemovesTheDistractor) {
  auto t = identity_task(2);
  const std::vector<std::string> ids{"p0", "p1"};
  const auto src = matrix_of(ids, {{1, 0}, {1, 0}});
  const auto tgt = matrix_of(ids, {{1, 0}, {1, 0}});
  EXPECT_EQ(bitext_accuracy(t, src, tgt).hits_src_to_tgt, 0u);
  t.excluded = {{1}, {0}};
  t.excluded_reverse = {{1}, {0}};
  const auto r = bitext_accuracy(t, src, tgt);
  EXPECT_EQ(r.hits_src_to_tgt, 2u);
  EXPECT_EQ(r.hits_tgt_to_src, 2u);
  EXPECT_EQ(r.n_excluded_pairs, 2u);
}

TEST(Bitext, MissingEmbeddingNamesTheId) {
  const auto t = identity_task(2);
  const auto e = matrix_of({"p0"}, {{1, 0}});
  try {
    bitext_accuracy(t, e, e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kNotFound);
    EXPECT_NE(std::string(err.what()).find("p1"), std::string::npos);
  }
}

TEST(Bitext, AgreesWithRivalCountingOracle) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t n = 80, dim = 6;
  for (int round = 0; round < 5; ++round) {
    auto t = identity_task(n);
    std::vector<std::vector<float>> src, tgt;
    for (std::size_t i = 0; i < n; ++i) {
      auto s = testing::random_unit(rng, dim);
      std::vector<float> c(dim);
      for (std::size_t d = 0; d < dim; ++d) c[d] = static_cast<float>(s[d] + 0.6 * g(rng));
      src.push_back(s);
      tgt.push_back(c);
    }
    // Exact copies make ties.
    tgt[5] = tgt[6];
    src[10] = src[11];
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    if (round % 2 == 1) {
      for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < 3; ++k) {
          const std::size_t j = pick(rng);
          if (j == i) continue;
          t.excluded[i].push_back(j);
          t.excluded_reverse[j].push_back(i);
        }
      }
      for (auto* lists : {&t.excluded, &t.excluded_reverse}) {
        for (auto& l : *lists) {
          std::sort(l.begin(), l.end());
          l.erase(std::unique(l.begin(), l.end()), l.end());
        }
      }
    }
    std::vector<std::string> ids;
    for (const auto& q : t.queries) ids.push_back(q.id);
    const auto want = testing::oracle_bitext(src, tgt, t.excluded, t.excluded_reverse);
    for (unsigned threads : {1u, 3u}) {
      const auto got = bitext_accuracy(t, matrix_of(ids, src), matrix_of(ids, tgt), threads);
      EXPECT_EQ(got.hits_src_to_tgt, want.hits_fwd) << "round " << round;
      EXPECT_EQ(got.hits_tgt_to_src, want.hits_rev) << "round " << round;
      EXPECT_DOUBLE_EQ(got.acc_src_to_tgt, static_cast<double>(want.hits_fwd) / n);
    }
  }
}

Embedder table_embedder(std::map<std::string, std::vector<float>> table) {
  return [table = std::move(table)](const std::vector<std::string>& texts) {
    std::vector<std::vector<float>> out;
    for (const auto& t : texts) out.push_back(table.at(t));
    return out;
  };
}

TEST(Triplets, StrictInequality) {
  const auto emb = table_embedder({{"a", {1, 0}}, {"b", {0, 1}}, {"c", {1, 1}}});
  const std::vector<Triplet> same{{"a", "a", "b"}};
  EXPECT_EQ(triplet_accuracy(same, emb), 1.0);
  const std::vector<Triplet> tie{{"a", "c", "c"}};
  EXPECT_EQ(triplet_accuracy(tie, emb), 0.0);
  EXPECT_EQ(triplet_accuracy(std::vector<Triplet>{}, emb), 0.0);
}

TEST(Triplets, PlantedThreeOfFour) {
  const auto emb = table_embedder({{"x", {1, 0}}, {"near", {0.9f, 0.1f}}, {"far", {0, 1}}, {"mid", {1, 1}}});
  const std::vector<Triplet> t{{"x", "near", "far"}, {"x", "mid", "far"}, {"x", "near", "mid"}, {"x", "far", "near"}};
  EXPECT_DOUBLE_EQ(triplet_accuracy(t, emb), 0.75);
}

TEST(ZeroShot, PicksTheMatchingTemplate) {
  const auto emb = table_embedder({{"The topic of the news is sports", {1, 0, 0}},
                                   {"The topic of the news is politics", {0, 1, 0}},
                                   {"goal scored", {1, 0, 0}},
                                   {"vote held", {0.1f, 0.9f, 0}}});
  const std::vector<std::string> labels{"sports", "politics"};
  const std::vector<LabeledText> texts{{"goal scored", "sports"}, {"vote held", "sports"}};
  const auto r = zero_shot_classify(texts, labels, kDefaultTopicTemplate, emb);
  EXPECT_EQ(r.predictions, (std::vector<std::size_t>{0, 1}));
  EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
}

TEST(ZeroShot, TiesGoToTheLowerLabel) {
  const auto emb = table_embedder({{"L: a", {1, 0}}, {"L: b", {1, 0}}, {"t", {1, 0}}});
  const std::vector<std::string> labels{"a", "b"};
  const std::vector<LabeledText> texts{{"t", "b"}};
  const auto r = zero_shot_classify(texts, labels, "L: {label}", emb);
  EXPECT_EQ(r.predictions[0], 0u);
  EXPECT_EQ(r.accuracy, 0.0);
}

TEST(ZeroShot, TemplateNeedsOnePlaceholder) {
  const auto emb = table_embedder({});
  const std::vector<std::string> labels{"a"};
  const std::vector<LabeledText> texts{};
  EXPECT_THROW(zero_shot_classify(texts, labels, "no slot", emb), Error);
  EXPECT_THROW(zero_shot_classify(texts, labels, "{label} {label}", emb), Error);
}

TEST(ZeroShot, UnknownGoldLabelThrows) {
  const auto emb = table_embedder({{"L a", {1, 0}}, {"t", {1, 0}}});
  const std::vector<std::string> labels{"a"};
  const std::vector<LabeledText> texts{{"t", "zzz"}};
  EXPECT_THROW(zero_shot_classify(texts, labels, "L {label}", emb), Error);
}

TEST(Report, BitextJsonCarriesConfig) {
  EvalReport r;
  r.acc_src_to_tgt = 0.5;
  r.acc_tgt_to_src = 0.25;
  r.n_queries = 4;
  r.hits_src_to_tgt = 2;
  r.hits_tgt_to_src = 1;
  ReportConfig cfg;
  cfg.task = "bitext";
  cfg.source_embeddings = "s.hxem";
  cfg.threshold = 0.85;
  const auto j = nlohmann::json::parse(bitext_report_json(r, cfg));
  EXPECT_DOUBLE_EQ(j.at("acc_avg").get<double>(), 0.375);
  EXPECT_EQ(j.at("n_queries"), 4);
  EXPECT_EQ(j.at("config").at("threshold"), 0.85);
  EXPECT_EQ(j.at("config").at("source_embeddings"), "s.hxem");

  testing::TempDir dir;
  write_report(dir / "r.json", scalar_report_json("triplet_accuracy", 0.5, 10, cfg));
  std::ifstream in(dir / "r.json");
  const auto s = nlohmann::json::parse(in);
  EXPECT_EQ(s.at("triplet_accuracy"), 0.5);
}

}  // namespace
}  // namespace histkit::eval
