#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include "histkit/corpus/article.hpp"
#include "histkit/error.hpp"
#include "histkit/translate/chat_client.hpp"
#include "histkit/translate/fidelity.hpp"
#include "histkit/translate/pipeline.hpp"
#include "histkit/translate/prompt.hpp"
#include "histkit/translate/response.hpp"
#include "histkit/translate/sentence_pair.hpp"
#include "mock_llm.hpp"
#include "temp_dir.hpp"

namespace histkit::translate {
namespace {

namespace fs = std::filesystem;

corpus::Article article(const std::string& id, std::vector<std::string> sentences) {
  return {id, "Wort", 1880, "lb", std::move(sentences), std::nullopt};
}

SentencePair pair(const std::string& article_id, int index, const std::string& lb, const std::string& lang = "de",
                  const std::string& tgt = "x") {
  return {lb, tgt, lang, article_id, index};
}

RetryPolicy fast_retry(int retries) {
  RetryPolicy p;
  p.retries = retries;
  p.initial_backoff = std::chrono::milliseconds(1);
  p.max_backoff = std::chrono::milliseconds(2);
  return p;
}

TEST(Prompt, CarriesTheLanguageKeysInTheSchema) {
  const auto de = build_prompt("de");
  EXPECT_NE(de.find(R"("lb": "lb_sent1", "de": "de_sent1")"), std::string::npos);
  EXPECT_NE(de.find("modern Standard German"), std::string::npos);
  EXPECT_EQ(de.find("{code}"), std::string::npos);
  EXPECT_EQ(de.find("{language}"), std::string::npos);

  const auto fr = build_prompt("fr");
  EXPECT_NE(fr.find(R"("lb": "lb_sent3", "fr": "fr_sent3")"), std::string::npos);
  EXPECT_NE(fr.find("modern Standard French"), std::string::npos);
  EXPECT_EQ(fr.find("\"de\""), std::string::npos);
}

TEST(Prompt, RejectsUnsupportedLanguage) {
  try {
    build_prompt("xx");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  EXPECT_FALSE(is_supported_language("lb"));
}

TEST(Response, ParsesPairsInOrder) {
  const auto pairs = parse_translation_response(R"({"translation":[{"lb":"a","de":"b"},{"lb":"c","de":"d"}]})", "de", "art");
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0], (SentencePair{"a", "b", "de", "art", 0}));
  EXPECT_EQ(pairs[1].index, 1);
  EXPECT_TRUE(parse_translation_response(R"({"translation":[]})", "de").empty());
}

TEST(Response, AcceptsACodeFence) {
  const auto pairs = parse_translation_response("```json\n{\"translation\":[{\"lb\":\"a\",\"fr\":\"b\"}]}\n```", "fr");
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].target_text, "b");
}

std::optional<std::size_t> failing_item(const std::string& body, const std::string& lang = "de") {
  try {
    parse_translation_response(body, lang);
  } catch (const ResponseParseError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    return e.item_index();
  }
  ADD_FAILURE() << "accepted: " << body;
  return 12345;
}

TEST(Response, MalformedItemsNameTheirIndex) {
  EXPECT_EQ(failing_item(R"({"translation":[{"lb":"a"}]})"), 0u);
  EXPECT_EQ(failing_item(R"({"translation":[{"lb":"a","de":"b"},{"lb":"","de":"b"}]})"), 1u);
  EXPECT_EQ(failing_item(R"({"translation":[{"lb":"a","de":"b","en":"c"}]})"), 0u);
  EXPECT_EQ(failing_item(R"({"translation":[{"lb":"a","fr":"b"}]})"), 0u);
  EXPECT_EQ(failing_item(R"({"translation":[{"lb":"a","de":7}]})"), 0u);
  EXPECT_EQ(failing_item(R"({"translation":{"lb":"a"}})"), std::nullopt);
  EXPECT_EQ(failing_item("not json at all"), std::nullopt);
}

TEST(Response, SerializeRoundTrips) {
  std::vector<SentencePair> pairs{{"Ëmmer.", "Immer.", "de", "a", 0}, {"Zwee \"Wierder\".", "Zwei.", "de", "a", 1}};
  EXPECT_EQ(parse_translation_response(serialize_translation_response(pairs, "de"), "de", "a"), pairs);
}

TEST(SentencePairs, JsonlRoundTrip) {
  std::vector<SentencePair> pairs{{"a", "b", "fr", "x1", 3}, {"c", "d", "fr", "x2", 0}};
  std::stringstream ss;
  write_pairs(ss, pairs);
  EXPECT_EQ(read_pairs(ss), pairs);
  EXPECT_EQ(pair_id(pairs[0]), "x1:3");
}

TEST(Fidelity, AllSubstringsGiveZeroRate) {
  const auto a = article("a", {"Eng Saach.", "Nach eng Saach."});
  const std::vector<SentencePair> pairs{pair("a", 0, "Eng Saach."), pair("a", 1, "Nach eng Saach.")};
  const auto r = validate_fidelity(pairs, a);
  EXPECT_EQ(r.total, 2u);
  EXPECT_EQ(r.mismatch_rate(), 0.0);
}

TEST(Fidelity, OneAlteredSentenceInFifty) {
  std::vector<std::string> sentences;
  std::vector<SentencePair> pairs;
  for (int i = 0; i < 50; ++i) {
    sentences.push_back("Saz number " + std::to_string(i) + ".");
    pairs.push_back(pair("a", i, sentences.back()));
  }
  pairs[17].source_text = "Saz numbr 17.";
  const auto r = validate_fidelity(pairs, article("a", sentences));
  EXPECT_DOUBLE_EQ(r.mismatch_rate(), 0.02);
  ASSERT_EQ(r.mismatched.size(), 1u);
  EXPECT_EQ(r.mismatched[0].index, 17);
  EXPECT_EQ(r.mismatched[0].regenerated, "Saz numbr 17.");
}

TEST(Fidelity, WhitespaceDifferencesStillMatch) {
  const auto a = article("a", {"Den  Här   Minister", "sot nee."});
  const std::vector<SentencePair> pairs{pair("a", 0, "Den Här Minister sot  nee.")};
  EXPECT_EQ(validate_fidelity(pairs, a).mismatch_rate(), 0.0);
}

TEST(Quadruplets, IdenticalSegmentationGivesFullRate) {
  std::vector<SentencePair> de, fr, en;
  for (int i = 0; i < 3; ++i) {
    const auto s = "s" + std::to_string(i);
    de.push_back(pair("a", i, s, "de", "D" + s));
    fr.push_back(pair("a", i, s, "fr", "F" + s));
    en.push_back(pair("a", i, s, "en", "E" + s));
  }
  const auto q = align_quadruplets(de, fr, en);
  ASSERT_EQ(q.quadruplets.size(), 3u);
  EXPECT_EQ(q.quad_rate(), 1.0);
  EXPECT_EQ(q.quadruplets[1], (Quadruplet{"s1", "Ds1", "Fs1", "Es1", "a"}));
}

TEST(Quadruplets, DivergentSplitDropsTheSentence) {
  // German stops at "s2" where French and English keep "s2 s3" whole.
  std::vector<SentencePair> de{pair("a", 0, "s0", "de"), pair("a", 1, "s1", "de"), pair("a", 2, "s2", "de")};
  std::vector<SentencePair> fr{pair("a", 0, "s0", "fr"), pair("a", 1, "s1", "fr"), pair("a", 2, "s2 s3", "fr")};
  std::vector<SentencePair> en{pair("a", 0, "s0", "en"), pair("a", 1, "s1", "en"), pair("a", 2, "s2 s3", "en")};
  const auto q = align_quadruplets(de, fr, en);
  // Distinct sources: s0, s1, s2, "s2 s3".
  EXPECT_EQ(q.distinct_sources, 4u);
  EXPECT_EQ(q.quadruplets.size(), 2u);
  EXPECT_DOUBLE_EQ(q.quad_rate(), 0.5);
}

TEST(Quadruplets, EmptyLanguageGivesNothing) {
  std::vector<SentencePair> de{pair("a", 0, "s0", "de")};
  std::vector<SentencePair> fr{pair("a", 0, "s0", "fr")};
  const auto q = align_quadruplets(de, fr, {});
  EXPECT_TRUE(q.quadruplets.empty());
  EXPECT_EQ(q.quad_rate(), 0.0);
}

TEST(Quadruplets, SameTextInTwoArticlesStaysSeparate) {
  std::vector<SentencePair> de{pair("a", 0, "s", "de"), pair("b", 0, "s", "de")};
  std::vector<SentencePair> fr{pair("a", 0, "s", "fr"), pair("b", 0, "s", "fr")};
  std::vector<SentencePair> en{pair("a", 0, "s", "en")};
  const auto q = align_quadruplets(de, fr, en);
  EXPECT_EQ(q.distinct_sources, 2u);
  ASSERT_EQ(q.quadruplets.size(), 1u);
  EXPECT_EQ(q.quadruplets[0].article_id, "a");
}

TEST(Corrections, ApplyByLanguageOrToAll) {
  std::vector<SentencePair> pairs{pair("a", 0, "bad", "de"), pair("a", 1, "ok", "de"), pair("b", 0, "bad", "de")};
  const std::vector<Correction> fixes{{"a", 0, "", "good"}, {"b", 0, "fr", "other"}};
  EXPECT_EQ(apply_corrections(pairs, fixes), 1u);
  EXPECT_EQ(pairs[0].source_text, "good");
  EXPECT_EQ(pairs[2].source_text, "bad");
}

TEST(Corrections, LoadFromJsonl) {
  testing::TempDir dir;
  std::ofstream(dir / "c.jsonl") << R"({"article_id":"a","index":2,"lb":"Fix."})" << '\n'
                                 << R"({"article_id":"b","index":0,"lb":"Fix2.","lang":"en"})" << '\n';
  const auto c = load_corrections(dir / "c.jsonl");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].index, 2);
  EXPECT_EQ(c[0].lang, "");
  EXPECT_EQ(c[1].lang, "en");
}

class MockLlmTest : public ::testing::Test {
 protected:
  void SetUp() override { llm.start(); }
  void TearDown() override { llm.stop(); }

  HttpChatClient client() {
    HttpChatConfig cfg;
    cfg.url = llm.url();
    cfg.api_key = "test";
    cfg.timeout = std::chrono::seconds(10);
    return HttpChatClient(cfg);
  }

  mock::MockLlm llm;
};

TEST_F(MockLlmTest, ValidReplyParsedOnFirstTry) {
  auto c = client();
  const auto body = request_translation(article("a", {"Eent.", "Zwee."}), "de", c, fast_retry(3));
  const auto pairs = parse_translation_response(body, "de", "a");
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[1].source_text, "Zwee.");
  EXPECT_EQ(pairs[1].target_text, "[de] Zwee.");
  EXPECT_EQ(llm.requests(), 1u);
}

TEST_F(MockLlmTest, GarbageTwiceThenValid) {
  std::atomic<int> calls{0};
  llm.set_handler([&](const mock::MockRequest&) -> std::optional<mock::MockReply> {
    if (calls++ < 2) return mock::MockReply{200, "I cannot comply"};
    return std::nullopt;
  });
  auto c = client();
  const auto body = request_translation(article("a", {"Eent."}), "fr", c, fast_retry(3));
  EXPECT_EQ(parse_translation_response(body, "fr").size(), 1u);
  EXPECT_EQ(llm.requests(), 3u);
}

TEST_F(MockLlmTest, AlwaysFailingGivesUpAfterRetriesPlusOne) {
  llm.fail_next(1000);
  auto c = client();
  try {
    request_translation(article("a", {"Eent."}), "en", c, fast_retry(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTransport);
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
  EXPECT_EQ(llm.requests(), 3u);
}

TEST_F(MockLlmTest, PromptAndJoinedTextReachTheServer) {
  std::mutex mu;
  std::vector<mock::MockRequest> seen;
  llm.set_handler([&](const mock::MockRequest& r) -> std::optional<mock::MockReply> {
    std::lock_guard lock(mu);
    seen.push_back(r);
    return std::nullopt;
  });
  auto c = client();
  request_translation(article("a", {"Eent.", "Zwee."}), "de", c, fast_retry(0));
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].system_prompt, build_prompt("de"));
  EXPECT_EQ(seen[0].user_message, "Eent. Zwee.");
  EXPECT_EQ(seen[0].lang, "de");
}

TEST_F(MockLlmTest, CorpusRunWritesGroupsAndResumes) {
  testing::TempDir dir;
  const std::vector<corpus::Article> articles{article("a1", {"Eent.", "Zwee."}), article("a2", {"Dräi."})};
  TranslateConfig cfg;
  cfg.out_dir = dir.path();
  cfg.retry = fast_retry(1);
  cfg.concurrency = 2;
  auto c = client();

  const auto first = translate_corpus(articles, c, cfg);
  EXPECT_EQ(first.requests, 6u);
  EXPECT_EQ(first.groups_translated, 6u);
  EXPECT_TRUE(first.failures.empty());
  for (const auto* lang : {"de", "fr", "en"}) {
    EXPECT_TRUE(fs::exists(group_path(dir.path(), lang, "a1")));
    EXPECT_TRUE(fs::exists(group_path(dir.path(), lang, "a2")));
    EXPECT_EQ(load_pairs(dir / (std::string("lb_") + lang + ".jsonl")).size(), 3u);
  }
  ASSERT_TRUE(first.quadruplets.has_value());
  EXPECT_EQ(first.quadruplets->quad_rate(), 1.0);
  EXPECT_EQ(first.languages.at("de").fidelity.mismatch_rate(), 0.0);

  fs::remove(group_path(dir.path(), "fr", "a2"));
  llm.reset_requests();
  const auto second = translate_corpus(articles, c, cfg);
  EXPECT_EQ(second.requests, 1u);
  EXPECT_EQ(llm.requests(), 1u);
  EXPECT_EQ(second.groups_skipped, 5u);
}

TEST_F(MockLlmTest, OneFailingArticleLeavesOthersIntact) {
  llm.set_handler([](const mock::MockRequest& r) -> std::optional<mock::MockReply> {
    if (r.user_message.find("Broken") != std::string::npos) return mock::MockReply{500, ""};
    return std::nullopt;
  });
  testing::TempDir dir;
  const std::vector<corpus::Article> articles{article("ok", {"Gutt."}), article("bad", {"Broken."})};
  TranslateConfig cfg;
  cfg.out_dir = dir.path();
  cfg.langs = {"de"};
  cfg.retry = fast_retry(1);
  auto c = client();
  const auto s = translate_corpus(articles, c, cfg);
  ASSERT_EQ(s.failures.size(), 1u);
  EXPECT_EQ(s.failures[0].article_id, "bad");
  EXPECT_TRUE(fs::exists(group_path(dir.path(), "de", "ok")));
  EXPECT_FALSE(fs::exists(group_path(dir.path(), "de", "bad")));
  EXPECT_FALSE(s.quadruplets.has_value());
  std::ifstream failures(dir / "failures.jsonl");
  std::string line;
  ASSERT_TRUE(std::getline(failures, line));
  EXPECT_NE(line.find("bad"), std::string::npos);
}

TEST_F(MockLlmTest, CorrectionsFixMismatches) {
  llm.set_handler([](const mock::MockRequest& r) -> std::optional<mock::MockReply> {
    if (r.lang != "de") return std::nullopt;
    return mock::MockReply{200, R"({"translation":[{"lb":"Eent","de":"Eins"},{"lb":"Zwe.","de":"Zwei."}]})"};
  });
  testing::TempDir dir;
  std::ofstream(dir / "fix.jsonl") << R"({"article_id":"a","index":1,"lb":"Zwee.","lang":"de"})" << '\n';
  const std::vector<corpus::Article> articles{article("a", {"Eent.", "Zwee."})};
  TranslateConfig cfg;
  cfg.out_dir = dir / "out";
  cfg.langs = {"de"};
  cfg.retry = fast_retry(0);
  cfg.corrections = dir / "fix.jsonl";
  auto c = client();
  const auto s = translate_corpus(articles, c, cfg);
  const auto& de = s.languages.at("de");
  EXPECT_EQ(de.fidelity.mismatched.size(), 1u);
  EXPECT_EQ(de.corrections_applied, 1u);
  EXPECT_EQ(de.mismatches_after_corrections, 0u);
  EXPECT_EQ(load_pairs(cfg.out_dir / "lb_de.jsonl")[1].source_text, "Zwee.");
}

}  // namespace
}  // namespace histkit::translate
