#include <gtest/gtest.h>

#include "histkit/retry.hpp"
#include "histkit/text.hpp"

namespace histkit::text {
namespace {

TEST(Utf8, RoundTripsMixedScripts) {
  const std::string s = "Lëtzebuerg – Ελλάδα 中文 \xF0\x9F\x98\x80";
  EXPECT_EQ(encode_utf8(decode_utf8(s)), s);
  EXPECT_EQ(decode_utf8("aé中\xF0\x9F\x98\x80").size(), 4u);
}

TEST(Utf8, IllFormedBytesBecomeReplacementCharacters) {
  const auto cps = decode_utf8("a\xC3(b\xFF");
  ASSERT_EQ(cps.size(), 5u);
  EXPECT_EQ(cps[1], U'�');
  EXPECT_EQ(cps[2], U'(');
  EXPECT_EQ(cps[4], U'�');
}

TEST(AlphanumericOnly, DropsPunctuationAndSpaceKeepsLettersAndDigits) {
  EXPECT_EQ(alphanumeric_only("D'Gemeng, 1870!"), U"DGemeng1870");
  EXPECT_EQ(alphanumeric_only("Ënn vum Mount"), U"ËnnvumMount");
  EXPECT_EQ(alphanumeric_only("... --- ..."), U"");
}

TEST(AlphanumericOnly, CasefoldIsOptional) {
  EXPECT_EQ(alphanumeric_only("ÄBC", true), U"äbc");
  EXPECT_EQ(alphanumeric_only("ÄBC", false), U"ÄBC");
}

TEST(CollapseWhitespace, TrimsAndCollapsesUnicodeSpaces) {
  EXPECT_EQ(collapse_whitespace("  a \t\n b  c  "), "a b c");
  EXPECT_EQ(collapse_whitespace(""), "");
}

TEST(RetryPolicy, BackoffGrowsGeometricallyAndCaps) {
  RetryPolicy p;
  p.initial_backoff = std::chrono::milliseconds(100);
  p.backoff_multiplier = 2.0;
  p.max_backoff = std::chrono::milliseconds(350);
  EXPECT_EQ(p.backoff_before(0).count(), 0);
  EXPECT_EQ(p.backoff_before(1).count(), 100);
  EXPECT_EQ(p.backoff_before(2).count(), 200);
  EXPECT_EQ(p.backoff_before(3).count(), 350);
}

}  // namespace
}  // namespace histkit::text
