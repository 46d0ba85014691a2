#include <gtest/gtest.h>

#include <random>

#include "pint/document.hpp"
#include "pint/error.hpp"
#include "pint/percent.hpp"
#include "pint/utf8.hpp"

using namespace pint;

TEST(Utf8, Validity) {
  EXPECT_TRUE(utf8::is_valid(""));
  EXPECT_TRUE(utf8::is_valid("h\xC3\xA9 \xE2\x82\xAC \xF0\x9F\x98\x80"));
  EXPECT_FALSE(utf8::is_valid("\xC3"));
  EXPECT_FALSE(utf8::is_valid("\xC0\xAF"));          // overlong
  EXPECT_FALSE(utf8::is_valid("\xED\xA0\x80"));      // surrogate
  EXPECT_FALSE(utf8::is_valid("\xF4\x90\x80\x80"));  // above U+10FFFF
}

TEST(Utf8, LengthCountsScalars) {
  EXPECT_EQ(utf8::length(""), 0u);
  EXPECT_EQ(utf8::length("abc"), 3u);
  EXPECT_EQ(utf8::length("h\xC3\xA9"), 2u);
  EXPECT_EQ(utf8::length("\xF0\x9F\x98\x80"), 1u);
  EXPECT_EQ(utf8::length("a\xFF"), 2u);
}

TEST(Utf8, EncodeDecodeRoundTrip) {
  std::mt19937 rng(1);
  for (int i = 0; i < 10000; ++i) {
    char32_t cp = rng() % 0x110000;
    if (cp >= 0xD800 && cp <= 0xDFFF) continue;
    const auto s = utf8::encode(cp);
    std::size_t pos = 0;
    EXPECT_EQ(utf8::next(s, pos), cp);
    EXPECT_EQ(pos, s.size());
    EXPECT_EQ(utf8::sequence_length(s, 0), s.size());
  }
}

TEST(Utf8, InvalidBytesYieldReplacement) {
  std::string_view s = "\xFF" "a";
  std::size_t pos = 0;
  EXPECT_EQ(utf8::next(s, pos), utf8::kReplacement);
  EXPECT_EQ(pos, 1u);
  EXPECT_EQ(utf8::next(s, pos), U'a');
}

TEST(Date, Parsing) {
  EXPECT_EQ(parse_iso_date("2022"), (Date{2022, 1, 1}));
  EXPECT_EQ(parse_iso_date("2022-03"), (Date{2022, 3, 1}));
  EXPECT_EQ(parse_iso_date("2022-03-04"), (Date{2022, 3, 4}));
  EXPECT_EQ(parse_iso_date("2022-03-04T10:00:00Z"), (Date{2022, 3, 4}));
  EXPECT_FALSE(parse_iso_date("").has_value());
  EXPECT_FALSE(parse_iso_date("2022-13").has_value());
  EXPECT_FALSE(parse_iso_date("2022-02-30").has_value());
  EXPECT_FALSE(parse_iso_date("yesterday").has_value());
  EXPECT_LT(*parse_iso_date("2021-12-31"), *parse_iso_date("2022"));
}

TEST(Document, LineRoundTrip) {
  Document d{"id-1", "web", std::string("2021-05-01"), "line one\nline \"two\" \xC3\xA9", {{"url", "http://x"}}};
  const auto line = to_line(d);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(parse_document(line), d);
  EXPECT_EQ(line.rfind(R"({"id":"id-1","source":"web","date":"2021-05-01","text":)", 0), 0u);
}

TEST(Document, MinimalRecord) {
  auto d = parse_document(R"({"id":"a","text":"hi"})");
  EXPECT_EQ(d.id, "a");
  EXPECT_EQ(d.source, "");
  EXPECT_FALSE(d.date.has_value());
  EXPECT_TRUE(d.meta.empty());
  EXPECT_EQ(parse_document(R"({"id":"a","text":"x","meta":{"k":1}})").meta.at("k"), "1");
}

TEST(Document, MalformedRecords) {
  for (const char* bad : {"", "[]", "{", R"({"text":"x"})", R"({"id":"","text":"x"})", R"({"id":"a"})",
                          R"({"id":1,"text":"x"})", R"({"id":"a","text":"x","meta":[1]})",
                          R"({"id":"a","text":"x","date":5})"}) {
    EXPECT_THROW(parse_document(bad), ParseError) << bad;
  }
  EXPECT_THROW(parse_document("{\"id\":\"a\",\"text\":\"\xFF\"}"), ParseError);
}

TEST(Percent, Rounding) {
  EXPECT_EQ(percent_hundredths(1, 3), 3333);
  EXPECT_EQ(percent_hundredths(2, 3), 6667);
  EXPECT_EQ(percent_hundredths(1, 8), 1250);
  EXPECT_EQ(percent_hundredths(1, 80000), 0);   // 0.00125 -> 0.00
  EXPECT_EQ(percent_hundredths(1, 40000), 0);   // 0.0025 -> 0.00
  EXPECT_EQ(percent_hundredths(1, 20000), 1);   // 0.005 -> 0.01, half away from zero
  EXPECT_EQ(percent_hundredths(-1, 20000), -1);
  EXPECT_EQ(percent_2dp(9859118710, 56942424790), "17.31");
  EXPECT_EQ(format_hundredths(5), "0.05");
  EXPECT_EQ(format_hundredths(-105), "-1.05");
  EXPECT_THROW(percent_hundredths(1, 0), ValidationError);
}

TEST(Percent, MatchesLongDoubleReference) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10000; ++i) {
    const std::int64_t den = 1 + static_cast<std::int64_t>(rng() % 100000000000LL);
    const std::int64_t num = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(den + 1));
    const long double exact = 10000.0L * num / den;
    EXPECT_LE(std::abs(static_cast<long double>(percent_hundredths(num, den)) - exact), 0.5L + 1e-6L);
  }
}
