#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "finmoji/corpus.hpp"

using namespace finmoji;

namespace {

const std::string kData = FINMOJI_TEST_DATA;

Post make(std::string id, std::string body, std::optional<SentimentLabel> label = std::nullopt) {
  Post p;
  p.id = std::move(id);
  p.body = std::move(body);
  p.label = label;
  return p;
}

Corpus labeled(std::size_t bull, std::size_t bear) {
  std::vector<Post> v;
  for (std::size_t i = 0; i < bull + bear; ++i) {
    v.push_back(make("p" + std::to_string(i), "post 🚀", i < bull ? SentimentLabel::Bullish : SentimentLabel::Bearish));
  }
  return Corpus(std::move(v), "test");
}

std::set<std::string> ids(const Corpus& c) {
  std::set<std::string> s;
  for (const auto& p : c) s.insert(p.id);
  return s;
}

}  // namespace

TEST(Load, JsonlSkipsMalformed) {
  const auto r = load_posts(kData + "/posts.jsonl");
  ASSERT_EQ(r.corpus.size(), 2u);
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_EQ(r.corpus[0].id, "a1");
  EXPECT_EQ(r.corpus[1].id, "3");
  EXPECT_EQ(r.corpus[1].symbols, (std::vector<std::string>{"BTC", "ETH"}));
  EXPECT_EQ(r.corpus[1].created_at, parse_rfc3339("2021-01-05T10:00:00Z"));
}

TEST(Load, EmptyInputIsAnError) {
  std::istringstream empty;
  try {
    read_posts(empty, InputFormat::Jsonl);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("zero parseable records"), std::string::npos);
  }
}

TEST(Load, CsvFixturePreservesOrder) {
  const auto r = load_posts(kData + "/posts.csv");
  ASSERT_EQ(r.corpus.size(), 5u);
  EXPECT_EQ(r.skipped, 0u);
  const auto& c = r.corpus;
  EXPECT_EQ(c[0].id, "1");
  EXPECT_EQ(c[0].body, "$GME to the moon 🚀🚀");
  EXPECT_EQ(c[0].label, SentimentLabel::Bullish);
  EXPECT_EQ(c[1].body, "sell now, it's over 🩸");
  EXPECT_EQ(c[1].symbols, (std::vector<std::string>{"GME", "AMC"}));
  EXPECT_EQ(c[2].body, "quoted \"word\" and 💎🙌");
  EXPECT_EQ(c[2].created_at, parse_rfc3339("2021-01-05T08:15:00Z"));
  EXPECT_FALSE(c[3].label.has_value());
  EXPECT_FALSE(c[3].created_at.has_value());
  EXPECT_EQ(c[4].body, "multi\nline 📉");
}

TEST(Load, CsvRoundTrip) {
  const auto c = load_posts(kData + "/posts.csv").corpus;
  std::ostringstream out;
  write_csv(c, out);
  std::istringstream in(out.str());
  const auto again = read_posts(in, InputFormat::Csv).corpus;
  EXPECT_EQ(again.posts(), c.posts());

  std::ostringstream jl;
  write_jsonl(c, jl);
  std::istringstream jin(jl.str());
  EXPECT_EQ(read_posts(jin, InputFormat::Jsonl).corpus.posts(), c.posts());
}

TEST(Corpus, RejectsDuplicateIds) {
  EXPECT_THROW(Corpus({make("x", "a"), make("x", "b")}, "dup"), DataError);
  EXPECT_THROW(Corpus({make("", "a")}, "empty"), DataError);
}

TEST(Rfc3339, ParseAndFormat) {
  EXPECT_EQ(parse_rfc3339("1970-01-01T00:00:00Z"), 0);
  EXPECT_EQ(parse_rfc3339("1970-01-01T01:00:00+01:00"), 0);
  EXPECT_EQ(parse_rfc3339("2021-02-30T00:00:00Z"), std::nullopt);
  EXPECT_EQ(parse_rfc3339("yesterday"), std::nullopt);
  EXPECT_EQ(format_rfc3339(1609459200), "2021-01-01T00:00:00Z");
  EXPECT_EQ(utc_date(1609459200 + 86399), "2021-01-01");
}

TEST(FilterEmojiPosts, Examples) {
  const Corpus c({make("1", "buy AAPL"), make("2", "🚀"), make("3", "to the moon 🌙")}, "t");
  const auto kept = filter_emoji_posts(c);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].id, "2");
  EXPECT_EQ(kept[1].id, "3");

  EXPECT_TRUE(filter_emoji_posts(Corpus({make("1", "text only")}, "t")).empty());
  const Corpus zwj({make("1", "👩‍🚀")}, "t");
  EXPECT_EQ(filter_emoji_posts(zwj, TokenizerMode::PaperRegex).size(), 1u);
  EXPECT_EQ(filter_emoji_posts(zwj, TokenizerMode::GraphemeEmoji).size(), 1u);
}

TEST(FilterLabeled, Examples) {
  std::vector<Post> v;
  for (int i = 0; i < 8; ++i) {
    v.push_back(make(std::to_string(i), "x", i < 5 ? std::optional(SentimentLabel::Bearish) : std::nullopt));
  }
  EXPECT_EQ(filter_labeled(Corpus(v, "t")).size(), 5u);
  EXPECT_TRUE(filter_labeled(Corpus({make("1", "x")}, "t")).empty());
  const auto all = labeled(3, 2);
  EXPECT_EQ(filter_labeled(all).posts(), all.posts());
}

TEST(Balance, UndersamplesMajority) {
  // An 85/15 bullish-heavy split, the imbalance pattern reported for the
  // original data.
  const auto c = labeled(85, 15);
  const auto b = balance_undersample(c, 42);
  const auto n = count_labels(b);
  EXPECT_EQ(n.bullish, 15u);
  EXPECT_EQ(n.bearish, 15u);
  EXPECT_EQ(balance_undersample(c, 42).posts(), b.posts());

  const auto even = labeled(10, 10);
  EXPECT_EQ(balance_undersample(even, 1).posts(), even.posts());
  EXPECT_THROW(balance_undersample(labeled(5, 0), 1), DataError);
}

TEST(Split, SizesAndDisjointness) {
  const auto c = labeled(50, 50);
  const auto s = split(c, 0.2, 7);
  EXPECT_EQ(s.train.size(), 80u);
  EXPECT_EQ(s.test.size(), 20u);
  const auto tr = ids(s.train), te = ids(s.test);
  for (const auto& id : te) EXPECT_FALSE(tr.count(id));
  EXPECT_EQ(tr.size() + te.size(), c.size());

  const auto n = count_labels(s.test);
  EXPECT_LE(std::max(n.bullish, n.bearish) - std::min(n.bullish, n.bearish), 1u);

  EXPECT_NE(ids(split(c, 0.2, 1).test), ids(split(c, 0.2, 2).test));
  EXPECT_THROW(split(c, 1.0, 1), std::invalid_argument);
}

TEST(Split, UnlabeledFallsBackToPlainShuffle) {
  std::vector<Post> v;
  for (int i = 0; i < 11; ++i) v.push_back(make(std::to_string(i), "x"));
  const auto s = split(Corpus(v, "t"), 0.3, 3);
  EXPECT_EQ(s.test.size(), 3u);
  EXPECT_EQ(s.train.size(), 8u);
}

TEST(DeriveVariant, Examples) {
  EXPECT_EQ(derive_variant("AAPL 🚀 moon", DataVariant::TextOnly), "AAPL moon");
  EXPECT_EQ(derive_variant("AAPL 🚀 moon", DataVariant::EmojiOnly), "🚀");
  EXPECT_EQ(derive_variant("AAPL 🚀 moon", DataVariant::TextAndEmoji), "AAPL 🚀 moon");
  EXPECT_EQ(derive_variant("🚀🚀", DataVariant::TextOnly), "");
  EXPECT_EQ(derive_variant("🚀🚀", DataVariant::EmojiOnly), "🚀 🚀");
  EXPECT_EQ(derive_variant("just words", DataVariant::EmojiOnly), "");
  EXPECT_EQ(derive_variant("just words", DataVariant::TextOnly), "just words");
}

TEST(DeriveVariant, ProjectionsPartitionTokens) {
  const std::string body = "GME 🚀🚀 squeeze!! 💎🙌 hold";
  std::multiset<std::string> whole, parts;
  for (const auto& t : tokenize(body)) whole.insert(t.text);
  for (auto v : {DataVariant::TextOnly, DataVariant::EmojiOnly}) {
    for (const auto& t : tokenize(derive_variant(body, v))) parts.insert(t.text);
  }
  EXPECT_EQ(parts, whole);
}

TEST(Variant, Names) {
  EXPECT_EQ(parse_variant("text"), DataVariant::TextOnly);
  EXPECT_EQ(parse_variant("emoji"), DataVariant::EmojiOnly);
  EXPECT_EQ(parse_variant("both"), DataVariant::TextAndEmoji);
  EXPECT_THROW(parse_variant("nope"), std::invalid_argument);
}
